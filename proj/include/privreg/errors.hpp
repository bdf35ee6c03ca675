#pragma once

#include <stdexcept>
#include <string>

namespace privreg {

// Base class so callers can catch everything from this library at once.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : Error { using Error::Error; };
struct EntryOutOfRange : Error { using Error::Error; };
struct RankDeficient : Error { using Error::Error; };
struct ZeroResidual : Error { using Error::Error; };

struct InvalidBudget : Error { using Error::Error; };
struct ProjectionTooLarge : Error { using Error::Error; };

struct ConditionViolated : Error { using Error::Error; };
struct DegenerateChannel : Error { using Error::Error; };

struct DegenerateSplit : Error { using Error::Error; };

struct ParseError : Error {
    ParseError(const std::string& what, std::size_t row, std::size_t col)
        : Error(what + " (row " + std::to_string(row) + ", column " + std::to_string(col) + ")"),
          row(row), col(col) {}
    std::size_t row;
    std::size_t col;
};
struct LabelError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace privreg
