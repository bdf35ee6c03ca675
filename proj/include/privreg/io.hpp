#pragma once

// CSV in/out. Reports are UTF-8 CSV with `# key=value` metadata comment lines
// first (timestamp is the only line that varies between identical runs), then
// a header row, then data rows with doubles rendered at 17 significant digits
// so a write/parse round trip is exact. Dataset ingestion accepts RFC-4180
// style CSV with numeric features, an optional header row, an optional label
// mapping to +-1, seeded row subsampling and per-column max-abs scaling.

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "privreg/dataset.hpp"
#include "privreg/errors.hpp"
#include "privreg/experiments.hpp"

namespace privreg {

inline constexpr const char* kToolVersion = "0.1.0";

using Cell = std::variant<std::int64_t, double, std::string>;

enum class ReportFormat { Csv };

struct ReportTable {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;  // emitted in order
};

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string utc_timestamp() {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

inline std::string cell_to_string(const Cell& c) {
    if (std::holds_alternative<std::int64_t>(c)) return std::to_string(std::get<std::int64_t>(c));
    if (std::holds_alternative<double>(c)) return format_double(std::get<double>(c));
    return csv_escape(std::get<std::string>(c));
}

}  // namespace detail

inline void emit_report(const ReportTable& t, const std::string& path,
                        ReportFormat format = ReportFormat::Csv) {
    (void)format;  // csv is the only format
    for (const auto& row : t.rows)
        if (row.size() != t.header.size())
            throw IoError("emit_report: row arity " + std::to_string(row.size()) +
                          " != header arity " + std::to_string(t.header.size()));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("emit_report: cannot open '" + path + "' for writing");
    for (const auto& [k, v] : t.metadata) out << "# " << k << "=" << v << "\n";
    for (std::size_t i = 0; i < t.header.size(); ++i)
        out << (i ? "," : "") << detail::csv_escape(t.header[i]);
    out << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << detail::cell_to_string(row[i]);
        out << "\n";
    }
    if (!out) throw IoError("emit_report: write to '" + path + "' failed");
}

// Standard metadata head: tool version, timestamp, base seed, then any
// subcommand-specific config echo appended by the caller.
inline std::vector<std::pair<std::string, std::string>> standard_metadata(
    std::uint64_t base_seed) {
    return {{"tool", std::string("privreg ") + kToolVersion},
            {"timestamp", utc_timestamp()},
            {"base_seed", std::to_string(base_seed)}};
}

inline ReportTable tradeoff_table(const std::vector<TradeoffRecord>& records,
                                  std::uint64_t base_seed) {
    ReportTable t;
    t.metadata = standard_metadata(base_seed);
    t.header = {"scheme", "schedule", "epsilon",  "n",      "d",
                "n_prime", "eta_mean", "eta_std", "trials", "base_seed"};
    for (const auto& r : records) {
        std::vector<Cell> row;
        row.emplace_back(std::string(scheme_name(r.scheme)));
        row.emplace_back(r.schedule);
        row.emplace_back(r.epsilon);
        row.emplace_back(static_cast<std::int64_t>(r.n));
        row.emplace_back(static_cast<std::int64_t>(r.d));
        row.emplace_back(r.n_prime ? Cell(static_cast<std::int64_t>(*r.n_prime))
                                   : Cell(std::string()));
        row.emplace_back(r.eta_mean);
        row.emplace_back(r.eta_std);
        row.emplace_back(static_cast<std::int64_t>(r.trials));
        row.emplace_back(std::to_string(r.base_seed));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline ReportTable classification_table(const std::vector<ClassificationRecord>& records,
                                        std::uint64_t base_seed) {
    ReportTable t;
    t.metadata = standard_metadata(base_seed);
    t.header = {"scheme",     "schedule",   "epsilon",        "n",        "n_prime",
                "trial",      "test_error", "split_fraction", "base_seed"};
    for (const auto& r : records) {
        std::vector<Cell> row;
        row.emplace_back(std::string(scheme_name(r.scheme)));
        row.emplace_back(r.schedule);
        row.emplace_back(r.epsilon);
        row.emplace_back(static_cast<std::int64_t>(r.n));
        row.emplace_back(r.n_prime ? Cell(static_cast<std::int64_t>(*r.n_prime))
                                   : Cell(std::string()));
        row.emplace_back(static_cast<std::int64_t>(r.trial));
        row.emplace_back(r.test_error);
        row.emplace_back(r.split_fraction);
        row.emplace_back(std::to_string(r.base_seed));
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------
// CSV parsing

namespace detail {

// Quote-aware splitter; handles "" escapes, embedded separators/newlines and
// both LF and CRLF line ends. Returns raw string fields per row.
inline std::vector<std::vector<std::string>> parse_csv_text(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false, field_started = false;
    const auto flush_field = [&]() {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    const auto flush_row = [&]() {
        flush_field();
        if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
        row.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            flush_field();
        } else if (c == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            flush_row();
        } else {
            field += c;
            field_started = true;
        }
    }
    if (field_started || !row.empty()) flush_row();
    return rows;
}

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline bool parse_double(const std::string& raw, double& out) {
    const std::string s = trim(raw);
    if (s.empty()) return false;
    const char* begin = s.data();
    const char* end = begin + s.size();
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

inline bool is_integer_token(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

}  // namespace detail

struct CsvLoadOptions {
    // Column holding the response: a header name, or an integer token taken
    // as a 0-based index. Empty selects the last column.
    std::string label_column;
    // Raw label token -> value (normally +-1). Absent = parse numerically.
    std::optional<std::map<std::string, double>> label_map;
    std::optional<Eigen::Index> max_rows;  // seeded sample without replacement
    std::uint64_t seed = 0;
    bool scale = true;  // divide columns whose max |entry| exceeds 1
};

struct LoadedCsv {
    Dataset dataset;
    std::vector<std::string> feature_names;  // header names when present
    std::vector<double> column_scales;       // divisor applied per feature column
    std::string label_name;
    bool had_header = false;
    Eigen::Index rows_in_file = 0;  // data rows before any subsampling
};

inline LoadedCsv load_csv_dataset(const std::string& path, const CsvLoadOptions& opt = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_csv_dataset: cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    auto cells = detail::parse_csv_text(buffer.str());
    if (cells.empty()) throw ParseError("empty CSV", 1, 1);

    const std::size_t width = cells[0].size();
    for (std::size_t r = 0; r < cells.size(); ++r)
        if (cells[r].size() != width)
            throw ParseError("ragged row: expected " + std::to_string(width) + " fields, got " +
                                 std::to_string(cells[r].size()),
                             r + 1, cells[r].size());
    if (width < 2) throw ParseError("need at least one feature column plus the label", 1, 1);

    // Header heuristic: a first row that is entirely numeric is data.
    bool had_header = false;
    for (const auto& fld : cells[0]) {
        double ignored;
        if (!detail::parse_double(fld, ignored)) {
            had_header = true;
            break;
        }
    }
    std::vector<std::string> names;
    if (had_header)
        for (const auto& fld : cells[0]) names.push_back(detail::trim(fld));

    // Resolve the label column.
    std::size_t label_idx;
    const std::string want = detail::trim(opt.label_column);
    if (want.empty()) {
        label_idx = width - 1;
    } else if (detail::is_integer_token(want)) {
        const long idx = std::stol(want);
        if (idx < 0 || static_cast<std::size_t>(idx) >= width)
            throw LabelError("label column index " + want + " out of range for " +
                             std::to_string(width) + " columns");
        label_idx = static_cast<std::size_t>(idx);
    } else {
        if (!had_header)
            throw LabelError("label column '" + want + "' requested but the file has no header");
        const auto it = std::find(names.begin(), names.end(), want);
        if (it == names.end()) throw LabelError("label column '" + want + "' not found");
        label_idx = static_cast<std::size_t>(it - names.begin());
    }

    const std::size_t first_data = had_header ? 1 : 0;
    std::vector<std::size_t> keep;
    for (std::size_t r = first_data; r < cells.size(); ++r) keep.push_back(r);
    const Eigen::Index rows_in_file = static_cast<Eigen::Index>(keep.size());
    if (keep.empty()) throw ParseError("no data rows", first_data + 1, 1);

    // Seeded sample without replacement, original row order preserved.
    if (opt.max_rows && static_cast<Eigen::Index>(keep.size()) > *opt.max_rows) {
        std::mt19937_64 gen(opt.seed);
        std::shuffle(keep.begin(), keep.end(), gen);
        keep.resize(static_cast<std::size_t>(*opt.max_rows));
        std::sort(keep.begin(), keep.end());
    }

    const std::size_t n = keep.size();
    const std::size_t d = width - 1;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = keep[i];
        std::size_t out_col = 0;
        for (std::size_t c = 0; c < width; ++c) {
            const std::string& fld = cells[r][c];
            if (c == label_idx) {
                if (opt.label_map) {
                    const auto it = opt.label_map->find(detail::trim(fld));
                    if (it == opt.label_map->end())
                        throw LabelError("unmapped label '" + detail::trim(fld) + "' at row " +
                                         std::to_string(r + 1));
                    y(static_cast<Eigen::Index>(i)) = it->second;
                } else {
                    double v;
                    if (!detail::parse_double(fld, v))
                        throw ParseError("non-numeric label '" + fld + "'", r + 1, c + 1);
                    y(static_cast<Eigen::Index>(i)) = v;
                }
            } else {
                double v;
                if (!detail::parse_double(fld, v))
                    throw ParseError("non-numeric field '" + fld + "'", r + 1, c + 1);
                X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(out_col++)) = v;
            }
        }
    }

    std::vector<double> scales(d, 1.0);
    if (opt.scale) {
        for (std::size_t j = 0; j < d; ++j) {
            const double maxabs = X.col(static_cast<Eigen::Index>(j)).cwiseAbs().maxCoeff();
            if (maxabs > 1.0) {
                scales[j] = maxabs;
                X.col(static_cast<Eigen::Index>(j)) /= maxabs;
            }
        }
    }

    std::vector<std::string> feature_names;
    std::string label_name = had_header ? names[label_idx] : ("col" + std::to_string(label_idx));
    if (had_header)
        for (std::size_t c = 0; c < width; ++c)
            if (c != label_idx) feature_names.push_back(names[c]);

    return {validate_dataset(std::move(X), std::move(y)), std::move(feature_names),
            std::move(scales), std::move(label_name), had_header, rows_in_file};
}

// Parses "tok1=v1,tok2=v2" into a label map; values must be +1 or -1.
inline std::map<std::string, double> parse_label_map(const std::string& spec) {
    std::map<std::string, double> map;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw LabelError("label map entry '" + item + "' is not token=value");
        const std::string key = detail::trim(item.substr(0, eq));
        double v;
        if (!detail::parse_double(item.substr(eq + 1), v) || (v != 1.0 && v != -1.0))
            throw LabelError("label map value for '" + key + "' must be +1 or -1");
        map[key] = v;
    }
    if (map.empty()) throw LabelError("empty label map");
    return map;
}

// Reads back a report written by emit_report (used by tests and tooling).
struct ParsedReport {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline ParsedReport read_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_report: cannot open '" + path + "'");
    ParsedReport rep;
    std::string body, line;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ParseError("metadata line without '='", 1, 1);
            rep.metadata.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
        } else {
            body += line;
            body += '\n';
        }
    }
    auto cells = detail::parse_csv_text(body);
    if (cells.empty()) throw ParseError("report has no header row", 1, 1);
    rep.header = cells[0];
    rep.rows.assign(cells.begin() + 1, cells.end());
    return rep;
}

}  // namespace privreg
