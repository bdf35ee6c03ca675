#pragma once

// Noise calibration against an epsilon-MI-DP budget (bits, base-2 logs) and
// the two release mechanisms: additive Gaussian noise on X, and a dense
// Gaussian sketch of (X, y) plus calibrated noise on the projected matrix.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "privreg/dataset.hpp"
#include "privreg/errors.hpp"

namespace privreg {

enum class Scheme { AdditiveNoise, RandomProjection };

inline const char* scheme_name(Scheme s) {
    return s == Scheme::AdditiveNoise ? "additive-noise" : "random-projection";
}

struct MechanismConfig {
    Scheme scheme = Scheme::AdditiveNoise;
    double epsilon = 1.0;                        // bits
    std::optional<Eigen::Index> n_prime;         // required for RandomProjection
    std::uint64_t seed = 0;
};

struct MechanismOutput {
    Eigen::MatrixXd X_out;   // n x d (additive) or n' x d (projection)
    Eigen::VectorXd y_out;   // y unchanged (additive) or S y (projection)
    double sigma_sq = 0.0;   // noise variance actually used
    bool sigma_sq_internal = false;  // true for projection: the release itself
                                     // does not disclose this value
    Scheme scheme = Scheme::AdditiveNoise;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
};

struct DPGuarantee {
    double epsilon_dp = 0.0;
    double delta_dp = 0.0;  // in [0, 1]
};

namespace detail {

inline void check_budget(double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw InvalidBudget("epsilon must be positive and finite, got " +
                            std::to_string(epsilon));
}

// 2^(2 eps) - 1, computed via expm1 so tiny budgets keep full precision.
inline double pow2_2eps_minus_1(double epsilon) {
    return std::expm1(2.0 * epsilon * M_LN2);
}

// Row-major standard-normal fill from a shared stream; fill order is part of
// the reproducibility contract (S before N for the projection mechanism).
inline Eigen::MatrixXd gaussian_fill(Eigen::Index rows, Eigen::Index cols,
                                     std::mt19937_64& gen) {
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n01(gen);
    return m;
}

}  // namespace detail

// sigma^2_AN = 1 / (2^(2 eps) - 1); round-trips 1/2 log2(1 + 1/sigma^2) = eps.
inline double calibrate_additive_noise(double epsilon) {
    detail::check_budget(epsilon);
    return 1.0 / detail::pow2_2eps_minus_1(epsilon);
}

// sigma^2_RP = max(0, n' / (2^(2 eps) - 1) - f^2): the projection itself
// supplies f^2 worth of interference, so the explicit noise only tops up.
inline double calibrate_projection_noise(double epsilon, Eigen::Index n_prime, double f) {
    detail::check_budget(epsilon);
    if (n_prime < 1)
        throw Error("calibrate_projection_noise: n_prime must be >= 1");
    if (f < 0.0)
        throw Error("calibrate_projection_noise: f must be nonnegative");
    return std::max(0.0, static_cast<double>(n_prime) / detail::pow2_2eps_minus_1(epsilon) -
                             f * f);
}

inline MechanismOutput apply_additive_noise(const Dataset& ds, double epsilon,
                                            std::uint64_t seed) {
    const double sigma_sq = calibrate_additive_noise(epsilon);
    std::mt19937_64 gen(seed);
    MechanismOutput out;
    out.X_out = ds.X() + std::sqrt(sigma_sq) * detail::gaussian_fill(ds.n(), ds.d(), gen);
    out.y_out = ds.y();
    out.sigma_sq = sigma_sq;
    out.sigma_sq_internal = false;
    out.scheme = Scheme::AdditiveNoise;
    out.epsilon = epsilon;
    out.seed = seed;
    return out;
}

inline MechanismOutput apply_random_projection(const Dataset& ds, double epsilon,
                                               Eigen::Index n_prime, std::uint64_t seed) {
    detail::check_budget(epsilon);
    if (n_prime >= ds.n())
        throw ProjectionTooLarge("n_prime=" + std::to_string(n_prime) +
                                 " must be < n=" + std::to_string(ds.n()));
    if (n_prime < 1)
        throw ProjectionTooLarge("n_prime must be >= 1");
    // f(X) of the true dataset; never re-estimated from the release.
    const double f = ds.leverage_floor().first;
    const double sigma_sq = calibrate_projection_noise(epsilon, n_prime, f);
    std::mt19937_64 gen(seed);
    const Eigen::MatrixXd S = detail::gaussian_fill(n_prime, ds.n(), gen);
    const Eigen::MatrixXd N = detail::gaussian_fill(n_prime, ds.d(), gen);
    MechanismOutput out;
    out.X_out = S * ds.X() + std::sqrt(sigma_sq) * N;
    out.y_out = S * ds.y();
    out.sigma_sq = sigma_sq;
    out.sigma_sq_internal = true;
    out.scheme = Scheme::RandomProjection;
    out.epsilon = epsilon;
    out.seed = seed;
    return out;
}

inline MechanismOutput apply_mechanism(const Dataset& ds, const MechanismConfig& cfg) {
    if (cfg.scheme == Scheme::AdditiveNoise)
        return apply_additive_noise(ds, cfg.epsilon, cfg.seed);
    if (!cfg.n_prime)
        throw ProjectionTooLarge("random projection requires n_prime");
    return apply_random_projection(ds, cfg.epsilon, *cfg.n_prime, cfg.seed);
}

// MI-DP to classical DP: (0, delta) with delta = min(1, sqrt(2 eps / log2 e)).
inline DPGuarantee mi_dp_to_dp(double epsilon) {
    if (epsilon < 0.0 || !std::isfinite(epsilon))
        throw InvalidBudget("epsilon must be nonnegative and finite");
    return {0.0, std::min(1.0, std::sqrt(2.0 * epsilon * M_LN2))};
}

}  // namespace privreg
