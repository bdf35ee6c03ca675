#pragma once

// Seeded experiment harness: projection-dimension schedules, synthetic data
// generators, single trials, the two trade-off sweeps (vs n and vs epsilon)
// and the train/split binary-classification experiment.
//
// Seed derivation (the reproducibility contract):
//   trial_seed           = base_seed + trial_index
//   dataset seed         = mix_seed(trial_seed, (cell_tag << 3) | 0)
//   mechanism seed arm a = mix_seed(trial_seed, (cell_tag << 3) | (1 + a))
//   split seed           = mix_seed(trial_seed, (cell_tag << 3) | 7)
// where cell_tag is k in sweep_n, 0 in sweep_epsilon (datasets are shared
// across the epsilon grid so curves are paired) and 1 + epsilon_index for the
// epsilon-specific mechanism draws. Arms always see the same datasets and
// splits but decorrelated mechanism noise.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "privreg/dataset.hpp"
#include "privreg/errors.hpp"
#include "privreg/mechanisms.hpp"
#include "privreg/solvers.hpp"

namespace privreg {

enum class Schedule { Logarithmic, Linear, Full };

struct ScheduleKind {
    Schedule kind = Schedule::Logarithmic;
    long base = 1;  // >= 1
};

inline const char* schedule_token(Schedule s) {
    switch (s) {
        case Schedule::Logarithmic: return "log";
        case Schedule::Linear: return "linear";
        default: return "full";
    }
}

// n' as a function of the sweep index k. "log" uses the natural logarithm.
inline long projection_schedule(const ScheduleKind& s, long k) {
    if (k < 1) throw Error("projection_schedule: k must be >= 1");
    if (s.base < 1) throw Error("projection_schedule: base must be >= 1");
    const double b = static_cast<double>(s.base);
    switch (s.kind) {
        case Schedule::Logarithmic: return std::lround(b * (std::log(static_cast<double>(k)) + 1.0));
        case Schedule::Linear: return std::lround(b * (static_cast<double>(k) + 1.0) / 2.0);
        default: return s.base * k;
    }
}

// splitmix64 finalizer: cheap statistically-independent streams from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// X entries i.i.d. uniform on [-1,1] (row-major fill), then a planted linear
// model: y = X theta0 + 0.1 sqrt(d) z with theta0 uniform on [-1,1]^d and z
// standard normal. The noise scale keeps the residual ratio r(y) of order 1.
inline Dataset generate_random_dataset(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    if (n <= d) throw ShapeError("generate_random_dataset: need n > d");
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u11(-1.0, 1.0);
    Eigen::MatrixXd X(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) X(i, j) = u11(gen);
    Eigen::VectorXd theta0(d);
    for (Eigen::Index j = 0; j < d; ++j) theta0(j) = u11(gen);
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = n01(gen);
    Eigen::VectorXd y = X * theta0 + 0.1 * std::sqrt(static_cast<double>(d)) * z;
    return validate_dataset(std::move(X), std::move(y));
}

// Two-class Gaussian blobs with anti-correlated column pairs, labels +-1 in y.
// Each pair shares a high-variance factor c with opposite signs while the
// class separation rides on both columns, so per-column energy (and hence
// f(X)) stays large while the informative pair-sum direction has low
// variance -- the regime where the projection mechanism's implicit privacy
// beats explicit entrywise noising. Entries are clipped to [-1,1].
struct BlobParams {
    double separation = 0.1;  // class mean offset per column
    double factor_sd = 0.8;   // shared anti-correlated factor
    double jitter_sd = 0.2;   // independent per-column jitter
};

inline Dataset make_blob_dataset(Eigen::Index n, Eigen::Index d, std::uint64_t seed,
                                 const BlobParams& p = {}) {
    if (n <= d) throw ShapeError("make_blob_dataset: need n > d");
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = u01(gen) < 0.5 ? -1.0 : 1.0;
    Eigen::MatrixXd X(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double off = p.separation * y(i);
        Eigen::Index j = 0;
        for (; j + 1 < d; j += 2) {
            const double c = p.factor_sd * n01(gen);
            X(i, j) = c + off + p.jitter_sd * n01(gen);
            X(i, j + 1) = -c + off + p.jitter_sd * n01(gen);
        }
        if (j < d) X(i, j) = p.factor_sd * n01(gen) + off + p.jitter_sd * n01(gen);
    }
    X = X.cwiseMax(-1.0).cwiseMin(1.0);
    return validate_dataset(std::move(X), std::move(y));
}

// One mechanism application + solve, scored against the original problem.
inline double run_trial(const Dataset& ds, const MechanismConfig& cfg) {
    const MechanismOutput out = apply_mechanism(ds, cfg);
    return relative_error(ds, least_squares(out.X_out, out.y_out));
}

struct TradeoffRecord {
    Scheme scheme = Scheme::AdditiveNoise;
    std::string schedule;  // "none", "log", "linear" or "full"
    double epsilon = 0.0;
    Eigen::Index n = 0;
    Eigen::Index d = 0;
    std::optional<Eigen::Index> n_prime;  // actually used (clamped to n-1)
    double eta_mean = 0.0;
    double eta_std = 0.0;  // population std; 0 for a single trial
    int trials = 0;
    std::uint64_t base_seed = 0;
};

struct ClassificationRecord {
    Scheme scheme = Scheme::AdditiveNoise;
    std::string schedule;
    double epsilon = 0.0;
    Eigen::Index n = 0;
    std::optional<Eigen::Index> n_prime;
    int trial = 0;
    double test_error = 0.0;  // in [0,1]
    double split_fraction = 0.8;
    std::uint64_t base_seed = 0;
};

struct SweepOptions {
    std::vector<ScheduleKind> schedules;  // projection arms, in output order
    bool include_additive = true;         // the "none" arm, emitted first
    int trials = 1;
    std::uint64_t base_seed = 0;
    int threads = 0;  // 0 = PRIVREG_THREADS or hardware concurrency
};

// PRIVREG_THREADS caps worker threads; unset or invalid falls back to the
// hardware count. Results never depend on the cap (deterministic reduction).
inline int resolve_thread_cap(int requested = 0) {
    if (requested >= 1) return requested;
    if (const char* env = std::getenv("PRIVREG_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<int>(std::min(v, 256L));
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

namespace detail {

template <typename F>
inline void parallel_for(std::size_t count, int threads, F&& fn) {
    threads = static_cast<int>(std::min<std::size_t>(std::max(threads, 1), count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

// Welford; population std (a single-trial cell reports std 0).
inline MeanStd running_mean_std(const double* values, int count) {
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < count; ++i) {
        const double delta = values[i] - mean;
        mean += delta / (i + 1);
        m2 += delta * (values[i] - mean);
    }
    return {mean, count > 0 ? std::sqrt(m2 / count) : 0.0};
}

struct ArmSpec {
    std::optional<ScheduleKind> schedule;  // nullopt = additive noise
};

inline std::vector<ArmSpec> make_arms(const SweepOptions& opt) {
    std::vector<ArmSpec> arms;
    if (opt.include_additive) arms.push_back({std::nullopt});
    for (const auto& s : opt.schedules) arms.push_back({s});
    if (arms.empty()) throw Error("no arms: need additive noise or at least one schedule");
    if (arms.size() > 6) throw Error("at most 6 arms fit the seed-tag layout");
    return arms;
}

inline MechanismConfig arm_config(const ArmSpec& arm, double epsilon,
                                  std::optional<Eigen::Index> n_prime, std::uint64_t seed) {
    MechanismConfig cfg;
    cfg.scheme = arm.schedule ? Scheme::RandomProjection : Scheme::AdditiveNoise;
    cfg.epsilon = epsilon;
    cfg.n_prime = n_prime;
    cfg.seed = seed;
    return cfg;
}

}  // namespace detail

// Relative error vs dataset size: for each k in [k_min, k_max] a fresh random
// dataset of n = n_base * k rows per trial, one additive-noise row plus one
// row per schedule (n' clamped to n - 1 so the "full" schedule stays a valid
// projection). Rows are grouped by k, additive arm first.
inline std::vector<TradeoffRecord> sweep_n(Eigen::Index d, double epsilon, long k_min,
                                           long k_max, Eigen::Index n_base,
                                           const SweepOptions& opt) {
    if (k_min < 1 || k_max < k_min) throw Error("sweep_n: bad k range");
    if (opt.trials < 1) throw Error("sweep_n: trials must be >= 1");
    const auto arms = detail::make_arms(opt);
    const std::size_t n_k = static_cast<std::size_t>(k_max - k_min + 1);
    const std::size_t cells = n_k * arms.size();
    std::vector<double> etas(cells * opt.trials);

    detail::parallel_for(etas.size(), resolve_thread_cap(opt.threads), [&](std::size_t task) {
        const int trial = static_cast<int>(task % opt.trials);
        const std::size_t cell = task / opt.trials;
        const std::size_t arm_i = cell % arms.size();
        const long k = k_min + static_cast<long>(cell / arms.size());
        const std::uint64_t trial_seed = opt.base_seed + static_cast<std::uint64_t>(trial);
        const std::uint64_t tag = static_cast<std::uint64_t>(k) << 3;
        const Eigen::Index n = n_base * k;
        const Dataset ds = generate_random_dataset(n, d, mix_seed(trial_seed, tag));
        const auto& arm = arms[arm_i];
        std::optional<Eigen::Index> np;
        if (arm.schedule)
            np = std::min<Eigen::Index>(projection_schedule(*arm.schedule, k), n - 1);
        etas[task] = run_trial(
            ds, detail::arm_config(arm, epsilon, np, mix_seed(trial_seed, tag | (1 + arm_i))));
    });

    std::vector<TradeoffRecord> records;
    records.reserve(cells);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        const std::size_t arm_i = cell % arms.size();
        const long k = k_min + static_cast<long>(cell / arms.size());
        const auto& arm = arms[arm_i];
        const Eigen::Index n = n_base * k;
        TradeoffRecord rec;
        rec.scheme = arm.schedule ? Scheme::RandomProjection : Scheme::AdditiveNoise;
        rec.schedule = arm.schedule ? schedule_token(arm.schedule->kind) : "none";
        rec.epsilon = epsilon;
        rec.n = n;
        rec.d = d;
        if (arm.schedule)
            rec.n_prime = std::min<Eigen::Index>(projection_schedule(*arm.schedule, k), n - 1);
        const auto ms = detail::running_mean_std(&etas[cell * opt.trials], opt.trials);
        rec.eta_mean = ms.mean;
        rec.eta_std = ms.std;
        rec.trials = opt.trials;
        rec.base_seed = opt.base_seed;
        records.push_back(std::move(rec));
    }
    return records;
}

// Relative error vs privacy budget at fixed n: datasets are drawn once per
// trial and shared across the whole epsilon grid (paired curves). Each
// schedule's k is max(1, round(n / base)), the inverse of the full schedule,
// so "full" targets n (clamped to n - 1). Rows grouped by epsilon.
inline std::vector<TradeoffRecord> sweep_epsilon(Eigen::Index n, Eigen::Index d,
                                                 const std::vector<double>& eps_grid,
                                                 const SweepOptions& opt) {
    if (eps_grid.empty()) throw Error("sweep_epsilon: empty epsilon grid");
    if (opt.trials < 1) throw Error("sweep_epsilon: trials must be >= 1");
    const auto arms = detail::make_arms(opt);
    auto arm_n_prime = [&](const detail::ArmSpec& arm) -> std::optional<Eigen::Index> {
        if (!arm.schedule) return std::nullopt;
        const long k = std::max(1L, std::lround(static_cast<double>(n) /
                                                static_cast<double>(arm.schedule->base)));
        return std::min<Eigen::Index>(projection_schedule(*arm.schedule, k), n - 1);
    };
    const std::size_t cells = eps_grid.size() * arms.size();
    std::vector<double> etas(cells * opt.trials);

    detail::parallel_for(etas.size(), resolve_thread_cap(opt.threads), [&](std::size_t task) {
        const int trial = static_cast<int>(task % opt.trials);
        const std::size_t cell = task / opt.trials;
        const std::size_t arm_i = cell % arms.size();
        const std::size_t eps_i = cell / arms.size();
        const std::uint64_t trial_seed = opt.base_seed + static_cast<std::uint64_t>(trial);
        const Dataset ds = generate_random_dataset(n, d, mix_seed(trial_seed, 0));
        const std::uint64_t tag = (static_cast<std::uint64_t>(eps_i) + 1) << 3;
        etas[task] = run_trial(ds, detail::arm_config(arms[arm_i], eps_grid[eps_i],
                                                      arm_n_prime(arms[arm_i]),
                                                      mix_seed(trial_seed, tag | (1 + arm_i))));
    });

    std::vector<TradeoffRecord> records;
    records.reserve(cells);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        const std::size_t arm_i = cell % arms.size();
        const std::size_t eps_i = cell / arms.size();
        const auto& arm = arms[arm_i];
        TradeoffRecord rec;
        rec.scheme = arm.schedule ? Scheme::RandomProjection : Scheme::AdditiveNoise;
        rec.schedule = arm.schedule ? schedule_token(arm.schedule->kind) : "none";
        rec.epsilon = eps_grid[eps_i];
        rec.n = n;
        rec.d = d;
        rec.n_prime = arm_n_prime(arm);
        const auto ms = detail::running_mean_std(&etas[cell * opt.trials], opt.trials);
        rec.eta_mean = ms.mean;
        rec.eta_std = ms.std;
        rec.trials = opt.trials;
        rec.base_seed = opt.base_seed;
        records.push_back(std::move(rec));
    }
    return records;
}

// Binary classification with +-1 labels in y: per trial, a seeded shuffle
// splits rows into train/test (test size = round((1 - split) * n), shared
// across arms), the mechanism transforms only the training part, a linear
// model is fit on the transformed problem and scored by sign agreement on
// the untouched test rows; sign(0) counts as an error. Schedules take
// k = max(1, round(n / base)) from the FULL dataset size, with n' clamped to
// train size - 1. One record per (arm, trial).
inline std::vector<ClassificationRecord> classification_experiment(
    const Dataset& ds, double epsilon, double split_fraction, const SweepOptions& opt) {
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
        throw Error("classification_experiment: split_fraction must be in (0,1)");
    if (opt.trials < 1) throw Error("classification_experiment: trials must be >= 1");
    for (Eigen::Index i = 0; i < ds.n(); ++i)
        if (ds.y()(i) != 1.0 && ds.y()(i) != -1.0)
            throw LabelError("classification_experiment: labels must be exactly +-1, got " +
                             std::to_string(ds.y()(i)) + " at row " + std::to_string(i));

    const Eigen::Index n = ds.n(), d = ds.d();
    const Eigen::Index n_test = std::lround((1.0 - split_fraction) * static_cast<double>(n));
    const Eigen::Index n_train = n - n_test;
    if (n_train < d || n_test < d)
        throw DegenerateSplit("classification_experiment: train=" + std::to_string(n_train) +
                              ", test=" + std::to_string(n_test) + " rows, need >= d=" +
                              std::to_string(d) + " on both sides");

    const auto arms = detail::make_arms(opt);
    std::vector<ClassificationRecord> records(arms.size() *
                                              static_cast<std::size_t>(opt.trials));

    detail::parallel_for(records.size(), resolve_thread_cap(opt.threads), [&](std::size_t task) {
        const int trial = static_cast<int>(task % opt.trials);
        const std::size_t arm_i = task / opt.trials;
        const auto& arm = arms[arm_i];
        const std::uint64_t trial_seed = opt.base_seed + static_cast<std::uint64_t>(trial);

        std::vector<Eigen::Index> order(n);
        for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
        std::mt19937_64 split_gen(mix_seed(trial_seed, 7));
        std::shuffle(order.begin(), order.end(), split_gen);

        Eigen::MatrixXd X_train(n_train, d);
        Eigen::VectorXd y_train(n_train);
        for (Eigen::Index i = 0; i < n_train; ++i) {
            X_train.row(i) = ds.X().row(order[static_cast<std::size_t>(i)]);
            y_train(i) = ds.y()(order[static_cast<std::size_t>(i)]);
        }
        const Dataset train = validate_dataset(std::move(X_train), std::move(y_train));

        std::optional<Eigen::Index> np;
        if (arm.schedule) {
            const long k = std::max(1L, std::lround(static_cast<double>(n) /
                                                    static_cast<double>(arm.schedule->base)));
            np = std::min<Eigen::Index>(projection_schedule(*arm.schedule, k), n_train - 1);
        }
        const MechanismOutput out = apply_mechanism(
            train, detail::arm_config(arm, epsilon, np, mix_seed(trial_seed, 1 + arm_i)));
        const Eigen::VectorXd theta = least_squares(out.X_out, out.y_out).theta;

        Eigen::Index wrong = 0;
        for (Eigen::Index i = n_train; i < n; ++i) {
            const Eigen::Index row = order[static_cast<std::size_t>(i)];
            if (ds.X().row(row).dot(theta) * ds.y()(row) <= 0.0) ++wrong;
        }

        ClassificationRecord rec;
        rec.scheme = arm.schedule ? Scheme::RandomProjection : Scheme::AdditiveNoise;
        rec.schedule = arm.schedule ? schedule_token(arm.schedule->kind) : "none";
        rec.epsilon = epsilon;
        rec.n = n;
        rec.n_prime = np;
        rec.trial = trial;
        rec.test_error = static_cast<double>(wrong) / static_cast<double>(n_test);
        rec.split_fraction = split_fraction;
        rec.base_seed = opt.base_seed;
        records[task] = std::move(rec);
    });
    return records;
}

}  // namespace privreg
