// privreg: benchmark CLI for privacy-preserving linear regression.
//
// Subcommands:
//   calibrate  print the noise variances and the DP conversion for a budget
//   sweep-n    relative error vs dataset size (one CSV row per k and arm)
//   sweep-eps  relative error vs privacy budget at fixed n
//   classify   binary +-1 classification through a mechanism (CSV or blobs)
//   bounds     evaluate the theoretical bound reports for one dataset
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.
// PRIVREG_THREADS caps trial concurrency (results are independent of it).

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "privreg/privreg.hpp"

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

// "--schedules log,linear,full,none": projection schedules plus the special
// token "none" meaning the plain additive-noise arm.
privreg::SweepOptions parse_schedules(const std::string& spec, long base) {
    privreg::SweepOptions opt;
    opt.include_additive = false;
    for (const auto& tok : split_commas(spec)) {
        if (tok == "none") opt.include_additive = true;
        else if (tok == "log") opt.schedules.push_back({privreg::Schedule::Logarithmic, base});
        else if (tok == "linear") opt.schedules.push_back({privreg::Schedule::Linear, base});
        else if (tok == "full") opt.schedules.push_back({privreg::Schedule::Full, base});
        else throw UsageError("unknown schedule token '" + tok + "' (want log,linear,full,none)");
    }
    if (!opt.include_additive && opt.schedules.empty())
        throw UsageError("--schedules selected no arms");
    return opt;
}

std::vector<double> parse_epsilon_list(const std::string& spec) {
    std::vector<double> out;
    for (const auto& tok : split_commas(spec)) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw UsageError("bad epsilon value '" + tok + "'");
        }
    }
    if (out.empty()) throw UsageError("empty epsilon list");
    return out;
}

std::optional<double> parse_delta_free(const std::string& spec) {
    if (spec == "auto") return std::nullopt;
    try {
        std::size_t pos = 0;
        const double v = std::stod(spec, &pos);
        if (pos != spec.size()) throw std::invalid_argument(spec);
        return v;
    } catch (const std::exception&) {
        throw UsageError("--delta-free must be 'auto' or a number, got '" + spec + "'");
    }
}

void append_meta(std::vector<std::pair<std::string, std::string>>& meta,
                 std::initializer_list<std::pair<std::string, std::string>> items) {
    for (const auto& it : items) meta.push_back(it);
}

// Per-subcommand flag bag. Only the fields a subcommand registers are used.
struct Options {
    double epsilon = 1.0;
    std::string epsilon_list;
    long n = 0, d = 0, k_min = 1, k_max = 1, base = 0, n_prime = 0, max_rows = 0;
    double f_sq = 0.0, split = 0.8;
    int trials = 1;
    std::uint64_t seed = 0;
    std::string schedules = "log,linear,full,none";
    std::string out, input_csv, label_col, label_map, delta_free = "auto";
    bool no_scale = false;
};

void run_calibrate(const Options& o) {
    const double sigma_an = privreg::calibrate_additive_noise(o.epsilon);
    const auto dp = privreg::mi_dp_to_dp(o.epsilon);
    std::cout << "epsilon=" << privreg::format_double(o.epsilon) << "\n";
    std::cout << "sigma_sq_additive=" << privreg::format_double(sigma_an) << "\n";
    std::optional<double> sigma_rp;
    if (o.n_prime > 0) {
        sigma_rp = privreg::calibrate_projection_noise(o.epsilon, o.n_prime,
                                                       std::sqrt(std::max(0.0, o.f_sq)));
        std::cout << "n_prime=" << o.n_prime << "\n";
        std::cout << "f_sq=" << privreg::format_double(o.f_sq) << "\n";
        std::cout << "sigma_sq_projection=" << privreg::format_double(*sigma_rp) << "\n";
    }
    std::cout << "dp_epsilon=" << privreg::format_double(dp.epsilon_dp) << "\n";
    std::cout << "dp_delta=" << privreg::format_double(dp.delta_dp) << "\n";
    if (!o.out.empty()) {
        privreg::ReportTable t;
        t.metadata = privreg::standard_metadata(o.seed);
        append_meta(t.metadata, {{"command", "calibrate"},
                                 {"epsilon", privreg::format_double(o.epsilon)}});
        t.header = {"quantity", "value"};
        auto add = [&](const std::string& k, double v) {
            t.rows.push_back({privreg::Cell(k), privreg::Cell(v)});
        };
        add("sigma_sq_additive", sigma_an);
        if (sigma_rp) {
            add("n_prime", static_cast<double>(o.n_prime));
            add("f_sq", o.f_sq);
            add("sigma_sq_projection", *sigma_rp);
        }
        add("dp_epsilon", dp.epsilon_dp);
        add("dp_delta", dp.delta_dp);
        privreg::emit_report(t, o.out);
    }
}

void run_sweep_n(const Options& o) {
    privreg::SweepOptions opt = parse_schedules(o.schedules, o.base);
    opt.trials = o.trials;
    opt.base_seed = o.seed;
    const long n_base = o.n > 0 ? o.n : o.base;  // dataset size = n_base * k
    const auto records =
        privreg::sweep_n(o.d, o.epsilon, o.k_min, o.k_max, n_base, opt);
    auto t = privreg::tradeoff_table(records, o.seed);
    append_meta(t.metadata,
                {{"command", "sweep-n"},
                 {"epsilon", privreg::format_double(o.epsilon)},
                 {"d", std::to_string(o.d)},
                 {"k_min", std::to_string(o.k_min)},
                 {"k_max", std::to_string(o.k_max)},
                 {"n_base", std::to_string(n_base)},
                 {"schedule_base", std::to_string(o.base)},
                 {"schedules", o.schedules},
                 {"trials", std::to_string(o.trials)},
                 {"y_model", "planted_linear_uniform_theta0"},
                 {"y_noise_scale", "0.1*sqrt(d)"}});
    privreg::emit_report(t, o.out);
}

void run_sweep_eps(const Options& o) {
    privreg::SweepOptions opt = parse_schedules(o.schedules, o.base);
    opt.trials = o.trials;
    opt.base_seed = o.seed;
    const auto grid = parse_epsilon_list(o.epsilon_list);
    const auto records = privreg::sweep_epsilon(o.n, o.d, grid, opt);
    auto t = privreg::tradeoff_table(records, o.seed);
    append_meta(t.metadata, {{"command", "sweep-eps"},
                             {"epsilon_grid", o.epsilon_list},
                             {"n", std::to_string(o.n)},
                             {"d", std::to_string(o.d)},
                             {"schedule_base", std::to_string(o.base)},
                             {"schedules", o.schedules},
                             {"trials", std::to_string(o.trials)},
                             {"y_model", "planted_linear_uniform_theta0"},
                             {"y_noise_scale", "0.1*sqrt(d)"}});
    privreg::emit_report(t, o.out);
}

void run_classify(const Options& o) {
    privreg::SweepOptions opt = parse_schedules(o.schedules, o.base);
    opt.trials = o.trials;
    opt.base_seed = o.seed;

    std::vector<std::pair<std::string, std::string>> source_meta;
    std::optional<privreg::Dataset> ds;
    if (!o.input_csv.empty()) {
        privreg::CsvLoadOptions load;
        load.label_column = o.label_col;
        if (!o.label_map.empty()) load.label_map = privreg::parse_label_map(o.label_map);
        if (o.max_rows > 0) load.max_rows = o.max_rows;
        load.seed = o.seed;
        load.scale = !o.no_scale;
        auto loaded = privreg::load_csv_dataset(o.input_csv, load);
        long scaled = 0;
        for (const double s : loaded.column_scales)
            if (s != 1.0) ++scaled;
        append_meta(source_meta, {{"source", o.input_csv},
                                  {"label_column", loaded.label_name},
                                  {"rows_in_file", std::to_string(loaded.rows_in_file)},
                                  {"scaled_columns", std::to_string(scaled)}});
        ds = std::move(loaded.dataset);
    } else {
        ds = privreg::make_blob_dataset(o.n, o.d, privreg::mix_seed(o.seed, 0));
        append_meta(source_meta, {{"source", "synthetic-blobs"},
                                  {"blob_separation", "0.1"},
                                  {"blob_factor_sd", "0.8"},
                                  {"blob_jitter_sd", "0.2"}});
    }

    const auto records = privreg::classification_experiment(*ds, o.epsilon, o.split, opt);
    auto t = privreg::classification_table(records, o.seed);
    append_meta(t.metadata, {{"command", "classify"},
                             {"epsilon", privreg::format_double(o.epsilon)},
                             {"n", std::to_string(ds->n())},
                             {"d", std::to_string(ds->d())},
                             {"schedule_base", std::to_string(o.base)},
                             {"schedules", o.schedules},
                             {"split", privreg::format_double(o.split)},
                             {"trials", std::to_string(o.trials)}});
    for (const auto& kv : source_meta) t.metadata.push_back(kv);
    privreg::emit_report(t, o.out);
}

void run_bounds(const Options& o) {
    std::optional<privreg::Dataset> ds;
    std::vector<std::pair<std::string, std::string>> source_meta;
    if (!o.input_csv.empty()) {
        privreg::CsvLoadOptions load;
        load.label_column = o.label_col;
        if (o.max_rows > 0) load.max_rows = o.max_rows;
        load.seed = o.seed;
        load.scale = !o.no_scale;
        auto loaded = privreg::load_csv_dataset(o.input_csv, load);
        append_meta(source_meta, {{"source", o.input_csv},
                                  {"label_column", loaded.label_name}});
        ds = std::move(loaded.dataset);
    } else {
        if (o.n <= 0 || o.d <= 0) throw UsageError("bounds needs --input-csv or --n and --d");
        ds = privreg::generate_random_dataset(o.n, o.d, o.seed);
        append_meta(source_meta, {{"source", "synthetic-uniform"}});
    }
    const auto& ss = ds->spectral();
    const auto delta = parse_delta_free(o.delta_free);

    privreg::ReportTable t;
    t.metadata = privreg::standard_metadata(o.seed);
    append_meta(t.metadata, {{"command", "bounds"},
                             {"epsilon", privreg::format_double(o.epsilon)},
                             {"delta_free", o.delta_free},
                             {"n", std::to_string(ds->n())},
                             {"d", std::to_string(ds->d())}});
    for (const auto& kv : source_meta) t.metadata.push_back(kv);
    t.header = {"bound", "quantity", "value"};
    auto add = [&](const std::string& b, const std::string& q, double v) {
        t.rows.push_back({privreg::Cell(b), privreg::Cell(q), privreg::Cell(v)});
    };

    add("dataset", "kappa", ss.kappa);
    add("dataset", "r", ss.r);
    add("dataset", "f", ss.f);
    add("dataset", "sigma_max", ss.sigma_max);
    add("dataset", "sigma_min", ss.sigma_min);

    const auto an = privreg::additive_noise_bound(ss, o.epsilon, ds->n(), ds->d(), delta);
    add("additive-noise", "eta_bound", an.eta_bound);
    add("additive-noise", "probability_lower_bound", an.probability_lower_bound);
    add("additive-noise", "delta_free", an.delta_free);
    for (const auto& [k, v] : an.intermediates) add("additive-noise", k, v);

    if (o.n_prime > 0) {
        const auto rp = privreg::projection_bound(ss, o.epsilon, o.n_prime, delta, ds->d());
        add("projection", "n_prime", static_cast<double>(o.n_prime));
        add("projection", "eta_bound", rp.eta_bound);
        add("projection", "probability_lower_bound", rp.probability_lower_bound);
        add("projection", "delta_free", rp.delta_free);
        for (const auto& [k, v] : rp.intermediates) add("projection", k, v);
        std::string flagged;
        for (const auto& name : rp.unresolved) {
            if (!flagged.empty()) flagged += " ";
            flagged += name;
        }
        t.rows.push_back({privreg::Cell(std::string("projection")),
                          privreg::Cell(std::string("unresolved_constants")),
                          privreg::Cell(flagged)});
    }
    privreg::emit_report(t, o.out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"privacy-preserving linear regression benchmark"};
    app.require_subcommand(1);
    Options o;

    CLI::App* calibrate = app.add_subcommand("calibrate", "print calibrated noise variances");
    calibrate->add_option("--epsilon", o.epsilon, "privacy budget in bits")->required();
    calibrate->add_option("--n-prime", o.n_prime, "projection dimension");
    calibrate->add_option("--f-sq", o.f_sq, "squared column-leverage floor f^2(X)");
    calibrate->add_option("--seed", o.seed, "seed echoed into metadata");
    calibrate->add_option("--out", o.out, "also write a quantity,value CSV");

    CLI::App* sweepn = app.add_subcommand("sweep-n", "relative error vs dataset size");
    sweepn->add_option("--d", o.d, "feature count")->required();
    sweepn->add_option("--epsilon", o.epsilon, "privacy budget in bits")->required();
    sweepn->add_option("--k-min", o.k_min, "first sweep index")->required();
    sweepn->add_option("--k-max", o.k_max, "last sweep index")->required();
    sweepn->add_option("--base", o.base, "schedule base")->required();
    sweepn->add_option("--n", o.n, "dataset size base: n = this * k (default: --base)");
    sweepn->add_option("--schedules", o.schedules, "comma list of log,linear,full,none");
    sweepn->add_option("--trials", o.trials, "trials per cell");
    sweepn->add_option("--seed", o.seed, "base seed");
    sweepn->add_option("--out", o.out, "output CSV path")->required();

    CLI::App* sweepe = app.add_subcommand("sweep-eps", "relative error vs privacy budget");
    sweepe->add_option("--n", o.n, "dataset size")->required();
    sweepe->add_option("--d", o.d, "feature count")->required();
    sweepe->add_option("--epsilon", o.epsilon_list, "comma list of budgets")->required();
    sweepe->add_option("--base", o.base, "schedule base")->required();
    sweepe->add_option("--schedules", o.schedules, "comma list of log,linear,full,none");
    sweepe->add_option("--trials", o.trials, "trials per cell");
    sweepe->add_option("--seed", o.seed, "base seed");
    sweepe->add_option("--out", o.out, "output CSV path")->required();

    CLI::App* classify = app.add_subcommand("classify", "binary classification experiment");
    classify->add_option("--epsilon", o.epsilon, "privacy budget in bits")->required();
    classify->add_option("--base", o.base, "schedule base")->required();
    classify->add_option("--input-csv", o.input_csv, "CSV with features and a +-1 label column");
    classify->add_option("--label-col", o.label_col, "label column name or 0-based index");
    classify->add_option("--label-map", o.label_map, "e.g. 4=1,9=-1 for raw label tokens");
    classify->add_option("--max-rows", o.max_rows, "seeded row subsample size");
    classify->add_flag("--no-scale", o.no_scale, "disable max-abs column scaling");
    classify->add_option("--n", o.n, "rows for synthetic blobs (no --input-csv)")
        ->default_val(2000);
    classify->add_option("--d", o.d, "features for synthetic blobs")->default_val(50);
    classify->add_option("--split", o.split, "train fraction")->default_val(0.8);
    classify->add_option("--schedules", o.schedules, "comma list of log,linear,full,none");
    classify->add_option("--trials", o.trials, "trials (fresh split + noise each)");
    classify->add_option("--seed", o.seed, "base seed");
    classify->add_option("--out", o.out, "output CSV path")->required();

    CLI::App* bounds = app.add_subcommand("bounds", "evaluate theoretical bound reports");
    bounds->add_option("--epsilon", o.epsilon, "privacy budget in bits")->required();
    bounds->add_option("--n-prime", o.n_prime, "projection dimension for the sketch bound");
    bounds->add_option("--delta-free", o.delta_free, "free parameter, 'auto' or a number");
    bounds->add_option("--input-csv", o.input_csv, "dataset CSV (label column = response)");
    bounds->add_option("--label-col", o.label_col, "response column name or 0-based index");
    bounds->add_option("--max-rows", o.max_rows, "seeded row subsample size");
    bounds->add_flag("--no-scale", o.no_scale, "disable max-abs column scaling");
    bounds->add_option("--n", o.n, "rows for a synthetic dataset");
    bounds->add_option("--d", o.d, "features for a synthetic dataset");
    bounds->add_option("--seed", o.seed, "dataset seed");
    bounds->add_option("--out", o.out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(calibrate)) run_calibrate(o);
        else if (app.got_subcommand(sweepn)) run_sweep_n(o);
        else if (app.got_subcommand(sweepe)) run_sweep_eps(o);
        else if (app.got_subcommand(classify)) run_classify(o);
        else if (app.got_subcommand(bounds)) run_bounds(o);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const privreg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
