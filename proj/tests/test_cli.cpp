// End-to-end checks of the installed command-line surface: exit codes, the
// pinned flag names, report shape and run-to-run reproducibility.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "privreg/io.hpp"

namespace {

int run_cli(const std::string& args, const std::string& capture = "/dev/null") {
    const std::string cmd =
        std::string(PRIVREG_CLI_PATH) + " " + args + " >" + capture + " 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// line-by-line comparison that tolerates only the timestamp metadata line
bool same_modulo_timestamp(const std::string& a, const std::string& b) {
    std::istringstream sa(a), sb(b);
    std::string la, lb;
    for (;;) {
        const bool ga = static_cast<bool>(std::getline(sa, la));
        const bool gb = static_cast<bool>(std::getline(sb, lb));
        if (ga != gb) return false;
        if (!ga) return true;
        if (la.rfind("# timestamp=", 0) == 0 && lb.rfind("# timestamp=", 0) == 0) continue;
        if (la != lb) return false;
    }
}

std::string tmp(const std::string& name) { return "/tmp/privreg_cli_" + name; }

}  // namespace

TEST_CASE("calibrate subcommand") {
    SECTION("additive only") {
        const std::string cap = tmp("calibrate.txt");
        REQUIRE(run_cli("calibrate --epsilon 0.5", cap) == 0);
        const std::string out = slurp(cap);
        CHECK(out.find("epsilon=0.5\n") != std::string::npos);
        CHECK(out.find("sigma_sq_additive=1\n") != std::string::npos);
        CHECK(out.find("dp_epsilon=0\n") != std::string::npos);
        CHECK(out.find("dp_delta=0.83255461115769769\n") != std::string::npos);
    }
    SECTION("with a projection channel") {
        const std::string cap = tmp("calibrate_rp.txt");
        REQUIRE(run_cli("calibrate --epsilon 0.5 --n-prime 3 --f-sq 1", cap) == 0);
        const std::string out = slurp(cap);
        CHECK(out.find("sigma_sq_projection=2\n") != std::string::npos);
        CHECK(out.find("n_prime=3\n") != std::string::npos);
    }
    SECTION("optional CSV report") {
        const std::string csv = tmp("calibrate.csv");
        REQUIRE(run_cli("calibrate --epsilon 1 --out " + csv) == 0);
        const auto rep = privreg::read_report(csv);
        CHECK(rep.header == std::vector<std::string>{"quantity", "value"});
        CHECK(rep.rows.size() >= 3);
        CHECK(rep.rows[0][0] == "sigma_sq_additive");
    }
}

TEST_CASE("exit codes") {
    SECTION("usage errors are 2") {
        CHECK(run_cli("") == 2);                          // no subcommand
        CHECK(run_cli("calibrate") == 2);                 // missing --epsilon
        CHECK(run_cli("calibrate --bogus 1") == 2);       // unknown flag
        CHECK(run_cli("frobnicate --epsilon 1") == 2);    // unknown subcommand
        CHECK(run_cli("sweep-eps --n 30 --d 3 --epsilon 1 --base 10 "
                      "--schedules log,bogus --out " + tmp("never.csv")) == 2);
    }
    SECTION("runtime failures are 1") {
        CHECK(run_cli("calibrate --epsilon 0") == 1);  // invalid budget
        CHECK(run_cli("classify --epsilon 1 --base 10 --input-csv /tmp/privreg_cli_missing.csv"
                      " --out " + tmp("never2.csv")) == 1);
        // d >= n makes the synthetic generator refuse
        CHECK(run_cli("bounds --epsilon 1 --n 5 --d 9 --out " + tmp("never3.csv")) == 1);
    }
    SECTION("help is 0") { CHECK(run_cli("--help") == 0); }
}

TEST_CASE("sweep-eps end to end") {
    const std::string out1 = tmp("sweep_eps_1.csv");
    const std::string out2 = tmp("sweep_eps_2.csv");
    const std::string flags =
        "sweep-eps --n 40 --d 4 --epsilon 0.5,1 --base 40 --schedules log,none "
        "--trials 2 --seed 3 --out ";
    REQUIRE(run_cli(flags + out1) == 0);
    REQUIRE(run_cli(flags + out2) == 0);

    SECTION("identical reruns modulo the timestamp") {
        CHECK(same_modulo_timestamp(slurp(out1), slurp(out2)));
    }
    SECTION("report shape") {
        const auto rep = privreg::read_report(out1);
        REQUIRE(rep.rows.size() == 4);  // 2 budgets x (none + log)
        CHECK(rep.rows[0][0] == "additive-noise");
        CHECK(rep.rows[0][1] == "none");
        CHECK(rep.rows[1][1] == "log");
        bool saw_command = false;
        for (const auto& [k, v] : rep.metadata)
            if (k == "command") {
                saw_command = true;
                CHECK(v == "sweep-eps");
            }
        CHECK(saw_command);
    }
}

TEST_CASE("sweep-n end to end") {
    const std::string out = tmp("sweep_n.csv");
    REQUIRE(run_cli("sweep-n --d 4 --epsilon 1 --k-min 1 --k-max 2 --base 10 --n 30 "
                    "--schedules log,linear,full,none --trials 2 --seed 5 --out " + out) == 0);
    const auto rep = privreg::read_report(out);
    REQUIRE(rep.rows.size() == 8);  // 2 k-values x 4 arms
    CHECK(rep.rows[0][1] == "none");
    CHECK(rep.rows[1][1] == "log");
    CHECK(rep.rows[2][1] == "linear");
    CHECK(rep.rows[3][1] == "full");
    CHECK(rep.rows[0][3] == "30");
    CHECK(rep.rows[4][3] == "60");
    // full schedule at k=1 targets 10 < n, no clamping needed
    CHECK(rep.rows[3][5] == "10");
}

TEST_CASE("classify end to end on a CSV") {
    // small integer-feature file in the raw-pixel style: values above 1 get
    // scaled, labels arrive as raw tokens mapped to +-1
    const std::string data = tmp("digits.csv");
    {
        std::ofstream f(data);
        f << "p0,p1,p2,label\n";
        for (int i = 1; i <= 40; ++i)
            f << i << "," << i * i << "," << i * i * i << "," << (i % 2 ? 4 : 9) << "\n";
    }
    const std::string out1 = tmp("classify1.csv");
    const std::string out2 = tmp("classify2.csv");
    const std::string flags = "classify --input-csv " + data +
                              " --label-col label --label-map 4=1,9=-1 --epsilon 0.2 "
                              "--base 10 --schedules log,none --trials 2 --seed 7 --out ";
    REQUIRE(run_cli(flags + out1) == 0);
    REQUIRE(run_cli(flags + out2) == 0);
    CHECK(same_modulo_timestamp(slurp(out1), slurp(out2)));

    const auto rep = privreg::read_report(out1);
    REQUIRE(rep.rows.size() == 4);  // 2 arms x 2 trials
    CHECK(rep.rows[0][0] == "additive-noise");
    CHECK(rep.rows[2][0] == "random-projection");
    for (const auto& row : rep.rows) {
        const double err = std::stod(row[6]);
        CHECK(err >= 0.0);
        CHECK(err <= 1.0);
    }
    bool saw_scaled = false;
    for (const auto& [k, v] : rep.metadata)
        if (k == "scaled_columns") {
            saw_scaled = true;
            CHECK(v == "3");
        }
    CHECK(saw_scaled);
}

TEST_CASE("classify on synthetic blobs") {
    const std::string out = tmp("classify_blobs.csv");
    REQUIRE(run_cli("classify --epsilon 0.5 --base 20 --n 100 --d 6 --split 0.8 "
                    "--schedules log,none --trials 1 --seed 2 --out " + out) == 0);
    const auto rep = privreg::read_report(out);
    REQUIRE(rep.rows.size() == 2);
    bool saw_source = false;
    for (const auto& [k, v] : rep.metadata)
        if (k == "source") {
            saw_source = true;
            CHECK(v == "synthetic-blobs");
        }
    CHECK(saw_source);
}

TEST_CASE("bounds end to end") {
    const std::string out = tmp("bounds.csv");
    REQUIRE(run_cli("bounds --epsilon 1 --n 60 --d 5 --n-prime 12 --seed 4 --out " + out) == 0);
    const auto rep = privreg::read_report(out);
    CHECK(rep.header == std::vector<std::string>{"bound", "quantity", "value"});
    bool saw_kappa = false, saw_eta = false, saw_unresolved = false, saw_proj_eta = false;
    for (const auto& row : rep.rows) {
        if (row[0] == "dataset" && row[1] == "kappa") {
            saw_kappa = true;
            CHECK(std::stod(row[2]) >= 1.0);
        }
        if (row[0] == "additive-noise" && row[1] == "eta_bound") saw_eta = true;
        if (row[0] == "projection" && row[1] == "eta_bound") {
            saw_proj_eta = true;
            CHECK(std::stod(row[2]) >= 1.0);
        }
        if (row[0] == "projection" && row[1] == "unresolved_constants") {
            saw_unresolved = true;
            CHECK(row[2] == "c0 c1 c2");
        }
    }
    CHECK(saw_kappa);
    CHECK(saw_eta);
    CHECK(saw_proj_eta);
    CHECK(saw_unresolved);

    // reruns agree modulo the timestamp
    const std::string out2 = tmp("bounds2.csv");
    REQUIRE(run_cli("bounds --epsilon 1 --n 60 --d 5 --n-prime 12 --seed 4 --out " + out2) == 0);
    CHECK(same_modulo_timestamp(slurp(out), slurp(out2)));
}
