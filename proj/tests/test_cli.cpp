#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "fleetcharge/app.hpp"
#include "fleetcharge/errors.hpp"
#include "fleetcharge/instance_io.hpp"
#include "fleetcharge/presets.hpp"
#include "fleetcharge/report.hpp"
#include "fleetcharge/seqdp_planner.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

using namespace fleetcharge;
using namespace testkit;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "fleetcharge");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

void write_json(const fs::path& p, const json& j) {
    std::ofstream(p) << j.dump(1);
}

/// Small feasible instance on an aligned grid.
FleetInstance feasible_tiny() {
    std::mt19937_64 rng(19);
    for (;;) {
        FleetInstance inst = oracle::tiny_fleet(rng, 2, 12, 1.0, 5.0, 3, 0.15, 2);
        if (plan_month(inst, SeqDpOptions{{}, 1}).feasible()) return inst;
    }
}

/// Sets FLEETCHARGE_OUT_DIR for the lifetime of the object.
struct OutDir {
    fs::path dir;
    explicit OutDir(const std::string& name) : dir(scratch_dir(name) / "out") { setenv("FLEETCHARGE_OUT_DIR", dir.c_str(), 1); }
    ~OutDir() { unsetenv("FLEETCHARGE_OUT_DIR"); }
};

} // namespace

TEST_SUITE("cli_report") {

TEST_CASE("cli: plan both methods on an instance file") {
    const fs::path dir = scratch_dir("cli_plan");
    save_instance(dir / "tiny.json", feasible_tiny());
    write_json(dir / "cfg.json", {{"output_dir", "results"}, {"data", {{"source", "instance"}, {"files", {"tiny.json"}}}}});
    OutDir env("cli_plan_env");
    const Run r = cli({"plan", "-c", (dir / "cfg.json").string(), "-m", "both"});
    INFO(r.err);
    REQUIRE(r.code == EXIT_OK);
    for (const char* f : {"tiny_seqdp.json", "tiny_lp.json", "tiny_compare.json", "tiny_seqdp.csv"}) {
        CHECK(fs::exists(env.dir / f));
    }
    CHECK_FALSE(fs::exists(dir / "results"));
    const MonthReport s = load_report((env.dir / "tiny_seqdp.json").string());
    REQUIRE(s.cost_gap_pct);
    CHECK(*s.cost_gap_pct >= 0.0);

    const Run c = cli({"compare", (env.dir / "tiny_seqdp.json").string(), (env.dir / "tiny_lp.json").string(), "-o",
                       (dir / "cmp.json").string()});
    CHECK(c.code == EXIT_OK);
    CHECK(fs::exists(dir / "cmp.json"));
    CHECK_FALSE(c.out.empty());
}

TEST_CASE("cli: output_dir is used without the environment override") {
    const fs::path dir = scratch_dir("cli_outdir");
    save_instance(dir / "tiny.json", feasible_tiny());
    write_json(dir / "cfg.json", {{"output_dir", (dir / "results").string()},
                                  {"data", {{"source", "instance"}, {"files", {"tiny.json"}}}}});
    const Run r = cli({"plan", "-c", (dir / "cfg.json").string(), "-m", "seqdp"});
    REQUIRE(r.code == EXIT_OK);
    CHECK(fs::exists(dir / "results" / "tiny_seqdp.json"));
}

TEST_CASE("cli: exit code 2 for bad input") {
    const fs::path dir = scratch_dir("cli_input");
    OutDir env("cli_input_env");
    write_json(dir / "cfg.json", {{"data", {{"source", "instance"}}}});
    CHECK(cli({"plan", "-c", (dir / "cfg.json").string()}).code == EXIT_INPUT);
    CHECK(cli({"plan", "-c", (dir / "missing.json").string()}).code == EXIT_INPUT);
    write_json(dir / "bad.json", {{"data", {{"source", "instance"}, {"files", {"nope.json"}}}}});
    CHECK(cli({"plan", "-c", (dir / "bad.json").string()}).code == EXIT_INPUT);
    std::ofstream(dir / "garbage.json") << "{ not json";
    CHECK(cli({"plan", "-c", (dir / "garbage.json").string()}).code == EXIT_INPUT);
    CHECK(cli({"frobnicate"}).code == EXIT_INPUT);
    CHECK(cli({"--help"}).code == EXIT_OK);
}

TEST_CASE("cli: exit code 3 for infeasible months") {
    const fs::path dir = scratch_dir("cli_infeasible");
    FleetInstance inst = feasible_tiny();
    inst.profiles[0].battery.soc_init = inst.profiles[0].battery.soc_min;
    inst.profiles[0].battery.soc_target = inst.profiles[0].battery.soc_max;
    inst.profiles[0].battery.epsilon = 0.0;
    inst.profiles[0].p_max_charger = 1.0;
    save_instance(dir / "inf.json", inst);
    write_json(dir / "cfg.json", {{"data", {{"source", "instance"}, {"files", {"inf.json"}}}}});
    OutDir env("cli_infeasible_env");
    const Run lp = cli({"plan", "-c", (dir / "cfg.json").string(), "-m", "lp"});
    CHECK(lp.code == EXIT_INFEASIBLE);
    CHECK(lp.err.find("terminal") != std::string::npos);
    CHECK(cli({"plan", "-c", (dir / "cfg.json").string(), "-m", "seqdp"}).code == EXIT_INFEASIBLE);
}

TEST_CASE("exit code mapping") {
    CHECK(exit_code_for(std::make_exception_ptr(InputError("x"))) == EXIT_INPUT);
    CHECK(exit_code_for(std::make_exception_ptr(NoFeasibleTariff("2022-01"))) == EXIT_INFEASIBLE);
    CHECK(exit_code_for(std::make_exception_ptr(LpNotSolved("2022-01", LpStatus::Infeasible, ""))) == EXIT_INFEASIBLE);
    CHECK(exit_code_for(std::make_exception_ptr(LpNotSolved("2022-01", LpStatus::IterationLimit, ""))) ==
          EXIT_INTERNAL);
    CHECK(exit_code_for(std::make_exception_ptr(InvariantViolation("x"))) == EXIT_INTERNAL);
    CHECK(exit_code_for(std::make_exception_ptr(std::bad_alloc())) == EXIT_INTERNAL);
}

TEST_CASE("cli: synth honours --seed") {
    const fs::path dir = scratch_dir("cli_synth");
    write_json(dir / "cfg.json", {{"seed", 1}, {"data", {{"source", "regression"}, {"vehicles", 2}}}});
    OutDir env("cli_synth_env");
    REQUIRE(cli({"synth", "-c", (dir / "cfg.json").string(), "--seed", "5"}).code == EXIT_OK);
    const fs::path f = env.dir / "instance_2022-07_K2_s5.json";
    REQUIRE(fs::exists(f));
    CHECK(instance_to_json(load_instance(f)) == instance_to_json(regression_fleet(2, 5)));
    REQUIRE(cli({"synth", "-c", (dir / "cfg.json").string(), "-k", "3"}).code == EXIT_OK);
    CHECK(fs::exists(env.dir / "instance_2022-07_K3_s1.json"));
}

TEST_CASE("cli: ingest telemetry, then plan from the logs with the uncontrolled baseline") {
    const fs::path dir = scratch_dir("cli_logs");
    write_json(dir / "ingest.json", {{"output_dir", (dir / "data").string()},
                                     {"data", {{"source", "three_shuttle"}, {"months", {"2022-03"}}}}});
    const Run ing = cli({"ingest", "-c", (dir / "ingest.json").string()});
    INFO(ing.err);
    REQUIRE(ing.code == EXIT_OK);
    for (const char* f : {"instance_2022-03.json", "sessions_2022-03.json", "prices_2022-03.csv",
                          "log_shuttle_1_2022-03.csv"}) {
        CHECK(fs::exists(dir / "data" / f));
    }

    json vehicles = json::array();
    for (int k = 1; k <= 3; ++k) {
        const std::string id = "shuttle_" + std::to_string(k);
        vehicles.push_back({{"id", id}, {"log_csv", "data/log_" + id + "_2022-03.csv"}});
    }
    write_json(dir / "plan.json", {{"output_dir", "out"},
                                   {"data",
                                    {{"source", "logs"},
                                     {"months", {"2022-03"}},
                                     {"prices_csv", "data/prices_2022-03.csv"},
                                     {"vehicles", vehicles}}},
                                   {"tariff", tariff_to_json(default_tariff_window(3))}});
    const Run plan = cli({"plan", "-c", (dir / "plan.json").string(), "-m", "seqdp", "--baseline"});
    INFO(plan.err);
    REQUIRE(plan.code == EXIT_OK);
    const MonthReport s = load_report((dir / "out" / "2022-03_seqdp.json").string());
    const MonthReport u = load_report((dir / "out" / "2022-03_uncontrolled.json").string());
    CHECK(s.instance_fingerprint == u.instance_fingerprint);
    CHECK(s.total_cost < u.total_cost);
    CHECK(s.peak_kw < u.peak_kw);
    // the logs rebuild the same instance the preset ingests
    CHECK(s.instance_fingerprint == instance_fingerprint(load_instance(dir / "data" / "instance_2022-03.json")));
}

} // TEST_SUITE
