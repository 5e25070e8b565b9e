#include "doctest.h"

#include <algorithm>
#include <random>
#include <sstream>

#include "fleetcharge/cost.hpp"
#include "fleetcharge/errors.hpp"
#include "fleetcharge/lp_benchmark.hpp"
#include "fleetcharge/seqdp_planner.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

using namespace fleetcharge;
using namespace testkit;

namespace {

FleetInstance idle_pair(std::size_t hours, double p_max = 11.0) {
    FleetInstance inst;
    inst.grid = grid_of(std::vector<double>(hours, 1.0));
    inst.prices = prices_of(std::vector<double>(hours, 0.2));
    inst.tariff = tariff(4.0, 0.0, 15.0, 15.0);
    for (const char* id : {"a", "b"}) {
        inst.profiles.push_back(idle_profile(id, inst.grid, battery(60.0, 90.0, 100.0, 0.0), p_max));
    }
    return inst;
}

LpOptions with(LpMethod m) {
    LpOptions o;
    o.method = m;
    return o;
}

} // namespace

TEST_SUITE("lp_benchmark") {

TEST_CASE("row families: K=2, T=2 has 2 aggregate, 8 cumulative and 4 terminal rows") {
    const FleetLp lp = build_lp(idle_pair(2));
    CHECK(lp.problem.num_vars() == 5);
    CHECK(lp.problem.count_rows(RowFamily::Aggregate) == 2);
    CHECK(lp.problem.count_rows(RowFamily::CumulativeUpper) + lp.problem.count_rows(RowFamily::CumulativeLower) == 8);
    CHECK(lp.problem.count_rows(RowFamily::TerminalUpper) + lp.problem.count_rows(RowFamily::TerminalLower) == 4);
    CHECK(lp.problem.num_rows() == 14);
    CHECK(lp.problem.cost[lp.layout.peak()] == doctest::Approx(4.0));
    CHECK(lp.problem.upper[lp.layout.peak()] == doctest::Approx(15.0));
}

TEST_CASE("a single unavailable step with nothing to do costs zero") {
    FleetInstance inst;
    inst.grid = grid_of({1.0});
    inst.prices = prices_of({0.3});
    inst.tariff = tariff(4.0, 0.0, 15.0, 15.0);
    VehicleProfile v = idle_profile("a", inst.grid, battery(60.0, 100.0, 100.0, 1.0), 11.0);
    v.steps[0] = {0.0, 0.25, false};
    inst.profiles = {v};
    const FleetLpResult r = solve_fleet_lp(inst);
    REQUIRE(r.optimal());
    CHECK(r.total_cost == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.plans[0].power_kw[0] == doctest::Approx(0.0));
}

TEST_CASE("uniform prices without a demand charge cost need times price") {
    FleetInstance inst = idle_pair(6);
    inst.tariff.c_m = 0.0;
    const FleetLpResult r = solve_fleet_lp(inst);
    REQUIRE(r.optimal());
    // 6 kWh each, terminal window exact
    CHECK(r.total_cost == doctest::Approx(12.0 * 0.2).epsilon(1e-9));
    CHECK(validate_fleet(r.plans, inst).empty());
}

TEST_CASE("with a demand charge the LP flattens the load") {
    FleetInstance inst = idle_pair(6);
    const FleetLpResult r = solve_fleet_lp(inst);
    REQUIRE(r.optimal());
    CHECK(r.peak_variable_kw == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(r.total_cost == doctest::Approx(2.4 + 8.0).epsilon(1e-7));
}

TEST_CASE("an unreachable target is infeasible and the hint names the terminal rows") {
    FleetInstance inst = idle_pair(2, 1.0);
    inst.profiles[0].battery.soc_init = 50.0;
    for (LpMethod m : {LpMethod::Simplex, LpMethod::InteriorPoint}) {
        FleetLpOptions o;
        o.solver = with(m);
        const FleetLpResult r = solve_fleet_lp(inst, o);
        CHECK(r.lp.status == LpStatus::Infeasible);
        CHECK(r.lp.hint().find("terminal") != std::string::npos);
    }
}

TEST_CASE("joint schedule count and the size guard") {
    const FleetInstance inst = idle_pair(3, 2.0);
    CHECK(joint_schedule_count(inst, 1.0) == doctest::Approx(729.0));
    CHECK_THROWS_AS(joint_bruteforce(inst, 1.0, 100.0), SizeGuardError);
    const auto b = joint_bruteforce(inst, 1.0);
    REQUIRE(b);
    CHECK(b->leaves <= 729);
    // 6 kWh each at 2 kW over three hours: both vehicles run flat out
    CHECK(b->peak_kw == doctest::Approx(4.0));
    CHECK(b->total_cost == doctest::Approx(12.0 * 0.2 + 16.0));
}

TEST_CASE("joint brute force agrees with the independent enumeration oracle") {
    std::mt19937_64 rng(12);
    int checked = 0;
    for (int trial = 0; trial < 300 && checked < 10; ++trial) {
        const FleetInstance inst = oracle::tiny_fleet(rng, 2, 3, 1.0, 4.0);
        const auto a = joint_bruteforce(inst, 1.0);
        const auto b = oracle::enumerate_fleet(inst, 1.0);
        REQUIRE(a.has_value() == b.has_value());
        if (a) {
            CHECK(a->total_cost == doctest::Approx(b->cost).epsilon(1e-12));
            ++checked;
        }
    }
    CHECK(checked >= 5);
}

TEST_CASE("property: LP optimum is a lower bound on the discrete optimum") {
    std::mt19937_64 rng(77);
    int compared = 0;
    for (int trial = 0; trial < 60 && compared < 15; ++trial) {
        const FleetInstance inst = oracle::tiny_fleet(rng, 2, 4, 1.0, 4.0);
        const auto brute = joint_bruteforce(inst, 1.0);
        if (!brute) continue;
        const FleetLpResult lp = solve_fleet_lp(inst);
        REQUIRE(lp.optimal());
        CHECK(lp.total_cost <= brute->total_cost + 1e-7);
        ++compared;
    }
    CHECK(compared >= 10);
}

TEST_CASE("property: reordering vehicles leaves the LP optimum unchanged") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        const FleetInstance inst = oracle::tiny_fleet(rng, 4, 12, 1.0, 8.0, 3, 0.15, 2);
        FleetInstance rev = inst;
        std::reverse(rev.profiles.begin(), rev.profiles.end());
        const FleetLpResult a = solve_fleet_lp(inst);
        const FleetLpResult b = solve_fleet_lp(rev);
        REQUIRE(a.lp.status == b.lp.status);
        if (a.optimal()) CHECK(a.total_cost == doctest::Approx(b.total_cost).epsilon(1e-7));
    }
}

TEST_CASE("property: state-space and cumulative forms have the same optimum") {
    std::mt19937_64 rng(6);
    int compared = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const FleetInstance inst = oracle::tiny_fleet(rng, 3, 16, 1.0, 6.0, 3, 0.15, 2);
        FleetLpOptions c;
        c.formulation = LpFormulation::Cumulative;
        FleetLpOptions s;
        s.formulation = LpFormulation::StateSpace;
        const FleetLpResult a = solve_fleet_lp(inst, c);
        const FleetLpResult b = solve_fleet_lp(inst, s);
        REQUIRE(a.lp.status == b.lp.status);
        if (!a.optimal()) continue;
        ++compared;
        CHECK(b.formulation == LpFormulation::StateSpace);
        CHECK(a.total_cost == doctest::Approx(b.total_cost).epsilon(1e-7));
        CHECK(validate_fleet(b.plans, inst, 1e-6).empty());
    }
    CHECK(compared >= 3);
}

TEST_CASE("property: simplex and interior point agree") {
    std::mt19937_64 rng(7);
    int compared = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const FleetInstance inst = oracle::tiny_fleet(rng, 3, 12, 1.0, 6.0, 3, 0.15, 2);
        const FleetLp lp = build_lp(inst);
        const LpResult a = solve_simplex(lp.problem);
        const LpResult b = solve_interior_point(lp.problem);
        if (!a.optimal()) {
            // the interior point cannot certify infeasibility; it must at least not claim optimality
            CHECK_FALSE(b.optimal());
            continue;
        }
        REQUIRE(b.optimal());
        ++compared;
        CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-7));
        CHECK(a.primal_residual <= 1e-7);
        CHECK(b.primal_residual <= 1e-6);
    }
    CHECK(compared >= 3);
}

TEST_CASE("property: LP never costs more than SeqDP, and its plans respect the grid cap") {
    std::mt19937_64 rng(3);
    int compared = 0;
    for (int trial = 0; trial < 12; ++trial) {
        const FleetInstance inst = oracle::tiny_fleet(rng, 3, 24, 1.0, 6.0, 3, 0.15, 2);
        const SeqDpResult s = plan_month(inst, SeqDpOptions{{}, 1});
        if (!s.feasible()) continue;
        const FleetLpResult lp = solve_fleet_lp(inst);
        REQUIRE(lp.optimal());
        CHECK(lp.total_cost <= s.best().total_cost + 1e-7);
        CHECK(validate_fleet(lp.plans, inst, 1e-6).empty());
        ++compared;
    }
    CHECK(compared >= 3);
}

TEST_CASE("LP text export has the standard sections") {
    const FleetLp lp = build_lp(idle_pair(2));
    std::ostringstream out;
    write_lp_format(lp.problem, out);
    const std::string s = out.str();
    for (const char* section : {"Minimize", "Subject To", "Bounds", "End"}) {
        CHECK(s.find(section) != std::string::npos);
    }
    CHECK(s.find(lp.problem.names[lp.layout.peak()]) != std::string::npos);
}

TEST_CASE("extracted plans clip tiny bound violations") {
    const FleetInstance inst = idle_pair(2);
    const FleetLp lp = build_lp(inst);
    std::vector<double> x(lp.problem.num_vars(), 0.0);
    x[lp.layout.power(0, 0)] = -1e-12;
    x[lp.layout.power(1, 1)] = 11.0 + 1e-12;
    const auto plans = extract_plans(inst, lp.layout, x);
    CHECK(plans[0].power_kw[0] == 0.0);
    CHECK(plans[1].power_kw[1] == 11.0);
}

} // TEST_SUITE
