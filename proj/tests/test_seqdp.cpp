#include "doctest.h"

#include <random>

#include "fleetcharge/cost.hpp"
#include "fleetcharge/lp_benchmark.hpp"
#include "fleetcharge/seqdp_planner.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

using namespace fleetcharge;
using namespace testkit;

namespace {

FleetInstance idle_fleet(const std::vector<std::pair<std::string, double>>& id_init, std::size_t hours,
                         double capacity = 100.0) {
    FleetInstance inst;
    inst.grid = grid_of(std::vector<double>(hours, 1.0));
    std::vector<double> p(hours);
    for (std::size_t h = 0; h < hours; ++h) {
        p[h] = 0.1 + 0.05 * static_cast<double>(h % 3);
    }
    inst.prices = prices_of(p);
    inst.tariff = tariff(4.0, 0.0, 15.0, 15.0);
    for (const auto& [id, init] : id_init) {
        inst.profiles.push_back(idle_profile(id, inst.grid, battery(capacity, init, 100.0, 0.0), 11.0));
    }
    return inst;
}

ChargingPlan plan_of(std::vector<double> p) {
    ChargingPlan c;
    c.power_kw = std::move(p);
    return c;
}

} // namespace

TEST_SUITE("seqdp_planner") {

TEST_CASE("energy requirement counts depletion and the terminal shift") {
    FleetInstance inst = idle_fleet({{"a", 90.0}}, 2, 60.0);
    inst.profiles[0].steps[0] = {5.0, 0.0, false};
    CHECK(energy_requirement_kwh(inst.profiles[0]) == doctest::Approx(0.6 * 15.0));
}

TEST_CASE("vehicles are ordered by descending requirement") {
    const FleetInstance inst = idle_fleet({{"a", 90.0}, {"b", 70.0}, {"c", 80.0}}, 4);
    const auto order = order_vehicles(inst.profiles);
    CHECK(order == std::vector<std::size_t>{1, 2, 0});
}

TEST_CASE("equal requirements are ordered by vehicle id") {
    const FleetInstance inst = idle_fleet({{"z", 80.0}, {"m", 80.0}, {"a", 80.0}, {"q", 60.0}}, 4);
    CHECK(order_vehicles(inst.profiles) == std::vector<std::size_t>{3, 2, 1, 0});
}

TEST_CASE("residual capacity subtracts the plans allocated so far") {
    const std::vector<ChargingPlan> prior = {plan_of({5, 0, 5}), plan_of({0, 10, 0})};
    CHECK(residual_capacity(prior, 20.0, 3) == std::vector<double>{15, 10, 15});
    CHECK(residual_capacity({}, 7.0, 2) == std::vector<double>{7, 7});
    CHECK_THROWS_AS(residual_capacity(prior, 8.0, 3), std::logic_error);
}

TEST_CASE("a single vehicle gets the DP optimum for the best tariff level") {
    std::mt19937_64 rng(31);
    int feasible = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const FleetInstance inst = oracle::tiny_fleet(rng, 1, 8, 0.05, 3.0);
        const SeqDpResult r = plan_month(inst, SeqDpOptions{{}, 1});
        double best = INF;
        for (double c : inst.tariff.candidates()) {
            const std::vector<double> caps(inst.grid.size(), c);
            const auto s = solve_vehicle(inst.profiles[0], inst.grid, inst.prices, caps, DpConfig{});
            if (s) best = std::min(best, s->cost + inst.tariff.c_m * c);
        }
        REQUIRE(r.feasible() == (best < INF));
        if (r.feasible()) {
            CHECK(r.best().total_cost == doctest::Approx(best).epsilon(1e-12));
            ++feasible;
        }
    }
    CHECK(feasible >= 5);
}

TEST_CASE("for one vehicle, energy cost does not increase with the tariff level") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 15; ++trial) {
        const FleetInstance inst = oracle::tiny_fleet(rng, 1, 8, 1.0, 3.0);
        const SeqDpResult r = plan_month(inst, SeqDpOptions{{}, 1});
        for (std::size_t i = 1; i < r.candidates.size(); ++i) {
            const auto& lo = r.candidates[i - 1];
            const auto& hi = r.candidates[i];
            CHECK(hi.p_max_tariff > lo.p_max_tariff);
            if (lo.feasible) {
                REQUIRE(hi.feasible);
                CHECK(hi.energy_cost <= lo.energy_cost + 1e-9);
            }
        }
    }
}

TEST_CASE("two vehicles over three steps: the SeqDP total is never below the joint optimum") {
    std::mt19937_64 rng(2);
    int compared = 0;
    for (int trial = 0; trial < 400 && compared < 15; ++trial) {
        const FleetInstance inst = oracle::tiny_fleet(rng, 2, 3, 1.0, 4.0);
        const auto brute = joint_bruteforce(inst, 1.0);
        const SeqDpResult r = plan_month(inst, SeqDpOptions{{}, 1});
        if (r.feasible()) {
            REQUIRE(brute);
            CHECK(brute->total_cost <= r.best().total_cost + 1e-9);
            ++compared;
        }
    }
    CHECK(compared >= 15);
}

TEST_CASE("every feasible candidate keeps the aggregate within its level and passes validation") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const FleetInstance inst = oracle::tiny_fleet(rng, 3, 10, 1.0, 6.0, 3, 0.15, 2);
        const SeqDpResult r = plan_month(inst, SeqDpOptions{{}, 1});
        for (const TariffCandidateResult& c : r.candidates) {
            if (!c.feasible) {
                CHECK(c.plans.empty());
                CHECK_FALSE(c.infeasible_vehicle.empty());
                continue;
            }
            const auto agg = aggregate_power(c.plans, inst.grid.size());
            for (double a : agg) CHECK(a <= c.p_max_tariff + 1e-9);
            CHECK(validate_fleet(c.plans, inst).empty());
            CHECK(c.total_cost == doctest::Approx(c.energy_cost + inst.tariff.c_m * c.p_max_tariff));
            CHECK(c.realized_peak_kw <= c.p_max_tariff + 1e-9);
        }
    }
}

TEST_CASE("the candidate sweep is deterministic across thread counts") {
    std::mt19937_64 rng(44);
    const FleetInstance inst = oracle::tiny_fleet(rng, 4, 24, 1.0, 8.0, 3, 0.15, 2);
    const SeqDpResult a = plan_month(inst, SeqDpOptions{{}, 1});
    const SeqDpResult b = plan_month(inst, SeqDpOptions{{}, 4});
    REQUIRE(a.candidates.size() == b.candidates.size());
    CHECK(a.best_index == b.best_index);
    CHECK(a.order == b.order);
    for (std::size_t i = 0; i < a.candidates.size(); ++i) {
        CHECK(a.candidates[i].feasible == b.candidates[i].feasible);
        CHECK(a.candidates[i].total_cost == b.candidates[i].total_cost);
        REQUIRE(a.candidates[i].plans.size() == b.candidates[i].plans.size());
        for (std::size_t k = 0; k < a.candidates[i].plans.size(); ++k) {
            CHECK(a.candidates[i].plans[k].power_kw == b.candidates[i].plans[k].power_kw);
        }
    }
}

TEST_CASE("no feasible tariff level raises NoFeasibleTariff") {
    FleetInstance inst = idle_fleet({{"a", 80.0}}, 2);
    inst.tariff = tariff(4.0, 0.0, 0.0, 15.0);
    const SeqDpResult r = plan_month(inst, SeqDpOptions{{}, 1});
    CHECK_FALSE(r.feasible());
    CHECK_THROWS_AS(r.best(), NoFeasibleTariff);
    CHECK(r.candidates.size() == 1);
    CHECK(r.candidates[0].infeasible_vehicle == "a");
}

TEST_CASE("demand charge steers the fleet to a lower tariff level") {
    // 20 kWh each over 10 hours: two vehicles at 2 kW fit a 4 kW level
    FleetInstance inst = idle_fleet({{"a", 80.0}, {"b", 80.0}}, 10);
    inst.tariff = tariff(10.0, 0.0, 15.0, 15.0);
    const SeqDpResult r = plan_month(inst, SeqDpOptions{{}, 1});
    REQUIRE(r.feasible());
    CHECK(r.best().p_max_tariff == doctest::Approx(4.0));
    CHECK(r.best().realized_peak_kw == doctest::Approx(4.0));
}

} // TEST_SUITE
