// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.
// Usage: acceptance [AC1 AC2 ...]   (no arguments runs everything)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fleetcharge/cost.hpp"
#include "fleetcharge/dp_solver.hpp"
#include "fleetcharge/errors.hpp"
#include "fleetcharge/lp_benchmark.hpp"
#include "fleetcharge/presets.hpp"
#include "fleetcharge/report.hpp"
#include "fleetcharge/seqdp_planner.hpp"
#include "fleetcharge/session_ingest.hpp"

#include "../oracles.hpp"

using namespace fleetcharge;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and thresholds.
constexpr double DP_EXACT_TOL = 1e-9;
constexpr std::size_t AC1_MIN_INSTANCES = 100;
constexpr double AC1_TIME_S = 10.0;
constexpr double ORDER_TOL = 1e-7;
constexpr std::size_t AC2_MIN_INSTANCES = 50;
constexpr double AC2_TIME_S = 60.0;
constexpr double VALIDATION_TOL = 1e-6;
constexpr double AC4_MAX_GAP = 0.10;
constexpr double AC4_MEDIAN_GAP = 0.06;
constexpr double AC4_MAX_PEAK_GAP = 0.25;
constexpr double AC4_TIME_S = 15.0 * 60.0;
constexpr std::uint64_t AC4_SEEDS = 15;
constexpr double AC5_MEAN_REDUCTION = 0.80;
constexpr double AC5_MONTH_FLOOR = 0.60;
constexpr double AC6_SOC_MIN = 30.0;
constexpr double RATIO_TOL = 1e-9;
constexpr int AC7_REPEATS = 2;

struct Line {
    std::string id;
    bool pass = false;
    std::string text;
};

std::vector<Line> g_lines;

void report(const std::string& id, bool pass, const std::string& text) {
    g_lines.push_back({id, pass, text});
    std::cout << (pass ? "PASS " : "FAIL ") << id << "  " << text << std::endl;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SeqDpOptions seqdp_single_thread() {
    SeqDpOptions o;
    o.threads = 1;
    return o;
}

// Plans collected for the constraint suite.
struct PlanCheck {
    std::size_t checked = 0;
    std::size_t violations = 0;
    std::size_t cap_breaches = 0;
    std::string first;

    void plans(const std::string& where, std::span<const ChargingPlan> p, const FleetInstance& inst) {
        ++checked;
        const auto v = validate_fleet(p, inst, VALIDATION_TOL);
        violations += v.size();
        if (!v.empty() && first.empty()) first = where + ": " + v.front().describe();
    }
    void seqdp(const std::string& where, const TariffCandidateResult& best, const FleetInstance& inst) {
        plans(where + " seqdp", best.plans, inst);
        for (double a : aggregate_power(best.plans, inst.grid.size())) {
            if (a > best.p_max_tariff + VALIDATION_TOL) {
                ++cap_breaches;
                if (first.empty()) first = where + ": aggregate " + std::to_string(a) + " above the tariff level";
            }
        }
    }
};

PlanCheck g_plans;

// ---------------------------------------------------------------------------------------------

void ac1() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    std::size_t instances = 0, feasible = 0, mismatches = 0;
    double worst = 0.0;
    std::uniform_int_distribution<int> steps(2, 6);
    std::uniform_int_distribution<int> cap(0, 3);
    DpConfig strict;
    strict.boundary_penalty = 0.0;
    while (instances < 2 * AC1_MIN_INSTANCES) {
        const FleetInstance inst = oracle::tiny_fleet(rng, 1, static_cast<std::size_t>(steps(rng)), 1.0, 10.0);
        const VehicleProfile& p = inst.profiles[0];
        const auto prices = inst.prices.step_prices(inst.grid);
        const auto dur = inst.grid.durations();
        std::vector<double> caps(dur.size());
        for (double& c : caps) c = cap(rng);
        const auto brute = oracle::enumerate_vehicle(p, prices, dur, caps, 1.0);
        ++instances;
        feasible += brute ? 1 : 0;
        for (const DpConfig& cfg : {DpConfig{}, strict}) {
            const auto s = solve_vehicle(VehicleDpInput{p, prices, dur, caps}, cfg);
            if (s.has_value() != brute.has_value()) {
                ++mismatches;
            } else if (s) {
                const double d = std::abs(s->cost - brute->cost);
                worst = std::max(worst, d);
                if (d > DP_EXACT_TOL) ++mismatches;
            }
        }
    }
    const double secs = seconds_since(t0);
    report("AC1", mismatches == 0 && instances >= AC1_MIN_INSTANCES && secs < AC1_TIME_S,
           fmt("DP equals enumeration on %zu tiny instances (%zu feasible), both interpolation modes: %zu mismatches, "
               "max |diff| %.2e (tol %.0e), %.2f s (limit %.0f s)",
               instances, feasible, mismatches, worst, DP_EXACT_TOL, secs, AC1_TIME_S));
}

void ac2() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(202);
    std::size_t feasible = 0, skipped = 0, order_fail = 0, bound_fail = 0, seqdp_infeasible = 0;
    double worst_slack = INF;
    std::uniform_int_distribution<int> steps(3, 6);
    while (feasible < AC2_MIN_INSTANCES + 10) {
        const std::size_t K = (feasible % 3 == 2) ? 3 : 2;
        const std::size_t T = K == 3 ? 3 : static_cast<std::size_t>(steps(rng));
        const FleetInstance inst = oracle::tiny_fleet(rng, K, T, 1.0, K == 3 ? 5.0 : 4.0, 2, 0.25, 3);
        if (joint_schedule_count(inst, 1.0) > 2e6) continue;
        const auto brute = joint_bruteforce(inst, 1.0);
        if (!brute) {
            ++skipped;
            continue;
        }
        ++feasible;
        const FleetLpResult lp = solve_fleet_lp(inst);
        const SeqDpResult s = plan_month(inst, seqdp_single_thread());
        if (!lp.optimal() || lp.total_cost > brute->total_cost + ORDER_TOL) ++order_fail;
        if (s.feasible()) {
            if (brute->total_cost > s.best().total_cost + ORDER_TOL) ++order_fail;
            g_plans.seqdp("AC2", s.best(), inst);
        } else {
            ++seqdp_infeasible; // infinite SeqDP cost keeps the ordering
        }
        if (lp.optimal()) g_plans.plans("AC2 lp", lp.plans, inst);
        // rounding every LP power up to the action grid: ΔP per vehicle on energy and on the peak
        const auto prices = inst.prices.step_prices(inst.grid);
        const auto dur = inst.grid.durations();
        double price_time = 0.0;
        for (std::size_t t = 0; t < dur.size(); ++t) price_time += prices[t] * dur[t];
        const double bound = static_cast<double>(K) * 1.0 * (price_time + inst.tariff.c_m);
        const double gap = brute->total_cost - lp.total_cost;
        worst_slack = std::min(worst_slack, bound - gap);
        if (gap > bound + ORDER_TOL) ++bound_fail;
    }
    const double secs = seconds_since(t0);
    report("AC2", order_fail == 0 && bound_fail == 0 && feasible >= AC2_MIN_INSTANCES && secs < AC2_TIME_S,
           fmt("LP <= brute force <= SeqDP on %zu feasible instances (K<=3, T<=6; %zu infeasible skipped, %zu SeqDP "
               "infeasible): %zu order failures, %zu bound failures, min bound slack %.4f, %.2f s (limit %.0f s)",
               feasible, skipped, seqdp_infeasible, order_fail, bound_fail, worst_slack, secs, AC2_TIME_S));
}

struct SweepResult {
    std::vector<SweepRun> runs;
    double seconds = 0.0;
    std::size_t seqdp_infeasible = 0;
    std::size_t lp_failed = 0;
};

SweepResult g_sweep;

void run_sweep() {
    const auto t0 = Clock::now();
    for (std::size_t K : {3, 10, 20, 30}) {
        for (std::uint64_t seed = 1; seed <= AC4_SEEDS; ++seed) {
            const FleetInstance inst = regression_fleet(K, seed);
            const std::string where = fmt("K=%zu seed=%llu", K, static_cast<unsigned long long>(seed));
            auto t = Clock::now();
            const FleetLpResult lp = solve_fleet_lp(inst);
            const double lp_s = seconds_since(t);
            t = Clock::now();
            const SeqDpResult s = plan_month(inst, seqdp_single_thread());
            const double dp_s = seconds_since(t);
            if (!lp.optimal()) {
                ++g_sweep.lp_failed;
                std::cout << "  sweep " << where << ": LP " << to_string(lp.lp.status) << std::endl;
                continue;
            }
            g_plans.plans("AC4 " + where + " lp", lp.plans, inst);
            if (!s.feasible()) {
                ++g_sweep.seqdp_infeasible;
                std::cout << "  sweep " << where << ": SeqDP infeasible" << std::endl;
                continue;
            }
            g_plans.seqdp("AC4 " + where, s.best(), inst);
            SweepRun r;
            r.vehicles = K;
            r.seed = seed;
            r.lp_total = lp.total_cost;
            r.seqdp_total = s.best().total_cost;
            r.lp_peak_kw = lp.peak_variable_kw;
            r.seqdp_peak_kw = s.best().p_max_tariff;
            r.cost_gap = relative_gap(r.seqdp_total, r.lp_total);
            r.peak_gap = relative_gap(r.seqdp_peak_kw, r.lp_peak_kw);
            r.lp_s = lp_s;
            r.seqdp_s = dp_s;
            g_sweep.runs.push_back(r);
            std::cout << fmt("  sweep %s: gap %.2f%%, peak gap %.1f%%, lp %.1f s, seqdp %.1f s", where.c_str(),
                             100 * r.cost_gap, 100 * r.peak_gap, lp_s, dp_s)
                      << std::endl;
        }
    }
    g_sweep.seconds = seconds_since(t0);
}

void ac4() {
    run_sweep();
    const auto groups = summarize_sweep(g_sweep.runs);
    const std::size_t expected = 4 * AC4_SEEDS;
    const bool complete = g_sweep.runs.size() == expected;
    std::ostringstream per_k;
    bool max_ok = complete, med_ok = complete, peak_ok = complete;
    for (const SweepGroup& g : groups) {
        per_k << fmt(" K=%zu: median %.2f%% max %.2f%% peak max %.1f%%;", g.vehicles, 100 * g.median_cost_gap,
                     100 * g.max_cost_gap, 100 * g.max_peak_gap);
        max_ok = max_ok && g.max_cost_gap <= AC4_MAX_GAP;
        med_ok = med_ok && g.median_cost_gap <= AC4_MEDIAN_GAP;
        peak_ok = peak_ok && g.max_peak_gap <= AC4_MAX_PEAK_GAP;
    }
    const std::string runs = fmt("%zu/%zu runs (%zu LP failures, %zu SeqDP infeasible)", g_sweep.runs.size(), expected,
                                 g_sweep.lp_failed, g_sweep.seqdp_infeasible);
    report("AC4a", max_ok, fmt("SeqDP cost gap vs LP <= %.0f%% in every run, %s;", 100 * AC4_MAX_GAP, runs.c_str()) +
                               per_k.str());
    report("AC4b", med_ok, fmt("median cost gap <= %.0f%% per fleet size", 100 * AC4_MEDIAN_GAP));
    report("AC4c", peak_ok, fmt("peak gap vs LP <= %.0f%% in every run", 100 * AC4_MAX_PEAK_GAP));
    report("AC4d", g_sweep.seconds < AC4_TIME_S,
           fmt("sweep runtime %.1f s (limit %.0f s), SeqDP single-threaded", g_sweep.seconds, AC4_TIME_S));
}

void ac5() {
    double sum[4] = {0, 0, 0, 0};
    double low[4] = {1, 1, 1, 1};
    std::ostringstream months;
    std::size_t n = 0;
    bool solved = true;
    for (int m = 1; m <= 12; ++m) {
        const std::string month = fmt("2022-%02d", m);
        const ThreeShuttleMonth ts = three_shuttle_month(month);
        const FleetInstance& inst = ts.instance;
        const UncontrolledResult u = uncontrolled_baseline(ts.sessions, inst);
        const SeqDpResult s = plan_month(inst, seqdp_single_thread());
        const FleetLpResult lp = solve_fleet_lp(inst);
        if (!s.feasible() || !lp.optimal() || !(u.cost.total() > 0.0) || !(u.cost.peak_kw > 0.0)) {
            solved = false;
            months << ' ' << month << ":unsolved";
            continue;
        }
        g_plans.seqdp("AC5 " + month, s.best(), inst);
        g_plans.plans("AC5 " + month + " lp", lp.plans, inst);
        const double red[4] = {1.0 - s.best().total_cost / u.cost.total(), 1.0 - s.best().p_max_tariff / u.cost.peak_kw,
                               1.0 - lp.total_cost / u.cost.total(), 1.0 - lp.peak_variable_kw / u.cost.peak_kw};
        for (int i = 0; i < 4; ++i) {
            sum[i] += red[i];
            low[i] = std::min(low[i], red[i]);
        }
        ++n;
    }
    double mean[4];
    bool pass = solved && n == 12;
    for (int i = 0; i < 4; ++i) {
        mean[i] = n ? sum[i] / static_cast<double>(n) : 0.0;
        pass = pass && mean[i] >= AC5_MEAN_REDUCTION && low[i] >= AC5_MONTH_FLOOR;
    }
    report("AC5", pass,
           fmt("three-shuttle preset, 12 months of 2022, reductions vs uncontrolled (mean / worst month): SeqDP cost "
               "%.1f%%/%.1f%%, peak %.1f%%/%.1f%%; LP cost %.1f%%/%.1f%%, peak %.1f%%/%.1f%% (need mean >= %.0f%%, "
               "month >= %.0f%%)",
               100 * mean[0], 100 * low[0], 100 * mean[1], 100 * low[1], 100 * mean[2], 100 * low[2], 100 * mean[3],
               100 * low[3], 100 * AC5_MEAN_REDUCTION, 100 * AC5_MONTH_FLOOR) +
               months.str());
}

void ac6() {
    std::size_t pairs = 0, lp_decrease = 0, dp_decrease = 0, dp_newly_infeasible = 0;
    double worst_lp = INF, worst_dp = INF;
    for (std::size_t K : {3, 10}) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const FleetInstance base = regression_fleet(K, seed);
            FleetInstance tight = base;
            for (VehicleProfile& p : tight.profiles) p.battery.soc_min = AC6_SOC_MIN;
            const FleetLpResult lp0 = solve_fleet_lp(base);
            const FleetLpResult lp1 = solve_fleet_lp(tight);
            const SeqDpResult s0 = plan_month(base, seqdp_single_thread());
            const SeqDpResult s1 = plan_month(tight, seqdp_single_thread());
            ++pairs;
            const double l0 = lp0.optimal() ? lp0.total_cost : INF;
            const double l1 = lp1.optimal() ? lp1.total_cost : INF;
            if (l0 < INF && l1 < l0 - ORDER_TOL * std::max(1.0, l0)) ++lp_decrease;
            if (l0 < INF) worst_lp = std::min(worst_lp, l1 - l0);
            if (lp0.optimal()) g_plans.plans("AC6 lp", lp0.plans, base);
            if (lp1.optimal()) g_plans.plans("AC6 lp tight", lp1.plans, tight);
            const double quantum = base.tariff.c_m * 1.0;
            if (s0.feasible() && s1.feasible()) {
                const double d = s1.best().total_cost - s0.best().total_cost;
                worst_dp = std::min(worst_dp, d);
                if (d < -quantum - ORDER_TOL) ++dp_decrease;
                g_plans.seqdp("AC6", s1.best(), tight);
            } else if (s0.feasible()) {
                ++dp_newly_infeasible; // an infinite cost is not a decrease
            }
        }
    }
    report("AC6", lp_decrease == 0 && dp_decrease == 0,
           fmt("soc_min 20%% -> %.0f%% on %zu regression fleets (K in {3,10}, seeds 1..3): LP decreases %zu (min change "
               "%+.4f), SeqDP decreases beyond c_m*dP %zu (min change %+.4f), SeqDP newly infeasible %zu",
               AC6_SOC_MIN, pairs, lp_decrease, worst_lp, dp_decrease, worst_dp, dp_newly_infeasible));
}

void ac7() {
    std::vector<double> lp_s, dp_s;
    std::ostringstream detail;
    bool solved = true;
    for (std::size_t K : {10, 30, 50}) {
        const FleetInstance inst = regression_fleet(K, 1);
        double best_lp = INF, best_dp = INF;
        const int repeats = K == 50 ? 1 : AC7_REPEATS;
        for (int r = 0; r < repeats; ++r) {
            auto t = Clock::now();
            const FleetLpResult lp = solve_fleet_lp(inst);
            best_lp = std::min(best_lp, seconds_since(t));
            t = Clock::now();
            const SeqDpResult s = plan_month(inst, seqdp_single_thread());
            best_dp = std::min(best_dp, seconds_since(t));
            if (!lp.optimal() || !s.feasible()) solved = false;
            if (r == 0 && lp.optimal()) g_plans.plans(fmt("AC7 K=%zu lp", K), lp.plans, inst);
            if (r == 0 && s.feasible()) g_plans.seqdp(fmt("AC7 K=%zu", K), s.best(), inst);
        }
        lp_s.push_back(best_lp);
        dp_s.push_back(best_dp);
        detail << fmt(" K=%zu: LP %.2f s, SeqDP %.2f s, ratio %.3f;", K, best_lp, best_dp, best_lp / best_dp);
    }
    const double r10 = lp_s[0] / dp_s[0], r30 = lp_s[1] / dp_s[1], r50 = lp_s[2] / dp_s[2];
    const bool monotone = r30 >= r10 - RATIO_TOL && r50 >= r30 - RATIO_TOL;
    const double exponent = std::log(dp_s[2] / dp_s[0]) / std::log(5.0);
    report("AC7a", solved && monotone, "LP/SeqDP runtime ratio non-decreasing in K (minimum over repeats);" + detail.str());
    report("AC7b", solved && exponent < 3.0,
           fmt("SeqDP runtime growth exponent log(t50/t10)/log 5 = %.2f (must be < 3)", exponent));
}

void ac3() {
    report("AC3", g_plans.checked > 0 && g_plans.violations == 0 && g_plans.cap_breaches == 0,
           fmt("%zu fleet plan sets validated (tol %.0e): %zu violations, %zu aggregate steps above the winning tariff "
               "level",
               g_plans.checked, VALIDATION_TOL, g_plans.violations, g_plans.cap_breaches) +
               (g_plans.first.empty() ? "" : "; first: " + g_plans.first));
}

void ac8() {
    const double gap = relative_gap(41.14, 40.25);
    report("AC8", std::abs(100.0 * gap - 2.21) < 0.005,
           fmt("reference example only, not reproduced (operational data not shipped): (41.14 - 40.25) / 40.25 = "
               "%.2f%%",
               100.0 * gap));
}

} // namespace

int main(int argc, char** argv) {
    std::set<std::string> only(argv + 1, argv + argc);
    const auto want = [&](const std::string& id) { return only.empty() || only.count(id) > 0; };
    const std::vector<std::pair<std::string, std::function<void()>>> steps = {
        {"AC1", ac1}, {"AC2", ac2}, {"AC4", ac4}, {"AC5", ac5}, {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8},
    };
    try {
        for (const auto& [id, f] : steps) {
            if (want(id)) f();
        }
        // the constraint suite covers the plans produced by the criteria above
        if (want("AC3")) ac3();
    } catch (const std::exception& e) {
        std::cout << "FAIL internal  " << e.what() << std::endl;
        return 2;
    }
    std::size_t failed = 0;
    for (const Line& l : g_lines) failed += l.pass ? 0 : 1;
    std::cout << (failed ? "acceptance: " + std::to_string(failed) + " of " + std::to_string(g_lines.size()) +
                               " criteria failed"
                         : "acceptance: all " + std::to_string(g_lines.size()) + " criteria passed")
              << std::endl;
    return failed ? 1 : 0;
}
