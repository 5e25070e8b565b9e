#ifndef FLEETCHARGE_LP_BENCHMARK_HPP
#define FLEETCHARGE_LP_BENCHMARK_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fleetcharge/core_model.hpp"
#include "fleetcharge/cost.hpp"
#include "fleetcharge/lp_problem.hpp"
#include "fleetcharge/lp_solve.hpp"

namespace fleetcharge {

enum class LpFormulation {
    /// P_k,t plus one peak variable; SoC limits as explicit cumulative sums.
    Cumulative,
    /// Adds SoC state variables and per-step peak copies so every row stays short.
    StateSpace,
    /// Cumulative when the cumulative rows stay small, otherwise state-space.
    Auto,
};

std::string to_string(LpFormulation f);

/// Where each decision lives in the LP vector.
struct FleetLpLayout {
    LpFormulation formulation = LpFormulation::Cumulative;
    std::size_t vehicles = 0;
    std::size_t steps = 0;

    std::size_t power(std::size_t k, std::size_t t) const { return k * steps + t; }
    /// Peak variable carrying the demand charge.
    std::size_t peak() const { return vehicles * steps; }
    /// State-space only: SoC after step t (t = 0..T−1).
    std::size_t soc_after(std::size_t k, std::size_t t) const { return vehicles * steps + steps + k * steps + t; }
};

struct FleetLp {
    LpProblem problem;
    FleetLpLayout layout;
};

/// Charging upper bound u_k,t · p_max_charger.
double power_upper_bound(const VehicleProfile& profile, std::size_t t);

/// Cumulative-form LP: K·T + 1 variables; T aggregate rows, 2·K·T cumulative rows (SoC after
/// every step, both sides) and 2·K terminal rows.
FleetLp build_lp(const FleetInstance& instance);

/// Equivalent LP with explicit SoC variables, dynamics equalities and a chain of peak copies.
FleetLp build_lp_state_space(const FleetInstance& instance);

FleetLp build_lp(const FleetInstance& instance, LpFormulation formulation);

struct FleetLpOptions {
    LpFormulation formulation = LpFormulation::Auto;
    LpOptions solver;
};

struct FleetLpResult {
    LpResult lp;
    LpFormulation formulation = LpFormulation::Cumulative;
    /// Plans in instance order, SoC rebuilt with the transition rule.
    std::vector<ChargingPlan> plans;
    double energy_cost = 0.0;
    double peak_variable_kw = 0.0;
    double demand_cost = 0.0;
    /// energy_cost + demand_cost, the LP objective.
    double total_cost = 0.0;
    double realized_peak_kw = 0.0;

    bool optimal() const { return lp.optimal(); }
};

FleetLpResult solve_fleet_lp(const FleetInstance& instance, const FleetLpOptions& options = {});

/// Plans implied by an LP vector, with powers clipped into their bounds.
std::vector<ChargingPlan> extract_plans(const FleetInstance& instance, const FleetLpLayout& layout,
                                        const std::vector<double>& x);

struct JointBruteForceResult {
    std::vector<ChargingPlan> plans;
    double energy_cost = 0.0;
    double peak_kw = 0.0;
    double demand_cost = 0.0;
    double total_cost = 0.0;
    std::size_t leaves = 0;
};

constexpr double DEFAULT_ENUMERATION_LIMIT = 1e7;

/// Number of joint schedules Π_k,t (actions of vehicle k at step t).
double joint_schedule_count(const FleetInstance& instance, double power_step);

/// Exact optimum over the discrete joint action space with the demand charge on the realized
/// peak. Throws SizeGuardError above `limit` schedules; nullopt when nothing is feasible.
std::optional<JointBruteForceResult> joint_bruteforce(const FleetInstance& instance, double power_step,
                                                      double limit = DEFAULT_ENUMERATION_LIMIT);

} // namespace fleetcharge

#endif // FLEETCHARGE_LP_BENCHMARK_HPP
