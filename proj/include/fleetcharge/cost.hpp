#ifndef FLEETCHARGE_COST_HPP
#define FLEETCHARGE_COST_HPP

#include <span>
#include <string>
#include <vector>

#include "fleetcharge/core_model.hpp"

namespace fleetcharge {

/// Σ_t P_t · c_spot,t · Δτ_t for one plan.
double energy_cost(const ChargingPlan& plan, const SpotPriceSeries& prices, const TimeGrid& grid);

/// Same sum with prices already resolved to steps.
double energy_cost(std::span<const double> power_kw, std::span<const double> step_prices,
                   std::span<const double> durations);

struct CostBreakdown {
    double energy = 0.0;
    double demand = 0.0;
    double peak_kw = 0.0;

    double total() const { return energy + demand; }
};

/// Aggregate load Σ_k P_k,t per step.
std::vector<double> aggregate_power(std::span<const ChargingPlan> plans, std::size_t steps);

/// Energy over all vehicles plus the demand charge on the realized monthly peak.
CostBreakdown fleet_total_cost(std::span<const ChargingPlan> plans, const FleetInstance& instance);

enum class ConstraintKind {
    Alignment,
    PowerBounds,
    Availability,
    SocInitial,
    SocTransition,
    SocBounds,
    TerminalSoc,
    AggregateCap,
};

std::string to_string(ConstraintKind kind);

struct Violation {
    ConstraintKind kind;
    std::size_t step = 0;
    double magnitude = 0.0;
    std::string vehicle_id;

    std::string describe() const;
};

constexpr double DEFAULT_VALIDATION_TOL = 1e-6;

/// Checks one plan against power bounds, availability gating, the SoC transition, SoC bounds
/// and the terminal window. An empty result means the plan is feasible.
std::vector<Violation> validate_plan(const ChargingPlan& plan, const VehicleProfile& profile, const TimeGrid& grid,
                                     double tol = DEFAULT_VALIDATION_TOL);

/// Steps where the aggregate load exceeds `cap_kw`.
std::vector<Violation> validate_aggregate(std::span<const ChargingPlan> plans, std::size_t steps, double cap_kw,
                                          double tol = DEFAULT_VALIDATION_TOL);

/// Every vehicle's plan plus the grid cap of the instance.
std::vector<Violation> validate_fleet(std::span<const ChargingPlan> plans, const FleetInstance& instance,
                                      double tol = DEFAULT_VALIDATION_TOL);

} // namespace fleetcharge

#endif // FLEETCHARGE_COST_HPP
