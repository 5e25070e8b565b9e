#ifndef FLEETCHARGE_SEQDP_PLANNER_HPP
#define FLEETCHARGE_SEQDP_PLANNER_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fleetcharge/core_model.hpp"
#include "fleetcharge/dp_solver.hpp"

namespace fleetcharge {

struct TariffCandidateResult {
    double p_max_tariff = 0.0;
    bool feasible = false;
    double energy_cost = 0.0;
    double demand_cost = 0.0;
    double total_cost = INF;
    double realized_peak_kw = 0.0;
    /// One plan per instance profile, in instance order; empty when infeasible.
    std::vector<ChargingPlan> plans;
    /// Vehicle whose DP had no feasible schedule under the residual capacity.
    std::string infeasible_vehicle;
};

class NoFeasibleTariff : public std::runtime_error {
  public:
    explicit NoFeasibleTariff(std::string month)
        : std::runtime_error("no feasible peak-tariff candidate for month " + month), month_(std::move(month)) {}
    const std::string& month() const { return month_; }

  private:
    std::string month_;
};

struct SeqDpResult {
    std::string month_id;
    std::vector<TariffCandidateResult> candidates;
    std::optional<std::size_t> best_index;
    /// Profile indices in the order they were planned.
    std::vector<std::size_t> order;

    bool feasible() const { return best_index.has_value(); }
    /// Throws NoFeasibleTariff when every candidate failed.
    const TariffCandidateResult& best() const;
};

struct SeqDpOptions {
    DpConfig dp;
    /// Worker threads for the candidate sweep; 0 picks the hardware concurrency.
    unsigned threads = 0;
};

/// capacity/100 · (Σ_t ΔSoC_op + soc_target − soc_init), kWh.
double energy_requirement_kwh(const VehicleProfile& profile);

/// Profile indices sorted by descending energy requirement, ties by ascending vehicle id.
std::vector<std::size_t> order_vehicles(std::span<const VehicleProfile> profiles);

/// G_t = p_max_tariff − Σ_n P_n,t over the plans allocated so far.
/// Throws std::logic_error if the prior plans already exceed the tariff level.
std::vector<double> residual_capacity(std::span<const ChargingPlan> prior_plans, double p_max_tariff,
                                      std::size_t steps);

/// Sequential allocation for a single tariff level (the inner loop of the candidate sweep).
TariffCandidateResult evaluate_candidate(const FleetInstance& instance, std::span<const std::size_t> order,
                                         double p_max_tariff, const DpConfig& cfg);

/// Sweeps every tariff candidate, allocates vehicles sequentially against the residual grid
/// capacity, adds the demand charge on the candidate level and keeps the cheapest.
SeqDpResult plan_month(const FleetInstance& instance, const SeqDpOptions& options = {});

} // namespace fleetcharge

#endif // FLEETCHARGE_SEQDP_PLANNER_HPP
