#ifndef FLEETCHARGE_DP_SOLVER_HPP
#define FLEETCHARGE_DP_SOLVER_HPP

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "fleetcharge/core_model.hpp"

namespace fleetcharge {

constexpr double INF = std::numeric_limits<double>::infinity();

struct DpConfig {
    double soc_step = 1.0;   ///< SoC grid resolution, percent
    double power_step = 1.0; ///< action resolution ΔP, kW
    /// Search budget of the forward pass (frames visited, including backtracking).
    std::size_t max_forward_nodes = 2'000'000;
    /// Interpolating next to an infeasible level: 0 makes the result +infinity; a positive value
    /// (currency) stands in for the infinite neighbour, so the blend carries a penalty proportional
    /// to its weight. With 0 the finite set erodes by one level per fractional depletion step and
    /// feasible vehicles get rejected; the forward pass checks true feasibility either way.
    double boundary_penalty = 1000.0;

    /// Throws unless the steps are positive and `p_max / power_step` is a whole number.
    void validate(double p_max_kw) const;
    /// N = P_max / ΔP + 1.
    std::size_t action_count(double p_max_kw) const;
};

/// SoC levels soc_min, soc_min + step, ..., soc_max. The last cell is shorter when the range is
/// not a multiple of the step.
class SocGrid {
  public:
    SocGrid() = default;
    SocGrid(double soc_min, double soc_max, double step);

    std::size_t size() const { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }
    double min() const { return points_.front(); }
    double max() const { return points_.back(); }
    const std::vector<double>& points() const { return points_; }

  private:
    std::vector<double> points_;
    double step_ = 1.0;

    friend class CostToGo;
};

/// J_t over the SoC grid for t = 0..T. Infeasible states hold +infinity.
class CostToGo {
  public:
    CostToGo(SocGrid grid, std::size_t steps, double boundary_penalty = 0.0);

    const SocGrid& grid() const { return grid_; }
    std::size_t steps() const { return steps_; }

    double at(std::size_t t, std::size_t i) const { return values_[t * grid_.size() + i]; }
    double& at(std::size_t t, std::size_t i) { return values_[t * grid_.size() + i]; }

    /// Linear interpolation in SoC between the two adjacent grid levels. Values off the grid range
    /// are +infinity, as are values between levels where either neighbour is infinite unless a
    /// boundary penalty is set.
    double interpolate(std::size_t t, double soc) const;

  private:
    SocGrid grid_;
    std::size_t steps_;
    double penalty_ = 0.0;
    std::vector<double> values_;
};

/// Resolved per-step data for one vehicle DP.
struct VehicleDpInput {
    const VehicleProfile& profile;
    std::span<const double> prices;    ///< currency per kWh, per step
    std::span<const double> durations; ///< hours, per step
    std::span<const double> caps;      ///< kW, per step; empty means only the charger limit applies
};

CostToGo backward_pass(const VehicleDpInput& in, const DpConfig& cfg);

struct VehicleSolution {
    ChargingPlan plan;
    double cost = 0.0;          ///< energy cost accumulated along the recovered plan
    double expected_cost = 0.0; ///< J_0(soc_init) from the backward pass
    std::size_t forward_nodes = 0;
};

/// Recovers the charging sequence from the continuous (unsnapped) SoC by picking the cheapest
/// action against interpolated J at each step. Dead ends, which can appear because interpolation
/// is optimistic between grid levels, are resolved by backtracking to the next-best action.
std::optional<VehicleSolution> forward_pass(const CostToGo& ctg, const VehicleDpInput& in, const DpConfig& cfg);

/// Minimum-energy-cost plan for one vehicle under per-step power caps, or nullopt when no
/// discrete schedule reaches the terminal window.
std::optional<VehicleSolution> solve_vehicle(const VehicleDpInput& in, const DpConfig& cfg);

std::optional<VehicleSolution> solve_vehicle(const VehicleProfile& profile, const TimeGrid& grid,
                                             const SpotPriceSeries& prices, std::span<const double> caps,
                                             const DpConfig& cfg);

} // namespace fleetcharge

#endif // FLEETCHARGE_DP_SOLVER_HPP
