#include "fleetcharge/cost.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fleetcharge/errors.hpp"

namespace fleetcharge {

double energy_cost(std::span<const double> power_kw, std::span<const double> step_prices,
                   std::span<const double> durations) {
    if (power_kw.size() != step_prices.size() || power_kw.size() != durations.size()) {
        throw AlignmentError("energy cost inputs have mismatched lengths");
    }
    double sum = 0.0;
    for (std::size_t t = 0; t < power_kw.size(); ++t) {
        sum += power_kw[t] * step_prices[t] * durations[t];
    }
    return sum;
}

double energy_cost(const ChargingPlan& plan, const SpotPriceSeries& prices, const TimeGrid& grid) {
    if (plan.power_kw.size() != grid.size()) {
        throw AlignmentError("plan for vehicle " + plan.vehicle_id + " has " + std::to_string(plan.power_kw.size()) +
                             " steps, grid has " + std::to_string(grid.size()));
    }
    double sum = 0.0;
    for (std::size_t t = 0; t < grid.size(); ++t) {
        if (plan.power_kw[t] == 0.0) {
            continue;
        }
        sum += plan.power_kw[t] * prices.price_at(grid.step(t).start) * grid.duration(t);
    }
    return sum;
}

std::vector<double> aggregate_power(std::span<const ChargingPlan> plans, std::size_t steps) {
    std::vector<double> agg(steps, 0.0);
    for (const ChargingPlan& p : plans) {
        if (p.power_kw.size() != steps) {
            throw AlignmentError("plan for vehicle " + p.vehicle_id + " is not aligned with the grid");
        }
        for (std::size_t t = 0; t < steps; ++t) {
            agg[t] += p.power_kw[t];
        }
    }
    return agg;
}

CostBreakdown fleet_total_cost(std::span<const ChargingPlan> plans, const FleetInstance& instance) {
    if (plans.size() != instance.profiles.size()) {
        throw AlignmentError("expected " + std::to_string(instance.profiles.size()) + " plans, got " +
                             std::to_string(plans.size()));
    }
    const auto prices = instance.prices.step_prices(instance.grid);
    const auto durations = instance.grid.durations();
    CostBreakdown out;
    for (const ChargingPlan& p : plans) {
        if (p.power_kw.size() != instance.grid.size()) {
            throw AlignmentError("plan for vehicle " + p.vehicle_id + " is not aligned with the grid");
        }
        out.energy += energy_cost(p.power_kw, prices, durations);
    }
    const auto agg = aggregate_power(plans, instance.grid.size());
    out.peak_kw = agg.empty() ? 0.0 : *std::max_element(agg.begin(), agg.end());
    out.demand = instance.tariff.c_m * out.peak_kw;
    return out;
}

std::string to_string(ConstraintKind kind) {
    switch (kind) {
    case ConstraintKind::Alignment: return "alignment";
    case ConstraintKind::PowerBounds: return "power_bounds";
    case ConstraintKind::Availability: return "availability_gating";
    case ConstraintKind::SocInitial: return "soc_initial";
    case ConstraintKind::SocTransition: return "soc_transition";
    case ConstraintKind::SocBounds: return "soc_bounds";
    case ConstraintKind::TerminalSoc: return "terminal_soc";
    case ConstraintKind::AggregateCap: return "aggregate_cap";
    }
    return "unknown";
}

std::string Violation::describe() const {
    std::ostringstream os;
    os << to_string(kind) << " violated";
    if (!vehicle_id.empty()) {
        os << " by vehicle " << vehicle_id;
    }
    os << " at step " << step << " (magnitude " << magnitude << ")";
    return os.str();
}

std::vector<Violation> validate_plan(const ChargingPlan& plan, const VehicleProfile& profile, const TimeGrid& grid,
                                     double tol) {
    std::vector<Violation> out;
    const auto push = [&](ConstraintKind k, std::size_t t, double mag) {
        out.push_back({k, t, mag, plan.vehicle_id});
    };
    const std::size_t T = grid.size();
    if (plan.power_kw.size() != T || plan.soc.size() != T + 1 || profile.steps.size() != T) {
        push(ConstraintKind::Alignment, 0,
             std::abs(static_cast<double>(plan.power_kw.size()) - static_cast<double>(T)));
        return out;
    }
    const BatteryParams& b = profile.battery;
    if (std::abs(plan.soc[0] - b.soc_init) > tol) {
        push(ConstraintKind::SocInitial, 0, std::abs(plan.soc[0] - b.soc_init));
    }
    for (std::size_t t = 0; t < T; ++t) {
        const double p = plan.power_kw[t];
        if (p < -tol) {
            push(ConstraintKind::PowerBounds, t, -p);
        } else if (p > profile.p_max_charger + tol) {
            push(ConstraintKind::PowerBounds, t, p - profile.p_max_charger);
        }
        if (!profile.steps[t].available && std::abs(p) > tol) {
            push(ConstraintKind::Availability, t, std::abs(p));
        }
        const double expected = plan.soc[t] + b.soc_gain(p, grid.duration(t)) - profile.steps[t].delta_soc_op;
        if (std::abs(plan.soc[t + 1] - expected) > tol) {
            push(ConstraintKind::SocTransition, t, std::abs(plan.soc[t + 1] - expected));
        }
    }
    for (std::size_t t = 0; t <= T; ++t) {
        const double s = plan.soc[t];
        if (s < b.soc_min - tol) {
            push(ConstraintKind::SocBounds, t, b.soc_min - s);
        } else if (s > b.soc_max + tol) {
            push(ConstraintKind::SocBounds, t, s - b.soc_max);
        }
    }
    const double miss = std::abs(plan.soc[T] - b.soc_target) - b.epsilon;
    if (miss > tol) {
        push(ConstraintKind::TerminalSoc, T, miss);
    }
    return out;
}

std::vector<Violation> validate_aggregate(std::span<const ChargingPlan> plans, std::size_t steps, double cap_kw,
                                          double tol) {
    std::vector<Violation> out;
    const auto agg = aggregate_power(plans, steps);
    for (std::size_t t = 0; t < steps; ++t) {
        if (agg[t] > cap_kw + tol) {
            out.push_back({ConstraintKind::AggregateCap, t, agg[t] - cap_kw, {}});
        }
    }
    return out;
}

std::vector<Violation> validate_fleet(std::span<const ChargingPlan> plans, const FleetInstance& instance,
                                      double tol) {
    std::vector<Violation> out;
    if (plans.size() != instance.profiles.size()) {
        out.push_back({ConstraintKind::Alignment, 0,
                       std::abs(static_cast<double>(plans.size()) - static_cast<double>(instance.profiles.size())),
                       {}});
        return out;
    }
    for (std::size_t k = 0; k < plans.size(); ++k) {
        auto v = validate_plan(plans[k], instance.profiles[k], instance.grid, tol);
        out.insert(out.end(), v.begin(), v.end());
    }
    auto agg = validate_aggregate(plans, instance.grid.size(), instance.tariff.p_grid_max, tol);
    out.insert(out.end(), agg.begin(), agg.end());
    return out;
}

} // namespace fleetcharge
