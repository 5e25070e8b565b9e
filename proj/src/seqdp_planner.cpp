#include "fleetcharge/seqdp_planner.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>

#include "fleetcharge/cost.hpp"

namespace fleetcharge {

const TariffCandidateResult& SeqDpResult::best() const {
    if (!best_index) {
        throw NoFeasibleTariff(month_id);
    }
    return candidates[*best_index];
}

double energy_requirement_kwh(const VehicleProfile& profile) {
    const BatteryParams& b = profile.battery;
    return b.capacity_kwh / 100.0 * (profile.total_depletion() + (b.soc_target - b.soc_init));
}

std::vector<std::size_t> order_vehicles(std::span<const VehicleProfile> profiles) {
    std::vector<std::size_t> idx(profiles.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> need(profiles.size());
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        need[k] = energy_requirement_kwh(profiles[k]);
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (need[a] != need[b]) {
            return need[a] > need[b];
        }
        return profiles[a].vehicle_id < profiles[b].vehicle_id;
    });
    return idx;
}

std::vector<double> residual_capacity(std::span<const ChargingPlan> prior_plans, double p_max_tariff,
                                      std::size_t steps) {
    std::vector<double> g(steps, p_max_tariff);
    for (const ChargingPlan& p : prior_plans) {
        if (p.power_kw.size() != steps) {
            throw std::logic_error("prior plan for vehicle " + p.vehicle_id + " is not aligned with the grid");
        }
        for (std::size_t t = 0; t < steps; ++t) {
            g[t] -= p.power_kw[t];
        }
    }
    for (std::size_t t = 0; t < steps; ++t) {
        if (g[t] < -1e-9) {
            throw std::logic_error("prior plans exceed the tariff level at step " + std::to_string(t));
        }
        g[t] = std::max(0.0, g[t]);
    }
    return g;
}

TariffCandidateResult evaluate_candidate(const FleetInstance& instance, std::span<const std::size_t> order,
                                         double p_max_tariff, const DpConfig& cfg) {
    const std::size_t T = instance.grid.size();
    const auto prices = instance.prices.step_prices(instance.grid);
    const auto durations = instance.grid.durations();

    TariffCandidateResult res;
    res.p_max_tariff = p_max_tariff;
    std::vector<double> residual(T, p_max_tariff);
    std::vector<ChargingPlan> plans(instance.profiles.size());
    for (std::size_t k : order) {
        const VehicleProfile& profile = instance.profiles[k];
        auto sol = solve_vehicle(VehicleDpInput{profile, prices, durations, residual}, cfg);
        if (!sol) {
            res.feasible = false;
            res.infeasible_vehicle = profile.vehicle_id;
            return res;
        }
        for (std::size_t t = 0; t < T; ++t) {
            residual[t] -= sol->plan.power_kw[t];
            if (residual[t] < -1e-9) {
                throw std::logic_error("DP exceeded the residual capacity of vehicle " + profile.vehicle_id);
            }
            residual[t] = std::max(0.0, residual[t]);
        }
        res.energy_cost += sol->cost;
        plans[k] = std::move(sol->plan);
    }
    res.feasible = true;
    res.demand_cost = instance.tariff.c_m * p_max_tariff;
    res.total_cost = res.energy_cost + res.demand_cost;
    const auto agg = aggregate_power(plans, T);
    res.realized_peak_kw = agg.empty() ? 0.0 : *std::max_element(agg.begin(), agg.end());
    res.plans = std::move(plans);
    return res;
}

SeqDpResult plan_month(const FleetInstance& instance, const SeqDpOptions& options) {
    instance.validate();
    SeqDpResult out;
    out.month_id = instance.grid.month_id();
    out.order = order_vehicles(instance.profiles);
    const auto levels = instance.tariff.candidates();
    out.candidates.resize(levels.size());

    unsigned workers = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(levels.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < levels.size(); ++i) {
            out.candidates[i] = evaluate_candidate(instance, out.order, levels[i], options.dp);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = next++; i < levels.size(); i = next++) {
                        out.candidates[i] = evaluate_candidate(instance, out.order, levels[i], options.dp);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) {
            th.join();
        }
        for (auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

    double best = INF;
    for (std::size_t i = 0; i < out.candidates.size(); ++i) {
        const auto& c = out.candidates[i];
        if (c.feasible && c.total_cost < best) {
            best = c.total_cost;
            out.best_index = i;
        }
    }
    return out;
}

} // namespace fleetcharge
