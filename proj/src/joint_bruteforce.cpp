#include <algorithm>
#include <cmath>

#include "fleetcharge/errors.hpp"
#include "fleetcharge/lp_benchmark.hpp"

namespace fleetcharge {

namespace {

constexpr double SOC_TOL = 1e-9;

std::size_t action_count(const VehicleProfile& v, std::size_t t, double power_step) {
    if (!v.steps[t].available) {
        return 1;
    }
    return static_cast<std::size_t>(std::floor(v.p_max_charger / power_step + 1e-9)) + 1;
}

class Enumerator {
  public:
    Enumerator(const FleetInstance& inst, double power_step)
        : inst_(inst), K_(inst.profiles.size()), T_(inst.grid.size()), dp_(power_step),
          prices_(inst.prices.step_prices(inst.grid)), dur_(inst.grid.durations()), power_(K_ * T_, 0.0),
          soc_(K_), reach_up_(K_, std::vector<double>(T_ + 1, 0.0)), drain_(K_, std::vector<double>(T_ + 1, 0.0)) {
        for (std::size_t k = 0; k < K_; ++k) {
            const VehicleProfile& v = inst.profiles[k];
            soc_[k] = v.battery.soc_init;
            for (std::size_t t = T_; t-- > 0;) {
                const double gain = v.battery.soc_gain(power_upper_bound(v, t), dur_[t]);
                reach_up_[k][t] = reach_up_[k][t + 1] + gain - v.steps[t].delta_soc_op;
                drain_[k][t] = drain_[k][t + 1] + v.steps[t].delta_soc_op;
            }
        }
    }

    std::optional<JointBruteForceResult> run() {
        step(0, 0, 0.0, 0.0, 0.0);
        if (!found_) {
            return std::nullopt;
        }
        JointBruteForceResult r;
        for (std::size_t k = 0; k < K_; ++k) {
            std::vector<double> p(best_power_.begin() + static_cast<long>(k * T_),
                                  best_power_.begin() + static_cast<long>((k + 1) * T_));
            r.plans.push_back(simulate_plan(inst_.profiles[k], inst_.grid, std::move(p)));
        }
        r.energy_cost = best_energy_;
        r.peak_kw = best_peak_;
        r.demand_cost = inst_.tariff.c_m * best_peak_;
        r.total_cost = r.energy_cost + r.demand_cost;
        r.leaves = leaves_;
        return r;
    }

  private:
    void step(std::size_t t, std::size_t k, double load, double peak, double energy) {
        if (found_ && energy + inst_.tariff.c_m * peak >= best_total_) {
            return;
        }
        if (t == T_) {
            ++leaves_;
            for (std::size_t j = 0; j < K_; ++j) {
                const BatteryParams& b = inst_.profiles[j].battery;
                if (std::abs(soc_[j] - b.soc_target) > b.epsilon + SOC_TOL) {
                    return;
                }
            }
            found_ = true;
            best_total_ = energy + inst_.tariff.c_m * peak;
            best_energy_ = energy;
            best_peak_ = peak;
            best_power_ = power_;
            return;
        }
        if (k == K_) {
            step(t + 1, 0, 0.0, std::max(peak, load), energy);
            return;
        }
        const VehicleProfile& v = inst_.profiles[k];
        const BatteryParams& b = v.battery;
        const double before = soc_[k];
        const std::size_t n = action_count(v, t, dp_);
        for (std::size_t a = 0; a < n; ++a) {
            const double p = static_cast<double>(a) * dp_;
            if (load + p > inst_.tariff.p_grid_max + 1e-9) {
                break;
            }
            const double next = before + b.soc_gain(p, dur_[t]) - v.steps[t].delta_soc_op;
            if (next > b.soc_max + SOC_TOL) {
                break;
            }
            if (next < b.soc_min - SOC_TOL) {
                continue;
            }
            if (next + reach_up_[k][t + 1] < b.soc_target - b.epsilon - SOC_TOL) {
                continue;
            }
            if (next - drain_[k][t + 1] > b.soc_target + b.epsilon + SOC_TOL) {
                break;
            }
            soc_[k] = next;
            power_[k * T_ + t] = p;
            step(t, k + 1, load + p, peak, energy + p * prices_[t] * dur_[t]);
        }
        soc_[k] = before;
        power_[k * T_ + t] = 0.0;
    }

    const FleetInstance& inst_;
    std::size_t K_, T_;
    double dp_;
    std::vector<double> prices_, dur_, power_, soc_;
    std::vector<std::vector<double>> reach_up_, drain_;
    bool found_ = false;
    double best_total_ = 0.0, best_energy_ = 0.0, best_peak_ = 0.0;
    std::vector<double> best_power_;
    std::size_t leaves_ = 0;
};

} // namespace

double joint_schedule_count(const FleetInstance& inst, double power_step) {
    if (!(power_step > 0.0)) {
        throw std::invalid_argument("power step must be positive");
    }
    double count = 1.0;
    for (const VehicleProfile& v : inst.profiles) {
        for (std::size_t t = 0; t < inst.grid.size(); ++t) {
            count *= static_cast<double>(action_count(v, t, power_step));
        }
    }
    return count;
}

std::optional<JointBruteForceResult> joint_bruteforce(const FleetInstance& instance, double power_step, double limit) {
    instance.validate();
    const double count = joint_schedule_count(instance, power_step);
    if (count > limit) {
        throw SizeGuardError(count, limit);
    }
    return Enumerator(instance, power_step).run();
}

} // namespace fleetcharge
