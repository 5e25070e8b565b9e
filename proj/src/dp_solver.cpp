#include "fleetcharge/dp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fleetcharge/errors.hpp"

namespace fleetcharge {

namespace {

constexpr double SOC_TOL = 1e-9;
constexpr double COST_TIE = 1e-12;

struct StepData {
    double soc_per_action; ///< SoC gain of one ΔP over the step
    double cost_per_action;
    double depletion;
    std::size_t actions;
};

std::vector<StepData> resolve_steps(const VehicleDpInput& in, const DpConfig& cfg) {
    const VehicleProfile& p = in.profile;
    const std::size_t T = p.steps.size();
    if (in.prices.size() != T || in.durations.size() != T || (!in.caps.empty() && in.caps.size() != T)) {
        throw AlignmentError("vehicle " + p.vehicle_id + ": DP inputs are not aligned with its profile");
    }
    cfg.validate(p.p_max_charger);
    std::vector<StepData> out(T);
    for (std::size_t t = 0; t < T; ++t) {
        double cap = p.p_max_charger;
        if (!in.caps.empty()) {
            if (in.caps[t] < -1e-9) {
                throw std::invalid_argument("vehicle " + p.vehicle_id + ": negative power cap at step " +
                                            std::to_string(t));
            }
            cap = std::min(cap, std::max(0.0, in.caps[t]));
        }
        StepData& s = out[t];
        s.soc_per_action = p.battery.soc_gain(cfg.power_step, in.durations[t]);
        s.cost_per_action = cfg.power_step * in.prices[t] * in.durations[t];
        s.depletion = p.steps[t].delta_soc_op;
        s.actions = p.steps[t].available ? static_cast<std::size_t>(std::floor(cap / cfg.power_step + 1e-9)) + 1 : 1;
    }
    return out;
}

} // namespace

void DpConfig::validate(double p_max_kw) const {
    if (!(soc_step > 0.0) || !(power_step > 0.0)) {
        throw std::invalid_argument("DP resolutions must be positive");
    }
    const double n = p_max_kw / power_step;
    if (std::abs(n - std::round(n)) > 1e-9) {
        throw std::invalid_argument("charger power " + std::to_string(p_max_kw) +
                                    " kW is not a multiple of the power step");
    }
}

std::size_t DpConfig::action_count(double p_max_kw) const {
    validate(p_max_kw);
    return static_cast<std::size_t>(std::llround(p_max_kw / power_step)) + 1;
}

SocGrid::SocGrid(double soc_min, double soc_max, double step) : step_(step) {
    if (!(step > 0.0) || !(soc_max > soc_min)) {
        throw std::invalid_argument("SoC grid needs soc_min < soc_max and a positive step");
    }
    for (std::size_t i = 0;; ++i) {
        const double v = soc_min + static_cast<double>(i) * step;
        if (v >= soc_max - 1e-9) {
            break;
        }
        points_.push_back(v);
    }
    points_.push_back(soc_max);
}

CostToGo::CostToGo(SocGrid grid, std::size_t steps, double boundary_penalty)
    : grid_(std::move(grid)), steps_(steps), penalty_(boundary_penalty), values_((steps + 1) * grid_.size(), INF) {
    if (!(penalty_ >= 0.0)) {
        throw std::invalid_argument("boundary penalty must be non-negative");
    }
}

double CostToGo::interpolate(std::size_t t, double soc) const {
    const std::size_t S = grid_.size();
    if (soc < grid_.min() - SOC_TOL || soc > grid_.max() + SOC_TOL) {
        return INF;
    }
    const double pos = (soc - grid_.min()) / grid_.step_;
    std::size_t i = pos <= 0.0 ? 0 : static_cast<std::size_t>(pos);
    if (i >= S - 1) {
        i = S - 2;
    }
    const double lo = grid_[i];
    const double hi = grid_[i + 1];
    const double frac = (soc - lo) / (hi - lo);
    const double a = at(t, i);
    const double b = at(t, i + 1);
    if (frac <= SOC_TOL) {
        return a;
    }
    if (frac >= 1.0 - SOC_TOL) {
        return b;
    }
    if (a == INF && b == INF) {
        return INF;
    }
    if (a == INF || b == INF) {
        if (penalty_ == 0.0) {
            return INF;
        }
        const double pa = a == INF ? penalty_ : a;
        const double pb = b == INF ? penalty_ : b;
        return pa + frac * (pb - pa);
    }
    return a + frac * (b - a);
}

CostToGo backward_pass(const VehicleDpInput& in, const DpConfig& cfg) {
    const BatteryParams& bat = in.profile.battery;
    const auto steps = resolve_steps(in, cfg);
    const std::size_t T = steps.size();
    CostToGo ctg(SocGrid(bat.soc_min, bat.soc_max, cfg.soc_step), T, cfg.boundary_penalty);
    const SocGrid& g = ctg.grid();
    const std::size_t S = g.size();
    for (std::size_t i = 0; i < S; ++i) {
        ctg.at(T, i) = std::abs(g[i] - bat.soc_target) <= bat.epsilon + SOC_TOL ? 0.0 : INF;
    }
    for (std::size_t t = T; t-- > 0;) {
        const StepData& s = steps[t];
        for (std::size_t i = 0; i < S; ++i) {
            double best = INF;
            for (std::size_t a = 0; a < s.actions; ++a) {
                const double next = g[i] + static_cast<double>(a) * s.soc_per_action - s.depletion;
                if (next > g.max() + SOC_TOL) {
                    break;
                }
                if (next < g.min() - SOC_TOL) {
                    continue;
                }
                const double v = static_cast<double>(a) * s.cost_per_action + ctg.interpolate(t + 1, next);
                if (v < best) {
                    best = v;
                }
            }
            ctg.at(t, i) = best;
        }
    }
    return ctg;
}

std::optional<VehicleSolution> forward_pass(const CostToGo& ctg, const VehicleDpInput& in, const DpConfig& cfg) {
    const BatteryParams& bat = in.profile.battery;
    const auto steps = resolve_steps(in, cfg);
    const std::size_t T = steps.size();
    if (ctg.steps() != T) {
        throw AlignmentError("cost-to-go horizon does not match the vehicle profile");
    }
    const double expected = ctg.interpolate(0, bat.soc_init);
    if (expected == INF) {
        return std::nullopt;
    }

    struct Option {
        double value;
        std::size_t action;
    };
    struct Frame {
        double soc;
        std::vector<Option> options;
        std::size_t next = 0;
    };

    const auto expand = [&](std::size_t t, double soc) {
        Frame f{soc, {}, 0};
        const StepData& s = steps[t];
        for (std::size_t a = 0; a < s.actions; ++a) {
            const double nxt = soc + static_cast<double>(a) * s.soc_per_action - s.depletion;
            if (nxt > bat.soc_max + SOC_TOL) {
                break;
            }
            if (nxt < bat.soc_min - SOC_TOL) {
                continue;
            }
            const double v = static_cast<double>(a) * s.cost_per_action + ctg.interpolate(t + 1, nxt);
            if (v < INF) {
                f.options.push_back({v, a});
            }
        }
        // Cheapest first; equal costs prefer the smaller power.
        std::stable_sort(f.options.begin(), f.options.end(), [](const Option& x, const Option& y) {
            const double tie = COST_TIE * (1.0 + std::abs(x.value));
            if (x.value < y.value - tie) {
                return true;
            }
            if (y.value < x.value - tie) {
                return false;
            }
            return x.action < y.action;
        });
        return f;
    };

    std::vector<Frame> stack;
    stack.reserve(T + 1);
    stack.push_back(expand(0, bat.soc_init));
    std::size_t nodes = 1;
    std::vector<std::size_t> chosen(T, 0);
    while (!stack.empty()) {
        const std::size_t t = stack.size() - 1;
        if (t == T) {
            break;
        }
        Frame& f = stack.back();
        if (f.next >= f.options.size()) {
            stack.pop_back();
            continue;
        }
        if (++nodes > cfg.max_forward_nodes) {
            return std::nullopt;
        }
        const std::size_t a = f.options[f.next++].action;
        chosen[t] = a;
        const double nxt = f.soc + static_cast<double>(a) * steps[t].soc_per_action - steps[t].depletion;
        if (t + 1 == T) {
            stack.push_back(Frame{nxt, {}, 0});
        } else {
            stack.push_back(expand(t + 1, nxt));
        }
    }
    if (stack.size() != T + 1) {
        return std::nullopt;
    }
    if (std::abs(stack.back().soc - bat.soc_target) > bat.epsilon + SOC_TOL) {
        return std::nullopt;
    }

    VehicleSolution sol;
    sol.expected_cost = expected;
    sol.forward_nodes = nodes;
    sol.plan.vehicle_id = in.profile.vehicle_id;
    sol.plan.power_kw.resize(T);
    sol.plan.soc.resize(T + 1);
    for (std::size_t t = 0; t <= T; ++t) {
        sol.plan.soc[t] = stack[t].soc;
    }
    for (std::size_t t = 0; t < T; ++t) {
        sol.plan.power_kw[t] = static_cast<double>(chosen[t]) * cfg.power_step;
        sol.cost += static_cast<double>(chosen[t]) * steps[t].cost_per_action;
    }
    return sol;
}

std::optional<VehicleSolution> solve_vehicle(const VehicleDpInput& in, const DpConfig& cfg) {
    const CostToGo ctg = backward_pass(in, cfg);
    return forward_pass(ctg, in, cfg);
}

std::optional<VehicleSolution> solve_vehicle(const VehicleProfile& profile, const TimeGrid& grid,
                                             const SpotPriceSeries& prices, std::span<const double> caps,
                                             const DpConfig& cfg) {
    const auto step_prices = prices.step_prices(grid);
    const auto durations = grid.durations();
    return solve_vehicle(VehicleDpInput{profile, step_prices, durations, caps}, cfg);
}

} // namespace fleetcharge
