#include <algorithm>
#include <cmath>
#include <limits>

#include "fleetcharge/lp_benchmark.hpp"

namespace fleetcharge {

std::string to_string(LpFormulation f) {
    switch (f) {
    case LpFormulation::Cumulative: return "cumulative";
    case LpFormulation::StateSpace: return "state_space";
    case LpFormulation::Auto: return "auto";
    }
    return "unknown";
}

double power_upper_bound(const VehicleProfile& profile, std::size_t t) {
    return profile.steps[t].available ? profile.p_max_charger : 0.0;
}

namespace {

std::string pname(const FleetInstance& inst, std::size_t k, std::size_t t) {
    return "P_" + inst.profiles[k].vehicle_id + "_" + std::to_string(t);
}

double terminal_low(const BatteryParams& b) { return std::max(b.soc_min, b.soc_target - b.epsilon); }
double terminal_high(const BatteryParams& b) { return std::min(b.soc_max, b.soc_target + b.epsilon); }

void add_power_variables(LpProblem& lp, const FleetInstance& inst, const std::vector<double>& prices,
                         const std::vector<double>& dur) {
    for (std::size_t k = 0; k < inst.profiles.size(); ++k) {
        for (std::size_t t = 0; t < inst.grid.size(); ++t) {
            lp.add_variable(pname(inst, k, t), prices[t] * dur[t], 0.0, power_upper_bound(inst.profiles[k], t));
        }
    }
}

} // namespace

FleetLp build_lp(const FleetInstance& inst) {
    inst.validate();
    const std::size_t K = inst.profiles.size();
    const std::size_t T = inst.grid.size();
    const auto prices = inst.prices.step_prices(inst.grid);
    const auto dur = inst.grid.durations();
    FleetLp out;
    out.layout = {LpFormulation::Cumulative, K, T};
    LpProblem& lp = out.problem;
    add_power_variables(lp, inst, prices, dur);
    const std::size_t peak = lp.add_variable("P_max_tariff", inst.tariff.c_m, 0.0, inst.tariff.p_grid_max);

    for (std::size_t t = 0; t < T; ++t) {
        LpRow r;
        r.family = RowFamily::Aggregate;
        r.name = "aggregate_" + std::to_string(t);
        for (std::size_t k = 0; k < K; ++k) {
            r.terms.emplace_back(out.layout.power(k, t), 1.0);
        }
        r.terms.emplace_back(peak, -1.0);
        lp.add_row(std::move(r));
    }

    for (std::size_t k = 0; k < K; ++k) {
        const VehicleProfile& v = inst.profiles[k];
        const BatteryParams& b = v.battery;
        std::vector<std::pair<std::size_t, double>> sum;
        double depleted = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            if (v.steps[t].available) {
                sum.emplace_back(out.layout.power(k, t), b.soc_gain(1.0, dur[t]));
            }
            depleted += v.steps[t].delta_soc_op;
            LpRow up;
            up.family = RowFamily::CumulativeUpper;
            up.name = "soc_max_" + v.vehicle_id + "_" + std::to_string(t + 1);
            up.terms = sum;
            up.rhs = b.soc_max - b.soc_init + depleted;
            lp.add_row(std::move(up));
            LpRow lo;
            lo.family = RowFamily::CumulativeLower;
            lo.name = "soc_min_" + v.vehicle_id + "_" + std::to_string(t + 1);
            lo.terms = sum;
            for (auto& term : lo.terms) {
                term.second = -term.second;
            }
            lo.rhs = b.soc_init - depleted - b.soc_min;
            lp.add_row(std::move(lo));
        }
        LpRow tu;
        tu.family = RowFamily::TerminalUpper;
        tu.name = "terminal_max_" + v.vehicle_id;
        tu.terms = sum;
        tu.rhs = b.soc_target + b.epsilon - b.soc_init + depleted;
        lp.add_row(std::move(tu));
        LpRow tl;
        tl.family = RowFamily::TerminalLower;
        tl.name = "terminal_min_" + v.vehicle_id;
        tl.terms = sum;
        for (auto& term : tl.terms) {
            term.second = -term.second;
        }
        tl.rhs = b.soc_init - depleted - (b.soc_target - b.epsilon);
        lp.add_row(std::move(tl));
    }
    return out;
}

FleetLp build_lp_state_space(const FleetInstance& inst) {
    inst.validate();
    const std::size_t K = inst.profiles.size();
    const std::size_t T = inst.grid.size();
    const auto prices = inst.prices.step_prices(inst.grid);
    const auto dur = inst.grid.durations();
    FleetLp out;
    out.layout = {LpFormulation::StateSpace, K, T};
    const FleetLpLayout& L = out.layout;
    LpProblem& lp = out.problem;
    add_power_variables(lp, inst, prices, dur);
    for (std::size_t t = 0; t < T; ++t) {
        lp.add_variable("Q_" + std::to_string(t), t == 0 ? inst.tariff.c_m : 0.0, 0.0, inst.tariff.p_grid_max);
    }
    for (std::size_t k = 0; k < K; ++k) {
        const BatteryParams& b = inst.profiles[k].battery;
        for (std::size_t t = 0; t < T; ++t) {
            const bool last = t + 1 == T;
            lp.add_variable("S_" + inst.profiles[k].vehicle_id + "_" + std::to_string(t + 1), 0.0,
                            last ? terminal_low(b) : b.soc_min, last ? terminal_high(b) : b.soc_max);
        }
    }

    // Vehicle-major dynamics keep the natural elimination order free of fill.
    for (std::size_t k = 0; k < K; ++k) {
        const VehicleProfile& v = inst.profiles[k];
        for (std::size_t t = 0; t < T; ++t) {
            LpRow r;
            r.family = RowFamily::Dynamics;
            r.sense = RowSense::Equal;
            r.name = "dyn_" + v.vehicle_id + "_" + std::to_string(t);
            r.terms.emplace_back(L.soc_after(k, t), 1.0);
            double rhs = -v.steps[t].delta_soc_op;
            if (t == 0) {
                rhs += v.battery.soc_init;
            } else {
                r.terms.emplace_back(L.soc_after(k, t - 1), -1.0);
            }
            if (v.steps[t].available) {
                r.terms.emplace_back(L.power(k, t), -v.battery.soc_gain(1.0, dur[t]));
            }
            r.rhs = rhs;
            lp.add_row(std::move(r));
        }
    }
    for (std::size_t t = 0; t < T; ++t) {
        LpRow r;
        r.family = RowFamily::Aggregate;
        r.name = "aggregate_" + std::to_string(t);
        for (std::size_t k = 0; k < K; ++k) {
            if (inst.profiles[k].steps[t].available) {
                r.terms.emplace_back(L.power(k, t), 1.0);
            }
        }
        r.terms.emplace_back(K * T + t, -1.0);
        lp.add_row(std::move(r));
        if (t + 1 < T) {
            LpRow link;
            link.family = RowFamily::PeakLink;
            link.sense = RowSense::Equal;
            link.name = "peak_link_" + std::to_string(t);
            link.terms = {{K * T + t, 1.0}, {K * T + t + 1, -1.0}};
            lp.add_row(std::move(link));
        }
    }
    return out;
}

namespace {

LpFormulation resolve(const FleetInstance& inst, LpFormulation f) {
    if (f != LpFormulation::Auto) {
        return f;
    }
    const double K = static_cast<double>(inst.profiles.size());
    const double T = static_cast<double>(inst.grid.size());
    return K * T * T * T <= 6e6 ? LpFormulation::Cumulative : LpFormulation::StateSpace;
}

} // namespace

FleetLp build_lp(const FleetInstance& inst, LpFormulation formulation) {
    return resolve(inst, formulation) == LpFormulation::Cumulative ? build_lp(inst) : build_lp_state_space(inst);
}

std::vector<ChargingPlan> extract_plans(const FleetInstance& inst, const FleetLpLayout& layout,
                                        const std::vector<double>& x) {
    std::vector<ChargingPlan> plans;
    plans.reserve(inst.profiles.size());
    for (std::size_t k = 0; k < inst.profiles.size(); ++k) {
        std::vector<double> p(inst.grid.size());
        for (std::size_t t = 0; t < p.size(); ++t) {
            p[t] = std::clamp(x[layout.power(k, t)], 0.0, power_upper_bound(inst.profiles[k], t));
        }
        plans.push_back(simulate_plan(inst.profiles[k], inst.grid, std::move(p)));
    }
    return plans;
}

FleetLpResult solve_fleet_lp(const FleetInstance& inst, const FleetLpOptions& options) {
    const FleetLp flp = build_lp(inst, options.formulation);
    FleetLpResult out;
    out.formulation = flp.layout.formulation;
    out.lp = solve_lp(flp.problem, options.solver);
    if (!out.lp.optimal()) {
        return out;
    }
    out.plans = extract_plans(inst, flp.layout, out.lp.x);
    const auto prices = inst.prices.step_prices(inst.grid);
    const auto dur = inst.grid.durations();
    for (const ChargingPlan& p : out.plans) {
        out.energy_cost += energy_cost(p.power_kw, prices, dur);
    }
    out.peak_variable_kw = out.lp.x[flp.layout.peak()];
    out.demand_cost = inst.tariff.c_m * out.peak_variable_kw;
    out.total_cost = out.lp.objective;
    const auto agg = aggregate_power(out.plans, inst.grid.size());
    out.realized_peak_kw = agg.empty() ? 0.0 : *std::max_element(agg.begin(), agg.end());
    return out;
}

} // namespace fleetcharge
