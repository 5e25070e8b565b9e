#include "fleetcharge/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>

#include "fleetcharge/cost.hpp"
#include "fleetcharge/errors.hpp"
#include "fleetcharge/instance_io.hpp"

namespace fleetcharge {

std::string to_string(Method m) {
    switch (m) {
    case Method::SeqDp: return "seqdp";
    case Method::Lp: return "lp";
    case Method::Uncontrolled: return "uncontrolled";
    }
    return "unknown";
}

Method method_from_string(const std::string& s) {
    if (s == "seqdp") return Method::SeqDp;
    if (s == "lp") return Method::Lp;
    if (s == "uncontrolled") return Method::Uncontrolled;
    throw InputError("unknown method '" + s + "' (expected seqdp, lp or uncontrolled)");
}

json report_to_json(const MonthReport& r) {
    json j;
    j["schema"] = REPORT_SCHEMA;
    j["month_id"] = r.month_id;
    j["method"] = to_string(r.method);
    j["instance_fingerprint"] = r.instance_fingerprint;
    j["currency"] = r.currency;
    j["energy_cost"] = r.energy_cost;
    j["demand_cost"] = r.demand_cost;
    j["total_cost"] = r.total_cost;
    j["peak_kw"] = r.peak_kw;
    j["realized_peak_kw"] = r.realized_peak_kw;
    j["runtime_s"] = r.runtime_s;
    json series;
    json starts = json::array();
    for (Instant t : r.step_start) {
        starts.push_back(format_iso8601(t));
    }
    series["t_start"] = std::move(starts);
    series["duration_h"] = r.duration_h;
    series["aggregate_kw"] = r.aggregate_kw;
    series["price"] = r.price;
    j["series"] = std::move(series);
    json vehicles = json::array();
    for (const VehicleTrajectory& v : r.vehicles) {
        vehicles.push_back({{"vehicle_id", v.vehicle_id}, {"power_kw", v.power_kw}, {"soc", v.soc}});
    }
    j["vehicles"] = std::move(vehicles);
    if (r.cost_gap_pct) {
        j["gaps_vs_lp"] = {{"cost_pct", *r.cost_gap_pct}, {"peak_pct", r.peak_gap_pct.value_or(0.0)}};
    }
    j["details"] = r.details;
    return j;
}

MonthReport report_from_json(const json& j) {
    const std::string ctx = "report";
    if (require_field(j, "schema", ctx).get<std::string>() != REPORT_SCHEMA) {
        throw InputError("report: unsupported schema '" + j.at("schema").get<std::string>() + "'");
    }
    try {
        MonthReport r;
        r.month_id = require_field(j, "month_id", ctx).get<std::string>();
        r.method = method_from_string(require_field(j, "method", ctx).get<std::string>());
        r.instance_fingerprint = require_field(j, "instance_fingerprint", ctx).get<std::string>();
        r.currency = j.value("currency", std::string("EUR"));
        r.energy_cost = require_field(j, "energy_cost", ctx).get<double>();
        r.demand_cost = require_field(j, "demand_cost", ctx).get<double>();
        r.total_cost = require_field(j, "total_cost", ctx).get<double>();
        r.peak_kw = require_field(j, "peak_kw", ctx).get<double>();
        r.realized_peak_kw = j.value("realized_peak_kw", r.peak_kw);
        r.runtime_s = j.value("runtime_s", 0.0);
        const json& series = require_field(j, "series", ctx);
        for (const json& s : require_field(series, "t_start", ctx)) {
            r.step_start.push_back(parse_iso8601(s.get<std::string>()));
        }
        r.duration_h = require_field(series, "duration_h", ctx).get<std::vector<double>>();
        r.aggregate_kw = require_field(series, "aggregate_kw", ctx).get<std::vector<double>>();
        r.price = require_field(series, "price", ctx).get<std::vector<double>>();
        const std::size_t T = r.step_start.size();
        if (r.duration_h.size() != T || r.aggregate_kw.size() != T || r.price.size() != T) {
            throw AlignmentError("report " + r.month_id + ": series columns have different lengths");
        }
        for (const json& v : require_field(j, "vehicles", ctx)) {
            VehicleTrajectory tr;
            tr.vehicle_id = require_field(v, "vehicle_id", ctx).get<std::string>();
            tr.power_kw = require_field(v, "power_kw", ctx).get<std::vector<double>>();
            tr.soc = require_field(v, "soc", ctx).get<std::vector<double>>();
            if (tr.power_kw.size() != T || tr.soc.size() != T + 1) {
                throw AlignmentError("report " + r.month_id + ": trajectory of " + tr.vehicle_id +
                                     " does not match the series length");
            }
            r.vehicles.push_back(std::move(tr));
        }
        if (j.contains("gaps_vs_lp")) {
            r.cost_gap_pct = require_field(j["gaps_vs_lp"], "cost_pct", ctx).get<double>();
            r.peak_gap_pct = require_field(j["gaps_vs_lp"], "peak_pct", ctx).get<double>();
        }
        if (j.contains("details")) {
            r.details = j["details"];
        }
        return r;
    } catch (const json::exception& e) {
        throw InputError(std::string("report: malformed field: ") + e.what());
    }
}

MonthReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open report " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("report " + path + " is not valid JSON: " + e.what());
    }
    return report_from_json(j);
}

void save_report(const std::string& path, const MonthReport& r) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write report " + path);
    }
    out << report_to_json(r).dump(1) << '\n';
}

void write_series_csv(std::ostream& out, const MonthReport& r) {
    out << "t_start,duration_h,aggregate_kw,price\n";
    out << std::setprecision(12);
    for (std::size_t t = 0; t < r.step_start.size(); ++t) {
        out << format_iso8601(r.step_start[t]) << ',' << r.duration_h[t] << ',' << r.aggregate_kw[t] << ','
            << r.price[t] << '\n';
    }
}

MonthReport make_report(const FleetInstance& instance, Method method, std::span<const ChargingPlan> plans,
                        double energy_cost, double billed_peak_kw, double runtime_s) {
    if (plans.size() != instance.vehicle_count()) {
        throw std::logic_error("report: one plan per vehicle expected");
    }
    MonthReport r;
    r.month_id = instance.grid.month_id();
    r.method = method;
    r.instance_fingerprint = instance_fingerprint(instance);
    r.currency = instance.prices.currency();
    const std::size_t T = instance.grid.size();
    r.aggregate_kw = aggregate_power(plans, T);
    r.price = instance.prices.step_prices(instance.grid);
    r.duration_h = instance.grid.durations();
    for (const Step& s : instance.grid.steps()) {
        r.step_start.push_back(s.start);
    }
    for (const ChargingPlan& p : plans) {
        r.vehicles.push_back({p.vehicle_id, p.power_kw, p.soc});
    }
    r.realized_peak_kw = r.aggregate_kw.empty() ? 0.0 : *std::max_element(r.aggregate_kw.begin(), r.aggregate_kw.end());
    r.energy_cost = energy_cost;
    r.peak_kw = billed_peak_kw;
    r.demand_cost = instance.tariff.c_m * billed_peak_kw;
    r.total_cost = r.energy_cost + r.demand_cost;
    r.runtime_s = runtime_s;
    return r;
}

MonthReport report_from_seqdp(const FleetInstance& instance, const SeqDpResult& result, double runtime_s) {
    const TariffCandidateResult& best = result.best();
    MonthReport r = make_report(instance, Method::SeqDp, best.plans, best.energy_cost, best.p_max_tariff, runtime_s);
    json cands = json::array();
    for (const TariffCandidateResult& c : result.candidates) {
        json e{{"p_max_tariff", c.p_max_tariff}, {"feasible", c.feasible}};
        if (c.feasible) {
            e["total_cost"] = c.total_cost;
        } else if (!c.infeasible_vehicle.empty()) {
            e["infeasible_vehicle"] = c.infeasible_vehicle;
        }
        cands.push_back(std::move(e));
    }
    json order = json::array();
    for (std::size_t k : result.order) {
        order.push_back(instance.profiles[k].vehicle_id);
    }
    r.details = {{"candidates", std::move(cands)}, {"order", std::move(order)}};
    return r;
}

MonthReport report_from_lp(const FleetInstance& instance, const FleetLpResult& result, double runtime_s) {
    MonthReport r = make_report(instance, Method::Lp, result.plans, result.energy_cost, result.peak_variable_kw,
                                runtime_s);
    r.details = {{"status", to_string(result.lp.status)},
                 {"formulation", to_string(result.formulation)},
                 {"solver", result.lp.method},
                 {"iterations", result.lp.iterations},
                 {"objective", result.lp.objective},
                 {"primal_residual", result.lp.primal_residual}};
    return r;
}

MonthReport report_from_uncontrolled(const FleetInstance& instance, const UncontrolledResult& result,
                                     double runtime_s) {
    return make_report(instance, Method::Uncontrolled, result.plans, result.cost.energy, result.cost.peak_kw,
                       runtime_s);
}

double relative_gap(double a, double b) {
    if (!(b > 0.0)) {
        throw std::invalid_argument("relative gap needs a positive reference, got " + std::to_string(b));
    }
    return (a - b) / b;
}

namespace {

void check_same_instance(const MonthReport& a, const MonthReport& b) {
    if (a.instance_fingerprint != b.instance_fingerprint || a.month_id != b.month_id) {
        throw InputError("reports for " + a.month_id + " (" + a.instance_fingerprint + ") and " + b.month_id + " (" +
                         b.instance_fingerprint + ") belong to different instances");
    }
}

double checked_cost_gap(const MonthReport& seqdp, const MonthReport& lp) {
    const double gap = relative_gap(seqdp.total_cost, lp.total_cost);
    if (gap < -NEGATIVE_GAP_TOL) {
        throw InvariantViolation("month " + seqdp.month_id + ": SeqDP cost " + std::to_string(seqdp.total_cost) +
                                 " is below the LP bound " + std::to_string(lp.total_cost));
    }
    return gap;
}

} // namespace

void attach_gaps(MonthReport& report, const MonthReport& lp) {
    check_same_instance(report, lp);
    report.cost_gap_pct = 100.0 * checked_cost_gap(report, lp);
    report.peak_gap_pct = lp.peak_kw > 0.0 ? 100.0 * relative_gap(report.peak_kw, lp.peak_kw) : 0.0;
}

Comparison compare(std::span<const MonthReport> reports) {
    if (reports.empty()) {
        throw InputError("compare needs at least one report");
    }
    std::map<Method, const MonthReport*> by;
    for (const MonthReport& r : reports) {
        check_same_instance(reports.front(), r);
        if (!by.emplace(r.method, &r).second) {
            throw InputError("compare: two " + to_string(r.method) + " reports for " + r.month_id);
        }
    }
    Comparison c;
    c.month_id = reports.front().month_id;
    c.instance_fingerprint = reports.front().instance_fingerprint;
    if (by.count(Method::SeqDp) && by.count(Method::Lp)) {
        const MonthReport& s = *by[Method::SeqDp];
        const MonthReport& l = *by[Method::Lp];
        c.cost_gap = checked_cost_gap(s, l);
        c.peak_gap = l.peak_kw > 0.0 ? relative_gap(s.peak_kw, l.peak_kw) : 0.0;
    }
    if (by.count(Method::Uncontrolled)) {
        const MonthReport& u = *by[Method::Uncontrolled];
        for (Method m : {Method::SeqDp, Method::Lp}) {
            if (!by.count(m)) {
                continue;
            }
            const MonthReport& s = *by[m];
            Reduction red;
            red.method = m;
            red.cost = u.total_cost > 0.0 ? 1.0 - s.total_cost / u.total_cost : 0.0;
            red.peak = u.peak_kw > 0.0 ? 1.0 - s.peak_kw / u.peak_kw : 0.0;
            c.reductions.push_back(red);
        }
    }
    return c;
}

json comparison_to_json(const Comparison& c) {
    json j{{"month_id", c.month_id}, {"instance_fingerprint", c.instance_fingerprint}};
    if (c.cost_gap) {
        j["cost_gap"] = *c.cost_gap;
        j["peak_gap"] = c.peak_gap.value_or(0.0);
    }
    json reds = json::array();
    for (const Reduction& r : c.reductions) {
        reds.push_back({{"method", to_string(r.method)}, {"cost_reduction", r.cost}, {"peak_reduction", r.peak}});
    }
    j["reductions"] = std::move(reds);
    return j;
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw std::invalid_argument("median of an empty set");
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<SweepGroup> summarize_sweep(std::span<const SweepRun> runs) {
    std::map<std::size_t, std::vector<const SweepRun*>> groups;
    for (const SweepRun& r : runs) {
        groups[r.vehicles].push_back(&r);
    }
    std::vector<SweepGroup> out;
    for (const auto& [k, rs] : groups) {
        std::vector<double> cost, peak, lp_s, dp_s;
        for (const SweepRun* r : rs) {
            cost.push_back(r->cost_gap);
            peak.push_back(r->peak_gap);
            lp_s.push_back(r->lp_s);
            dp_s.push_back(r->seqdp_s);
        }
        SweepGroup g;
        g.vehicles = k;
        g.runs = rs.size();
        g.median_cost_gap = median(cost);
        g.max_cost_gap = *std::max_element(cost.begin(), cost.end());
        g.median_peak_gap = median(peak);
        g.max_peak_gap = *std::max_element(peak.begin(), peak.end());
        g.median_lp_s = median(lp_s);
        g.median_seqdp_s = median(dp_s);
        out.push_back(g);
    }
    return out;
}

json sweep_summary_to_json(std::span<const SweepGroup> groups) {
    json arr = json::array();
    for (const SweepGroup& g : groups) {
        arr.push_back({{"vehicles", g.vehicles},
                       {"runs", g.runs},
                       {"median_cost_gap", g.median_cost_gap},
                       {"max_cost_gap", g.max_cost_gap},
                       {"median_peak_gap", g.median_peak_gap},
                       {"max_peak_gap", g.max_peak_gap},
                       {"median_lp_s", g.median_lp_s},
                       {"median_seqdp_s", g.median_seqdp_s},
                       {"runtime_ratio", g.median_seqdp_s > 0.0 ? g.median_lp_s / g.median_seqdp_s : 0.0}});
    }
    return arr;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRun> runs) {
    out << "vehicles,seed,lp_total,seqdp_total,lp_peak_kw,seqdp_peak_kw,cost_gap,peak_gap,lp_s,seqdp_s\n";
    out << std::setprecision(12);
    for (const SweepRun& r : runs) {
        out << r.vehicles << ',' << r.seed << ',' << r.lp_total << ',' << r.seqdp_total << ',' << r.lp_peak_kw << ','
            << r.seqdp_peak_kw << ',' << r.cost_gap << ',' << r.peak_gap << ',' << r.lp_s << ',' << r.seqdp_s << '\n';
    }
}

} // namespace fleetcharge
