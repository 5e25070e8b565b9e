#include "fleetcharge/app.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "fleetcharge/errors.hpp"
#include "fleetcharge/instance_io.hpp"
#include "fleetcharge/seqdp_planner.hpp"

namespace fleetcharge {

LpNotSolved::LpNotSolved(const std::string& month, LpStatus status, const std::string& hint)
    : std::runtime_error("LP for month " + month + " ended " + to_string(status) + (hint.empty() ? "" : ": " + hint)),
      status_(status) {}

int exit_code_for(std::exception_ptr e) {
    try {
        std::rethrow_exception(e);
    } catch (const InputError&) {
        return EXIT_INPUT;
    } catch (const json::exception&) {
        return EXIT_INPUT;
    } catch (const std::filesystem::filesystem_error&) {
        return EXIT_INPUT;
    } catch (const SizeGuardError&) {
        return EXIT_INPUT;
    } catch (const NoFeasibleTariff&) {
        return EXIT_INFEASIBLE;
    } catch (const LpNotSolved& lp) {
        return lp.status() == LpStatus::Infeasible ? EXIT_INFEASIBLE : EXIT_INTERNAL;
    } catch (...) {
        return EXIT_INTERNAL;
    }
}

namespace {

double num_or(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j[key].is_number()) {
        throw InputError(std::string("config: '") + key + "' must be a number");
    }
    return j[key].get<double>();
}

BatteryParams battery_over(BatteryParams b, const json& j) {
    if (j.is_null()) {
        return b;
    }
    b.capacity_kwh = num_or(j, "capacity_kwh", b.capacity_kwh);
    b.soc_min = num_or(j, "soc_min", b.soc_min);
    b.soc_max = num_or(j, "soc_max", b.soc_max);
    b.soc_init = num_or(j, "soc_init", b.soc_init);
    b.soc_target = num_or(j, "soc_target", b.soc_target);
    b.epsilon = num_or(j, "epsilon", b.epsilon);
    b.validate();
    return b;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

DataSource source_from_string(const std::string& s) {
    if (s == "logs") return DataSource::Logs;
    if (s == "instance") return DataSource::Instance;
    if (s == "three_shuttle") return DataSource::ThreeShuttle;
    if (s == "regression") return DataSource::Regression;
    throw InputError("config: unknown data source '" + s + "' (expected logs, instance, three_shuttle or regression)");
}

LpFormulation formulation_from_string(const std::string& s) {
    if (s == "auto") return LpFormulation::Auto;
    if (s == "cumulative") return LpFormulation::Cumulative;
    if (s == "state_space") return LpFormulation::StateSpace;
    throw InputError("config: unknown LP formulation '" + s + "'");
}

LpMethod lp_method_from_string(const std::string& s) {
    if (s == "auto") return LpMethod::Auto;
    if (s == "simplex") return LpMethod::Simplex;
    if (s == "interior_point") return LpMethod::InteriorPoint;
    throw InputError("config: unknown LP solver '" + s + "'");
}

} // namespace

AppConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) {
        throw InputError("config must be a JSON object");
    }
    try {
        AppConfig c;
        if (j.contains("output_dir")) {
            c.output_dir = resolve(base_dir, j["output_dir"].get<std::string>());
        }
        c.seed = j.value("seed", c.seed);
        c.threads = j.value("threads", c.threads);
        c.chain_months = j.value("chain_months", c.chain_months);

        const json& data = require_field(j, "data", "config");
        c.source = source_from_string(require_field(data, "source", "config.data").get<std::string>());
        c.months = data.value("months", std::vector<std::string>{});
        for (const std::string& m : c.months) {
            month_bounds(m);
        }
        switch (c.source) {
        case DataSource::Logs: {
            c.prices_csv = resolve(base_dir, require_field(data, "prices_csv", "config.data").get<std::string>());
            c.currency = data.value("currency", c.currency);
            c.uncontrolled_power_kw = num_or(data, "uncontrolled_power_kw", c.uncontrolled_power_kw);
            const BatteryParams fleet_battery = battery_over(preset_battery(), data.value("battery", json(nullptr)));
            const double fleet_charger = num_or(data, "p_max_charger", DEFAULT_CHARGER_KW);
            for (const json& v : require_field(data, "vehicles", "config.data")) {
                LogVehicle lv;
                lv.id = require_field(v, "id", "config.data.vehicles").get<std::string>();
                lv.log_csv = resolve(base_dir, require_field(v, "log_csv", "config.data.vehicles").get<std::string>());
                lv.battery = battery_over(fleet_battery, v.value("battery", json(nullptr)));
                lv.p_max_charger = num_or(v, "p_max_charger", fleet_charger);
                c.vehicles.push_back(std::move(lv));
            }
            if (c.vehicles.empty() || c.months.empty()) {
                throw InputError("config: a log source needs at least one vehicle and one month");
            }
            break;
        }
        case DataSource::Instance:
            for (const json& f : require_field(data, "files", "config.data")) {
                c.instance_files.push_back(resolve(base_dir, f.get<std::string>()));
            }
            if (c.instance_files.empty()) {
                throw InputError("config: an instance source needs at least one file");
            }
            break;
        case DataSource::ThreeShuttle: {
            ThreeShuttleOptions& o = c.three_shuttle;
            o.base_daily_drop = num_or(data, "base_daily_drop", o.base_daily_drop);
            o.price_level = num_or(data, "price_level", o.price_level);
            o.price_seed = data.value("price_seed", o.price_seed);
            o.battery = battery_over(o.battery, data.value("battery", json(nullptr)));
            if (c.months.empty()) {
                throw InputError("config: the three_shuttle source needs at least one month");
            }
            break;
        }
        case DataSource::Regression: {
            RegressionOptions& o = c.regression;
            c.fleet_size = data.value("vehicles", c.fleet_size);
            o.base_daily_drop = num_or(data, "base_daily_drop", o.base_daily_drop);
            o.price_level = num_or(data, "price_level", o.price_level);
            o.price_seed = data.value("price_seed", o.price_seed);
            o.battery = battery_over(o.battery, data.value("battery", json(nullptr)));
            if (c.months.empty()) {
                c.months.push_back(o.month_id);
            }
            if (c.fleet_size < 1) {
                throw InputError("config: data.vehicles must be at least 1");
            }
            break;
        }
        }
        if (j.contains("tariff")) {
            c.tariff = tariff_from_json(j["tariff"]);
            c.tariff->validate();
        }
        if (j.contains("dp")) {
            const json& d = j["dp"];
            c.dp.soc_step = num_or(d, "soc_step", c.dp.soc_step);
            c.dp.power_step = num_or(d, "power_step", c.dp.power_step);
            c.dp.boundary_penalty = num_or(d, "boundary_penalty", c.dp.boundary_penalty);
            c.dp.max_forward_nodes = d.value("max_forward_nodes", c.dp.max_forward_nodes);
            if (!(c.dp.soc_step > 0.0) || !(c.dp.power_step > 0.0) || c.dp.boundary_penalty < 0.0) {
                throw InputError("config: dp steps must be positive and the boundary penalty non-negative");
            }
        }
        if (j.contains("lp")) {
            const json& l = j["lp"];
            c.lp.formulation = formulation_from_string(l.value("formulation", std::string("auto")));
            c.lp.solver.method = lp_method_from_string(l.value("solver", std::string("auto")));
            const std::string ord = l.value("ordering", std::string("amd"));
            if (ord != "amd" && ord != "natural") {
                throw InputError("config: unknown Cholesky ordering '" + ord + "'");
            }
            c.lp.solver.ordering = ord == "amd" ? CholeskyOrdering::Amd : CholeskyOrdering::Natural;
            c.lp.solver.max_iterations = l.value("max_iterations", c.lp.solver.max_iterations);
        }
        if (j.contains("sweep")) {
            const json& s = j["sweep"];
            c.sweep_sizes = s.value("fleet_sizes", c.sweep_sizes);
            c.sweep_seeds = s.value("seeds", c.sweep_seeds);
            if (c.sweep_sizes.empty() || c.sweep_seeds == 0) {
                throw InputError("config: sweep needs at least one fleet size and one seed");
            }
        }
        return c;
    } catch (const json::exception& e) {
        throw InputError(std::string("config: malformed field: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("config: ") + e.what());
    }
}

AppConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open config " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

std::filesystem::path output_dir(const AppConfig& cfg) {
    if (const char* env = std::getenv("FLEETCHARGE_OUT_DIR"); env && *env) {
        return env;
    }
    return cfg.output_dir;
}

std::size_t month_count(const AppConfig& cfg) {
    return cfg.source == DataSource::Instance ? cfg.instance_files.size() : cfg.months.size();
}

namespace {

std::vector<std::vector<UncontrolledSession>> sessions_in_month(std::span<const OperationLog> logs,
                                                                std::span<const VehicleProfile> profiles,
                                                                Instant begin, Instant end, double power_kw) {
    std::vector<std::vector<UncontrolledSession>> out;
    for (std::size_t k = 0; k < logs.size(); ++k) {
        std::vector<UncontrolledSession> kept;
        for (const UncontrolledSession& s : detect_sessions(logs[k], profiles[k].battery.capacity_kwh, power_kw)) {
            if (s.end > begin && s.start < end) {
                kept.push_back(s);
            }
        }
        out.push_back(std::move(kept));
    }
    return out;
}

MonthJob build_log_month(const AppConfig& cfg, const std::string& month) {
    const auto [begin, end] = month_bounds(month);
    std::vector<OperationLog> logs;
    std::vector<Instant> events;
    std::vector<OperationLog> inside;
    for (const LogVehicle& v : cfg.vehicles) {
        logs.push_back(read_operation_log_csv(v.log_csv, v.id));
        inside.push_back(logs.back().restricted_to(begin, end));
        const auto ev = inside.back().events();
        events.insert(events.end(), ev.begin(), ev.end());
    }
    MonthJob job;
    FleetInstance& inst = job.instance;
    inst.grid = TimeGrid::for_month(month, events);
    inst.prices = read_price_csv(cfg.prices_csv, cfg.currency);
    inst.tariff = default_tariff_window(cfg.vehicles.size());
    for (std::size_t k = 0; k < cfg.vehicles.size(); ++k) {
        inst.profiles.push_back(build_profile(inside[k], inst.grid, cfg.vehicles[k].battery, cfg.vehicles[k].p_max_charger));
    }
    job.sessions = sessions_in_month(logs, inst.profiles, begin, end, cfg.uncontrolled_power_kw);
    json files = json::array();
    for (const LogVehicle& v : cfg.vehicles) {
        files.push_back(v.log_csv.string());
    }
    job.provenance = {{"source", "logs"}, {"month", month}, {"logs", std::move(files)},
                      {"prices_csv", cfg.prices_csv.string()}};
    return job;
}

} // namespace

MonthJob build_month(const AppConfig& cfg, std::size_t month_index, std::span<const double> soc_init) {
    if (month_index >= month_count(cfg)) {
        throw std::out_of_range("month index out of range");
    }
    MonthJob job;
    switch (cfg.source) {
    case DataSource::Logs:
        job = build_log_month(cfg, cfg.months[month_index]);
        break;
    case DataSource::Instance:
        job.instance = load_instance(cfg.instance_files[month_index]);
        job.provenance = {{"source", "instance"}, {"file", cfg.instance_files[month_index].string()}};
        break;
    case DataSource::ThreeShuttle: {
        ThreeShuttleMonth m = three_shuttle_month(cfg.months[month_index], cfg.three_shuttle);
        job.instance = std::move(m.instance);
        job.sessions = std::move(m.sessions);
        job.provenance = {{"source", "three_shuttle"}, {"month", cfg.months[month_index]}};
        break;
    }
    case DataSource::Regression: {
        RegressionOptions opt = cfg.regression;
        opt.month_id = cfg.months[month_index];
        job.instance = regression_fleet(cfg.fleet_size, cfg.seed, opt, &job.clamps);
        job.provenance = {{"source", "regression"}, {"month", opt.month_id}, {"vehicles", cfg.fleet_size},
                          {"seed", cfg.seed}, {"clamped_trips", job.clamps.size()}};
        break;
    }
    }
    if (cfg.tariff) {
        job.instance.tariff = *cfg.tariff;
    }
    if (!soc_init.empty()) {
        if (soc_init.size() != job.instance.vehicle_count()) {
            throw AlignmentError("chained SoC has " + std::to_string(soc_init.size()) + " values for " +
                                 std::to_string(job.instance.vehicle_count()) + " vehicles");
        }
        for (std::size_t k = 0; k < soc_init.size(); ++k) {
            job.instance.profiles[k].battery.soc_init = soc_init[k];
        }
    }
    job.instance.validate();
    return job;
}

PlanMethod plan_method_from_string(const std::string& s) {
    if (s == "seqdp") return PlanMethod::SeqDp;
    if (s == "lp") return PlanMethod::Lp;
    if (s == "both") return PlanMethod::Both;
    if (s == "uncontrolled") return PlanMethod::Uncontrolled;
    throw InputError("unknown method '" + s + "' (expected seqdp, lp, both or uncontrolled)");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

MonthReport run_lp(const FleetInstance& inst, const FleetLpOptions& opt) {
    const auto t0 = Clock::now();
    const FleetLpResult r = solve_fleet_lp(inst, opt);
    const double s = seconds_since(t0);
    if (!r.optimal()) {
        throw LpNotSolved(inst.grid.month_id(), r.lp.status, r.lp.hint());
    }
    return report_from_lp(inst, r, s);
}

MonthReport run_seqdp(const FleetInstance& inst, const DpConfig& dp, unsigned threads) {
    const auto t0 = Clock::now();
    SeqDpOptions opt;
    opt.dp = dp;
    opt.threads = threads;
    const SeqDpResult r = plan_month(inst, opt);
    const double s = seconds_since(t0);
    if (!r.feasible()) {
        throw NoFeasibleTariff(inst.grid.month_id());
    }
    return report_from_seqdp(inst, r, s);
}

} // namespace

MonthOutcome plan_job(const MonthJob& job, PlanMethod method, const AppConfig& cfg, bool with_baseline,
                      unsigned seqdp_threads) {
    const FleetInstance& inst = job.instance;
    MonthOutcome out;
    std::optional<MonthReport> lp;
    if (method == PlanMethod::Lp || method == PlanMethod::Both) {
        lp = run_lp(inst, cfg.lp);
    }
    if (method == PlanMethod::SeqDp || method == PlanMethod::Both) {
        MonthReport dp = run_seqdp(inst, cfg.dp, seqdp_threads);
        if (lp) {
            attach_gaps(dp, *lp);
        }
        out.reports.push_back(std::move(dp));
    }
    if (lp) {
        out.reports.push_back(std::move(*lp));
    }
    if (method == PlanMethod::Uncontrolled || with_baseline) {
        if (!job.sessions) {
            throw InputError("month " + inst.grid.month_id() +
                             ": the uncontrolled baseline needs telemetry (logs or three_shuttle source)");
        }
        const auto t0 = Clock::now();
        const UncontrolledResult u = uncontrolled_baseline(*job.sessions, inst);
        out.reports.push_back(report_from_uncontrolled(inst, u, seconds_since(t0)));
        std::size_t clipped = 0;
        for (const auto& per_vehicle : *job.sessions) {
            clipped += static_cast<std::size_t>(
                std::count_if(per_vehicle.begin(), per_vehicle.end(), [](const UncontrolledSession& s) { return s.clipped; }));
        }
        out.reports.back().details["clipped_sessions"] = clipped;
    }
    for (MonthReport& r : out.reports) {
        if (!job.clamps.empty()) {
            r.details["clamped_trips"] = job.clamps.size();
        }
    }
    if (out.reports.size() > 1) {
        out.comparison = compare(out.reports);
    }
    return out;
}

SweepRun sweep_run(const AppConfig& cfg, std::size_t vehicles, std::uint64_t seed, unsigned seqdp_threads,
                   std::vector<MonthReport>* reports) {
    RegressionOptions opt = cfg.regression;
    if (!cfg.months.empty()) {
        opt.month_id = cfg.months.front();
    }
    const FleetInstance inst = regression_fleet(vehicles, seed, opt);
    MonthReport lp = run_lp(inst, cfg.lp);
    MonthReport dp = run_seqdp(inst, cfg.dp, seqdp_threads);
    attach_gaps(dp, lp);
    SweepRun r;
    r.vehicles = vehicles;
    r.seed = seed;
    r.lp_total = lp.total_cost;
    r.seqdp_total = dp.total_cost;
    r.lp_peak_kw = lp.peak_kw;
    r.seqdp_peak_kw = dp.peak_kw;
    r.cost_gap = *dp.cost_gap_pct / 100.0;
    r.peak_gap = *dp.peak_gap_pct / 100.0;
    r.lp_s = lp.runtime_s;
    r.seqdp_s = dp.runtime_s;
    if (reports) {
        reports->push_back(std::move(dp));
        reports->push_back(std::move(lp));
    }
    return r;
}

namespace {

/// Runs f(0..n-1) on up to `threads` workers and returns the exception of each failed index.
template <class F>
std::vector<std::exception_ptr> parallel_for(std::size_t n, unsigned threads, F&& f) {
    std::vector<std::exception_ptr> errors(n);
    unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) {
        pool.emplace_back(work);
    }
    work();
    for (std::thread& t : pool) {
        t.join();
    }
    return errors;
}

std::string describe(std::exception_ptr e) {
    try {
        std::rethrow_exception(e);
    } catch (const std::exception& ex) {
        return ex.what();
    } catch (...) {
        return "unknown error";
    }
}

/// Serializes writes to the same path and to the shared console streams.
class OutputSink {
  public:
    OutputSink(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

    void write_file(const std::filesystem::path& path, const std::string& content) {
        std::mutex& m = lock_for(path);
        std::lock_guard lock(m);
        std::ofstream f(path);
        if (!f) {
            throw InputError("cannot write " + path.string());
        }
        f << content;
    }

    void line(const std::string& s) {
        std::lock_guard lock(console_);
        out_ << s << '\n';
    }

    void error(const std::string& s) {
        std::lock_guard lock(console_);
        err_ << "error: " << s << '\n';
    }

  private:
    std::mutex& lock_for(const std::filesystem::path& path) {
        std::lock_guard lock(table_);
        return files_[std::filesystem::absolute(path).lexically_normal().string()];
    }

    std::ostream& out_;
    std::ostream& err_;
    std::mutex console_;
    std::mutex table_;
    std::map<std::string, std::mutex> files_;
};

std::string series_csv(const MonthReport& r) {
    std::ostringstream s;
    write_series_csv(s, r);
    return s.str();
}

std::string job_label(const AppConfig& cfg, std::size_t i, const MonthJob& job) {
    if (cfg.source == DataSource::Instance) {
        return cfg.instance_files[i].stem().string();
    }
    return job.instance.grid.month_id();
}

std::string fmt(double v, int precision = 2) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(precision) << v;
    return s.str();
}

std::string summary_line(const MonthReport& r) {
    std::string s = r.month_id + " " + to_string(r.method) + " total=" + fmt(r.total_cost) + " " + r.currency +
                    " energy=" + fmt(r.energy_cost) + " peak=" + fmt(r.peak_kw) + " kW runtime=" + fmt(r.runtime_s, 3) +
                    " s";
    if (r.cost_gap_pct) {
        s += " gap=" + fmt(*r.cost_gap_pct) + "% peak_gap=" + fmt(r.peak_gap_pct.value_or(0.0)) + "%";
    }
    return s;
}

int worst(const std::vector<std::exception_ptr>& errors, OutputSink& sink) {
    int code = EXIT_OK;
    for (const std::exception_ptr& e : errors) {
        if (e) {
            sink.error(describe(e));
            code = std::max(code, exit_code_for(e));
        }
    }
    return code;
}

json sessions_to_json(const std::vector<std::vector<UncontrolledSession>>& sessions, const FleetInstance& inst) {
    json arr = json::array();
    for (std::size_t k = 0; k < sessions.size(); ++k) {
        json list = json::array();
        for (const UncontrolledSession& s : sessions[k]) {
            list.push_back({{"start", format_iso8601(s.start)},
                            {"end", format_iso8601(s.end)},
                            {"energy_kwh", s.energy_kwh},
                            {"assumed_power_kw", s.assumed_power_kw},
                            {"required_energy_kwh", s.required_energy_kwh},
                            {"clipped", s.clipped}});
        }
        arr.push_back({{"vehicle_id", inst.profiles[k].vehicle_id}, {"sessions", std::move(list)}});
    }
    return arr;
}

json clamps_to_json(const std::vector<ClampEvent>& clamps) {
    json arr = json::array();
    for (const ClampEvent& c : clamps) {
        arr.push_back({{"vehicle_id", c.vehicle_id},
                       {"trip", c.trip},
                       {"trip_start", format_iso8601(c.trip_start)},
                       {"requested_drop", c.requested_drop},
                       {"applied_drop", c.applied_drop}});
    }
    return arr;
}

int cmd_ingest(const AppConfig& cfg, OutputSink& sink) {
    if (cfg.source != DataSource::Logs && cfg.source != DataSource::ThreeShuttle) {
        throw InputError("ingest needs a logs or three_shuttle data source");
    }
    const auto dir = output_dir(cfg);
    std::filesystem::create_directories(dir);
    const auto errors = parallel_for(month_count(cfg), cfg.threads, [&](std::size_t i) {
        const MonthJob job = build_month(cfg, i);
        const std::string month = job.instance.grid.month_id();
        sink.write_file(dir / ("instance_" + month + ".json"), instance_to_json(job.instance, job.provenance).dump(1) + "\n");
        sink.write_file(dir / ("sessions_" + month + ".json"), sessions_to_json(*job.sessions, job.instance).dump(1) + "\n");
        if (cfg.source == DataSource::ThreeShuttle) {
            for (const OperationLog& log : three_shuttle_logs(month, cfg.three_shuttle)) {
                std::ostringstream s;
                write_operation_log_csv(s, log);
                sink.write_file(dir / ("log_" + log.vehicle_id() + "_" + month + ".csv"), s.str());
            }
            std::ostringstream p;
            write_price_csv(p, job.instance.prices);
            sink.write_file(dir / ("prices_" + month + ".csv"), p.str());
        }
        std::size_t sessions = 0;
        for (const auto& s : *job.sessions) {
            sessions += s.size();
        }
        sink.line(month + " vehicles=" + std::to_string(job.instance.vehicle_count()) +
                  " steps=" + std::to_string(job.instance.grid.size()) + " sessions=" + std::to_string(sessions));
    });
    return worst(errors, sink);
}

int cmd_synth(const AppConfig& cfg, std::optional<std::size_t> vehicles, OutputSink& sink) {
    const auto dir = output_dir(cfg);
    std::filesystem::create_directories(dir);
    const std::size_t K = vehicles.value_or(cfg.fleet_size);
    const auto errors = parallel_for(month_count(cfg), cfg.threads, [&](std::size_t i) {
        MonthJob job;
        if (cfg.source == DataSource::Regression) {
            AppConfig c = cfg;
            c.fleet_size = K;
            job = build_month(c, i);
        } else {
            const MonthJob base = build_month(cfg, i);
            SynthConfig sc;
            sc.n_vehicles = K;
            sc.seed = cfg.seed;
            const FleetInstance& b = base.instance;
            job.instance = synthesize_instance(b.profiles.front(), b.grid, b.prices,
                                               cfg.tariff.value_or(default_tariff_window(K)), sc, &job.clamps);
            job.provenance = {{"source", "synth"}, {"base", base.provenance}, {"vehicles", K}, {"seed", cfg.seed}};
        }
        job.provenance["clamps"] = clamps_to_json(job.clamps);
        const std::string name = "instance_" + job_label(cfg, i, job) + "_K" + std::to_string(K) + "_s" +
                                 std::to_string(cfg.seed) + ".json";
        sink.write_file(dir / name, instance_to_json(job.instance, job.provenance).dump(1) + "\n");
        sink.line(name + " steps=" + std::to_string(job.instance.grid.size()) +
                  " clamped_trips=" + std::to_string(job.clamps.size()));
    });
    return worst(errors, sink);
}

void write_outcome(const std::filesystem::path& dir, const std::string& label, const MonthOutcome& o,
                   OutputSink& sink) {
    for (const MonthReport& r : o.reports) {
        const std::string stem = label + "_" + to_string(r.method);
        sink.write_file(dir / (stem + ".json"), report_to_json(r).dump(1) + "\n");
        sink.write_file(dir / (stem + ".csv"), series_csv(r));
        sink.line(summary_line(r));
    }
    if (o.comparison) {
        sink.write_file(dir / (label + "_compare.json"), comparison_to_json(*o.comparison).dump(1) + "\n");
    }
}

int cmd_plan(const AppConfig& cfg, PlanMethod method, bool baseline, OutputSink& sink) {
    const auto dir = output_dir(cfg);
    std::filesystem::create_directories(dir);
    const std::size_t n = month_count(cfg);
    if (!cfg.chain_months) {
        const unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
        const unsigned inner = n > 1 && workers > 1 ? 1 : cfg.threads;
        const auto errors = parallel_for(n, workers, [&](std::size_t i) {
            const MonthJob job = build_month(cfg, i);
            write_outcome(dir, job_label(cfg, i, job), plan_job(job, method, cfg, baseline, inner), sink);
        });
        return worst(errors, sink);
    }
    if (method == PlanMethod::Uncontrolled) {
        throw InputError("month chaining needs a planned method (seqdp, lp or both)");
    }
    std::vector<double> soc;
    for (std::size_t i = 0; i < n; ++i) {
        try {
            const MonthJob job = build_month(cfg, i, soc);
            const MonthOutcome o = plan_job(job, method, cfg, baseline, cfg.threads);
            write_outcome(dir, job_label(cfg, i, job), o, sink);
            soc.clear();
            for (const VehicleTrajectory& v : o.reports.front().vehicles) {
                soc.push_back(v.soc.back());
            }
        } catch (...) {
            return worst({std::current_exception()}, sink);
        }
    }
    return EXIT_OK;
}

int cmd_compare(const std::vector<std::string>& files, const std::string& output, OutputSink& sink) {
    std::map<std::string, std::vector<MonthReport>> by_month;
    for (const std::string& f : files) {
        MonthReport r = load_report(f);
        by_month[r.month_id].push_back(std::move(r));
    }
    json all = json::array();
    for (const auto& [month, reports] : by_month) {
        const Comparison c = compare(reports);
        std::string line = month;
        if (c.cost_gap) {
            line += " gap=" + fmt(100.0 * *c.cost_gap) + "% peak_gap=" + fmt(100.0 * c.peak_gap.value_or(0.0)) + "%";
        }
        for (const Reduction& r : c.reductions) {
            line += " " + to_string(r.method) + "_reduction=" + fmt(100.0 * r.cost) + "%/" + fmt(100.0 * r.peak) + "%";
        }
        sink.line(line);
        all.push_back(comparison_to_json(c));
    }
    if (!output.empty()) {
        sink.write_file(output, all.dump(1) + "\n");
    }
    return EXIT_OK;
}

int cmd_sweep(const AppConfig& cfg, bool write_reports, OutputSink& sink) {
    if (cfg.source != DataSource::Regression) {
        throw InputError("sweep needs the regression data source");
    }
    const auto dir = output_dir(cfg);
    std::filesystem::create_directories(dir);
    struct Task {
        std::size_t vehicles;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (std::size_t k : cfg.sweep_sizes) {
        for (std::size_t s = 0; s < cfg.sweep_seeds; ++s) {
            tasks.push_back({k, cfg.seed + s});
        }
    }
    std::vector<SweepRun> runs(tasks.size());
    const auto errors = parallel_for(tasks.size(), cfg.threads, [&](std::size_t i) {
        std::vector<MonthReport> reports;
        runs[i] = sweep_run(cfg, tasks[i].vehicles, tasks[i].seed, 1, write_reports ? &reports : nullptr);
        for (const MonthReport& r : reports) {
            const std::string stem = "sweep_K" + std::to_string(tasks[i].vehicles) + "_s" +
                                     std::to_string(tasks[i].seed) + "_" + to_string(r.method);
            sink.write_file(dir / (stem + ".json"), report_to_json(r).dump(1) + "\n");
        }
        sink.line("K=" + std::to_string(runs[i].vehicles) + " seed=" + std::to_string(runs[i].seed) +
                  " gap=" + fmt(100.0 * runs[i].cost_gap) + "% peak_gap=" + fmt(100.0 * runs[i].peak_gap) +
                  "% lp=" + fmt(runs[i].lp_s, 3) + " s seqdp=" + fmt(runs[i].seqdp_s, 3) + " s");
    });
    std::vector<SweepRun> done;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (!errors[i]) {
            done.push_back(runs[i]);
        }
    }
    std::ostringstream csv;
    write_sweep_csv(csv, done);
    sink.write_file(dir / "sweep_runs.csv", csv.str());
    if (!done.empty()) {
        const auto groups = summarize_sweep(done);
        sink.write_file(dir / "sweep_summary.json", sweep_summary_to_json(groups).dump(1) + "\n");
        for (const SweepGroup& g : groups) {
            sink.line("K=" + std::to_string(g.vehicles) + " runs=" + std::to_string(g.runs) +
                      " median_gap=" + fmt(100.0 * g.median_cost_gap) + "% max_gap=" + fmt(100.0 * g.max_cost_gap) +
                      "% max_peak_gap=" + fmt(100.0 * g.max_peak_gap) + "%");
        }
    }
    return worst(errors, sink);
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fleet depot charging planner"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    const auto add_common = [&](CLI::App* sub, bool with_seed) {
        sub->add_option("-c,--config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
        if (with_seed) {
            sub->add_option("--seed", seed, "overrides the configured seed");
        }
        sub->add_option("--threads", threads, "concurrent months or runs (0: all cores)");
    };

    CLI::App* ingest = app.add_subcommand("ingest", "build monthly instances and uncontrolled sessions from telemetry");
    add_common(ingest, false);

    CLI::App* synth = app.add_subcommand("synth", "synthesize a fleet from a base vehicle");
    add_common(synth, true);
    std::optional<std::size_t> vehicles;
    synth->add_option("-k,--vehicles", vehicles, "fleet size")->check(CLI::PositiveNumber);

    CLI::App* plan = app.add_subcommand("plan", "plan every configured month");
    add_common(plan, true);
    std::string method = "seqdp";
    plan->add_option("-m,--method", method, "seqdp, lp, both or uncontrolled")
        ->check(CLI::IsMember({"seqdp", "lp", "both", "uncontrolled"}));
    bool baseline = false;
    plan->add_flag("--baseline", baseline, "also evaluate the uncontrolled baseline");

    CLI::App* cmp = app.add_subcommand("compare", "gap and reduction metrics from saved reports");
    std::vector<std::string> report_files;
    cmp->add_option("reports", report_files, "report JSON files")->required()->check(CLI::ExistingFile);
    std::string cmp_output;
    cmp->add_option("-o,--output", cmp_output, "write the comparison JSON here");

    CLI::App* sweep = app.add_subcommand("sweep", "SeqDP against the LP over fleet sizes and seeds");
    add_common(sweep, true);
    bool sweep_reports = false;
    sweep->add_flag("--reports", sweep_reports, "write one report per run and method");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? EXIT_OK : EXIT_INPUT;
    }

    OutputSink sink(out, err);
    try {
        if (cmp->parsed()) {
            return cmd_compare(report_files, cmp_output, sink);
        }
        AppConfig cfg = load_config(config_path);
        if (seed) {
            cfg.seed = *seed;
        }
        if (threads) {
            cfg.threads = *threads;
        }
        if (ingest->parsed()) {
            return cmd_ingest(cfg, sink);
        }
        if (synth->parsed()) {
            return cmd_synth(cfg, vehicles, sink);
        }
        if (plan->parsed()) {
            return cmd_plan(cfg, plan_method_from_string(method), baseline, sink);
        }
        return cmd_sweep(cfg, sweep_reports, sink);
    } catch (...) {
        return worst({std::current_exception()}, sink);
    }
}

} // namespace fleetcharge
