#include "fleetcharge/session_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fleetcharge/errors.hpp"

namespace fleetcharge {

namespace {

double overlap_h(Instant a0, Instant a1, Instant b0, Instant b1) {
    const Instant lo = std::max(a0, b0);
    const Instant hi = std::min(a1, b1);
    return hi > lo ? hours_between(lo, hi) : 0.0;
}

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

} // namespace

OperationLog::OperationLog(std::string vehicle_id, std::vector<LogSample> samples)
    : vehicle_id_(std::move(vehicle_id)), samples_(std::move(samples)) {
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const double soc = samples_[i].soc_percent;
        if (!(soc >= 0.0 && soc <= 100.0)) {
            throw DataInconsistencyError("vehicle " + vehicle_id_ + ": SoC " + std::to_string(soc) + " at " +
                                         format_iso8601(samples_[i].timestamp) + " outside [0, 100]");
        }
        if (i > 0 && samples_[i].timestamp <= samples_[i - 1].timestamp) {
            throw DataInconsistencyError("vehicle " + vehicle_id_ + ": timestamps not strictly increasing at " +
                                         format_iso8601(samples_[i].timestamp));
        }
    }
    std::size_t i = 0;
    const std::size_t n = samples_.size();
    while (i < n) {
        if (samples_[i].state != VehicleState::Operating) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && samples_[j + 1].state == VehicleState::Operating) {
            ++j;
        }
        // Close the run at the first sample after it, or at the last sample of the log.
        const std::size_t close = j + 1 < n ? j + 1 : j;
        if (close > i) {
            operations_.push_back({samples_[i].timestamp, samples_[close].timestamp, samples_[i].soc_percent,
                                   samples_[close].soc_percent});
        }
        i = j + 1;
    }
}

OperationLog OperationLog::from_operations(std::string vehicle_id, std::vector<Operation> operations) {
    OperationLog log;
    log.vehicle_id_ = std::move(vehicle_id);
    for (const Operation& op : operations) {
        if (op.end <= op.start) {
            throw DataInconsistencyError("vehicle " + log.vehicle_id_ + ": operation at " + format_iso8601(op.start) +
                                         " has non-positive duration");
        }
    }
    log.operations_ = std::move(operations);
    return log;
}

OperationLog OperationLog::restricted_to(Instant begin, Instant end) const {
    std::vector<Operation> kept;
    for (const Operation& op : operations_) {
        const Instant s = std::max(op.start, begin);
        const Instant e = std::min(op.end, end);
        if (e <= s) {
            continue;
        }
        const double share = hours_between(s, e) / op.duration_h();
        const double drop = (op.soc_start - op.soc_end) * share;
        const double head = (op.soc_start - op.soc_end) * hours_between(op.start, s) / op.duration_h();
        kept.push_back({s, e, op.soc_start - head, op.soc_start - head - drop});
    }
    OperationLog out = from_operations(vehicle_id_, std::move(kept));
    for (const LogSample& smp : samples_) {
        if (smp.timestamp >= begin && smp.timestamp < end) {
            out.samples_.push_back(smp);
        }
    }
    return out;
}

std::vector<Instant> OperationLog::events() const {
    std::vector<Instant> out;
    out.reserve(operations_.size() * 2);
    for (const Operation& op : operations_) {
        out.push_back(op.start);
        out.push_back(op.end);
    }
    return out;
}

OperationLog read_operation_log_csv(std::istream& in, const std::string& vehicle_id, const std::string& source) {
    std::string line;
    if (!std::getline(in, line) || trim(line).rfind("timestamp", 0) != 0) {
        throw InputError(source + ": expected header 'timestamp_iso8601,soc_percent,state'");
    }
    std::vector<LogSample> samples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string ts, soc, state;
        if (!std::getline(ss, ts, ',') || !std::getline(ss, soc, ',') || !std::getline(ss, state)) {
            throw InputError(source + ":" + std::to_string(line_no) + ": expected three columns");
        }
        LogSample s;
        try {
            s.timestamp = parse_iso8601(ts);
            s.soc_percent = std::stod(soc);
        } catch (const std::exception& e) {
            throw InputError(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
        state = to_lower(trim(state));
        if (state == "operating") {
            s.state = VehicleState::Operating;
        } else if (state == "idle") {
            s.state = VehicleState::Idle;
        } else {
            throw InputError(source + ":" + std::to_string(line_no) + ": unknown state '" + state + "'");
        }
        samples.push_back(s);
    }
    return OperationLog(vehicle_id, std::move(samples));
}

OperationLog read_operation_log_csv(const std::filesystem::path& path, const std::string& vehicle_id) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open operation log " + path.string());
    }
    return read_operation_log_csv(in, vehicle_id, path.string());
}

void write_operation_log_csv(std::ostream& out, const OperationLog& log) {
    out << "timestamp_iso8601,soc_percent,state\n";
    if (!log.samples().empty()) {
        for (const LogSample& s : log.samples()) {
            out << format_iso8601(s.timestamp) << ',' << s.soc_percent << ','
                << (s.state == VehicleState::Operating ? "operating" : "idle") << '\n';
        }
        return;
    }
    for (const Operation& op : log.operations()) {
        out << format_iso8601(op.start) << ',' << op.soc_start << ",operating\n";
        out << format_iso8601(op.end) << ',' << op.soc_end << ",idle\n";
    }
}

std::vector<UncontrolledSession> detect_sessions(const OperationLog& log, double capacity_kwh,
                                                 double assumed_power_kw) {
    const auto& ops = log.operations();
    if (ops.size() < 2) {
        throw std::invalid_argument("vehicle " + log.vehicle_id() + ": session detection needs at least two operations");
    }
    if (!(assumed_power_kw > 0.0) || !(capacity_kwh > 0.0)) {
        throw std::invalid_argument("session detection needs positive capacity and charging power");
    }
    std::vector<UncontrolledSession> out;
    for (std::size_t i = 0; i + 1 < ops.size(); ++i) {
        const Operation& prev = ops[i];
        const Operation& next = ops[i + 1];
        if (next.start < prev.end) {
            throw DataInconsistencyError("vehicle " + log.vehicle_id() + ": operation starting " +
                                         format_iso8601(next.start) + " overlaps the one ending " +
                                         format_iso8601(prev.end));
        }
        const double gain = next.soc_start - prev.soc_end;
        if (gain < SOC_RESOLUTION - 1e-9) {
            continue;
        }
        UncontrolledSession s;
        s.assumed_power_kw = assumed_power_kw;
        s.required_energy_kwh = gain / 100.0 * capacity_kwh;
        const double gap_h = hours_between(prev.end, next.start);
        double duration_h = s.required_energy_kwh / assumed_power_kw;
        if (duration_h > gap_h) {
            duration_h = gap_h;
            s.clipped = true;
        }
        s.start = prev.end;
        s.end = prev.end + std::chrono::seconds{static_cast<std::int64_t>(std::llround(duration_h * SECONDS_PER_HOUR))};
        if (s.end > next.start) {
            s.end = next.start;
        }
        s.energy_kwh = assumed_power_kw * s.duration_h();
        if (s.energy_kwh <= 0.0) {
            continue;
        }
        out.push_back(s);
    }
    return out;
}

VehicleProfile build_profile(const OperationLog& log, const TimeGrid& grid, const BatteryParams& battery,
                             double p_max_charger) {
    if (grid.empty()) {
        throw std::invalid_argument("cannot build a profile on an empty grid");
    }
    VehicleProfile p;
    p.vehicle_id = log.vehicle_id();
    p.battery = battery;
    p.p_max_charger = p_max_charger;
    p.steps.assign(grid.size(), StepRecord{});
    std::vector<bool> operating(grid.size(), false);
    for (const Operation& op : log.operations()) {
        if (op.start < grid.begin() || op.end > grid.end()) {
            throw InputError("vehicle " + log.vehicle_id() + ": operation " + format_iso8601(op.start) + " - " +
                             format_iso8601(op.end) + " extends past the grid");
        }
        const double dur = op.duration_h();
        const double drop = op.soc_drop();
        for (std::size_t t = grid.index_of(op.start); t < grid.size() && grid.step(t).start < op.end; ++t) {
            const double ov = overlap_h(grid.step(t).start, grid.step(t).end, op.start, op.end);
            if (ov <= 0.0) {
                continue;
            }
            operating[t] = true;
            p.steps[t].delta_soc_op += drop * ov / dur;
        }
    }
    std::size_t t = 0;
    while (t < grid.size()) {
        if (operating[t]) {
            ++t;
            continue;
        }
        std::size_t u = t;
        double window = 0.0;
        while (u < grid.size() && !operating[u]) {
            window += grid.duration(u);
            ++u;
        }
        for (std::size_t v = t; v < u; ++v) {
            p.steps[v].sigma_h = window;
            p.steps[v].available = window >= MIN_CHARGE_WINDOW_H;
        }
        t = u;
    }
    return p;
}

UncontrolledResult uncontrolled_baseline(std::span<const std::vector<UncontrolledSession>> sessions,
                                         const FleetInstance& instance) {
    if (sessions.size() != instance.profiles.size()) {
        throw AlignmentError("expected sessions for " + std::to_string(instance.profiles.size()) + " vehicles, got " +
                             std::to_string(sessions.size()));
    }
    const TimeGrid& grid = instance.grid;
    UncontrolledResult out;
    for (std::size_t k = 0; k < sessions.size(); ++k) {
        std::vector<double> power(grid.size(), 0.0);
        for (const UncontrolledSession& s : sessions[k]) {
            if (s.end <= grid.begin() || s.start >= grid.end()) {
                continue;
            }
            const Instant from = std::max(s.start, grid.begin());
            for (std::size_t t = grid.index_of(from); t < grid.size() && grid.step(t).start < s.end; ++t) {
                const double ov = overlap_h(grid.step(t).start, grid.step(t).end, s.start, s.end);
                power[t] += s.assumed_power_kw * ov / grid.duration(t);
            }
        }
        out.plans.push_back(simulate_plan(instance.profiles[k], grid, std::move(power)));
    }
    out.cost = fleet_total_cost(out.plans, instance);
    return out;
}

} // namespace fleetcharge
