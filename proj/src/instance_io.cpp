#include "fleetcharge/instance_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "fleetcharge/errors.hpp"

namespace fleetcharge {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    return it == j.end() ? fallback : it->get<T>();
}

} // namespace

const json& require_field(const json& j, const std::string& field, const std::string& context) {
    auto it = j.find(field);
    if (it == j.end()) {
        throw InputError(context + ": missing field '" + field + "'");
    }
    return *it;
}

SpotPriceSeries read_price_csv(std::istream& in, const std::string& source, const std::string& currency) {
    std::string line;
    if (!std::getline(in, line)) {
        throw InputError(source + ": empty price file");
    }
    if (trim(line).rfind("hour_start", 0) != 0) {
        throw InputError(source + ": expected header 'hour_start_iso8601,price'");
    }
    std::map<Instant, double> hourly;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw InputError(source + ":" + std::to_string(line_no) + ": expected two columns");
        }
        try {
            const Instant hour = parse_iso8601(line.substr(0, comma));
            const double price = std::stod(line.substr(comma + 1));
            if (floor_to_hour(hour) != hour) {
                throw InputError(source + ":" + std::to_string(line_no) + ": timestamp is not an hour start");
            }
            if (!hourly.emplace(hour, price).second) {
                throw InputError(source + ":" + std::to_string(line_no) + ": duplicate hour");
            }
        } catch (const InputError&) {
            throw;
        } catch (const std::exception& e) {
            throw InputError(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    try {
        return SpotPriceSeries(std::move(hourly), currency);
    } catch (const std::invalid_argument& e) {
        throw InputError(source + ": " + e.what());
    }
}

SpotPriceSeries read_price_csv(const std::filesystem::path& path, const std::string& currency) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open price file " + path.string());
    }
    return read_price_csv(in, path.string(), currency);
}

void write_price_csv(std::ostream& out, const SpotPriceSeries& prices) {
    out << "hour_start_iso8601,price\n";
    char buf[64];
    for (const auto& [hour, price] : prices.hourly()) {
        std::snprintf(buf, sizeof buf, "%.17g", price);
        out << format_iso8601(hour) << ',' << buf << '\n';
    }
}

json battery_to_json(const BatteryParams& b) {
    return {{"capacity_kwh", b.capacity_kwh}, {"soc_min", b.soc_min},       {"soc_max", b.soc_max},
            {"soc_init", b.soc_init},         {"soc_target", b.soc_target}, {"epsilon", b.epsilon}};
}

BatteryParams battery_from_json(const json& j) {
    BatteryParams b;
    b.capacity_kwh = get_or(j, "capacity_kwh", b.capacity_kwh);
    b.soc_min = get_or(j, "soc_min", b.soc_min);
    b.soc_max = get_or(j, "soc_max", b.soc_max);
    b.soc_init = get_or(j, "soc_init", b.soc_init);
    b.soc_target = get_or(j, "soc_target", b.soc_target);
    b.epsilon = get_or(j, "epsilon", b.epsilon);
    return b;
}

json tariff_to_json(const TariffModel& t) {
    return {{"c_m", t.c_m},
            {"p_grid_max", t.p_grid_max},
            {"candidate_lo", t.candidate_lo},
            {"candidate_hi", t.candidate_hi},
            {"candidate_step", t.candidate_step}};
}

TariffModel tariff_from_json(const json& j) {
    TariffModel t;
    t.c_m = get_or(j, "c_m", t.c_m);
    t.p_grid_max = get_or(j, "p_grid_max", t.p_grid_max);
    t.candidate_lo = get_or(j, "candidate_lo", t.candidate_lo);
    t.candidate_hi = get_or(j, "candidate_hi", t.candidate_hi);
    t.candidate_step = get_or(j, "candidate_step", t.candidate_step);
    return t;
}

json profile_to_json(const VehicleProfile& p) {
    json depletion = json::array();
    json sigma = json::array();
    json available = json::array();
    for (const StepRecord& r : p.steps) {
        depletion.push_back(r.delta_soc_op);
        sigma.push_back(r.sigma_h);
        available.push_back(r.available ? 1 : 0);
    }
    return {{"vehicle_id", p.vehicle_id},
            {"battery", battery_to_json(p.battery)},
            {"p_max_charger", p.p_max_charger},
            {"delta_soc_op", std::move(depletion)},
            {"sigma_h", std::move(sigma)},
            {"available", std::move(available)}};
}

VehicleProfile profile_from_json(const json& j) {
    VehicleProfile p;
    p.vehicle_id = require_field(j, "vehicle_id", "vehicle").get<std::string>();
    const std::string ctx = "vehicle " + p.vehicle_id;
    p.battery = battery_from_json(require_field(j, "battery", ctx));
    p.p_max_charger = require_field(j, "p_max_charger", ctx).get<double>();
    const auto& depletion = require_field(j, "delta_soc_op", ctx);
    const auto& sigma = require_field(j, "sigma_h", ctx);
    const auto& available = require_field(j, "available", ctx);
    if (depletion.size() != sigma.size() || depletion.size() != available.size()) {
        throw AlignmentError(ctx + ": per-step arrays differ in length");
    }
    p.steps.resize(depletion.size());
    for (std::size_t t = 0; t < depletion.size(); ++t) {
        p.steps[t].delta_soc_op = depletion[t].get<double>();
        p.steps[t].sigma_h = sigma[t].get<double>();
        p.steps[t].available = available[t].is_boolean() ? available[t].get<bool>() : available[t].get<int>() != 0;
    }
    return p;
}

json grid_to_json(const TimeGrid& g) {
    json secs = json::array();
    for (const Step& s : g.steps()) {
        secs.push_back((s.end - s.start).count());
    }
    return {{"month_id", g.month_id()},
            {"begin", g.empty() ? std::string{} : format_iso8601(g.begin())},
            {"step_seconds", std::move(secs)}};
}

TimeGrid grid_from_json(const json& j) {
    const auto month = require_field(j, "month_id", "grid").get<std::string>();
    const auto& secs = require_field(j, "step_seconds", "grid");
    std::vector<Step> steps;
    if (!secs.empty()) {
        Instant cursor = parse_iso8601(require_field(j, "begin", "grid").get<std::string>());
        for (const auto& s : secs) {
            const Instant next = cursor + std::chrono::seconds{s.get<std::int64_t>()};
            steps.push_back({cursor, next});
            cursor = next;
        }
    }
    try {
        return TimeGrid(month, std::move(steps));
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("grid: ") + e.what());
    }
}

json prices_to_json(const SpotPriceSeries& p) {
    json hourly = json::array();
    for (const auto& [hour, price] : p.hourly()) {
        hourly.push_back(json::array({format_iso8601(hour), price}));
    }
    return {{"currency", p.currency()}, {"hourly", std::move(hourly)}};
}

SpotPriceSeries prices_from_json(const json& j) {
    std::map<Instant, double> hourly;
    for (const auto& row : require_field(j, "hourly", "prices")) {
        hourly.emplace(parse_iso8601(row.at(0).get<std::string>()), row.at(1).get<double>());
    }
    return SpotPriceSeries(std::move(hourly), get_or<std::string>(j, "currency", "EUR"));
}

json instance_to_json(const FleetInstance& inst, const json& provenance) {
    json vehicles = json::array();
    for (const VehicleProfile& p : inst.profiles) {
        vehicles.push_back(profile_to_json(p));
    }
    json out = {{"schema", INSTANCE_SCHEMA},
                {"grid", grid_to_json(inst.grid)},
                {"prices", prices_to_json(inst.prices)},
                {"tariff", tariff_to_json(inst.tariff)},
                {"vehicles", std::move(vehicles)}};
    if (!provenance.is_null()) {
        out["provenance"] = provenance;
    }
    return out;
}

FleetInstance instance_from_json(const json& j) {
    FleetInstance inst;
    inst.grid = grid_from_json(require_field(j, "grid", "instance"));
    inst.prices = prices_from_json(require_field(j, "prices", "instance"));
    inst.tariff = tariff_from_json(require_field(j, "tariff", "instance"));
    for (const auto& v : require_field(j, "vehicles", "instance")) {
        inst.profiles.push_back(profile_from_json(v));
    }
    try {
        inst.validate();
    } catch (const InputError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("instance: ") + e.what());
    }
    return inst;
}

FleetInstance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open instance file " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    return instance_from_json(j);
}

void save_instance(const std::filesystem::path& path, const FleetInstance& inst, const json& provenance) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write instance file " + path.string());
    }
    out << instance_to_json(inst, provenance).dump(1) << '\n';
}

std::string instance_fingerprint(const FleetInstance& inst) {
    const std::string text = instance_to_json(inst).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace fleetcharge
