#include "fleetcharge/presets.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>

#include "fleetcharge/errors.hpp"

namespace fleetcharge {

BatteryParams preset_battery() {
    BatteryParams b;
    b.capacity_kwh = DEFAULT_CAPACITY_KWH;
    b.epsilon = 2.0;
    return b;
}

std::vector<TimetableEntry> shuttle_timetable() {
    return {
        {7 * 60 + 35, 9 * 60 + 35, 0.35},
        {10 * 60, 12 * 60, 0.30},
        {13 * 60, 16 * 60 + 35, 0.35},
    };
}

std::vector<TimetableEntry> depot_timetable() {
    return {
        {7 * 60, 9 * 60 + 35, 0.35},
        {10 * 60, 12 * 60, 0.30},
        {13 * 60, 17 * 60, 0.35},
    };
}

VehicleSchedule timetable_schedule(const std::string& vehicle_id, const std::string& month_id,
                                   const std::vector<TimetableEntry>& day, double daily_drop, int offset_hours) {
    using namespace std::chrono;
    const auto [begin, end] = month_bounds(month_id);
    VehicleSchedule s;
    s.vehicle_id = vehicle_id;
    for (Instant d = begin; d < end; d += days(1)) {
        const unsigned wd = weekday_of(d);
        if (wd == 0 || wd == 6) {
            continue;
        }
        for (const TimetableEntry& e : day) {
            const Instant a = d + minutes(e.start_min) + hours(offset_hours);
            const Instant b = d + minutes(e.end_min) + hours(offset_hours);
            if (a < begin || b > end) {
                continue;
            }
            s.trips.push_back({a, b, daily_drop * e.soc_share});
        }
    }
    return s;
}

namespace {

constexpr double HOUR_SHAPE[24] = {
    0.55, 0.50, 0.48, 0.47, 0.48, 0.55, 0.85, 1.25, 1.35, 1.15, 1.00, 0.95,
    0.90, 0.88, 0.90, 1.00, 1.20, 1.55, 1.70, 1.55, 1.25, 1.00, 0.80, 0.65,
};

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

SpotPriceSeries synthetic_spot_prices(Instant begin, Instant end, std::uint64_t seed, double level) {
    using namespace std::chrono;
    std::map<Instant, double> hourly;
    const Instant first_day = floor<days>(floor_to_hour(begin));
    for (Instant d = first_day; d < end; d += days(1)) {
        const auto day_no = static_cast<std::uint64_t>(duration_cast<days>(d.time_since_epoch()).count());
        SynthRng rng(mix(seed, day_no));
        const year_month_day ymd{floor<days>(d)};
        const double month = static_cast<double>(static_cast<unsigned>(ymd.month()));
        const double season = 1.0 + 0.6 * std::cos(2.0 * std::numbers::pi * (month - 1.0) / 12.0);
        const double daily = rng.uniform(0.75, 1.25);
        const unsigned wd = weekday_of(d);
        const double weekend = (wd == 0 || wd == 6) ? 0.85 : 1.0;
        for (int h = 0; h < 24; ++h) {
            const double noise = rng.uniform(0.9, 1.1);
            const Instant t = d + hours(h);
            if (t < floor_to_hour(begin) || t >= end) {
                continue;
            }
            hourly[t] = level * season * daily * weekend * HOUR_SHAPE[h] * noise;
        }
    }
    return SpotPriceSeries(std::move(hourly), "EUR");
}

SpotPriceSeries synthetic_month_prices(const std::string& month_id, std::uint64_t seed, double level, int pad_hours) {
    const auto [begin, end] = month_bounds(month_id);
    return synthetic_spot_prices(add_hours(begin, -pad_hours), add_hours(end, pad_hours), seed, level);
}

TariffModel default_tariff_window(std::size_t vehicles, double c_m) {
    TariffModel t;
    t.c_m = c_m;
    t.candidate_step = 1.0;
    double lo = 0.0;
    switch (vehicles) {
    case 3: lo = 0.0; break;
    case 10: lo = 5.0; break;
    case 20: lo = 20.0; break;
    case 30: lo = 35.0; break;
    case 50: lo = 65.0; break;
    default: lo = std::max(0.0, std::round(1.45 * static_cast<double>(vehicles)) - 8.0); break;
    }
    t.candidate_lo = lo;
    t.candidate_hi = lo + 15.0;
    t.p_grid_max = t.candidate_hi;
    return t;
}

std::vector<OperationLog> three_shuttle_logs(const std::string& month_id, const ThreeShuttleOptions& opt) {
    if (opt.need_factors.size() != opt.offsets_h.size() || opt.need_factors.empty()) {
        throw std::invalid_argument("three-shuttle preset needs one offset per need factor");
    }
    const auto [begin, end] = month_bounds(month_id);
    const std::string next = month_label(end);
    std::vector<OperationLog> logs;
    for (std::size_t k = 0; k < opt.need_factors.size(); ++k) {
        const std::string id = "shuttle_" + std::to_string(k + 1);
        const double drop = opt.base_daily_drop * opt.need_factors[k];
        auto trips = timetable_schedule(id, month_id, opt.day, drop, opt.offsets_h[k]).trips;
        const auto after = timetable_schedule(id, next, opt.day, drop, opt.offsets_h[k]).trips;
        if (!after.empty()) {
            trips.push_back(after.front());
        }
        std::vector<LogSample> samples;
        double soc = opt.battery.soc_init;
        for (std::size_t i = 0; i < trips.size(); ++i) {
            const auto day = std::chrono::floor<std::chrono::days>(trips[i].start);
            if (i > 0 && std::chrono::floor<std::chrono::days>(trips[i - 1].start) != day) {
                soc = opt.battery.soc_max;
            }
            samples.push_back({trips[i].start, std::round(soc), VehicleState::Operating});
            soc -= trips[i].soc_drop;
            samples.push_back({trips[i].end, std::round(soc), VehicleState::Idle});
        }
        logs.emplace_back(id, std::move(samples));
    }
    (void)begin;
    return logs;
}

ThreeShuttleMonth three_shuttle_month(const std::string& month_id, const ThreeShuttleOptions& opt) {
    const auto [begin, end] = month_bounds(month_id);
    ThreeShuttleMonth out;
    out.logs = three_shuttle_logs(month_id, opt);
    std::vector<OperationLog> inside;
    std::vector<Instant> events;
    for (const OperationLog& log : out.logs) {
        inside.push_back(log.restricted_to(begin, end));
        const auto ev = inside.back().events();
        events.insert(events.end(), ev.begin(), ev.end());
    }
    FleetInstance& inst = out.instance;
    inst.grid = TimeGrid::for_month(month_id, events);
    inst.prices = synthetic_month_prices(month_id, opt.price_seed, opt.price_level);
    inst.tariff = default_tariff_window(3);
    for (const OperationLog& log : inside) {
        inst.profiles.push_back(build_profile(log, inst.grid, opt.battery, DEFAULT_CHARGER_KW));
    }
    inst.validate();
    for (const OperationLog& log : out.logs) {
        std::vector<UncontrolledSession> kept;
        for (const UncontrolledSession& s :
             detect_sessions(log, opt.battery.capacity_kwh, UNCONTROLLED_POWER_KW)) {
            if (s.end > begin && s.start < end) {
                kept.push_back(s);
            }
        }
        out.sessions.push_back(std::move(kept));
    }
    return out;
}

VehicleSchedule regression_base(const RegressionOptions& opt) {
    return timetable_schedule("base", opt.month_id, shuttle_timetable(), opt.base_daily_drop, 0);
}

FleetInstance regression_fleet(std::size_t vehicles, std::uint64_t seed, const RegressionOptions& opt,
                               std::vector<ClampEvent>* clamps) {
    SynthConfig cfg;
    cfg.n_vehicles = vehicles;
    cfg.seed = seed;
    SynthResult r = synthesize(regression_base(opt), opt.month_id, opt.battery, DEFAULT_CHARGER_KW, cfg);
    if (clamps) {
        *clamps = r.clamps;
    }
    return assemble_feasible(opt.month_id, r.vehicles, opt.battery, DEFAULT_CHARGER_KW,
                             synthetic_month_prices(opt.month_id, opt.price_seed, opt.price_level),
                             default_tariff_window(vehicles), clamps);
}

} // namespace fleetcharge
