#include "fleetcharge/fleet_synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "fleetcharge/dp_solver.hpp"
#include "fleetcharge/errors.hpp"
#include "fleetcharge/session_ingest.hpp"

namespace fleetcharge {

double SynthRng::uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

std::uint64_t SynthRng::uniform_int(std::uint64_t n) {
    if (n == std::numeric_limits<std::uint64_t>::max()) {
        return engine_();
    }
    const std::uint64_t range = n + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x = engine_();
    while (x >= limit) {
        x = engine_();
    }
    return x % range;
}

void SynthConfig::validate() const {
    if (n_vehicles < 1) {
        throw std::invalid_argument("n_vehicles must be at least 1");
    }
    if (!(scale_lo > 0.0) || scale_hi < scale_lo) {
        throw std::invalid_argument("scale range must satisfy 0 < scale_lo <= scale_hi");
    }
}

VehicleSchedule schedule_from_profile(const VehicleProfile& profile, const TimeGrid& grid) {
    profile.validate(grid.size());
    VehicleSchedule s;
    s.vehicle_id = profile.vehicle_id;
    std::size_t t = 0;
    while (t < grid.size()) {
        if (profile.steps[t].sigma_h > 0.0) {
            ++t;
            continue;
        }
        Trip trip{grid.step(t).start, grid.step(t).end, 0.0};
        while (t < grid.size() && profile.steps[t].sigma_h <= 0.0) {
            trip.end = grid.step(t).end;
            trip.soc_drop += profile.steps[t].delta_soc_op;
            ++t;
        }
        s.trips.push_back(trip);
    }
    return s;
}

FleetInstance assemble_instance(const std::string& month_id, std::span<const VehicleSchedule> schedules,
                                const BatteryParams& battery, double p_max_charger, SpotPriceSeries prices,
                                TariffModel tariff) {
    std::vector<Instant> events;
    for (const VehicleSchedule& s : schedules) {
        for (const Trip& t : s.trips) {
            events.push_back(t.start);
            events.push_back(t.end);
        }
    }
    FleetInstance inst;
    inst.grid = TimeGrid::for_month(month_id, events);
    inst.prices = std::move(prices);
    inst.tariff = tariff;
    for (const VehicleSchedule& s : schedules) {
        std::vector<Operation> ops;
        for (const Trip& t : s.trips) {
            ops.push_back({t.start, t.end, 100.0, 100.0 - t.soc_drop});
        }
        inst.profiles.push_back(
            build_profile(OperationLog::from_operations(s.vehicle_id, std::move(ops)), inst.grid, battery, p_max_charger));
    }
    inst.validate();
    return inst;
}

std::vector<double> feasible_drops(const std::vector<Trip>& trips, Instant month_begin, Instant month_end,
                                   const BatteryParams& b, double p_max_charger, std::vector<bool>* clamped) {
    std::vector<double> out(trips.size());
    if (clamped) {
        clamped->assign(trips.size(), false);
    }
    const auto potential = [&](Instant from, Instant to) {
        const double gap = hours_between(from, to);
        return gap >= MIN_CHARGE_WINDOW_H ? b.soc_gain(p_max_charger, gap) : 0.0;
    };
    double soc = b.soc_init;
    for (std::size_t i = 0; i < trips.size(); ++i) {
        const Instant prev_end = i == 0 ? month_begin : trips[i - 1].end;
        soc = std::min(b.soc_max, soc + potential(prev_end, trips[i].start));
        double allowed = soc - b.soc_min;
        if (i + 1 == trips.size()) {
            allowed = std::min(allowed, soc - (b.soc_target - b.epsilon -
                                               potential(trips[i].end, month_end)));
        }
        allowed = std::max(0.0, allowed);
        double drop = trips[i].soc_drop;
        if (drop > allowed + 1e-12) {
            drop = allowed;
            if (clamped) {
                (*clamped)[i] = true;
            }
        }
        out[i] = drop;
        soc -= drop;
    }
    return out;
}

namespace {

void check_schedule(const VehicleSchedule& s, Instant begin, Instant end) {
    for (std::size_t i = 0; i < s.trips.size(); ++i) {
        const Trip& t = s.trips[i];
        if (t.end <= t.start || t.start < begin || t.end > end || t.soc_drop < 0.0) {
            throw InputError("vehicle " + s.vehicle_id + ": trip " + std::to_string(i) + " at " +
                             format_iso8601(t.start) + " is malformed or outside the month");
        }
        if (i > 0 && t.start < s.trips[i - 1].end) {
            throw InputError("vehicle " + s.vehicle_id + ": trip " + std::to_string(i) + " at " +
                             format_iso8601(t.start) + " overlaps the previous trip");
        }
    }
}

} // namespace

SynthResult synthesize(const VehicleSchedule& base, const std::string& month_id, const BatteryParams& battery,
                       double p_max_charger, const SynthConfig& cfg) {
    cfg.validate();
    battery.validate();
    const auto [begin, end] = month_bounds(month_id);
    check_schedule(base, begin, end);
    std::vector<bool> clamped;
    feasible_drops(base.trips, begin, end, battery, p_max_charger, &clamped);
    for (std::size_t i = 0; i < clamped.size(); ++i) {
        if (clamped[i]) {
            throw InputError("base vehicle " + base.vehicle_id + ": trip " + std::to_string(i) + " at " +
                             format_iso8601(base.trips[i].start) + " cannot be served within the SoC limits");
        }
    }

    SynthResult out;
    out.vehicles.push_back(base);
    SynthRng rng(cfg.seed);
    const auto month_len = end - begin;
    for (std::size_t v = 2; v <= cfg.n_vehicles; ++v) {
        const auto shift = std::chrono::hours(static_cast<long>(rng.uniform_int(cfg.shift_hours_max)));
        VehicleSchedule s;
        s.vehicle_id = base.vehicle_id + "_" + std::to_string(v);
        for (const Trip& t : base.trips) {
            const double drop = t.soc_drop * rng.uniform(cfg.scale_lo, cfg.scale_hi);
            Instant a = t.start + shift;
            Instant e = t.end + shift;
            if (a >= end) {
                a -= month_len;
                e -= month_len;
                s.trips.push_back({a, e, drop});
            } else if (e > end) {
                const double head = hours_between(a, end) / hours_between(a, e);
                s.trips.push_back({a, end, drop * head});
                s.trips.push_back({begin, e - month_len, drop * (1.0 - head)});
            } else {
                s.trips.push_back({a, e, drop});
            }
        }
        std::sort(s.trips.begin(), s.trips.end(), [](const Trip& x, const Trip& y) { return x.start < y.start; });
        const auto drops = feasible_drops(s.trips, begin, end, battery, p_max_charger, &clamped);
        for (std::size_t i = 0; i < s.trips.size(); ++i) {
            if (clamped[i]) {
                out.clamps.push_back({s.vehicle_id, i, s.trips[i].start, s.trips[i].soc_drop, drops[i]});
            }
            s.trips[i].soc_drop = drops[i];
        }
        out.vehicles.push_back(std::move(s));
    }
    return out;
}

namespace {

constexpr int MAX_REPAIR_ROUNDS = 8;

/// Last step whose cost-to-go column is entirely infinite, or nullopt when J_0(soc_init) is finite.
std::optional<std::size_t> dead_end(const VehicleProfile& v, const FleetInstance& inst,
                                    std::span<const double> prices, std::span<const double> dur) {
    const CostToGo ctg = backward_pass(VehicleDpInput{v, prices, dur, {}}, DpConfig{});
    if (std::isfinite(ctg.interpolate(0, v.battery.soc_init))) {
        return std::nullopt;
    }
    for (std::size_t t = inst.grid.size(); t-- > 0;) {
        bool any = false;
        for (std::size_t i = 0; i < ctg.grid().size() && !any; ++i) {
            any = std::isfinite(ctg.at(t, i));
        }
        if (!any) {
            return t;
        }
    }
    return 0;
}

} // namespace

FleetInstance assemble_feasible(const std::string& month_id, std::vector<VehicleSchedule>& schedules,
                                const BatteryParams& battery, double p_max_charger, const SpotPriceSeries& prices,
                                const TariffModel& tariff, std::vector<ClampEvent>* clamps) {
    for (int round = 0;; ++round) {
        FleetInstance inst = assemble_instance(month_id, schedules, battery, p_max_charger, prices, tariff);
        const auto step_prices = inst.prices.step_prices(inst.grid);
        const auto dur = inst.grid.durations();
        bool changed = false;
        for (std::size_t k = 0; k < schedules.size(); ++k) {
            const auto t = dead_end(inst.profiles[k], inst, step_prices, dur);
            if (!t) {
                continue;
            }
            VehicleSchedule& s = schedules[k];
            if (k == 0 || round == MAX_REPAIR_ROUNDS) {
                throw InputError("vehicle " + s.vehicle_id + " has no feasible charging schedule (dead end at " +
                                 format_iso8601(inst.grid.step(*t).start) + ")");
            }
            const Instant from = inst.grid.step(*t).start;
            for (std::size_t i = 0; i < s.trips.size(); ++i) {
                Trip& trip = s.trips[i];
                if (trip.end <= from || trip.soc_drop <= 0.0) {
                    continue;
                }
                if (clamps) {
                    clamps->push_back({s.vehicle_id, i, trip.start, trip.soc_drop, 0.0});
                }
                trip.soc_drop = 0.0;
                changed = true;
            }
        }
        if (!changed) {
            return inst;
        }
    }
}

FleetInstance synthesize_instance(const VehicleProfile& base, const TimeGrid& base_grid,
                                  const SpotPriceSeries& prices, const TariffModel& tariff, const SynthConfig& cfg,
                                  std::vector<ClampEvent>* clamps) {
    const VehicleSchedule schedule = schedule_from_profile(base, base_grid);
    SynthResult r = synthesize(schedule, base_grid.month_id(), base.battery, base.p_max_charger, cfg);
    if (clamps) {
        *clamps = r.clamps;
    }
    return assemble_feasible(base_grid.month_id(), r.vehicles, base.battery, base.p_max_charger, prices, tariff, clamps);
}

} // namespace fleetcharge
