#include "fleetcharge/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "fleetcharge/errors.hpp"

namespace fleetcharge {

namespace {

constexpr double TOL = 1e-9;

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

} // namespace

TimeGrid::TimeGrid(std::string month_id, std::vector<Step> steps) : month_id_(std::move(month_id)), steps_(std::move(steps)) {
    for (std::size_t t = 0; t < steps_.size(); ++t) {
        const Step& s = steps_[t];
        if (s.end <= s.start) {
            fail("time grid step " + std::to_string(t) + " has non-positive duration");
        }
        if (floor_to_hour(s.start) != floor_to_hour(s.end - std::chrono::seconds{1})) {
            fail("time grid step " + std::to_string(t) + " crosses an hour boundary");
        }
        if (t > 0 && steps_[t - 1].end != s.start) {
            fail("time grid steps " + std::to_string(t - 1) + " and " + std::to_string(t) + " are not contiguous");
        }
    }
}

TimeGrid TimeGrid::from_events(std::string month_id, Instant begin, Instant end, std::span<const Instant> events) {
    if (end <= begin) {
        fail("time grid end must be after begin");
    }
    std::set<Instant> cuts{begin, end};
    for (Instant h = floor_to_hour(begin) + std::chrono::hours{1}; h < end; h += std::chrono::hours{1}) {
        cuts.insert(h);
    }
    for (Instant e : events) {
        if (e > begin && e < end) {
            cuts.insert(e);
        }
    }
    std::vector<Step> steps;
    steps.reserve(cuts.size());
    for (auto it = cuts.begin(), next = std::next(it); next != cuts.end(); ++it, ++next) {
        steps.push_back({*it, *next});
    }
    return TimeGrid(std::move(month_id), std::move(steps));
}

TimeGrid TimeGrid::for_month(const std::string& month_id, std::span<const Instant> events) {
    const auto [begin, end] = month_bounds(month_id);
    return from_events(month_id, begin, end, events);
}

TimeGrid TimeGrid::from_durations(std::string month_id, Instant begin, std::span<const double> durations_h) {
    std::vector<Step> steps;
    Instant cursor = begin;
    for (double d : durations_h) {
        const auto secs = std::chrono::seconds{static_cast<std::int64_t>(std::llround(d * SECONDS_PER_HOUR))};
        steps.push_back({cursor, cursor + secs});
        cursor += secs;
    }
    return TimeGrid(std::move(month_id), std::move(steps));
}

std::vector<double> TimeGrid::durations() const {
    std::vector<double> out(steps_.size());
    std::transform(steps_.begin(), steps_.end(), out.begin(), [](const Step& s) { return s.duration_h(); });
    return out;
}

std::size_t TimeGrid::index_of(Instant t) const {
    if (steps_.empty() || t < begin() || t >= end()) {
        throw std::out_of_range("instant " + format_iso8601(t) + " outside time grid");
    }
    auto it = std::upper_bound(steps_.begin(), steps_.end(), t, [](Instant v, const Step& s) { return v < s.start; });
    return static_cast<std::size_t>(std::distance(steps_.begin(), it)) - 1;
}

SpotPriceSeries::SpotPriceSeries(std::map<Instant, double> hourly, std::string currency)
    : hourly_(std::move(hourly)), currency_(std::move(currency)) {
    for (const auto& [hour, price] : hourly_) {
        if (floor_to_hour(hour) != hour) {
            fail("price key " + format_iso8601(hour) + " is not an hour start");
        }
        if (!(price >= 0.0) || !std::isfinite(price)) {
            fail("price at " + format_iso8601(hour) + " must be finite and non-negative");
        }
    }
}

double SpotPriceSeries::price_at(Instant t) const {
    const Instant hour = floor_to_hour(t);
    auto it = hourly_.find(hour);
    if (it == hourly_.end()) {
        throw MissingPriceError(hour);
    }
    return it->second;
}

std::vector<double> SpotPriceSeries::step_prices(const TimeGrid& grid) const {
    std::vector<double> out;
    out.reserve(grid.size());
    for (const Step& s : grid.steps()) {
        out.push_back(price_at(s.start));
    }
    return out;
}

SpotPriceSeries SpotPriceSeries::scaled(double factor) const {
    std::map<Instant, double> out;
    for (const auto& [hour, price] : hourly_) {
        out.emplace(hour, price * factor);
    }
    return SpotPriceSeries(std::move(out), currency_);
}

void TariffModel::validate() const {
    if (!(c_m >= 0.0)) {
        fail("tariff c_m must be non-negative");
    }
    if (!(candidate_lo >= 0.0 && candidate_lo <= candidate_hi + TOL && candidate_hi <= p_grid_max + TOL)) {
        fail("tariff requires 0 <= candidate_lo <= candidate_hi <= p_grid_max");
    }
    if (!(candidate_step > 0.0)) {
        fail("tariff candidate_step must be positive");
    }
    const double span = (candidate_hi - candidate_lo) / candidate_step;
    if (std::abs(span - std::round(span)) > 1e-6) {
        fail("tariff candidate window is not a whole number of steps");
    }
}

std::vector<double> TariffModel::candidates() const {
    validate();
    const auto count = static_cast<std::size_t>(std::llround((candidate_hi - candidate_lo) / candidate_step)) + 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = candidate_lo + static_cast<double>(i) * candidate_step;
    }
    out.back() = candidate_hi;
    return out;
}

void BatteryParams::validate() const {
    if (!(capacity_kwh > 0.0)) {
        fail("battery capacity must be positive");
    }
    if (!(soc_min >= 0.0 && soc_min < soc_max && soc_max <= 100.0)) {
        fail("battery requires 0 <= soc_min < soc_max <= 100");
    }
    if (!(soc_target >= soc_min && soc_target <= soc_max)) {
        fail("battery soc_target outside [soc_min, soc_max]");
    }
    if (!(soc_init >= soc_min && soc_init <= soc_max)) {
        fail("battery soc_init outside [soc_min, soc_max]");
    }
    if (!(epsilon >= 0.0)) {
        fail("battery epsilon must be non-negative");
    }
}

void VehicleProfile::validate(std::size_t grid_size) const {
    battery.validate();
    if (!(p_max_charger >= 0.0)) {
        fail("vehicle " + vehicle_id + ": charger power must be non-negative");
    }
    if (steps.size() != grid_size) {
        throw AlignmentError("vehicle " + vehicle_id + " has " + std::to_string(steps.size()) +
                             " step records, grid has " + std::to_string(grid_size));
    }
    for (std::size_t t = 0; t < steps.size(); ++t) {
        const StepRecord& r = steps[t];
        if (!(r.delta_soc_op >= 0.0)) {
            fail("vehicle " + vehicle_id + " step " + std::to_string(t) + ": negative SoC depletion");
        }
        if (!(r.sigma_h >= 0.0)) {
            fail("vehicle " + vehicle_id + " step " + std::to_string(t) + ": negative idle window");
        }
        if (r.available && (r.delta_soc_op != 0.0 || r.sigma_h < MIN_CHARGE_WINDOW_H)) {
            fail("vehicle " + vehicle_id + " step " + std::to_string(t) +
                 ": available requires zero depletion and an idle window of at least 0.5 h");
        }
    }
}

double VehicleProfile::total_depletion() const {
    double sum = 0.0;
    for (const StepRecord& r : steps) {
        sum += r.delta_soc_op;
    }
    return sum;
}

double ChargingPlan::energy_kwh(std::span<const double> durations) const {
    double e = 0.0;
    for (std::size_t t = 0; t < power_kw.size() && t < durations.size(); ++t) {
        e += power_kw[t] * durations[t];
    }
    return e;
}

ChargingPlan simulate_plan(const VehicleProfile& profile, const TimeGrid& grid, std::vector<double> power_kw) {
    if (power_kw.size() != grid.size() || profile.steps.size() != grid.size()) {
        throw AlignmentError("plan for vehicle " + profile.vehicle_id + " is not aligned with the grid");
    }
    ChargingPlan plan;
    plan.vehicle_id = profile.vehicle_id;
    plan.soc.resize(grid.size() + 1);
    plan.soc[0] = profile.battery.soc_init;
    for (std::size_t t = 0; t < grid.size(); ++t) {
        plan.soc[t + 1] =
            plan.soc[t] + profile.battery.soc_gain(power_kw[t], grid.duration(t)) - profile.steps[t].delta_soc_op;
    }
    plan.power_kw = std::move(power_kw);
    return plan;
}

void FleetInstance::validate() const {
    tariff.validate();
    std::set<std::string> ids;
    for (const VehicleProfile& p : profiles) {
        p.validate(grid.size());
        if (!ids.insert(p.vehicle_id).second) {
            fail("duplicate vehicle id '" + p.vehicle_id + "'");
        }
    }
    for (const Step& s : grid.steps()) {
        (void)prices.price_at(s.start);
    }
}

} // namespace fleetcharge
