#ifndef FLEETCHARGE_CORE_MODEL_HPP
#define FLEETCHARGE_CORE_MODEL_HPP

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fleetcharge/time_util.hpp"

namespace fleetcharge {

struct Step {
    Instant start;
    Instant end;

    double duration_h() const { return hours_between(start, end); }
};

/// Contiguous, event-driven discretization of one planning month. Every step lies inside a
/// single clock hour, so a step can be priced by the hour that contains its start.
class TimeGrid {
  public:
    TimeGrid() = default;
    TimeGrid(std::string month_id, std::vector<Step> steps);

    /// Step boundaries are the union of `events` (clipped to [begin, end)) and every hour boundary.
    static TimeGrid from_events(std::string month_id, Instant begin, Instant end, std::span<const Instant> events);

    /// Whole calendar month `YYYY-MM`, split at hour boundaries and at `events`.
    static TimeGrid for_month(const std::string& month_id, std::span<const Instant> events = {});

    /// Grid starting at `begin` with the given step lengths (hours, rounded to whole seconds).
    static TimeGrid from_durations(std::string month_id, Instant begin, std::span<const double> durations_h);

    const std::string& month_id() const { return month_id_; }
    const std::vector<Step>& steps() const { return steps_; }
    const Step& step(std::size_t t) const { return steps_.at(t); }
    std::size_t size() const { return steps_.size(); }
    bool empty() const { return steps_.empty(); }
    Instant begin() const { return steps_.front().start; }
    Instant end() const { return steps_.back().end; }
    double duration(std::size_t t) const { return steps_[t].duration_h(); }
    std::vector<double> durations() const;

    /// Index of the step containing `t`; throws std::out_of_range outside the grid.
    std::size_t index_of(Instant t) const;

  private:
    std::string month_id_;
    std::vector<Step> steps_;
};

/// Hourly spot prices keyed by hour start (currency per kWh).
class SpotPriceSeries {
  public:
    SpotPriceSeries() = default;
    SpotPriceSeries(std::map<Instant, double> hourly, std::string currency = "EUR");

    const std::map<Instant, double>& hourly() const { return hourly_; }
    const std::string& currency() const { return currency_; }

    /// Price of the hour containing `t`; throws MissingPriceError.
    double price_at(Instant t) const;

    /// One price per grid step, taken from the hour containing the step start.
    std::vector<double> step_prices(const TimeGrid& grid) const;

    SpotPriceSeries scaled(double factor) const;

  private:
    std::map<Instant, double> hourly_;
    std::string currency_ = "EUR";
};

struct TariffModel {
    double c_m = 4.0;          ///< peak-power price, currency per kW
    double p_grid_max = 15.0;  ///< hard cap on aggregate power, kW
    double candidate_lo = 0.0;
    double candidate_hi = 15.0;
    double candidate_step = 1.0;

    void validate() const;
    std::vector<double> candidates() const;
};

/// SoC quantities are percent of capacity.
struct BatteryParams {
    double capacity_kwh = 30.0;
    double soc_min = 20.0;
    double soc_max = 100.0;
    double soc_init = 100.0;
    double soc_target = 100.0;
    double epsilon = 1.0;

    void validate() const;

    /// SoC gain (percent) from drawing `power_kw` for `hours`.
    double soc_gain(double power_kw, double hours) const { return power_kw * hours * 100.0 / capacity_kwh; }
};

struct StepRecord {
    double delta_soc_op = 0.0; ///< depletion from operation, percent, >= 0
    double sigma_h = 0.0;      ///< length of the idle window containing the step; 0 while operating
    bool available = false;

    bool operator==(const StepRecord&) const = default;
};

/// Minimum idle window that allows plugging in.
constexpr double MIN_CHARGE_WINDOW_H = 0.5;

struct VehicleProfile {
    std::string vehicle_id;
    BatteryParams battery;
    double p_max_charger = 11.0;
    std::vector<StepRecord> steps;

    /// Throws std::invalid_argument if any invariant is broken.
    void validate(std::size_t grid_size) const;

    double total_depletion() const;
};

struct ChargingPlan {
    std::string vehicle_id;
    std::vector<double> power_kw; ///< one entry per step
    std::vector<double> soc;      ///< soc[0] is the initial SoC, soc[t + 1] follows step t

    /// Charging energy drawn over the plan, kWh.
    double energy_kwh(std::span<const double> durations) const;
};

/// Builds the SoC trajectory implied by `power_kw` under the transition rule.
ChargingPlan simulate_plan(const VehicleProfile& profile, const TimeGrid& grid, std::vector<double> power_kw);

struct FleetInstance {
    TimeGrid grid;
    SpotPriceSeries prices;
    TariffModel tariff;
    std::vector<VehicleProfile> profiles;

    void validate() const;
    std::size_t vehicle_count() const { return profiles.size(); }
};

} // namespace fleetcharge

#endif // FLEETCHARGE_CORE_MODEL_HPP
