#ifndef FLEETCHARGE_PRESETS_HPP
#define FLEETCHARGE_PRESETS_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fleetcharge/core_model.hpp"
#include "fleetcharge/fleet_synth.hpp"
#include "fleetcharge/session_ingest.hpp"

namespace fleetcharge {

/// One daily operation, minutes after midnight.
struct TimetableEntry {
    int start_min = 0;
    int end_min = 0;
    double soc_share = 0.0; ///< share of the daily SoC drop spent in this operation
};

/// Weekday campus-shuttle day: 07:35-09:35, 10:00-12:00, 13:00-16:35. The 25 min layover is too
/// short to plug in; the lunch hour is a charging window.
std::vector<TimetableEntry> shuttle_timetable();

/// Depot day for the three-shuttle preset: 07:00-09:35, 10:00-12:00, 13:00-17:00, so every
/// shuttle is plugged in from 17:00 to 07:00.
std::vector<TimetableEntry> depot_timetable();

/// Trips on every weekday of the month, shifted by `offset_hours` and scaled to `daily_drop`.
VehicleSchedule timetable_schedule(const std::string& vehicle_id, const std::string& month_id,
                                   const std::vector<TimetableEntry>& day, double daily_drop, int offset_hours = 0);

/// Hourly Nordic-like spot prices: cheap nights, morning and evening peaks, a winter-high
/// seasonal level and seeded day-to-day and hour-to-hour noise. EUR/kWh.
SpotPriceSeries synthetic_spot_prices(Instant begin, Instant end, std::uint64_t seed, double level = 0.06);

/// Prices for a calendar month plus `pad_hours` on both sides.
SpotPriceSeries synthetic_month_prices(const std::string& month_id, std::uint64_t seed, double level = 0.06,
                                       int pad_hours = 0);

/// Default peak-tariff window for a fleet size: [0,15] for 3, [5,20] for 10, [20,35] for 20,
/// [35,50] for 30, [65,80] for 50; other sizes get 16 candidates around 1.45 kW per vehicle.
TariffModel default_tariff_window(std::size_t vehicles, double c_m = 4.0);

constexpr double DEFAULT_CAPACITY_KWH = 60.0;
constexpr double DEFAULT_CHARGER_KW = 11.0;
constexpr double UNCONTROLLED_POWER_KW = 5.0;

/// Preset pack: 60 kWh, SoC in [20, 100], start and target 100 %. The terminal tolerance of 2 points
/// is wider than the SoC gain of one 1 kW action over a full hour (1.67 points), so a discrete
/// schedule can always land in the terminal window.
BatteryParams preset_battery();

struct ThreeShuttleOptions {
    double base_daily_drop = 10.0; ///< SoC percent per weekday for the base shuttle
    std::vector<double> need_factors = {1.0, 0.9, 0.8};
    std::vector<int> offsets_h = {0, 0, 0};
    std::vector<TimetableEntry> day = depot_timetable();
    double price_level = 0.05;
    std::uint64_t price_seed = 2022;
    BatteryParams battery = preset_battery();
};

struct ThreeShuttleMonth {
    FleetInstance instance;
    std::vector<OperationLog> logs;                          ///< telemetry, padded past the month
    std::vector<std::vector<UncontrolledSession>> sessions; ///< per vehicle, instance order
};

/// Telemetry for the shuttles: SoC sampled at every operation boundary, recharged to 100 %
/// overnight (no daytime charging), covering the month plus the first operation of the next.
std::vector<OperationLog> three_shuttle_logs(const std::string& month_id, const ThreeShuttleOptions& opt = {});

/// Smart-charging instance for one month ([0,15] kW window) and the uncontrolled 5 kW sessions
/// reconstructed from the logs.
ThreeShuttleMonth three_shuttle_month(const std::string& month_id, const ThreeShuttleOptions& opt = {});

struct RegressionOptions {
    std::string month_id = "2022-07";
    double base_daily_drop = 55.0;
    double price_level = 0.06;
    std::uint64_t price_seed = 2022;
    BatteryParams battery = preset_battery();
};

/// Base campus shuttle used for synthesized fleets.
VehicleSchedule regression_base(const RegressionOptions& opt = {});

/// Randomized fleet of `vehicles` built from the regression base with seed `seed`.
FleetInstance regression_fleet(std::size_t vehicles, std::uint64_t seed, const RegressionOptions& opt = {},
                               std::vector<ClampEvent>* clamps = nullptr);

} // namespace fleetcharge

#endif // FLEETCHARGE_PRESETS_HPP
