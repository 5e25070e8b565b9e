#ifndef FLEETCHARGE_TESTS_HELPERS_HPP
#define FLEETCHARGE_TESTS_HELPERS_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fleetcharge/core_model.hpp"

namespace testkit {

using namespace fleetcharge;

inline Instant at(const std::string& iso) {
    return parse_iso8601(iso);
}

inline TimeGrid grid_of(const std::vector<double>& durations, const std::string& start = "2022-01-01T00:00") {
    return TimeGrid::from_durations(start.substr(0, 7), at(start), durations);
}

/// One price per hour from `start`.
inline SpotPriceSeries prices_of(const std::vector<double>& hourly, const std::string& start = "2022-01-01T00:00") {
    std::map<Instant, double> m;
    for (std::size_t h = 0; h < hourly.size(); ++h) {
        m[add_hours(at(start), static_cast<std::int64_t>(h))] = hourly[h];
    }
    return SpotPriceSeries(std::move(m), "EUR");
}

inline BatteryParams battery(double capacity, double soc_init = 100.0, double soc_target = 100.0,
                             double epsilon = 0.0, double soc_min = 20.0, double soc_max = 100.0) {
    BatteryParams b;
    b.capacity_kwh = capacity;
    b.soc_init = soc_init;
    b.soc_target = soc_target;
    b.epsilon = epsilon;
    b.soc_min = soc_min;
    b.soc_max = soc_max;
    return b;
}

/// Every step idle and available; sigma is the whole horizon.
inline VehicleProfile idle_profile(const std::string& id, const TimeGrid& grid, const BatteryParams& b, double p_max) {
    VehicleProfile v;
    v.vehicle_id = id;
    v.battery = b;
    v.p_max_charger = p_max;
    double total = 0.0;
    for (double d : grid.durations()) {
        total += d;
    }
    v.steps.assign(grid.size(), StepRecord{0.0, total, total >= MIN_CHARGE_WINDOW_H});
    return v;
}

inline TariffModel tariff(double c_m, double lo, double hi, double cap) {
    TariffModel t;
    t.c_m = c_m;
    t.candidate_lo = lo;
    t.candidate_hi = hi;
    t.candidate_step = 1.0;
    t.p_grid_max = cap;
    return t;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("fleetcharge_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testkit

#endif // FLEETCHARGE_TESTS_HELPERS_HPP
