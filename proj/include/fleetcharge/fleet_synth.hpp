#ifndef FLEETCHARGE_FLEET_SYNTH_HPP
#define FLEETCHARGE_FLEET_SYNTH_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fleetcharge/core_model.hpp"

namespace fleetcharge {

/// One operation of a vehicle with the SoC it consumes (percent).
struct Trip {
    Instant start;
    Instant end;
    double soc_drop = 0.0;

    double duration_h() const { return hours_between(start, end); }
};

/// Month of trips for one vehicle, sorted and non-overlapping.
struct VehicleSchedule {
    std::string vehicle_id;
    std::vector<Trip> trips;
};

/// Trips recovered from a profile: maximal runs of operating steps (sigma 0) with their depletion.
VehicleSchedule schedule_from_profile(const VehicleProfile& profile, const TimeGrid& grid);

/// Event-driven grid over the month plus one profile per schedule.
FleetInstance assemble_instance(const std::string& month_id, std::span<const VehicleSchedule> schedules,
                                const BatteryParams& battery, double p_max_charger, SpotPriceSeries prices,
                                TariffModel tariff);

struct SynthConfig {
    std::size_t n_vehicles = 1;
    unsigned shift_hours_max = 10;
    double scale_lo = 0.5;
    double scale_hi = 1.2;
    std::uint64_t seed = 1;

    void validate() const;
};

struct ClampEvent {
    std::string vehicle_id;
    std::size_t trip = 0; ///< index in the synthesized vehicle's trip list
    Instant trip_start;
    double requested_drop = 0.0;
    double applied_drop = 0.0;
};

struct SynthResult {
    std::vector<VehicleSchedule> vehicles;
    std::vector<ClampEvent> clamps;
};

/// Seeded source: std::mt19937_64. Reals use the top 53 bits, (x >> 11) · 2^-53; integers in
/// [0, n] use rejection of the incomplete top block followed by x mod (n + 1).
class SynthRng {
  public:
    explicit SynthRng(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo, double hi);
    std::uint64_t uniform_int(std::uint64_t n);

  private:
    std::mt19937_64 engine_;
};

/// Largest SoC drop per trip that keeps the vehicle above soc_min and able to reach the
/// terminal window when it charges at full power in every idle window of at least 0.5 h.
/// Returns the drops after clamping; `clamped[i]` marks trips that were reduced.
std::vector<double> feasible_drops(const std::vector<Trip>& trips, Instant month_begin, Instant month_end,
                                   const BatteryParams& battery, double p_max_charger, std::vector<bool>* clamped);

/// Vehicle 1 is the base; vehicles 2..n get a shift ~ U{0..shift_hours_max} h wrapped inside
/// the month and a per-trip drop scale ~ U[scale_lo, scale_hi], clamped to stay feasible.
/// Draw order per vehicle: shift first, then one scale per base trip in order.
SynthResult synthesize(const VehicleSchedule& base, const std::string& month_id, const BatteryParams& battery,
                       double p_max_charger, const SynthConfig& cfg);

/// Grid plus profiles for the synthesized schedules. A vehicle the single-vehicle DP (default
/// DpConfig, no caps) cannot serve has the drops of the trips after its last dead-end step set to
/// zero, and the fleet is re-gridded, until every vehicle is feasible; each reduction is appended to
/// `clamps`. The base vehicle (index 0) is never reduced: an infeasible base is an InputError.
FleetInstance assemble_feasible(const std::string& month_id, std::vector<VehicleSchedule>& schedules,
                                const BatteryParams& battery, double p_max_charger, const SpotPriceSeries& prices,
                                const TariffModel& tariff, std::vector<ClampEvent>* clamps);

/// Profile-level entry: trips are recovered from the base profile, synthesized and re-gridded.
FleetInstance synthesize_instance(const VehicleProfile& base, const TimeGrid& base_grid,
                                  const SpotPriceSeries& prices, const TariffModel& tariff, const SynthConfig& cfg,
                                  std::vector<ClampEvent>* clamps = nullptr);

} // namespace fleetcharge

#endif // FLEETCHARGE_FLEET_SYNTH_HPP
