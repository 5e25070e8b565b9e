#ifndef FLEETCHARGE_REPORT_HPP
#define FLEETCHARGE_REPORT_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fleetcharge/core_model.hpp"
#include "fleetcharge/lp_benchmark.hpp"
#include "fleetcharge/seqdp_planner.hpp"
#include "fleetcharge/session_ingest.hpp"

namespace fleetcharge {

using json = nlohmann::json;

inline constexpr const char* REPORT_SCHEMA = "fleetcharge.report/1";

enum class Method { SeqDp, Lp, Uncontrolled };

std::string to_string(Method m);
/// `seqdp`, `lp` or `uncontrolled`; throws InputError otherwise.
Method method_from_string(const std::string& s);

struct VehicleTrajectory {
    std::string vehicle_id;
    std::vector<double> power_kw;
    std::vector<double> soc; ///< T + 1 values
};

struct MonthReport {
    std::string month_id;
    Method method = Method::SeqDp;
    std::string instance_fingerprint;
    double energy_cost = 0.0;
    double demand_cost = 0.0;
    double total_cost = 0.0;
    /// Billed peak: the winning tariff level (SeqDP), the peak variable (LP), the realized maximum
    /// (uncontrolled).
    double peak_kw = 0.0;
    double realized_peak_kw = 0.0;
    double runtime_s = 0.0;
    std::string currency = "EUR";

    std::vector<Instant> step_start;
    std::vector<double> duration_h;
    std::vector<double> aggregate_kw;
    std::vector<double> price;
    std::vector<VehicleTrajectory> vehicles;

    /// Relative to the LP report of the same instance, percent. Absent without an LP run.
    std::optional<double> cost_gap_pct;
    std::optional<double> peak_gap_pct;

    /// Method-specific extras (candidate table, LP status, clipped sessions).
    json details = json::object();
};

json report_to_json(const MonthReport& r);
MonthReport report_from_json(const json& j);
MonthReport load_report(const std::string& path);
void save_report(const std::string& path, const MonthReport& r);

/// Header `t_start,duration_h,aggregate_kw,price`, one row per step.
void write_series_csv(std::ostream& out, const MonthReport& r);

/// Fills month, fingerprint, series and trajectories from plans laid out in instance order.
MonthReport make_report(const FleetInstance& instance, Method method, std::span<const ChargingPlan> plans,
                        double energy_cost, double billed_peak_kw, double runtime_s);

MonthReport report_from_seqdp(const FleetInstance& instance, const SeqDpResult& result, double runtime_s);
MonthReport report_from_lp(const FleetInstance& instance, const FleetLpResult& result, double runtime_s);
MonthReport report_from_uncontrolled(const FleetInstance& instance, const UncontrolledResult& result,
                                     double runtime_s);

/// SeqDP cost gaps below this (relative) are treated as solver noise rather than a broken invariant.
constexpr double NEGATIVE_GAP_TOL = 1e-7;

/// Raised when a relative SeqDP cost gap against the LP is negative beyond NEGATIVE_GAP_TOL.
class InvariantViolation : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// (a − b) / b; throws std::invalid_argument when b is not positive.
double relative_gap(double a, double b);

/// Sets cost and peak gaps of `report` against `lp`. Throws InputError when the instances differ
/// and InvariantViolation when the cost gap is negative.
void attach_gaps(MonthReport& report, const MonthReport& lp);

struct Reduction {
    Method method = Method::SeqDp;
    double cost = 0.0; ///< 1 − smart / uncontrolled
    double peak = 0.0;
};

struct Comparison {
    std::string month_id;
    std::string instance_fingerprint;
    std::optional<double> cost_gap; ///< (seqdp − lp) / lp
    std::optional<double> peak_gap;
    std::vector<Reduction> reductions;
};

/// Gap and reduction metrics for reports of one instance (any subset of methods).
/// Throws InputError on mixed instances or duplicate methods.
Comparison compare(std::span<const MonthReport> reports);
json comparison_to_json(const Comparison& c);

struct SweepRun {
    std::size_t vehicles = 0;
    std::uint64_t seed = 0;
    double lp_total = 0.0;
    double seqdp_total = 0.0;
    double lp_peak_kw = 0.0;
    double seqdp_peak_kw = 0.0;
    double cost_gap = 0.0;
    double peak_gap = 0.0;
    double lp_s = 0.0;
    double seqdp_s = 0.0;
};

struct SweepGroup {
    std::size_t vehicles = 0;
    std::size_t runs = 0;
    double median_cost_gap = 0.0;
    double max_cost_gap = 0.0;
    double median_peak_gap = 0.0;
    double max_peak_gap = 0.0;
    double median_lp_s = 0.0;
    double median_seqdp_s = 0.0;
};

double median(std::vector<double> values);

/// One group per fleet size, ascending.
std::vector<SweepGroup> summarize_sweep(std::span<const SweepRun> runs);
json sweep_summary_to_json(std::span<const SweepGroup> groups);
void write_sweep_csv(std::ostream& out, std::span<const SweepRun> runs);

} // namespace fleetcharge

#endif // FLEETCHARGE_REPORT_HPP
