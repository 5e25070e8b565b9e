#ifndef FLEETCHARGE_APP_HPP
#define FLEETCHARGE_APP_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fleetcharge/core_model.hpp"
#include "fleetcharge/dp_solver.hpp"
#include "fleetcharge/fleet_synth.hpp"
#include "fleetcharge/lp_benchmark.hpp"
#include "fleetcharge/presets.hpp"
#include "fleetcharge/report.hpp"
#include "fleetcharge/session_ingest.hpp"

namespace fleetcharge {

enum ExitCode : int {
    EXIT_OK = 0,
    EXIT_INPUT = 2,
    EXIT_INFEASIBLE = 3,
    EXIT_INTERNAL = 4,
};

/// The LP of a month ended without an optimal point.
class LpNotSolved : public std::runtime_error {
  public:
    LpNotSolved(const std::string& month, LpStatus status, const std::string& hint);
    LpStatus status() const { return status_; }

  private:
    LpStatus status_;
};

/// Maps the exception in flight to an exit code: input problems 2, infeasible months 3,
/// everything else 4.
int exit_code_for(std::exception_ptr e);

enum class DataSource { Logs, Instance, ThreeShuttle, Regression };

struct LogVehicle {
    std::string id;
    std::filesystem::path log_csv;
    BatteryParams battery;
    double p_max_charger = DEFAULT_CHARGER_KW;
};

struct AppConfig {
    /// Relative paths in a config file resolve against its directory; the default is ./out.
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 1;
    /// Concurrent months or sweep runs; 0 picks the hardware concurrency.
    unsigned threads = 0;
    /// Carry each vehicle's final SoC into the next month (log sources only).
    bool chain_months = false;

    DataSource source = DataSource::Regression;
    std::vector<std::string> months;

    std::filesystem::path prices_csv;
    std::string currency = "EUR";
    std::vector<LogVehicle> vehicles;
    double uncontrolled_power_kw = UNCONTROLLED_POWER_KW;

    std::vector<std::filesystem::path> instance_files;

    std::size_t fleet_size = 10;
    RegressionOptions regression;
    ThreeShuttleOptions three_shuttle;

    /// Replaces the tariff of every built instance when set.
    std::optional<TariffModel> tariff;
    DpConfig dp;
    FleetLpOptions lp;

    std::vector<std::size_t> sweep_sizes = {3, 10, 20, 30};
    std::size_t sweep_seeds = 15;
};

/// Relative input paths resolve against `base_dir`. Throws InputError on unknown sources or
/// malformed fields.
AppConfig config_from_json(const json& j, const std::filesystem::path& base_dir = ".");
AppConfig load_config(const std::filesystem::path& path);

/// FLEETCHARGE_OUT_DIR when set, otherwise the configured directory.
std::filesystem::path output_dir(const AppConfig& cfg);

/// One month ready to plan. `sessions` is set when the source carries telemetry.
struct MonthJob {
    FleetInstance instance;
    std::optional<std::vector<std::vector<UncontrolledSession>>> sessions;
    std::vector<ClampEvent> clamps;
    json provenance = nullptr;
};

/// Builds the month from the configured source. `soc_init` overrides the initial SoC per vehicle
/// (month chaining); pass empty to keep the configured values.
MonthJob build_month(const AppConfig& cfg, std::size_t month_index, std::span<const double> soc_init = {});

/// Months listed by the source: `months` for generated and log sources, one per instance file.
std::size_t month_count(const AppConfig& cfg);

enum class PlanMethod { SeqDp, Lp, Both, Uncontrolled };
PlanMethod plan_method_from_string(const std::string& s);

struct MonthOutcome {
    std::vector<MonthReport> reports;
    std::optional<Comparison> comparison;
};

/// Runs the requested methods on one job; with Both the SeqDP report carries gaps against the LP.
/// Throws NoFeasibleTariff, LpNotSolved or InvariantViolation.
MonthOutcome plan_job(const MonthJob& job, PlanMethod method, const AppConfig& cfg, bool with_baseline,
                      unsigned seqdp_threads = 0);

/// One synthesized fleet of the sweep with both methods.
SweepRun sweep_run(const AppConfig& cfg, std::size_t vehicles, std::uint64_t seed, unsigned seqdp_threads = 1,
                   std::vector<MonthReport>* reports = nullptr);

/// Command-line entry; returns the process exit code. `out` and `err` receive the summaries and
/// diagnostics.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace fleetcharge

#endif // FLEETCHARGE_APP_HPP
