#ifndef FLEETCHARGE_SESSION_INGEST_HPP
#define FLEETCHARGE_SESSION_INGEST_HPP

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fleetcharge/core_model.hpp"
#include "fleetcharge/cost.hpp"

namespace fleetcharge {

enum class VehicleState { Operating, Idle };

struct LogSample {
    Instant timestamp;
    double soc_percent = 0.0;
    VehicleState state = VehicleState::Idle;
};

struct Operation {
    Instant start;
    Instant end;
    double soc_start = 0.0;
    double soc_end = 0.0;

    double duration_h() const { return hours_between(start, end); }
    /// Non-negative SoC drop over the operation.
    double soc_drop() const { return soc_start > soc_end ? soc_start - soc_end : 0.0; }
};

/// Per-vehicle telemetry: SoC samples tagged with the vehicle state. The state of a sample holds
/// until the next sample; an operation is a maximal run of operating intervals and ends at the
/// first sample after the run.
class OperationLog {
  public:
    OperationLog() = default;
    OperationLog(std::string vehicle_id, std::vector<LogSample> samples);

    /// Log described directly by its operations (no raw samples).
    static OperationLog from_operations(std::string vehicle_id, std::vector<Operation> operations);

    const std::string& vehicle_id() const { return vehicle_id_; }
    const std::vector<LogSample>& samples() const { return samples_; }
    const std::vector<Operation>& operations() const { return operations_; }

    /// Operations clipped to [begin, end); SoC drops of clipped operations scale with the kept share.
    OperationLog restricted_to(Instant begin, Instant end) const;

    /// Start and end instants of every operation.
    std::vector<Instant> events() const;

  private:
    std::string vehicle_id_;
    std::vector<LogSample> samples_;
    std::vector<Operation> operations_;
};

/// `timestamp_iso8601,soc_percent,state` with a header; state is `operating` or `idle`.
OperationLog read_operation_log_csv(std::istream& in, const std::string& vehicle_id,
                                    const std::string& source = "<stream>");
OperationLog read_operation_log_csv(const std::filesystem::path& path, const std::string& vehicle_id);
void write_operation_log_csv(std::ostream& out, const OperationLog& log);

/// Constant-power charging reconstructed from an SoC gain between two operations.
struct UncontrolledSession {
    Instant start;
    Instant end;
    double energy_kwh = 0.0;          ///< delivered, equals assumed_power_kw * duration
    double assumed_power_kw = 0.0;
    double required_energy_kwh = 0.0; ///< implied by the SoC gain
    bool clipped = false;             ///< gap too short to deliver the required energy at the assumed power

    double duration_h() const { return hours_between(start, end); }
};

/// SoC gains below this are treated as telemetry noise.
constexpr double SOC_RESOLUTION = 1.0;

std::vector<UncontrolledSession> detect_sessions(const OperationLog& log, double capacity_kwh,
                                                 double assumed_power_kw);

VehicleProfile build_profile(const OperationLog& log, const TimeGrid& grid, const BatteryParams& battery,
                             double p_max_charger);

struct UncontrolledResult {
    std::vector<ChargingPlan> plans;
    CostBreakdown cost;
};

/// Evaluates the reconstructed sessions as charging plans. `sessions[k]` belongs to
/// `instance.profiles[k]`. The grid cap is not enforced.
UncontrolledResult uncontrolled_baseline(std::span<const std::vector<UncontrolledSession>> sessions,
                                         const FleetInstance& instance);

} // namespace fleetcharge

#endif // FLEETCHARGE_SESSION_INGEST_HPP
