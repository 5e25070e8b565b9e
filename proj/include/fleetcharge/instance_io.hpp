#ifndef FLEETCHARGE_INSTANCE_IO_HPP
#define FLEETCHARGE_INSTANCE_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "fleetcharge/core_model.hpp"

namespace fleetcharge {

using json = nlohmann::json;

inline constexpr const char* INSTANCE_SCHEMA = "fleetcharge.instance/1";

/// `hour_start_iso8601,price` with a header row.
SpotPriceSeries read_price_csv(std::istream& in, const std::string& source = "<stream>",
                               const std::string& currency = "EUR");
SpotPriceSeries read_price_csv(const std::filesystem::path& path, const std::string& currency = "EUR");
void write_price_csv(std::ostream& out, const SpotPriceSeries& prices);

json battery_to_json(const BatteryParams& b);
BatteryParams battery_from_json(const json& j);
json tariff_to_json(const TariffModel& t);
TariffModel tariff_from_json(const json& j);

/// Profile fragment: id, battery, charger power and the per-step arrays.
json profile_to_json(const VehicleProfile& p);
VehicleProfile profile_from_json(const json& j);

json grid_to_json(const TimeGrid& g);
TimeGrid grid_from_json(const json& j);

json prices_to_json(const SpotPriceSeries& p);
SpotPriceSeries prices_from_json(const json& j);

/// Full instance document. `provenance` is copied verbatim into the output when not null.
json instance_to_json(const FleetInstance& inst, const json& provenance = nullptr);
FleetInstance instance_from_json(const json& j);

FleetInstance load_instance(const std::filesystem::path& path);
void save_instance(const std::filesystem::path& path, const FleetInstance& inst, const json& provenance = nullptr);

/// Stable 64-bit FNV-1a digest of the serialized instance (used to match reports to inputs).
std::string instance_fingerprint(const FleetInstance& inst);

/// Throws InputError naming `field` when it is missing.
const json& require_field(const json& j, const std::string& field, const std::string& context);

} // namespace fleetcharge

#endif // FLEETCHARGE_INSTANCE_IO_HPP
