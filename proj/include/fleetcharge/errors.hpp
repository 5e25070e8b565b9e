#ifndef FLEETCHARGE_ERRORS_HPP
#define FLEETCHARGE_ERRORS_HPP

#include <stdexcept>
#include <string>

#include "fleetcharge/time_util.hpp"

namespace fleetcharge {

/// Bad or inconsistent input data (files, configs, instance fields).
class InputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class MissingPriceError : public InputError {
  public:
    explicit MissingPriceError(Instant hour)
        : InputError("no spot price for hour " + format_iso8601(hour)), hour_(hour) {}

    Instant hour() const { return hour_; }

  private:
    Instant hour_;
};

/// Per-vehicle arrays do not line up with the time grid or the fleet.
class AlignmentError : public InputError {
  public:
    using InputError::InputError;
};

/// Operational logs contradict themselves (e.g. overlapping operations).
class DataInconsistencyError : public InputError {
  public:
    using InputError::InputError;
};

/// An enumeration oracle was asked to run on an instance above its size guard.
class SizeGuardError : public std::runtime_error {
  public:
    SizeGuardError(double required, double limit)
        : std::runtime_error("enumeration needs " + std::to_string(required) + " schedules, limit is " +
                             std::to_string(limit)),
          required_(required), limit_(limit) {}

    double required() const { return required_; }
    double limit() const { return limit_; }

  private:
    double required_;
    double limit_;
};

} // namespace fleetcharge

#endif // FLEETCHARGE_ERRORS_HPP
