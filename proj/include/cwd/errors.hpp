#pragma once

#include <stdexcept>
#include <string>

namespace cwd {

enum class errc {
  empty_space,
  scale_error,
  degenerate,
  metric_mismatch,
  param_error,
  disconnected,
  mass_error,
  solve_error,
  sigma_out_of_range,
  s1_violated,
  s2_violated,
  e_violated,
  no_nonperipheral_child,
  compatibility_drift,
  overlap,
  empty_interior,
  zero_mass,
  dimension_error,
  singular_interior,
  parse_error,
  invariant_error,
  config_error,
  io_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::empty_space: return "EmptySpace";
    case errc::scale_error: return "ScaleError";
    case errc::degenerate: return "Degenerate";
    case errc::metric_mismatch: return "MetricMismatch";
    case errc::param_error: return "ParamError";
    case errc::disconnected: return "Disconnected";
    case errc::mass_error: return "MassError";
    case errc::solve_error: return "SolveError";
    case errc::sigma_out_of_range: return "SigmaOutOfRange";
    case errc::s1_violated: return "S1Violated";
    case errc::s2_violated: return "S2Violated";
    case errc::e_violated: return "EViolated";
    case errc::no_nonperipheral_child: return "NoNonPeripheralChild";
    case errc::compatibility_drift: return "CompatibilityDrift";
    case errc::overlap: return "Overlap";
    case errc::empty_interior: return "EmptyInterior";
    case errc::zero_mass: return "ZeroMass";
    case errc::dimension_error: return "DimensionError";
    case errc::singular_interior: return "SingularInterior";
    case errc::parse_error: return "ParseError";
    case errc::invariant_error: return "InvariantError";
    case errc::config_error: return "ConfigError";
    case errc::io_error: return "IoError";
  }
  return "Unknown";
}

/// Library-wide exception type carrying a stable error code.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) { throw error(code, what); }

}  // namespace cwd
