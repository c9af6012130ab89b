#pragma once
// Synthetic phase scans with shot noise, and the |T_H|, |T_V| calibration.

#include <cstdint>
#include <optional>
#include <vector>

#include "pathtomo/interferometer.hpp"

namespace pathtomo {

struct ScanPlan {
  std::vector<double> phases;             // radians, strictly increasing, within one period
  std::int64_t counts_per_point = 1000;   // n
  SignalSetting setting = SignalSetting::H_setting;
  std::uint64_t seed = 0;
  bool noiseless = false;

  /// Throws ValidationError.
  void validate() const;
};

/// `points` equally spaced phases over [0, 2 pi).
std::vector<double> uniform_phases(std::size_t points);

inline constexpr std::size_t kDefaultScanPoints = 20;
inline constexpr std::int64_t kDefaultCountsPerPoint = 1000;

struct ScanRecord {
  ScanPlan plan;
  std::vector<std::int64_t> counts_primary;   // fringing detector (D1 for H, D2 for V)
  std::vector<std::int64_t> counts_constant;  // the other detector
  std::optional<InterferometerConfig> truth;
};

/// RNG stream used for a setting unless the caller overrides it.
inline std::uint64_t default_stream(SignalSetting s) {
  return s == SignalSetting::H_setting ? 0 : 1;
}

/// Counts are round(n * rate) when noiseless, otherwise Poisson(n * rate) drawn
/// from the (plan.seed, stream) generator, fringing detector first at each point.
ScanRecord run_scan(const InterferometerConfig& cfg, const ScanPlan& plan);
ScanRecord run_scan(const InterferometerConfig& cfg, const ScanPlan& plan, std::uint64_t stream);

struct CalibrationResult {
  double t_h = 0.0;
  double t_h_stderr = 0.0;
  double t_v = 0.0;
  double t_v_stderr = 0.0;
  ScanRecord scan_h;
  ScanRecord scan_v;
};

/// Records an H-setting scan with idler |H> and a V-setting scan with idler |V>,
/// fits both fringes and converts the visibilities to |T_H| and |T_V|.
/// `plan.setting` is ignored. Throws FitError on degenerate data.
CalibrationResult run_calibration(const InterferometerConfig& cfg_template, const ScanPlan& plan);

}  // namespace pathtomo
