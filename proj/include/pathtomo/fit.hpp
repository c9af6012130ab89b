#pragma once
// Linear least-squares fringe fit: y ~ A + C cos(phi) + S sin(phi),
// reported as A + B cos(phi + delta) with B = sqrt(C^2 + S^2), delta = atan2(-S, C).

#include <cstdint>
#include <span>

namespace pathtomo {

struct SinusoidFit {
  double offset = 0.0;     // A
  double amplitude = 0.0;  // B >= 0
  double phase = 0.0;      // delta in [0, 2 pi)
  double visibility = 0.0; // B / A

  // Standard errors from the residual variance, first-order propagated.
  // phase_stderr is +inf when the amplitude vanishes.
  double offset_stderr = 0.0;
  double amplitude_stderr = 0.0;
  double phase_stderr = 0.0;
  double visibility_stderr = 0.0;

  double residual_sum_squares = 0.0;
};

/// Requires >= 5 points whose phases span at least half a period.
/// Throws FitError on a degenerate grid.
SinusoidFit fit_sinusoid(std::span<const double> phases, std::span<const double> values);
SinusoidFit fit_sinusoid(std::span<const double> phases, std::span<const std::int64_t> counts);

}  // namespace pathtomo
