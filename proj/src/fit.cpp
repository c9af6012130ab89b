#include "pathtomo/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "pathtomo/errors.hpp"
#include "pathtomo/states.hpp"

namespace pathtomo {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 inverse3(const Mat3& m) {
  const double c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
  const double c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
  const double c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
  const double det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
  const double scale = m[0][0] * m[1][1] * m[2][2];
  if (!(std::abs(det) > 1e-12 * std::abs(scale)) || det == 0.0) {
    throw FitError("sinusoid fit: singular normal matrix (degenerate phase grid)");
  }
  Mat3 inv;
  inv[0][0] = c00 / det;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  inv[1][0] = c01 / det;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  inv[2][0] = c02 / det;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return inv;
}

double quad(const std::array<double, 3>& g, const Mat3& cov) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += g[i] * cov[i][j] * g[j];
  return std::sqrt(std::max(0.0, s));
}

}  // namespace

SinusoidFit fit_sinusoid(std::span<const double> phases, std::span<const double> values) {
  const std::size_t n = phases.size();
  if (values.size() != n) throw FitError("sinusoid fit: phases and values differ in length");
  if (n < 5) throw FitError("sinusoid fit: at least 5 points are required");
  const auto [lo, hi] = std::minmax_element(phases.begin(), phases.end());
  if (*hi - *lo < std::numbers::pi - 1e-12) {
    throw FitError("sinusoid fit: phases must span at least half a period");
  }

  Mat3 m{};
  std::array<double, 3> rhs{};
  for (std::size_t k = 0; k < n; ++k) {
    const std::array<double, 3> x{1.0, std::cos(phases[k]), std::sin(phases[k])};
    for (int i = 0; i < 3; ++i) {
      rhs[i] += x[i] * values[k];
      for (int j = 0; j < 3; ++j) m[i][j] += x[i] * x[j];
    }
  }
  const Mat3 inv = inverse3(m);
  std::array<double, 3> beta{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) beta[i] += inv[i][j] * rhs[j];
  const double a = beta[0], c = beta[1], s = beta[2];

  double rss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = values[k] - (a + c * std::cos(phases[k]) + s * std::sin(phases[k]));
    rss += r * r;
  }
  const double sigma2 = rss / static_cast<double>(n - 3);
  Mat3 cov;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cov[i][j] = sigma2 * inv[i][j];

  if (!(a > 0.0)) throw FitError("sinusoid fit: nonpositive mean level, visibility undefined");

  SinusoidFit fit;
  fit.offset = a;
  fit.amplitude = std::hypot(c, s);
  fit.visibility = fit.amplitude / a;
  fit.residual_sum_squares = rss;
  fit.offset_stderr = std::sqrt(std::max(0.0, cov[0][0]));

  const double b = fit.amplitude;
  if (b <= 1e-12 * a) {
    fit.phase = 0.0;
    fit.phase_stderr = std::numeric_limits<double>::infinity();
    fit.amplitude_stderr = std::sqrt(std::max(0.0, 0.5 * (cov[1][1] + cov[2][2])));
    fit.visibility_stderr = fit.amplitude_stderr / a;
    return fit;
  }
  fit.phase = wrap_phase(std::atan2(-s, c));
  fit.amplitude_stderr = quad({0.0, c / b, s / b}, cov);
  fit.phase_stderr = quad({0.0, s / (b * b), -c / (b * b)}, cov);
  fit.visibility_stderr = quad({-b / (a * a), c / (a * b), s / (a * b)}, cov);
  return fit;
}

SinusoidFit fit_sinusoid(std::span<const double> phases, std::span<const std::int64_t> counts) {
  std::vector<double> values(counts.begin(), counts.end());
  return fit_sinusoid(phases, std::span<const double>(values));
}

}  // namespace pathtomo
