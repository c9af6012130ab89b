#include "pathtomo/states.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pathtomo {

namespace {

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << name << " must lie in [0, 1], got " << p;
    throw ValidationError(os.str());
  }
}

void require_finite(double x, const char* name) {
  if (!std::isfinite(x)) {
    std::ostringstream os;
    os << name << " must be finite";
    throw ValidationError(os.str());
  }
}

}  // namespace

double wrap_phase(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

IdlerStateParams IdlerStateParams::make(double p_h, double xi, double purity) {
  require_probability(p_h, "p_h");
  require_probability(purity, "purity");
  require_finite(xi, "xi");
  return {p_h, wrap_phase(xi), purity};
}

SourceQ2Params SourceQ2Params::make(double p_h2, double theta) {
  require_probability(p_h2, "p_h2");
  require_finite(theta, "theta");
  return {p_h2, wrap_phase(theta)};
}

WaveplateSetting WaveplateSetting::make(PlateKind kind, double angle_rad) {
  require_finite(angle_rad, "waveplate angle");
  double a = std::fmod(angle_rad, std::numbers::pi);
  if (a < 0.0) a += std::numbers::pi;
  if (a >= std::numbers::pi) a = 0.0;
  return {kind, a};
}

DensityMatrix idler_density_matrix(const IdlerStateParams& p) {
  const double coh = p.purity * std::sqrt(p.p_h * p.p_v());
  const cplx off = std::polar(coh, p.xi);
  ComplexMatrix m{{p.p_h, std::conj(off)}, {off, p.p_v()}};
  return DensityMatrix(std::move(m), {"H_I", "V_I"});
}

IdlerStateParams idler_params_from_matrix(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw DimensionError("idler state must be 2x2");
  const double p_h = std::clamp(rho(0, 0).real(), 0.0, 1.0);
  const double pp = std::sqrt(p_h * (1.0 - p_h));
  const cplx off = rho(1, 0);
  double purity = 1.0;
  if (pp > 0.0) purity = std::min(1.0, std::abs(off) / pp);
  const double xi = std::abs(off) > 1e-9 ? wrap_phase(std::arg(off)) : 0.0;
  return {p_h, xi, purity};
}

StateVector pure_state_vector(double p_h, double xi) {
  return {cplx{std::sqrt(p_h), 0.0}, std::polar(std::sqrt(1.0 - p_h), xi)};
}

ComplexMatrix waveplate_unitary(const WaveplateSetting& s) {
  const double c = std::cos(s.angle);
  const double sn = std::sin(s.angle);
  const ComplexMatrix rot{{c, -sn}, {sn, c}};
  const ComplexMatrix rot_inv{{c, sn}, {-sn, c}};
  const cplx slow = s.kind == PlateKind::half_wave ? cplx{-1.0, 0.0} : cplx{0.0, 1.0};
  const ComplexMatrix retarder{{1.0, 0.0}, {0.0, slow}};
  return rot * retarder * rot_inv;
}

IdlerStateParams params_from_state_vector(std::span<const cplx> psi) {
  if (psi.size() != 2) throw DimensionError("polarization state vector must have 2 entries");
  const double n = norm(psi);
  if (std::abs(n - 1.0) > kNormTol) throw ValidationError("state vector must be unit-norm");
  const double ah = std::abs(psi[0]);
  const double av = std::abs(psi[1]);
  const double p_h = std::clamp(ah * ah, 0.0, 1.0);
  double xi = 0.0;
  if (ah * av > 1e-9) xi = wrap_phase(std::arg(psi[1]) - std::arg(psi[0]));
  return {p_h, xi, 1.0};
}

IdlerStateParams prepared_idler_params(std::span<const WaveplateSetting> plates) {
  StateVector psi{1.0, 0.0};
  for (const auto& plate : plates) psi = waveplate_unitary(plate) * psi;
  return params_from_state_vector(psi);
}

}  // namespace pathtomo
