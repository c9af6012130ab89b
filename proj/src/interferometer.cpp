#include "pathtomo/interferometer.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace pathtomo {

namespace {

const std::vector<std::string> kTotalLabels{"H_Sa H_Ib'", "H_Sa V_Ib'", "V_Sa H_Ib'",
                                            "V_Sa V_Ib'", "H_Sb H_Ib",  "H_Sb V_Ib",
                                            "V_Sb H_Ib",  "V_Sb V_Ib"};
const std::vector<std::string> kAlignedLabels{
    "H_Sa H_Ib", "H_Sa V_Ib", "V_Sa H_Ib", "V_Sa V_Ib", "H_Sa H_Iw", "H_Sa V_Iw",
    "V_Sa H_Iw", "V_Sa V_Iw", "H_Sb H_Ib", "H_Sb V_Ib", "V_Sb H_Ib", "V_Sb V_Ib"};
const std::vector<std::string> kSignalLabels{"H_Sa", "V_Sa", "H_Sb", "V_Sb"};
const std::vector<std::string> kOutputLabels{"H_Sb", "V_Sb", "H_Sc", "V_Sc"};

// Position of each aligned basis state in signal(4) x idler(H_Ib, V_Ib, H_Iw, V_Iw).
constexpr std::array<std::size_t, 12> kAlignedToProduct{0, 1, 4, 5, 2, 3, 6, 7, 8, 9, 12, 13};

void require_labels(const DensityMatrix& rho, const std::vector<std::string>& expected,
                    const char* what) {
  if (rho.basis_labels() != expected) {
    std::ostringstream os;
    os << what << ": input is not in the expected basis {";
    for (std::size_t i = 0; i < expected.size(); ++i) os << (i ? ", " : "") << expected[i];
    os << "}";
    throw DimensionError(os.str());
  }
}

}  // namespace

const char* to_string(SignalSetting s) { return s == SignalSetting::H_setting ? "H" : "V"; }

SignalSetting signal_setting_from_string(const std::string& s) {
  if (s == "H" || s == "h" || s == "H_setting") return SignalSetting::H_setting;
  if (s == "V" || s == "v" || s == "V_setting") return SignalSetting::V_setting;
  throw ValidationError("signal setting must be H or V, got '" + s + "'");
}

InterferometerConfig InterferometerConfig::balanced(const IdlerStateParams& idler, cplx t_h,
                                                    cplx t_v, double phi) {
  return make(1.0 / std::sqrt(3.0), std::sqrt(2.0 / 3.0), phi, t_h, t_v, idler,
              SourceQ2Params{0.5, 0.0});
}

InterferometerConfig InterferometerConfig::make(double b1, double b2_mag, double phi, cplx t_h,
                                                cplx t_v, const IdlerStateParams& idler,
                                                const SourceQ2Params& q2,
                                                SignalSetting setting) {
  InterferometerConfig c;
  c.b1 = b1;
  c.b2_mag = b2_mag;
  c.phi = phi;
  c.t_h = t_h;
  c.t_v = t_v;
  c.idler = idler;
  c.q2 = q2;
  c.coherence_l = idler.purity;
  c.coherence_lp = idler.purity;
  c.signal_setting = setting;
  c.validate();
  return c;
}

double InterferometerConfig::r_h() const { return std::sqrt(std::max(0.0, 1.0 - std::norm(t_h))); }
double InterferometerConfig::r_v() const { return std::sqrt(std::max(0.0, 1.0 - std::norm(t_v))); }

void InterferometerConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("interferometer config: " + msg); };
  if (!(b1 >= 0.0) || !(b2_mag >= 0.0)) fail("b1 and |b2| must be nonnegative");
  if (std::abs(b1 * b1 + b2_mag * b2_mag - 1.0) > 1e-12) fail("b1^2 + |b2|^2 must equal 1");
  if (!std::isfinite(phi)) fail("phi must be finite");
  if (!(std::abs(t_h) <= 1.0) || !(std::abs(t_v) <= 1.0)) fail("|T_H| and |T_V| must not exceed 1");
  if (!(idler.p_h >= 0.0 && idler.p_h <= 1.0)) fail("p_h out of [0, 1]");
  if (!(idler.purity >= 0.0 && idler.purity <= 1.0)) fail("purity out of [0, 1]");
  if (!(q2.p_h2 >= 0.0 && q2.p_h2 <= 1.0)) fail("p_h2 out of [0, 1]");
  if (!std::isfinite(idler.xi) || !std::isfinite(q2.theta)) fail("phases must be finite");
  if (!std::isfinite(coherence_l) || !std::isfinite(coherence_lp)) fail("coherences must be finite");
}

ComplexMatrix total_state_matrix(const InterferometerConfig& cfg) {
  const double ph = cfg.idler.p_h, pv = cfg.idler.p_v();
  const double ph2 = cfg.q2.p_h2, pv2 = cfg.q2.p_v2();
  const double xi = cfg.idler.xi, th = cfg.q2.theta;
  const double i_coh = cfg.idler.purity, l = cfg.coherence_l, lp = cfg.coherence_lp;
  const double b1sq = cfg.b1 * cfg.b1;
  const double b2sq = cfg.b2_mag * cfg.b2_mag;
  const cplx x = cfg.b1 * std::conj(cfg.b2());  // b1 b2*
  auto e = [](double a) { return std::polar(1.0, a); };

  ComplexMatrix m(8, 8);
  m(0, 0) = b1sq * ph;
  m(0, 1) = b1sq * i_coh * std::sqrt(ph * pv) * e(-xi);
  m(0, 4) = x * std::sqrt(ph * ph2);
  m(0, 7) = x * std::sqrt(ph * pv2) * e(-th);
  m(1, 1) = b1sq * pv;
  m(1, 4) = x * l * std::sqrt(pv * ph2) * e(xi);
  m(1, 7) = x * lp * std::sqrt(pv * pv2) * e(-(th - xi));
  m(4, 4) = b2sq * ph2;
  m(4, 7) = b2sq * std::sqrt(ph2 * pv2) * e(-th);
  m(7, 7) = b2sq * pv2;
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < r; ++c) m(r, c) = std::conj(m(c, r));
  return m;
}

DensityMatrix total_state(const InterferometerConfig& cfg) {
  cfg.validate();
  return DensityMatrix(total_state_matrix(cfg), kTotalLabels);
}

namespace {

// Unvalidated steps of the exact pipeline.

ComplexMatrix prepare_matrix(const ComplexMatrix& rho8, SignalSetting setting) {
  if (setting == SignalSetting::H_setting) return rho8;
  const ComplexMatrix hwp =
      waveplate_unitary(WaveplateSetting::make(PlateKind::half_wave, std::numbers::pi / 4.0));
  const ComplexMatrix path_a = kron(hwp, ComplexMatrix::identity(2));
  ComplexMatrix u = ComplexMatrix::identity(8);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) u(r, c) = path_a(r, c);
  return conjugate_by(u, rho8);
}

ComplexMatrix marginal_matrix(const ComplexMatrix& rho12) {
  ComplexMatrix product(16, 16);
  for (std::size_t r = 0; r < 12; ++r)
    for (std::size_t c = 0; c < 12; ++c)
      product(kAlignedToProduct[r], kAlignedToProduct[c]) = rho12(r, c);
  const std::array<std::size_t, 2> dims{4, 4};
  const std::array<std::size_t, 1> keep{0};
  return partial_trace(product, dims, keep);
}

ComplexMatrix signal_matrix_exact(const InterferometerConfig& cfg) {
  const ComplexMatrix rho8 = prepare_matrix(total_state_matrix(cfg), cfg.signal_setting);
  return marginal_matrix(conjugate_by(alignment_isometry(cfg), rho8));
}

}  // namespace

DensityMatrix prepare_signal_polarization(const DensityMatrix& rho8, SignalSetting setting) {
  require_labels(rho8, kTotalLabels, "prepare_signal_polarization");
  return DensityMatrix(prepare_matrix(rho8.matrix(), setting), kTotalLabels);
}

ComplexMatrix alignment_isometry(const InterferometerConfig& cfg) {
  ComplexMatrix w(12, 8);
  const double rh = cfg.r_h(), rv = cfg.r_v();
  // |H_Ib'> -> R_H |H_Iw> + T_H |H_Ib>,  |V_Ib'> -> R_V |V_Iw> + T_V |V_Ib>
  w(0, 0) = cfg.t_h;
  w(4, 0) = rh;
  w(1, 1) = cfg.t_v;
  w(5, 1) = rv;
  w(2, 2) = cfg.t_h;
  w(6, 2) = rh;
  w(3, 3) = cfg.t_v;
  w(7, 3) = rv;
  for (std::size_t k = 0; k < 4; ++k) w(8 + k, 4 + k) = 1.0;
  return w;
}

DensityMatrix apply_alignment(const DensityMatrix& rho8, const InterferometerConfig& cfg) {
  require_labels(rho8, kTotalLabels, "apply_alignment");
  return DensityMatrix(conjugate_by(alignment_isometry(cfg), rho8.matrix()), kAlignedLabels);
}

DensityMatrix signal_marginal(const DensityMatrix& rho12) {
  require_labels(rho12, kAlignedLabels, "signal_marginal");
  return DensityMatrix(marginal_matrix(rho12.matrix()), kSignalLabels);
}

DensityMatrix signal_reduced_state(const InterferometerConfig& cfg) {
  cfg.validate();
  const double ph = cfg.idler.p_h, pv = cfg.idler.p_v();
  const double ph2 = cfg.q2.p_h2, pv2 = cfg.q2.p_v2();
  const cplx x = cfg.b1 * std::conj(cfg.b2());
  const cplx rho12 = cfg.t_h * x * std::sqrt(ph * ph2);
  const cplx rho14 = cfg.t_v * x * cfg.coherence_lp * std::sqrt(pv * pv2) *
                     std::polar(1.0, cfg.idler.xi - cfg.q2.theta);
  const std::size_t a = cfg.signal_setting == SignalSetting::H_setting ? 0 : 1;

  ComplexMatrix m(4, 4);
  m(a, a) = cfg.b1 * cfg.b1;
  m(a, 2) = rho12;
  m(a, 3) = rho14;
  m(2, a) = std::conj(rho12);
  m(3, a) = std::conj(rho14);
  m(2, 2) = cfg.b2_mag * cfg.b2_mag * ph2;
  m(3, 3) = cfg.b2_mag * cfg.b2_mag * pv2;
  return DensityMatrix(std::move(m), kSignalLabels);
}

DensityMatrix signal_reduced_state_exact(const InterferometerConfig& cfg) {
  const DensityMatrix rho8 = prepare_signal_polarization(total_state(cfg), cfg.signal_setting);
  return signal_marginal(apply_alignment(rho8, cfg));
}

ComplexMatrix beam_splitter_matrix() {
  const double s = 1.0 / std::sqrt(2.0);
  const ComplexMatrix bs2{{s, s}, {s, -s}};
  return kron(bs2, ComplexMatrix::identity(2));
}

DensityMatrix recombine(const DensityMatrix& rho_s) {
  if (rho_s.dim() != 4) throw DimensionError("recombine: expected a 4-dim signal state");
  return DensityMatrix(conjugate_by(beam_splitter_matrix(), rho_s.matrix()), kOutputLabels);
}

DetectionRates rates_exact(const InterferometerConfig& cfg) {
  cfg.validate();
  const ComplexMatrix out = conjugate_by(beam_splitter_matrix(), signal_matrix_exact(cfg));
  return {out(0, 0).real(), out(1, 1).real()};
}

DetectionRates rates_closed_form(const InterferometerConfig& cfg) {
  const double b1sq = cfg.b1 * cfg.b1;
  const double b2sq = cfg.b2_mag * cfg.b2_mag;
  const double ph2 = cfg.q2.p_h2, pv2 = cfg.q2.p_v2();
  // T phases shift the fringe; the printed formulas are the real-T case.
  if (cfg.signal_setting == SignalSetting::H_setting) {
    const double fringe = 2.0 * cfg.b1 * cfg.b2_mag * std::abs(cfg.t_h) *
                          std::sqrt(cfg.idler.p_h * ph2) * std::cos(cfg.phi - std::arg(cfg.t_h));
    return {0.5 * (b1sq + b2sq * ph2 + fringe), 0.5 * b2sq * pv2};
  }
  const double fringe =
      2.0 * cfg.idler.purity * cfg.b1 * cfg.b2_mag * std::abs(cfg.t_v) *
      std::sqrt(cfg.idler.p_v() * pv2) *
      std::cos(cfg.phi + cfg.q2.theta - cfg.idler.xi - std::arg(cfg.t_v));
  return {0.5 * b2sq * ph2, 0.5 * (b1sq + b2sq * pv2 + fringe)};
}

double balanced_fringe_rate(SignalSetting setting, double phi, const IdlerStateParams& idler,
                            double t_h, double t_v, double theta) {
  constexpr double b1sq = 1.0 / 3.0;
  if (setting == SignalSetting::H_setting) {
    return b1sq * (1.0 + t_h * std::sqrt(idler.p_h) * std::cos(phi));
  }
  return b1sq *
         (1.0 + idler.purity * t_v * std::sqrt(idler.p_v()) * std::cos(phi + theta - idler.xi));
}

Visibilities visibilities_closed_form(const InterferometerConfig& cfg) {
  const double b1sq = cfg.b1 * cfg.b1;
  const double b2sq = cfg.b2_mag * cfg.b2_mag;
  const double ph2 = cfg.q2.p_h2, pv2 = cfg.q2.p_v2();
  Visibilities v;
  const double den_h = b1sq + b2sq * ph2;
  const double den_v = b1sq + b2sq * pv2;
  if (den_h > 0.0) {
    v.v_h = 2.0 * cfg.b1 * cfg.b2_mag * std::abs(cfg.t_h) * std::sqrt(cfg.idler.p_h * ph2) / den_h;
  }
  if (den_v > 0.0) {
    v.v_v = 2.0 * cfg.idler.purity * cfg.b1 * cfg.b2_mag * std::abs(cfg.t_v) *
            std::sqrt(cfg.idler.p_v() * pv2) / den_v;
  }
  return v;
}

DensityMatrix post_interaction_idler(const InterferometerConfig& cfg) {
  if (cfg.idler.purity != 1.0) {
    throw ValidationError("post_interaction_idler: defined for a pure idler state only");
  }
  const StateVector psi = pure_state_vector(cfg.idler.p_h, cfg.idler.xi);
  ComplexMatrix m = ComplexMatrix::outer(psi, psi) * 0.5;
  m += ComplexMatrix::identity(2) * 0.25;
  return DensityMatrix(std::move(m), {"H_I", "V_I"});
}

}  // namespace pathtomo
