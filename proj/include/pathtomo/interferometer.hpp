#pragma once
// Two-source induced-coherence interferometer.
//
// Two independent routes to the detector rates are provided:
//   exact:       total_state -> prepare_signal_polarization -> apply_alignment
//                -> signal_marginal -> recombine -> projector expectation
//   closed form: rates_closed_form / balanced_rates
// The exact route is the reference the closed form is tested against.
//
// Basis conventions
//   total state (8):      H_Sa H_Ib', H_Sa V_Ib', V_Sa H_Ib', V_Sa V_Ib',
//                         H_Sb H_Ib,  H_Sb V_Ib,  V_Sb H_Ib,  V_Sb V_Ib
//   after alignment (12): H_Sa H_Ib, H_Sa V_Ib, V_Sa H_Ib, V_Sa V_Ib,
//                         H_Sa H_Iw, H_Sa V_Iw, V_Sa H_Iw, V_Sa V_Iw,
//                         H_Sb H_Ib, H_Sb V_Ib, V_Sb H_Ib, V_Sb V_Ib
//   signal (4):           H_Sa, V_Sa, H_Sb, V_Sb
//   after recombination:  H_Sb, V_Sb, H_Sc, V_Sc; the b output carries the
//                         polarizing beam splitter and detectors D1 (H), D2 (V).

#include <complex>
#include <utility>

#include "pathtomo/qcore.hpp"
#include "pathtomo/states.hpp"

namespace pathtomo {

enum class SignalSetting { H_setting, V_setting };

const char* to_string(SignalSetting s);
SignalSetting signal_setting_from_string(const std::string& s);

struct InterferometerConfig {
  double b1 = 0.0;      // real source-Q1 amplitude
  double b2_mag = 0.0;  // |b2|; b2 = |b2| e^{i phi}
  double phi = 0.0;
  cplx t_h{1.0, 0.0};
  cplx t_v{1.0, 0.0};
  IdlerStateParams idler{};
  SourceQ2Params q2{};
  double coherence_l = 1.0;
  double coherence_lp = 1.0;
  SignalSetting signal_setting = SignalSetting::H_setting;

  /// b2 = sqrt(2) b1, P_H2 = P_V2 = 1/2, theta = 0, L = L' = I.
  static InterferometerConfig balanced(const IdlerStateParams& idler, cplx t_h = 1.0,
                                       cplx t_v = 1.0, double phi = 0.0);

  /// General constructor enforcing L = L' = I.
  static InterferometerConfig make(double b1, double b2_mag, double phi, cplx t_h, cplx t_v,
                                   const IdlerStateParams& idler, const SourceQ2Params& q2,
                                   SignalSetting setting = SignalSetting::H_setting);

  cplx b2() const { return std::polar(b2_mag, phi); }
  double r_h() const;  // sqrt(1 - |T_H|^2)
  double r_v() const;

  /// Throws ValidationError. Coherence values are not checked against I here;
  /// total_state() rejects combinations that are not positive semidefinite.
  void validate() const;

  InterferometerConfig with_phi(double p) const {
    auto c = *this;
    c.phi = p;
    return c;
  }
  InterferometerConfig with_setting(SignalSetting s) const {
    auto c = *this;
    c.signal_setting = s;
    return c;
  }
};

struct DetectionRates {
  double rate_h = 0.0;  // D1
  double rate_v = 0.0;  // D2
};

/// Unvalidated 8x8 total two-photon operator (honours arbitrary L, L').
ComplexMatrix total_state_matrix(const InterferometerConfig& cfg);
/// Validated total state; throws ValidationError when not a density operator.
DensityMatrix total_state(const InterferometerConfig& cfg);

/// Half-wave plate at 45 deg on signal path a for the V setting; identity for H.
DensityMatrix prepare_signal_polarization(const DensityMatrix& rho8, SignalSetting setting);

/// Isometry (12x8) of the effective alignment beam splitter.
ComplexMatrix alignment_isometry(const InterferometerConfig& cfg);
DensityMatrix apply_alignment(const DensityMatrix& rho8, const InterferometerConfig& cfg);

/// Embeds the 12-dim post-alignment state into signal(4) x idler(4) and traces the idler.
DensityMatrix signal_marginal(const DensityMatrix& rho12);

/// Reduced signal state written in closed form (rho_S for H, rho'_S for V).
DensityMatrix signal_reduced_state(const InterferometerConfig& cfg);
/// Same state obtained by evolving the total state.
DensityMatrix signal_reduced_state_exact(const InterferometerConfig& cfg);

/// (1/sqrt2)[[1,1],[1,-1]] x I2
ComplexMatrix beam_splitter_matrix();
DensityMatrix recombine(const DensityMatrix& rho_s);

/// Evolves the total operator through the pipeline without re-validating each
/// intermediate state; the *_exact / DensityMatrix entry points validate.
DetectionRates rates_exact(const InterferometerConfig& cfg);
DetectionRates rates_closed_form(const InterferometerConfig& cfg);

/// Balanced arrangement: R_H = |b1|^2 (1 + |T_H| sqrt(P_H) cos phi),
/// R_V = |b1|^2 (1 + I |T_V| sqrt(P_V) cos(phi + theta - xi)), |b1|^2 = 1/3.
/// Returns the rate of the fringing detector for `setting`.
double balanced_fringe_rate(SignalSetting setting, double phi, const IdlerStateParams& idler,
                            double t_h, double t_v, double theta = 0.0);

struct Visibilities {
  double v_h = 0.0;
  double v_v = 0.0;
};
Visibilities visibilities_closed_form(const InterferometerConfig& cfg);

/// (1/2)|psi><psi| + (1/2)(1/2); requires a pure idler.
DensityMatrix post_interaction_idler(const InterferometerConfig& cfg);

}  // namespace pathtomo
