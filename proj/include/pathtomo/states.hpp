#pragma once
// Polarization state parametrizations and waveplate Jones matrices.

#include <numbers>
#include <span>
#include <vector>

#include "pathtomo/qcore.hpp"

namespace pathtomo {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wrap a phase into [0, 2*pi).
double wrap_phase(double x);

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Idler polarization state
///   [[P_H, I sqrt(P_H P_V) e^{-i xi}], [I sqrt(P_H P_V) e^{i xi}, P_V]]
/// with P_V = 1 - P_H.
struct IdlerStateParams {
  double p_h = 1.0;
  double xi = 0.0;
  double purity = 1.0;

  /// Range-checks and wraps xi. Throws ValidationError.
  static IdlerStateParams make(double p_h, double xi, double purity);

  double p_v() const { return 1.0 - p_h; }
};

/// Reference source: sqrt(P_H2)|H_Sb H_Ib> + e^{i theta} sqrt(P_V2)|V_Sb V_Ib>.
struct SourceQ2Params {
  double p_h2 = 0.5;
  double theta = 0.0;

  static SourceQ2Params make(double p_h2, double theta);

  double p_v2() const { return 1.0 - p_h2; }
};

enum class PlateKind { half_wave, quarter_wave };

/// Retarder with its fast axis at `angle` radians from horizontal, wrapped to [0, pi).
struct WaveplateSetting {
  PlateKind kind = PlateKind::half_wave;
  double angle = 0.0;

  static WaveplateSetting make(PlateKind kind, double angle_rad);
};

DensityMatrix idler_density_matrix(const IdlerStateParams& p);

/// Inverse of idler_density_matrix. xi is reported as 0 when the coherence
/// I*sqrt(P_H P_V) is below 1e-9; purity as 1 when P_H is 0 or 1.
IdlerStateParams idler_params_from_matrix(const DensityMatrix& rho);

/// sqrt(P_H)|H> + e^{i xi} sqrt(P_V)|V>.
StateVector pure_state_vector(double p_h, double xi);

/// HWP(a) = R(a) diag(1,-1) R(-a), QWP(a) = R(a) diag(1,i) R(-a).
ComplexMatrix waveplate_unitary(const WaveplateSetting& s);

/// Apply the plates in order to |H> and read off (P_H, xi, I = 1).
/// Global phase is discarded; xi = 0 when either amplitude vanishes.
IdlerStateParams prepared_idler_params(std::span<const WaveplateSetting> plates);

IdlerStateParams params_from_state_vector(std::span<const cplx> psi);

}  // namespace pathtomo
