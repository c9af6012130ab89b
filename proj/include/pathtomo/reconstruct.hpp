#pragma once
// Idler-state reconstruction from the two signal-photon fringes.
//
// The rate model is the balanced arrangement (b2 = sqrt2 b1, P_H2 = P_V2 = 1/2,
// theta = 0); counts are modelled as n * rate.

#include <cstdint>
#include <optional>
#include <string>

#include "pathtomo/acquisition.hpp"
#include "pathtomo/fit.hpp"
#include "pathtomo/nelder_mead.hpp"
#include "pathtomo/qcore.hpp"
#include "pathtomo/states.hpp"

namespace pathtomo {

enum class ReconstructionMethod { fringe_extraction, mle };

const char* to_string(ReconstructionMethod m);
ReconstructionMethod reconstruction_method_from_string(const std::string& s);

struct ReconstructionFlags {
  bool p_h_clamped = false;           // (V_H / t_h)^2 exceeded 1
  bool purity_clamped = false;        // I exceeded 1
  bool purity_unconstrained = false;  // P_V ~ 0, so the data carry no information on I
  bool xi_undefined = false;          // one of the fringes has no measurable amplitude
};

/// First-order propagated from the fringe fits; approximate.
struct ParameterErrors {
  double p_h = 0.0;
  double xi = 0.0;
  double purity = 0.0;
};

struct ReconstructionResult {
  IdlerStateParams params;
  DensityMatrix rho = idler_density_matrix(IdlerStateParams{});
  double cost = 0.0;
  std::optional<double> fidelity_vs_reference;
  ReconstructionMethod method = ReconstructionMethod::fringe_extraction;
  ReconstructionFlags flags;
  std::optional<ParameterErrors> errors;
  std::optional<SinusoidFit> fit_h;
  std::optional<SinusoidFit> fit_v;
  std::size_t evaluations = 0;
};

/// Thrown when the optimizer hits its evaluation budget; carries the best point found.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, ReconstructionResult best)
      : Error(what), best_(std::move(best)) {}
  const ReconstructionResult& best() const noexcept { return best_; }

 private:
  ReconstructionResult best_;
};

/// Closed-form inversion of the two fitted fringes:
///   P_H = (V_H / t_h)^2,  I = (V_V / t_v) / sqrt(P_V),  xi = delta_H - delta_V.
/// Throws CalibrationError when a calibrated visibility exceeds 1 by more than
/// three standard errors, or when P_V vanishes while the V fringe does not.
ReconstructionResult extract_parameters(const ScanRecord& scan_h, const ScanRecord& scan_v,
                                        double t_h, double t_v);

/// sum_k (n_h R_H(phi_k) - h_k)^2 + sum_k (n_v R_V(phi_k) - v_k)^2
double mle_cost(const ScanRecord& data_h, const ScanRecord& data_v,
                const IdlerStateParams& candidate, double t_h, double t_v, std::int64_t n_h,
                std::int64_t n_v);
/// Uses each record's own counts_per_point.
double mle_cost(const ScanRecord& data_h, const ScanRecord& data_v,
                const IdlerStateParams& candidate, double t_h, double t_v);

struct MleOptions {
  std::optional<IdlerStateParams> init;  // seeded from extract_parameters when absent
  std::optional<std::int64_t> n_h;       // default: data_h.plan.counts_per_point
  std::optional<std::int64_t> n_v;
  NelderMeadOptions optimizer{};
};

/// Nelder-Mead over (P_H, xi, I) in [0,1] x R x [0,1]. Throws ConvergenceError.
ReconstructionResult mle_reconstruct(const ScanRecord& data_h, const ScanRecord& data_v,
                                     double t_h, double t_v, const MleOptions& opts = {});

/// |<psi_ref|psi_ex>|^2 when both states are pure, <psi_ref|rho|psi_ref> for a pure
/// reference, qubit Uhlmann fidelity otherwise. Stores the value in `result`.
double report_fidelity(ReconstructionResult& result, const IdlerStateParams& reference);

}  // namespace pathtomo
