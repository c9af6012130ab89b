#include "pathtomo/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace pathtomo {

namespace {

constexpr double kZeroPv = 1e-9;
// Slack on "ratio <= 1" so integer rounding of noiseless counts is not an error.
constexpr double kCalibrationSlack = 1e-6;

void require_inputs(const ScanRecord& h, const ScanRecord& v, double t_h, double t_v) {
  if (h.plan.setting != SignalSetting::H_setting) {
    throw ValidationError("reconstruction: first scan must be recorded in the H setting");
  }
  if (v.plan.setting != SignalSetting::V_setting) {
    throw ValidationError("reconstruction: second scan must be recorded in the V setting");
  }
  if (!(t_h > 0.0 && t_h <= 1.0) || !(t_v > 0.0 && t_v <= 1.0)) {
    throw ValidationError("reconstruction: calibrated |T_H|, |T_V| must lie in (0, 1]");
  }
  for (const ScanRecord* r : {&h, &v}) {
    if (r->counts_primary.size() != r->plan.phases.size()) {
      throw ValidationError("reconstruction: counts and phases differ in length");
    }
  }
}

bool significant(const SinusoidFit& f) {
  return std::isfinite(f.phase_stderr) && f.amplitude > 1e-9 * f.offset &&
         f.amplitude > 3.0 * f.amplitude_stderr;
}

ReconstructionFlags flags_for(const IdlerStateParams& p) {
  ReconstructionFlags fl;
  fl.purity_unconstrained = p.p_v() < kZeroPv;
  fl.xi_undefined = p.purity * std::sqrt(p.p_h * p.p_v()) < 1e-6;
  return fl;
}

}  // namespace

const char* to_string(ReconstructionMethod m) {
  return m == ReconstructionMethod::mle ? "mle" : "fringe";
}

ReconstructionMethod reconstruction_method_from_string(const std::string& s) {
  if (s == "mle") return ReconstructionMethod::mle;
  if (s == "fringe" || s == "fringe_extraction") return ReconstructionMethod::fringe_extraction;
  throw ValidationError("reconstruction method must be 'fringe' or 'mle', got '" + s + "'");
}

ReconstructionResult extract_parameters(const ScanRecord& scan_h, const ScanRecord& scan_v,
                                        double t_h, double t_v) {
  require_inputs(scan_h, scan_v, t_h, t_v);
  const SinusoidFit fh = fit_sinusoid(scan_h.plan.phases, scan_h.counts_primary);
  const SinusoidFit fv = fit_sinusoid(scan_v.plan.phases, scan_v.counts_primary);

  ReconstructionResult res;
  res.method = ReconstructionMethod::fringe_extraction;
  res.fit_h = fh;
  res.fit_v = fv;

  const double rh = fh.visibility / t_h;
  const double rh_se = fh.visibility_stderr / t_h;
  const double rv = fv.visibility / t_v;
  const double rv_se = fv.visibility_stderr / t_v;
  auto check_ratio = [](double r, double se, const char* which) {
    if (r > 1.0 + std::max(3.0 * se, kCalibrationSlack)) {
      std::ostringstream os;
      os << "calibrated visibility " << which << " = " << r << " exceeds 1 by more than 3 standard errors";
      throw CalibrationError(os.str());
    }
  };
  check_ratio(rh, rh_se, "V_H/t_h");
  check_ratio(rv, rv_se, "V_V/t_v");

  double p_h = rh * rh;
  if (p_h > 1.0) {
    p_h = 1.0;
    res.flags.p_h_clamped = true;
  }
  const double p_v = 1.0 - p_h;
  ParameterErrors err;
  err.p_h = 2.0 * rh * rh_se;

  double purity = 1.0;
  if (p_v < kZeroPv) {
    if (rv > std::max(3.0 * rv_se, kCalibrationSlack)) {
      throw CalibrationError("P_V vanishes but the V-setting fringe does not: inconsistent data");
    }
    res.flags.purity_unconstrained = true;
    err.purity = std::numeric_limits<double>::infinity();
  } else {
    purity = rv / std::sqrt(p_v);
    const double dpv = err.p_h;
    err.purity = std::hypot(rv_se / std::sqrt(p_v), rv * dpv / (2.0 * p_v * std::sqrt(p_v)));
    if (purity > 1.0) {
      purity = 1.0;
      res.flags.purity_clamped = true;
    }
  }

  double xi = 0.0;
  if (std::isfinite(fh.phase_stderr) && std::isfinite(fv.phase_stderr) && !res.flags.purity_unconstrained) {
    // R_H peaks at phi = 0 and R_V at phi = xi - theta, theta = 0.
    xi = wrap_phase(fh.phase - fv.phase);
    err.xi = std::hypot(fh.phase_stderr, fv.phase_stderr);
  } else {
    err.xi = std::numeric_limits<double>::infinity();
  }
  res.flags.xi_undefined = !(significant(fh) && significant(fv)) || res.flags.purity_unconstrained;
  if (res.flags.xi_undefined && !std::isfinite(err.xi)) xi = 0.0;

  res.params = IdlerStateParams{p_h, xi, purity};
  res.rho = idler_density_matrix(res.params);
  res.errors = err;
  res.cost = mle_cost(scan_h, scan_v, res.params, t_h, t_v);
  return res;
}

double mle_cost(const ScanRecord& data_h, const ScanRecord& data_v,
                const IdlerStateParams& candidate, double t_h, double t_v, std::int64_t n_h,
                std::int64_t n_v) {
  double f = 0.0;
  const double nh = static_cast<double>(n_h), nv = static_cast<double>(n_v);
  for (std::size_t k = 0; k < data_h.plan.phases.size(); ++k) {
    const double r = nh * balanced_fringe_rate(SignalSetting::H_setting, data_h.plan.phases[k],
                                               candidate, t_h, t_v) -
                     static_cast<double>(data_h.counts_primary[k]);
    f += r * r;
  }
  for (std::size_t k = 0; k < data_v.plan.phases.size(); ++k) {
    const double r = nv * balanced_fringe_rate(SignalSetting::V_setting, data_v.plan.phases[k],
                                               candidate, t_h, t_v) -
                     static_cast<double>(data_v.counts_primary[k]);
    f += r * r;
  }
  return f;
}

double mle_cost(const ScanRecord& data_h, const ScanRecord& data_v,
                const IdlerStateParams& candidate, double t_h, double t_v) {
  return mle_cost(data_h, data_v, candidate, t_h, t_v, data_h.plan.counts_per_point,
                  data_v.plan.counts_per_point);
}

ReconstructionResult mle_reconstruct(const ScanRecord& data_h, const ScanRecord& data_v,
                                     double t_h, double t_v, const MleOptions& opts) {
  require_inputs(data_h, data_v, t_h, t_v);
  const std::int64_t n_h = opts.n_h.value_or(data_h.plan.counts_per_point);
  const std::int64_t n_v = opts.n_v.value_or(data_v.plan.counts_per_point);
  if (n_h <= 0 || n_v <= 0) throw ValidationError("mle_reconstruct: counts budget must be positive");

  IdlerStateParams init{0.5, 0.0, 0.5};
  if (opts.init) {
    init = *opts.init;
  } else {
    try {
      init = extract_parameters(data_h, data_v, t_h, t_v).params;
    } catch (const Error&) {
      // Fall back to the centre of the box.
    }
  }

  auto cost = [&](const std::vector<double>& x) {
    return mle_cost(data_h, data_v, IdlerStateParams{x[0], x[1], x[2]}, t_h, t_v, n_h, n_v);
  };
  const std::vector<std::optional<CoordinateBox>> boxes{CoordinateBox{0.0, 1.0}, std::nullopt,
                                                        CoordinateBox{0.0, 1.0}};
  std::vector<double> start{std::clamp(init.p_h, 0.0, 1.0), init.xi,
                            std::clamp(init.purity, 0.0, 1.0)};

  NelderMeadResult nm = nelder_mead(cost, start, {0.1, 0.5, 0.1}, boxes, opts.optimizer);
  std::size_t evaluations = nm.evaluations;

  auto on_degenerate_manifold = [](const std::vector<double>& x) {
    return x[2] * std::sqrt(x[0] * (1.0 - x[0])) < 1e-3;
  };
  if (nm.converged && on_degenerate_manifold(nm.x)) {
    std::vector<double> restart = nm.x;
    restart[1] += std::numbers::pi / 2.0;
    restart[2] = std::max(restart[2], 0.5);
    NelderMeadResult again = nelder_mead(cost, restart, {0.2, 1.0, 0.2}, boxes, opts.optimizer);
    evaluations += again.evaluations;
    if (again.value < nm.value || !again.converged) {
      if (again.value < nm.value) nm = std::move(again);
      else nm.converged = nm.converged && again.converged;
    }
  }

  ReconstructionResult res;
  res.method = ReconstructionMethod::mle;
  res.params = IdlerStateParams{std::clamp(nm.x[0], 0.0, 1.0), wrap_phase(nm.x[1]),
                                std::clamp(nm.x[2], 0.0, 1.0)};
  res.flags = flags_for(res.params);
  if (res.flags.xi_undefined && res.params.purity * std::sqrt(res.params.p_h * res.params.p_v()) == 0.0) {
    res.params.xi = 0.0;
  }
  res.rho = idler_density_matrix(res.params);
  res.cost = nm.value;
  res.evaluations = evaluations;
  if (!nm.converged) {
    std::ostringstream os;
    os << "mle_reconstruct: no convergence within " << opts.optimizer.max_evaluations
       << " evaluations (best cost " << nm.value << ")";
    throw ConvergenceError(os.str(), res);
  }
  return res;
}

double report_fidelity(ReconstructionResult& result, const IdlerStateParams& reference) {
  double f;
  if (reference.purity == 1.0) {
    const StateVector ref = pure_state_vector(reference.p_h, reference.xi);
    if (result.params.purity == 1.0) {
      const StateVector ex = pure_state_vector(result.params.p_h, result.params.xi);
      f = fidelity_pure(ref, ex);
    } else {
      f = fidelity_mixed(result.rho, ref);
    }
  } else {
    f = fidelity_qubit(result.rho, idler_density_matrix(reference));
  }
  result.fidelity_vs_reference = f;
  return f;
}

}  // namespace pathtomo
