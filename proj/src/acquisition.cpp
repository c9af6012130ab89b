#include "pathtomo/acquisition.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "pathtomo/fit.hpp"
#include "pathtomo/rng.hpp"

namespace pathtomo {

void ScanPlan::validate() const {
  if (phases.size() < 5) throw ValidationError("scan plan: at least 5 phase points are required");
  for (std::size_t k = 0; k < phases.size(); ++k) {
    if (!std::isfinite(phases[k])) throw ValidationError("scan plan: phases must be finite");
    if (k > 0 && !(phases[k] > phases[k - 1])) {
      throw ValidationError("scan plan: phases must be strictly increasing");
    }
  }
  if (!(phases.back() - phases.front() < 2.0 * std::numbers::pi)) {
    throw ValidationError("scan plan: phases must lie within one period");
  }
  if (counts_per_point <= 0) throw ValidationError("scan plan: counts per point must be positive");
}

std::vector<double> uniform_phases(std::size_t points) {
  std::vector<double> out(points);
  for (std::size_t k = 0; k < points; ++k) {
    out[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(points);
  }
  return out;
}

ScanRecord run_scan(const InterferometerConfig& cfg, const ScanPlan& plan) {
  return run_scan(cfg, plan, default_stream(plan.setting));
}

ScanRecord run_scan(const InterferometerConfig& cfg, const ScanPlan& plan, std::uint64_t stream) {
  cfg.validate();
  plan.validate();
  const InterferometerConfig base = cfg.with_setting(plan.setting);
  const double n = static_cast<double>(plan.counts_per_point);

  ScanRecord rec;
  rec.plan = plan;
  rec.truth = base;
  rec.counts_primary.reserve(plan.phases.size());
  rec.counts_constant.reserve(plan.phases.size());

  Xoshiro256 rng(plan.seed, stream);
  for (const double phi : plan.phases) {
    const DetectionRates r = rates_closed_form(base.with_phi(phi));
    const bool h = plan.setting == SignalSetting::H_setting;
    const double mean_fringe = n * (h ? r.rate_h : r.rate_v);
    const double mean_const = n * (h ? r.rate_v : r.rate_h);
    if (plan.noiseless) {
      rec.counts_primary.push_back(std::llround(mean_fringe));
      rec.counts_constant.push_back(std::llround(mean_const));
    } else {
      rec.counts_primary.push_back(poisson(rng, mean_fringe));
      rec.counts_constant.push_back(poisson(rng, mean_const));
    }
  }
  return rec;
}

CalibrationResult run_calibration(const InterferometerConfig& cfg_template, const ScanPlan& plan) {
  cfg_template.validate();
  InterferometerConfig cfg_h = cfg_template;
  cfg_h.idler = IdlerStateParams{1.0, 0.0, 1.0};
  cfg_h.coherence_l = cfg_h.coherence_lp = 1.0;
  InterferometerConfig cfg_v = cfg_template;
  cfg_v.idler = IdlerStateParams{0.0, 0.0, 1.0};
  cfg_v.coherence_l = cfg_v.coherence_lp = 1.0;

  ScanPlan plan_h = plan;
  plan_h.setting = SignalSetting::H_setting;
  ScanPlan plan_v = plan;
  plan_v.setting = SignalSetting::V_setting;

  CalibrationResult out;
  out.scan_h = run_scan(cfg_h, plan_h, 2);
  out.scan_v = run_scan(cfg_v, plan_v, 3);

  const SinusoidFit fh = fit_sinusoid(out.scan_h.plan.phases, out.scan_h.counts_primary);
  const SinusoidFit fv = fit_sinusoid(out.scan_v.plan.phases, out.scan_v.counts_primary);

  // Invert V = 2 b1 |b2| |T| sqrt(P2) / (b1^2 + |b2|^2 P2) with P_H = 1 (resp. P_V = 1).
  const double b1 = cfg_template.b1, b2 = cfg_template.b2_mag;
  const double ph2 = cfg_template.q2.p_h2, pv2 = cfg_template.q2.p_v2();
  const double gain_h = 2.0 * b1 * b2 * std::sqrt(ph2) / (b1 * b1 + b2 * b2 * ph2);
  const double gain_v = 2.0 * b1 * b2 * std::sqrt(pv2) / (b1 * b1 + b2 * b2 * pv2);
  if (!(gain_h > 0.0) || !(gain_v > 0.0)) {
    throw FitError("calibration: configuration produces no interference (b1, |b2| or P2 is zero)");
  }
  out.t_h = fh.visibility / gain_h;
  out.t_h_stderr = fh.visibility_stderr / gain_h;
  out.t_v = fv.visibility / gain_v;
  out.t_v_stderr = fv.visibility_stderr / gain_v;
  return out;
}

}  // namespace pathtomo
