#include "pathtomo/batch.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>

namespace pathtomo {

namespace {

// Runs body(i) for i in [0, count) and rethrows the lowest-index exception.
template <class Body>
void for_each_index(std::size_t count, Execution exec, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<std::ptrdiff_t>(count);
  if (exec == Execution::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double wrapped_difference(double a, double b) {
  double d = wrap_phase(a - b);
  if (d > std::numbers::pi) d -= kTwoPi;
  return d;
}

ScanPlan make_plan(SignalSetting setting, std::size_t points, std::int64_t n, std::uint64_t seed,
                   bool noiseless) {
  ScanPlan plan;
  plan.phases = uniform_phases(points);
  plan.counts_per_point = n;
  plan.setting = setting;
  plan.seed = seed;
  plan.noiseless = noiseless;
  return plan;
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0xD1B54A32D192ED03ULL * (index + 1));
  return splitmix64(s);
}

InterferometerConfig random_config(Xoshiro256& rng) {
  const double b1 = 0.05 + 0.9 * rng.uniform();
  const double b2 = std::sqrt(1.0 - b1 * b1);
  const double phi = kTwoPi * rng.uniform();
  const cplx t_h = std::polar(rng.uniform(), kTwoPi * rng.uniform());
  const cplx t_v = std::polar(rng.uniform(), kTwoPi * rng.uniform());
  const IdlerStateParams idler{rng.uniform(), kTwoPi * rng.uniform(), rng.uniform()};
  const SourceQ2Params q2{rng.uniform(), kTwoPi * rng.uniform()};
  return InterferometerConfig::make(b1, b2, phi, t_h, t_v, idler, q2);
}

OracleTrial oracle_trial(std::uint64_t seed, std::size_t index, std::size_t phases_per_trial) {
  Xoshiro256 rng(trial_seed(seed, index));
  const InterferometerConfig cfg = random_config(rng);
  OracleTrial out;
  const ComplexMatrix rho = total_state_matrix(cfg);
  out.trace_error = std::abs(rho.trace() - cplx{1.0, 0.0});
  out.min_eigenvalue = eigenvalues_hermitian(rho).front();
  for (std::size_t k = 0; k < phases_per_trial; ++k) {
    const double phi = kTwoPi * rng.uniform();
    for (const SignalSetting s : {SignalSetting::H_setting, SignalSetting::V_setting}) {
      const InterferometerConfig c = cfg.with_phi(phi).with_setting(s);
      const DetectionRates exact = rates_exact(c);
      const DetectionRates closed = rates_closed_form(c);
      out.max_rate_error = std::max({out.max_rate_error, std::abs(exact.rate_h - closed.rate_h),
                                     std::abs(exact.rate_v - closed.rate_v)});
    }
  }
  return out;
}

OracleReport oracle_sweep(std::size_t trials, std::uint64_t seed, std::size_t phases_per_trial,
                          Execution exec) {
  std::vector<OracleTrial> results(trials);
  for_each_index(trials, exec,
                 [&](std::size_t i) { results[i] = oracle_trial(seed, i, phases_per_trial); });

  OracleReport rep;
  rep.trials = trials;
  rep.phases_per_trial = phases_per_trial;
  rep.min_eigenvalue = trials ? results.front().min_eigenvalue : 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    const OracleTrial& t = results[i];
    if (t.max_rate_error > rep.max_rate_error) {
      rep.max_rate_error = t.max_rate_error;
      rep.worst_trial = i;
    }
    rep.max_trace_error = std::max(rep.max_trace_error, t.trace_error);
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, t.min_eigenvalue);
  }
  return rep;
}

double min_total_eigenvalue(std::size_t trials, std::uint64_t seed, double coherence,
                            Execution exec) {
  std::vector<double> mins(trials, 0.0);
  for_each_index(trials, exec, [&](std::size_t i) {
    Xoshiro256 rng(trial_seed(seed, i));
    InterferometerConfig cfg = random_config(rng);
    cfg.idler.purity = cfg.coherence_l = cfg.coherence_lp = coherence;
    mins[i] = eigenvalues_hermitian(total_state_matrix(cfg)).front();
  });
  return trials ? *std::min_element(mins.begin(), mins.end()) : 0.0;
}

MonteCarloTrial monte_carlo_trial(const MonteCarloSpec& spec, std::size_t index) {
  MonteCarloTrial out;
  try {
    const InterferometerConfig cfg = InterferometerConfig::balanced(spec.truth, spec.t_h, spec.t_v);
    const std::uint64_t s = trial_seed(spec.seed, index);
    const ScanRecord h = run_scan(cfg, make_plan(SignalSetting::H_setting, spec.points,
                                                 spec.counts_per_point, s, false));
    const ScanRecord v = run_scan(cfg, make_plan(SignalSetting::V_setting, spec.points,
                                                 spec.counts_per_point, s, false));
    ReconstructionResult res = spec.method == ReconstructionMethod::mle
                                   ? mle_reconstruct(h, v, spec.t_h, spec.t_v)
                                   : extract_parameters(h, v, spec.t_h, spec.t_v);
    out.estimate = res.params;
    out.fidelity = report_fidelity(res, spec.truth);
    out.pure_part_fidelity = fidelity_pure(pure_state_vector(spec.truth.p_h, spec.truth.xi),
                                           pure_state_vector(res.params.p_h, res.params.xi));
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

std::vector<MonteCarloTrial> monte_carlo(const MonteCarloSpec& spec, Execution exec) {
  std::vector<MonteCarloTrial> out(spec.trials);
  for_each_index(spec.trials, exec, [&](std::size_t i) { out[i] = monte_carlo_trial(spec, i); });
  return out;
}

ParameterRms parameter_rms(const std::vector<MonteCarloTrial>& trials, const IdlerStateParams& truth) {
  ParameterRms r;
  for (const auto& t : trials) {
    if (!t.ok) continue;
    const double dp = t.estimate.p_h - truth.p_h;
    const double dx = wrapped_difference(t.estimate.xi, truth.xi);
    const double di = t.estimate.purity - truth.purity;
    r.p_h += dp * dp;
    r.xi += dx * dx;
    r.purity += di * di;
    ++r.used;
  }
  if (r.used) {
    const double n = static_cast<double>(r.used);
    r.p_h = std::sqrt(r.p_h / n);
    r.xi = std::sqrt(r.xi / n);
    r.purity = std::sqrt(r.purity / n);
  }
  return r;
}

std::vector<CalibrationTrial> calibration_monte_carlo(const InterferometerConfig& cfg,
                                                      const ScanPlan& plan_template,
                                                      std::size_t trials, std::uint64_t seed,
                                                      Execution exec) {
  std::vector<CalibrationTrial> out(trials);
  for_each_index(trials, exec, [&](std::size_t i) {
    ScanPlan plan = plan_template;
    plan.seed = trial_seed(seed, i);
    const CalibrationResult c = run_calibration(cfg, plan);
    out[i] = CalibrationTrial{c.t_h, c.t_h_stderr, c.t_v, c.t_v_stderr};
  });
  return out;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, Execution exec) {
  std::vector<SweepRow> rows(spec.angles_deg.size());
  for_each_index(rows.size(), exec, [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.angle_deg = spec.angles_deg[i];
    const WaveplateSetting plate[] = {WaveplateSetting::make(spec.plate, deg_to_rad(row.angle_deg))};
    row.prepared = prepared_idler_params(plate);
    const InterferometerConfig cfg = InterferometerConfig::balanced(row.prepared, spec.t_h, spec.t_v);

    const std::uint64_t s = trial_seed(spec.seed, i);
    const ScanRecord h = run_scan(cfg, make_plan(SignalSetting::H_setting, spec.points,
                                                 spec.counts_per_point, s, spec.noiseless));
    const ScanRecord v = run_scan(cfg, make_plan(SignalSetting::V_setting, spec.points,
                                                 spec.counts_per_point, s, spec.noiseless));
    row.v_h = fit_sinusoid(h.plan.phases, h.counts_primary).visibility;
    row.v_v = fit_sinusoid(v.plan.phases, v.counts_primary).visibility;

    ReconstructionResult res = spec.method == ReconstructionMethod::mle
                                   ? mle_reconstruct(h, v, spec.t_h_cal, spec.t_v_cal)
                                   : extract_parameters(h, v, spec.t_h_cal, spec.t_v_cal);
    row.estimate = res.params;
    row.fidelity = report_fidelity(res, row.prepared);

    const Visibilities th = visibilities_closed_form(cfg);
    row.v_h_theory = th.v_h;
    row.v_v_theory = th.v_v;
  });
  return rows;
}

}  // namespace pathtomo
