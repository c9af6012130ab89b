#pragma once
// Trial batches: oracle sweeps, Monte Carlo reconstructions, calibration
// repeats and plate sweeps. Every kernel has a serial and an OpenMP form; both
// derive per-trial seeds from (seed, trial index) and reduce in index order, so
// their outputs are bit-identical.

#include <cstdint>
#include <string>
#include <vector>

#include "pathtomo/acquisition.hpp"
#include "pathtomo/interferometer.hpp"
#include "pathtomo/reconstruct.hpp"
#include "pathtomo/rng.hpp"

namespace pathtomo {

enum class Execution { serial, parallel };

/// Independent seed for trial `index` of a batch seeded with `seed`.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index);

/// Random valid configuration: b1 in (0,1), random phi, complex T_H, T_V with
/// modulus in [0,1], random idler and source-Q2 parameters, L = L' = I.
InterferometerConfig random_config(Xoshiro256& rng);

struct OracleTrial {
  double max_rate_error = 0.0;   // |closed form - exact| over phases, settings, detectors
  double trace_error = 0.0;      // |tr rho_tot - 1|
  double min_eigenvalue = 0.0;   // of rho_tot
};

struct OracleReport {
  std::size_t trials = 0;
  std::size_t phases_per_trial = 0;
  double max_rate_error = 0.0;
  double max_trace_error = 0.0;
  double min_eigenvalue = 0.0;
  std::size_t worst_trial = 0;
};

OracleTrial oracle_trial(std::uint64_t seed, std::size_t index, std::size_t phases_per_trial);
OracleReport oracle_sweep(std::size_t trials, std::uint64_t seed, std::size_t phases_per_trial,
                          Execution exec = Execution::parallel);

/// Smallest eigenvalue of rho_tot over random configurations with I = L = L' = coherence.
/// Coherence values above 1 are applied unchecked.
double min_total_eigenvalue(std::size_t trials, std::uint64_t seed, double coherence,
                            Execution exec = Execution::parallel);

struct MonteCarloSpec {
  IdlerStateParams truth{};
  double t_h = 1.0;
  double t_v = 1.0;
  std::int64_t counts_per_point = kDefaultCountsPerPoint;
  std::size_t points = kDefaultScanPoints;
  ReconstructionMethod method = ReconstructionMethod::fringe_extraction;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
};

struct MonteCarloTrial {
  bool ok = false;
  std::string error;
  IdlerStateParams estimate{};
  double fidelity = 0.0;            // report_fidelity against the truth
  double pure_part_fidelity = 0.0;  // |<psi(P_H, xi)|psi_truth>|^2, ignoring I
};

MonteCarloTrial monte_carlo_trial(const MonteCarloSpec& spec, std::size_t index);
std::vector<MonteCarloTrial> monte_carlo(const MonteCarloSpec& spec,
                                         Execution exec = Execution::parallel);

struct ParameterRms {
  double p_h = 0.0;
  double xi = 0.0;  // wrapped difference
  double purity = 0.0;
  std::size_t used = 0;
};
/// RMS error of the successful trials.
ParameterRms parameter_rms(const std::vector<MonteCarloTrial>& trials, const IdlerStateParams& truth);

struct CalibrationTrial {
  double t_h = 0.0;
  double t_h_stderr = 0.0;
  double t_v = 0.0;
  double t_v_stderr = 0.0;
};

std::vector<CalibrationTrial> calibration_monte_carlo(const InterferometerConfig& cfg,
                                                      const ScanPlan& plan_template,
                                                      std::size_t trials, std::uint64_t seed,
                                                      Execution exec = Execution::parallel);

struct SweepSpec {
  PlateKind plate = PlateKind::half_wave;
  std::vector<double> angles_deg;
  cplx t_h{1.0, 0.0};   // true alignment
  cplx t_v{1.0, 0.0};
  double t_h_cal = 1.0; // values the reconstruction divides by
  double t_v_cal = 1.0;
  std::int64_t counts_per_point = kDefaultCountsPerPoint;
  std::size_t points = kDefaultScanPoints;
  bool noiseless = true;
  ReconstructionMethod method = ReconstructionMethod::fringe_extraction;
  std::uint64_t seed = 0;
};

struct SweepRow {
  double angle_deg = 0.0;
  double v_h = 0.0;  // fitted
  double v_v = 0.0;
  IdlerStateParams prepared{};
  IdlerStateParams estimate{};
  double fidelity = 0.0;
  double v_h_theory = 0.0;
  double v_v_theory = 0.0;
};

/// Rows come back in the order of spec.angles_deg. Throws on the first failing angle.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, Execution exec = Execution::parallel);

}  // namespace pathtomo
