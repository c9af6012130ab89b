#include "pathtomo/cli/commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "pathtomo/acquisition.hpp"
#include "pathtomo/batch.hpp"
#include "pathtomo/reconstruct.hpp"
#include "pathtomo/serialization.hpp"
#include "pathtomo/version.hpp"

namespace pathtomo::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out = ".";
  bool out_given = false;
  std::string format = "csv";
};

struct ScanOptions {
  std::size_t points = kDefaultScanPoints;
  std::int64_t n = kDefaultCountsPerPoint;
  bool noiseless = false;
};

std::string fmt(const char* pattern, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

std::string num17(double x) { return fmt("%.17g", x); }

std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void add_globals(CLI::App* sub, Globals& g) {
  sub->add_option("--config", g.config, "Interferometer configuration (JSON)");
  sub->add_option("--seed", g.seed, "64-bit seed for the noise streams");
  sub->add_option("--out", g.out, "Output directory");
  sub->add_option("--format", g.format, "Primary output format")
      ->check(CLI::IsMember({"csv", "json"}));
}

void add_scan_options(CLI::App* sub, ScanOptions& s) {
  sub->add_option("--points", s.points, "Phase points per scan")->check(CLI::Range(5, 100000));
  sub->add_option("--n", s.n, "Counts budget per phase point")->check(CLI::PositiveNumber);
  sub->add_flag("--noiseless", s.noiseless, "Record round(n * rate) instead of Poisson counts");
}

void require_seed(const Globals& g, const std::string& cmd) {
  if (!g.seed_given) {
    throw UsageError(cmd + ": --seed is required so that the run can be reproduced");
  }
}

InterferometerConfig load_config(const Globals& g) {
  if (g.config.empty()) return InterferometerConfig::balanced(IdlerStateParams{});
  return config_from_json(read_json_file(g.config));
}

fs::path prepare_out(const Globals& g) {
  const fs::path dir(g.out);
  fs::create_directories(dir);
  return dir;
}

void write_manifest(const fs::path& dir, const std::string& command, const Globals& g,
                    const std::vector<std::string>& args) {
  Json m{{"command", command},
         {"config_path", g.config},
         {"seed", g.seed},
         {"output_dir", g.out},
         {"version", kVersion},
         {"timestamp", iso_timestamp()},
         {"args", args}};
  write_text_file((dir / "manifest.json").string(), m.dump(2) + "\n");
}

ScanPlan make_plan(const ScanOptions& s, SignalSetting setting, std::uint64_t seed) {
  ScanPlan plan;
  plan.phases = uniform_phases(s.points);
  plan.counts_per_point = s.n;
  plan.setting = setting;
  plan.seed = seed;
  plan.noiseless = s.noiseless;
  return plan;
}

ScanRecord load_scan(const std::string& path) {
  if (fs::path(path).extension() == ".json") return scan_record_from_json(read_json_file(path));
  return scan_record_from_csv(read_text_file(path));
}

IdlerStateParams parse_reference(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      v.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw UsageError("--reference expects 'p_h,xi_rad[,purity]', got '" + s + "'");
    }
  }
  if (v.size() < 2 || v.size() > 3) throw UsageError("--reference expects 'p_h,xi_rad[,purity]'");
  return IdlerStateParams::make(v[0], v[1], v.size() == 3 ? v[2] : 1.0);
}

std::string flags_text(const ReconstructionFlags& f) {
  std::string s;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!s.empty()) s += ", ";
    s += name;
  };
  add(f.p_h_clamped, "p_h_clamped");
  add(f.purity_clamped, "purity_clamped");
  add(f.purity_unconstrained, "purity_unconstrained");
  add(f.xi_undefined, "xi_undefined");
  return s.empty() ? "none" : s;
}

std::string format_report(const ReconstructionResult& r) {
  std::ostringstream os;
  auto line = [&](const char* name, double v, std::optional<double> se) {
    os << "  " << name << fmt("%.9f", v);
    if (se) os << "  +/- " << (std::isfinite(*se) ? fmt("%.3g", *se) : std::string("undetermined"));
    os << "\n";
  };
  os << "reconstruction (" << to_string(r.method) << ")\n";
  line("P_H       ", r.params.p_h, r.errors ? std::optional(r.errors->p_h) : std::nullopt);
  line("xi [rad]  ", r.params.xi, r.errors ? std::optional(r.errors->xi) : std::nullopt);
  line("purity    ", r.params.purity, r.errors ? std::optional(r.errors->purity) : std::nullopt);
  os << "  cost        " << fmt("%.6g", r.cost) << "\n";
  if (r.fidelity_vs_reference) os << "  fidelity    " << fmt("%.9f", *r.fidelity_vs_reference) << "\n";
  if (r.method == ReconstructionMethod::mle) os << "  evaluations " << r.evaluations << "\n";
  os << "  flags       " << flags_text(r.flags) << "\n";
  os << "  rho\n";
  for (std::size_t i = 0; i < 2; ++i) {
    os << "    ";
    for (std::size_t j = 0; j < 2; ++j) {
      const cplx z = r.rho(i, j);
      os << fmt("% .6f", z.real()) << fmt(" %+.6fi", z.imag()) << (j == 0 ? "   " : "\n");
    }
  }
  return os.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "angle_deg,v_h,v_v,p_h,xi,purity,fidelity,v_h_theory,v_v_theory\n";
  for (const SweepRow& r : rows) {
    out += num17(r.angle_deg) + ',' + num17(r.v_h) + ',' + num17(r.v_v) + ',' +
           num17(r.estimate.p_h) + ',' + num17(r.estimate.xi) + ',' + num17(r.estimate.purity) + ',' +
           num17(r.fidelity) + ',' + num17(r.v_h_theory) + ',' + num17(r.v_v_theory) + '\n';
  }
  return out;
}

Json sweep_json(const std::vector<SweepRow>& rows) {
  Json arr = Json::array();
  for (const SweepRow& r : rows) {
    arr.push_back(Json{{"angle_deg", r.angle_deg},
                       {"v_h", r.v_h},
                       {"v_v", r.v_v},
                       {"prepared", to_json(r.prepared)},
                       {"estimate", to_json(r.estimate)},
                       {"fidelity", r.fidelity},
                       {"v_h_theory", r.v_h_theory},
                       {"v_v_theory", r.v_v_theory}});
  }
  return arr;
}

// ---------------------------------------------------------------- commands

int cmd_simulate(const Globals& g, const ScanOptions& s, const std::string& setting,
                 const std::vector<std::string>& args, std::ostream& out) {
  require_seed(g, "simulate");
  const InterferometerConfig cfg = load_config(g);
  std::vector<SignalSetting> settings;
  if (setting == "both") settings = {SignalSetting::H_setting, SignalSetting::V_setting};
  else settings = {signal_setting_from_string(setting)};

  const fs::path dir = prepare_out(g);
  for (const SignalSetting st : settings) {
    const ScanRecord rec = run_scan(cfg, make_plan(s, st, g.seed));
    const std::string stem = std::string("scan_") + to_string(st);
    write_text_file((dir / (stem + ".csv")).string(), scan_record_to_csv(rec));
    write_text_file((dir / (stem + ".json")).string(), to_json(rec).dump(2) + "\n");
    out << "wrote " << (dir / (stem + ".csv")).string() << " and " << stem << ".json\n";
  }
  write_manifest(dir, "simulate", g, args);
  return kExitOk;
}

int cmd_calibrate(const Globals& g, const ScanOptions& s, const std::vector<std::string>& args,
                  std::ostream& out) {
  require_seed(g, "calibrate");
  const InterferometerConfig cfg = load_config(g);
  const CalibrationResult c = run_calibration(cfg, make_plan(s, SignalSetting::H_setting, g.seed));
  const fs::path dir = prepare_out(g);
  const Json j = to_json(calibration_estimate(c));
  write_text_file((dir / "calibration.json").string(), j.dump(2) + "\n");
  write_text_file((dir / "calibration_scan_H.csv").string(), scan_record_to_csv(c.scan_h));
  write_text_file((dir / "calibration_scan_V.csv").string(), scan_record_to_csv(c.scan_v));
  write_manifest(dir, "calibrate", g, args);
  out << j.dump(2) << "\n";
  return kExitOk;
}

struct ReconstructOptions {
  std::string scan_h, scan_v, calibration, method = "fringe", reference;
};

int cmd_reconstruct(const Globals& g, const ReconstructOptions& o,
                    const std::vector<std::string>& args, std::ostream& out) {
  const ReconstructionMethod method = reconstruction_method_from_string(o.method);
  const ScanRecord h = load_scan(o.scan_h);
  const ScanRecord v = load_scan(o.scan_v);
  const CalibrationEstimate cal = calibration_from_json(read_json_file(o.calibration));

  std::optional<IdlerStateParams> reference;
  if (!o.reference.empty()) reference = parse_reference(o.reference);
  else if (h.truth) reference = h.truth->idler;

  ReconstructionResult r = method == ReconstructionMethod::mle
                               ? mle_reconstruct(h, v, cal.t_h, cal.t_v)
                               : extract_parameters(h, v, cal.t_h, cal.t_v);
  if (reference) report_fidelity(r, *reference);

  const fs::path dir = prepare_out(g);
  const Json j = to_json(r);
  const std::string report = format_report(r);
  write_text_file((dir / "reconstruction.json").string(), j.dump(2) + "\n");
  write_text_file((dir / "report.txt").string(), report);
  write_manifest(dir, "reconstruct", g, args);
  if (g.format == "json") out << j.dump(2) << "\n";
  else out << report;
  return kExitOk;
}

struct SweepOptions {
  std::string plate = "hwp";
  std::string angles = "0:90:5";
  std::string calibration;
  std::string method = "fringe";
};

int cmd_sweep(const Globals& g, const ScanOptions& s, const SweepOptions& o,
              const std::vector<std::string>& args, std::ostream& out) {
  require_seed(g, "sweep");
  const InterferometerConfig cfg = load_config(g);
  SweepSpec spec;
  spec.plate = o.plate == "qwp" ? PlateKind::quarter_wave : PlateKind::half_wave;
  spec.angles_deg = parse_angles(o.angles);
  spec.t_h = cfg.t_h;
  spec.t_v = cfg.t_v;
  spec.t_h_cal = std::abs(cfg.t_h);
  spec.t_v_cal = std::abs(cfg.t_v);
  if (!o.calibration.empty()) {
    const CalibrationEstimate cal = calibration_from_json(read_json_file(o.calibration));
    spec.t_h_cal = cal.t_h;
    spec.t_v_cal = cal.t_v;
  }
  spec.counts_per_point = s.n;
  spec.points = s.points;
  spec.noiseless = s.noiseless;
  spec.method = reconstruction_method_from_string(o.method);
  spec.seed = g.seed;

  const std::vector<SweepRow> rows = run_sweep(spec);
  const fs::path dir = prepare_out(g);
  const std::string csv = sweep_csv(rows);
  write_text_file((dir / "sweep.csv").string(), csv);
  if (g.format == "json") {
    write_text_file((dir / "sweep.json").string(), sweep_json(rows).dump(2) + "\n");
  }
  write_manifest(dir, "sweep", g, args);
  out << csv;
  return kExitOk;
}

struct VerifyOptions {
  std::size_t trials = 1000;
  std::size_t phases = 8;
  bool inject_invalid = false;
};

int cmd_verify(Globals g, const VerifyOptions& o, const std::vector<std::string>& args,
               std::ostream& out) {
  if (!g.seed_given) g.seed = 1;
  bool pass = true;
  std::ostringstream os;
  Json j{{"seed", g.seed}, {"trials", o.trials}, {"phases_per_trial", o.phases}};
  auto verdict = [&](bool ok) {
    pass = pass && ok;
    return ok ? "PASS" : "FAIL";
  };

  const OracleReport rep = oracle_sweep(o.trials, g.seed, o.phases);
  const bool oracle_ok = rep.max_rate_error <= 1e-10;
  os << "oracle equivalence  trials=" << rep.trials << " phases=" << rep.phases_per_trial
     << "  max|closed-exact|=" << fmt("%.3e", rep.max_rate_error) << "  " << verdict(oracle_ok) << "\n";
  const bool trace_ok = rep.max_trace_error <= 1e-12;
  os << "total-state trace   max|tr-1|=" << fmt("%.3e", rep.max_trace_error) << "  "
     << verdict(trace_ok) << "\n";
  j["oracle"] = {{"max_rate_error", rep.max_rate_error},
                 {"max_trace_error", rep.max_trace_error},
                 {"worst_trial", rep.worst_trial}};

  Json psd = Json::array();
  for (const double c : {0.0, 0.5, 1.0}) {
    const double m = min_total_eigenvalue(o.trials, g.seed, c);
    const bool ok = m >= -kPsdTol;
    os << "psd I=L=L'=" << fmt("%-4g", c) << "      min eigenvalue=" << fmt("% .3e", m) << "  "
       << verdict(ok) << "\n";
    psd.push_back(Json{{"coherence", c}, {"min_eigenvalue", m}, {"pass", ok}});
  }
  j["psd"] = psd;

  if (o.inject_invalid) {
    InterferometerConfig bad = InterferometerConfig::balanced(IdlerStateParams{0.3, 0.7, 1.0});
    bad.idler.purity = bad.coherence_l = bad.coherence_lp = 1.2;
    const double m = eigenvalues_hermitian(total_state_matrix(bad)).front();
    const bool detected = !is_positive_semidefinite(total_state_matrix(bad));
    os << "injected I=1.2      min eigenvalue=" << fmt("% .3e", m) << "  "
       << (detected ? "violation detected (expected)" : "violation NOT detected") << "\n";
    pass = pass && detected;
    j["injected"] = {{"coherence", 1.2}, {"min_eigenvalue", m}, {"violation_detected", detected}};
  }
  os << (pass ? "all checks passed" : "some checks FAILED") << "\n";
  j["pass"] = pass;

  if (g.out_given) {
    const fs::path dir = prepare_out(g);
    write_text_file((dir / "verify.txt").string(), os.str());
    write_text_file((dir / "verify.json").string(), j.dump(2) + "\n");
    write_manifest(dir, "verify", g, args);
  }
  if (g.format == "json") out << j.dump(2) << "\n";
  else out << os.str();
  return pass ? kExitOk : kExitData;
}

int cmd_report(const Globals& g, const std::string& input, std::ostream& out) {
  const ReconstructionResult r = reconstruction_result_from_json(read_json_file(input));
  if (g.format == "json") out << to_json(r).dump(2) << "\n";
  else out << format_report(r);
  return kExitOk;
}

}  // namespace

std::vector<double> parse_angles(const std::string& spec) {
  auto to_d = [&](const std::string& t) {
    try {
      std::size_t used = 0;
      const double v = std::stod(t, &used);
      if (used != t.size() || !std::isfinite(v)) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw UsageError("bad angle list '" + spec + "'");
    }
  };
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(tok);
    if (parts.size() != 3) throw UsageError("angle range must be 'start:stop:step'");
    const double a = to_d(parts[0]), b = to_d(parts[1]), step = to_d(parts[2]);
    if (!(step > 0.0) || b < a) throw UsageError("angle range needs start <= stop and step > 0");
    const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < count; ++k) out.push_back(a + step * static_cast<double>(k));
  } else {
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(to_d(tok));
  }
  if (out.empty()) throw UsageError("empty angle list");
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Polarization tomography of an undetected photon by induced coherence", "pathtomo"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Globals g;
  ScanOptions scan;
  std::string setting = "both";
  ReconstructOptions rec;
  SweepOptions sweep;
  VerifyOptions verify;
  std::string report_input;

  auto* sim = app.add_subcommand("simulate", "Record phase scans");
  add_globals(sim, g);
  add_scan_options(sim, scan);
  sim->add_option("--setting", setting, "H, V or both")->check(CLI::IsMember({"H", "V", "both"}));

  auto* cal = app.add_subcommand("calibrate", "Estimate |T_H| and |T_V| from |H> and |V> idler scans");
  add_globals(cal, g);
  add_scan_options(cal, scan);

  auto* rc = app.add_subcommand("reconstruct", "Reconstruct the idler state from two scans");
  add_globals(rc, g);
  rc->add_option("--scan-h", rec.scan_h, "H-setting scan (.csv or .json)")->required();
  rc->add_option("--scan-v", rec.scan_v, "V-setting scan (.csv or .json)")->required();
  rc->add_option("--calibration", rec.calibration, "Calibration JSON")->required();
  rc->add_option("--method", rec.method, "fringe or mle")->check(CLI::IsMember({"fringe", "mle"}));
  rc->add_option("--reference", rec.reference, "Reference state 'p_h,xi_rad[,purity]' for the fidelity");

  auto* sw = app.add_subcommand("sweep", "Waveplate sweep of prepared idler states");
  add_globals(sw, g);
  add_scan_options(sw, scan);
  sw->add_option("--plate", sweep.plate, "hwp or qwp")->check(CLI::IsMember({"hwp", "qwp"}));
  sw->add_option("--angles", sweep.angles, "Degrees: 'start:stop:step' or a comma list");
  sw->add_option("--calibration", sweep.calibration, "Calibration JSON (default: true |T| from config)");
  sw->add_option("--method", sweep.method, "fringe or mle")->check(CLI::IsMember({"fringe", "mle"}));

  auto* vf = app.add_subcommand("verify", "Closed-form versus exact-pipeline and PSD checks");
  add_globals(vf, g);
  vf->add_option("--trials", verify.trials, "Random configurations")->check(CLI::PositiveNumber);
  vf->add_option("--phases", verify.phases, "Phases per configuration")->check(CLI::PositiveNumber);
  vf->add_flag("--inject-invalid", verify.inject_invalid, "Add an I = 1.2 case that must fail the PSD check");

  auto* rp = app.add_subcommand("report", "Print a stored reconstruction");
  add_globals(rp, g);
  rp->add_option("--input", report_input, "reconstruction.json")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (CLI::App* sub : app.get_subcommands()) {
    g.seed_given = sub->get_option("--seed")->count() > 0;
    g.out_given = sub->get_option("--out")->count() > 0;
  }

  try {
    if (sim->parsed()) return cmd_simulate(g, scan, setting, args, out);
    if (cal->parsed()) return cmd_calibrate(g, scan, args, out);
    if (rc->parsed()) return cmd_reconstruct(g, rec, args, out);
    if (sw->parsed()) return cmd_sweep(g, scan, sweep, args, out);
    if (vf->parsed()) return cmd_verify(g, verify, args, out);
    if (rp->parsed()) return cmd_report(g, report_input, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConvergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed input: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace pathtomo::cli
