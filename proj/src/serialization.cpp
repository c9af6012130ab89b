#include "pathtomo/serialization.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace pathtomo {

namespace {

Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

double get_num(const Json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("json: missing field '") + key + "'");
  const Json& v = j.at(key);
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw ValidationError(std::string("json: field '") + key + "' must be a number");
  return v.get<double>();
}

double get_num_or(const Json& j, const char* key, double fallback) {
  return j.contains(key) ? get_num(j, key) : fallback;
}

Json complex_json(cplx z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

cplx complex_from(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_object()) return {get_num(j, "re"), get_num_or(j, "im", 0.0)};
  throw ValidationError("json: complex value must be a number or {\"re\", \"im\"}");
}

Json fit_json(const SinusoidFit& f) {
  return Json{{"offset", num(f.offset)},
              {"amplitude", num(f.amplitude)},
              {"phase", num(f.phase)},
              {"visibility", num(f.visibility)},
              {"stderr",
               {{"offset", num(f.offset_stderr)},
                {"amplitude", num(f.amplitude_stderr)},
                {"phase", num(f.phase_stderr)},
                {"visibility", num(f.visibility_stderr)}}},
              {"residual_sum_squares", num(f.residual_sum_squares)}};
}

SinusoidFit fit_from(const Json& j) {
  SinusoidFit f;
  f.offset = get_num(j, "offset");
  f.amplitude = get_num(j, "amplitude");
  f.phase = get_num(j, "phase");
  f.visibility = get_num(j, "visibility");
  const Json& s = j.at("stderr");
  f.offset_stderr = get_num(s, "offset");
  f.amplitude_stderr = get_num(s, "amplitude");
  f.phase_stderr = get_num(s, "phase");
  f.visibility_stderr = get_num(s, "visibility");
  f.residual_sum_squares = get_num(j, "residual_sum_squares");
  return f;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

template <class T>
T parse_int(std::string_view s, const char* what) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw ValidationError(std::string("scan csv: bad ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

double parse_double(std::string_view s) {
  const std::string str(s);
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (str.empty() || end != str.c_str() + str.size()) {
    throw ValidationError("scan csv: bad phase '" + str + "'");
  }
  return v;
}

}  // namespace

Json to_json(const ComplexMatrix& m) {
  Json re = Json::array(), im = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Json rr = Json::array(), ri = Json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ri.push_back(m(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

ComplexMatrix complex_matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const Json& re = j.at("re");
  const Json& im = j.at("im");
  if (re.size() != rows || im.size() != rows) throw DimensionError("json matrix: row count mismatch");
  ComplexMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (re[r].size() != cols || im[r].size() != cols) {
      throw DimensionError("json matrix: column count mismatch");
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = {re[r][c].get<double>(), im[r][c].get<double>()};
  }
  return m;
}

Json to_json(const DensityMatrix& rho) {
  Json j = to_json(rho.matrix());
  j["basis_labels"] = rho.basis_labels();
  return j;
}

DensityMatrix density_matrix_from_json(const Json& j) {
  std::vector<std::string> labels;
  if (j.contains("basis_labels")) labels = j.at("basis_labels").get<std::vector<std::string>>();
  return DensityMatrix(complex_matrix_from_json(j), std::move(labels));
}

Json to_json(const IdlerStateParams& p) {
  return Json{{"p_h", p.p_h}, {"xi", p.xi}, {"purity", p.purity}};
}

IdlerStateParams idler_params_from_json(const Json& j) {
  return IdlerStateParams::make(get_num(j, "p_h"), get_num_or(j, "xi", 0.0),
                                get_num_or(j, "purity", 1.0));
}

Json to_json(const InterferometerConfig& cfg) {
  return Json{{"b1", cfg.b1},
              {"b2", cfg.b2_mag},
              {"phi", cfg.phi},
              {"t_h", complex_json(cfg.t_h)},
              {"t_v", complex_json(cfg.t_v)},
              {"idler", to_json(cfg.idler)},
              {"q2", {{"p_h2", cfg.q2.p_h2}, {"theta", cfg.q2.theta}}},
              {"coherence_l", cfg.coherence_l},
              {"coherence_lp", cfg.coherence_lp},
              {"signal_setting", to_string(cfg.signal_setting)}};
}

InterferometerConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("config: top level must be a JSON object");
  const IdlerStateParams idler =
      j.contains("idler") ? idler_params_from_json(j.at("idler")) : IdlerStateParams{};
  InterferometerConfig cfg = InterferometerConfig::balanced(idler);
  if (j.contains("b1")) {
    cfg.b1 = get_num(j, "b1");
    cfg.b2_mag = j.contains("b2") ? get_num(j, "b2") : std::sqrt(std::max(0.0, 1.0 - cfg.b1 * cfg.b1));
  } else if (j.contains("b2")) {
    cfg.b2_mag = get_num(j, "b2");
    cfg.b1 = std::sqrt(std::max(0.0, 1.0 - cfg.b2_mag * cfg.b2_mag));
  }
  cfg.phi = get_num_or(j, "phi", 0.0);
  if (j.contains("t_h")) cfg.t_h = complex_from(j.at("t_h"));
  if (j.contains("t_v")) cfg.t_v = complex_from(j.at("t_v"));
  if (j.contains("q2")) {
    const Json& q = j.at("q2");
    cfg.q2 = SourceQ2Params::make(get_num_or(q, "p_h2", 0.5), get_num_or(q, "theta", 0.0));
  }
  cfg.coherence_l = get_num_or(j, "coherence_l", cfg.idler.purity);
  cfg.coherence_lp = get_num_or(j, "coherence_lp", cfg.idler.purity);
  if (j.contains("signal_setting")) {
    cfg.signal_setting = signal_setting_from_string(j.at("signal_setting").get<std::string>());
  }
  cfg.validate();
  return cfg;
}

Json to_json(const ScanRecord& rec) {
  Json j{{"setting", to_string(rec.plan.setting)},
         {"seed", rec.plan.seed},
         {"counts_per_point", rec.plan.counts_per_point},
         {"noiseless", rec.plan.noiseless},
         {"phases", rec.plan.phases},
         {"counts_fringe", rec.counts_primary},
         {"counts_const", rec.counts_constant}};
  if (rec.truth) j["truth"] = to_json(*rec.truth);
  return j;
}

ScanRecord scan_record_from_json(const Json& j) {
  ScanRecord rec;
  rec.plan.setting = signal_setting_from_string(j.at("setting").get<std::string>());
  rec.plan.seed = j.at("seed").get<std::uint64_t>();
  rec.plan.counts_per_point = j.at("counts_per_point").get<std::int64_t>();
  rec.plan.noiseless = j.value("noiseless", false);
  rec.plan.phases = j.at("phases").get<std::vector<double>>();
  rec.counts_primary = j.at("counts_fringe").get<std::vector<std::int64_t>>();
  rec.counts_constant = j.at("counts_const").get<std::vector<std::int64_t>>();
  if (j.contains("truth")) rec.truth = config_from_json(j.at("truth"));
  if (rec.counts_primary.size() != rec.plan.phases.size() ||
      rec.counts_constant.size() != rec.plan.phases.size()) {
    throw ValidationError("scan json: counts and phases differ in length");
  }
  rec.plan.validate();
  return rec;
}

std::string scan_record_to_csv(const ScanRecord& rec) {
  std::string out = "# setting=" + std::string(to_string(rec.plan.setting)) +
                    " seed=" + std::to_string(rec.plan.seed) +
                    " n=" + std::to_string(rec.plan.counts_per_point) + "\n";
  out += "phi_rad,counts_fringe,counts_const\n";
  char buf[64];
  for (std::size_t k = 0; k < rec.plan.phases.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", rec.plan.phases[k]);
    out += buf;
    out += ',' + std::to_string(rec.counts_primary[k]) + ',' + std::to_string(rec.counts_constant[k]) + '\n';
  }
  return out;
}

ScanRecord scan_record_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  ScanRecord rec;
  bool have_header = false, have_columns = false;
  bool have_setting = false, have_seed = false, have_n = false;
  while (std::getline(in, line)) {
    std::string_view l = trim(line);
    if (l.empty()) continue;
    if (!have_header) {
      if (l.substr(0, 1) != "#") throw ValidationError("scan csv: missing '# setting=... seed=... n=...' header");
      std::istringstream hs{std::string(l.substr(1))};
      std::string tok;
      while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq);
        const std::string_view val = std::string_view(tok).substr(eq + 1);
        if (key == "setting") {
          rec.plan.setting = signal_setting_from_string(std::string(val));
          have_setting = true;
        } else if (key == "seed") {
          rec.plan.seed = parse_int<std::uint64_t>(val, "seed");
          have_seed = true;
        } else if (key == "n") {
          rec.plan.counts_per_point = parse_int<std::int64_t>(val, "n");
          have_n = true;
        }
      }
      if (!have_setting || !have_seed || !have_n) {
        throw ValidationError("scan csv: header must carry setting, seed and n");
      }
      have_header = true;
      continue;
    }
    if (!have_columns) {
      if (l != "phi_rad,counts_fringe,counts_const") {
        throw ValidationError("scan csv: expected column header 'phi_rad,counts_fringe,counts_const'");
      }
      have_columns = true;
      continue;
    }
    const auto c1 = l.find(',');
    const auto c2 = l.find(',', c1 == std::string_view::npos ? c1 : c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos) {
      throw ValidationError("scan csv: expected three columns in '" + std::string(l) + "'");
    }
    rec.plan.phases.push_back(parse_double(trim(l.substr(0, c1))));
    rec.counts_primary.push_back(parse_int<std::int64_t>(trim(l.substr(c1 + 1, c2 - c1 - 1)), "count"));
    rec.counts_constant.push_back(parse_int<std::int64_t>(trim(l.substr(c2 + 1)), "count"));
    if (rec.counts_primary.back() < 0 || rec.counts_constant.back() < 0) {
      throw ValidationError("scan csv: counts must be nonnegative");
    }
  }
  if (!have_columns) throw ValidationError("scan csv: no data");
  rec.plan.validate();
  return rec;
}

Json to_json(const ReconstructionResult& r) {
  Json j{{"method", to_string(r.method)},
         {"params", to_json(r.params)},
         {"rho", to_json(r.rho)},
         {"cost", num(r.cost)},
         {"fidelity", r.fidelity_vs_reference ? num(*r.fidelity_vs_reference) : Json(nullptr)},
         {"flags",
          {{"p_h_clamped", r.flags.p_h_clamped},
           {"purity_clamped", r.flags.purity_clamped},
           {"purity_unconstrained", r.flags.purity_unconstrained},
           {"xi_undefined", r.flags.xi_undefined}}},
         {"evaluations", r.evaluations}};
  if (r.errors) {
    j["stderr"] = {{"p_h", num(r.errors->p_h)}, {"xi", num(r.errors->xi)}, {"purity", num(r.errors->purity)}};
  }
  if (r.fit_h) j["fit_h"] = fit_json(*r.fit_h);
  if (r.fit_v) j["fit_v"] = fit_json(*r.fit_v);
  return j;
}

ReconstructionResult reconstruction_result_from_json(const Json& j) {
  ReconstructionResult r;
  r.method = reconstruction_method_from_string(j.at("method").get<std::string>());
  r.params = idler_params_from_json(j.at("params"));
  r.rho = density_matrix_from_json(j.at("rho"));
  r.cost = get_num(j, "cost");
  if (j.contains("fidelity") && !j.at("fidelity").is_null()) r.fidelity_vs_reference = get_num(j, "fidelity");
  const Json& f = j.at("flags");
  r.flags.p_h_clamped = f.value("p_h_clamped", false);
  r.flags.purity_clamped = f.value("purity_clamped", false);
  r.flags.purity_unconstrained = f.value("purity_unconstrained", false);
  r.flags.xi_undefined = f.value("xi_undefined", false);
  r.evaluations = j.value("evaluations", std::size_t{0});
  if (j.contains("stderr")) {
    const Json& s = j.at("stderr");
    r.errors = ParameterErrors{get_num(s, "p_h"), get_num(s, "xi"), get_num(s, "purity")};
  }
  if (j.contains("fit_h")) r.fit_h = fit_from(j.at("fit_h"));
  if (j.contains("fit_v")) r.fit_v = fit_from(j.at("fit_v"));
  return r;
}

Json to_json(const CalibrationEstimate& c) {
  return Json{{"t_h", num(c.t_h)},
              {"t_v", num(c.t_v)},
              {"stderr", {{"t_h", num(c.t_h_stderr)}, {"t_v", num(c.t_v_stderr)}}}};
}

CalibrationEstimate calibration_from_json(const Json& j) {
  CalibrationEstimate c;
  c.t_h = get_num(j, "t_h");
  c.t_v = get_num(j, "t_v");
  if (j.contains("stderr")) {
    c.t_h_stderr = get_num_or(j.at("stderr"), "t_h", 0.0);
    c.t_v_stderr = get_num_or(j.at("stderr"), "t_v", 0.0);
  }
  // Estimates above 1 are accepted when consistent with 1 and then capped.
  auto admissible = [](double t, double se) {
    return t > 0.0 && t <= 1.0 + std::max(3.0 * (std::isfinite(se) ? se : 0.0), 1e-6);
  };
  if (!admissible(c.t_h, c.t_h_stderr) || !admissible(c.t_v, c.t_v_stderr)) {
    throw ValidationError("calibration: t_h and t_v must lie in (0, 1]");
  }
  c.t_h = std::min(c.t_h, 1.0);
  c.t_v = std::min(c.t_v, 1.0);
  return c;
}

CalibrationEstimate calibration_estimate(const CalibrationResult& c) {
  return CalibrationEstimate{c.t_h, c.t_v, c.t_h_stderr, c.t_v_stderr};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

Json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace pathtomo
