#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <limits>

#include "pathtomo/errors.hpp"
#include "pathtomo/rng.hpp"
#include "pathtomo/serialization.hpp"

using namespace pathtomo;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

ScanRecord noisy_scan(SignalSetting s) {
  ScanPlan p;
  p.phases = uniform_phases(kDefaultScanPoints);
  p.counts_per_point = 1234;
  p.setting = s;
  p.seed = 0xFFFFFFFFFFFFFFF1ull;
  return run_scan(InterferometerConfig::balanced({0.3, 1.2, 0.9}, std::polar(0.85, 0.2), 0.73), p);
}

void expect_same_config(const InterferometerConfig& a, const InterferometerConfig& b) {
  EXPECT_TRUE(same_bits(a.b1, b.b1));
  EXPECT_TRUE(same_bits(a.b2_mag, b.b2_mag));
  EXPECT_TRUE(same_bits(a.phi, b.phi));
  EXPECT_EQ(a.t_h, b.t_h);
  EXPECT_EQ(a.t_v, b.t_v);
  EXPECT_TRUE(same_bits(a.idler.p_h, b.idler.p_h));
  EXPECT_TRUE(same_bits(a.idler.xi, b.idler.xi));
  EXPECT_TRUE(same_bits(a.idler.purity, b.idler.purity));
  EXPECT_TRUE(same_bits(a.q2.p_h2, b.q2.p_h2));
  EXPECT_TRUE(same_bits(a.q2.theta, b.q2.theta));
  EXPECT_EQ(a.coherence_l, b.coherence_l);
  EXPECT_EQ(a.coherence_lp, b.coherence_lp);
  EXPECT_EQ(a.signal_setting, b.signal_setting);
}

}  // namespace

TEST(JsonMatrix, RoundTripIsExact) {
  Xoshiro256 rng(90);
  ComplexMatrix m(3, 2);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) m(i, j) = cplx{rng.uniform() - 0.5, 1e-300 * rng.uniform()};
  const Json j = to_json(m);
  EXPECT_EQ(j.at("rows"), 3);
  EXPECT_EQ(j.at("cols"), 2);
  EXPECT_EQ(max_abs_diff(complex_matrix_from_json(Json::parse(j.dump())), m), 0.0);
}

TEST(JsonMatrix, ShapeMismatchThrows) {
  Json j = to_json(ComplexMatrix::identity(2));
  j["re"][1] = Json::array({1.0});
  EXPECT_THROW(complex_matrix_from_json(j), DimensionError);
}

TEST(JsonDensityMatrix, KeepsLabelsAndValidates) {
  const DensityMatrix rho = idler_density_matrix({0.3, 1.2, 0.9});
  const DensityMatrix back = density_matrix_from_json(Json::parse(to_json(rho).dump()));
  EXPECT_EQ(back.basis_labels(), rho.basis_labels());
  EXPECT_EQ(max_abs_diff(back.matrix(), rho.matrix()), 0.0);
  Json bad = to_json(rho);
  bad["re"][0][0] = 2.0;
  EXPECT_THROW(density_matrix_from_json(bad), ValidationError);
}

TEST(JsonIdler, RoundTripAndRangeCheck) {
  const IdlerStateParams p{0.3, 1.2, 0.9};
  const Json j = to_json(p);
  EXPECT_EQ(j.dump(), R"({"p_h":0.3,"xi":1.2,"purity":0.9})");
  const IdlerStateParams q = idler_params_from_json(j);
  EXPECT_EQ(q.p_h, 0.3);
  EXPECT_EQ(q.xi, 1.2);
  EXPECT_EQ(q.purity, 0.9);
  EXPECT_THROW(idler_params_from_json(Json::parse(R"({"p_h":1.3,"xi":0,"purity":1})")), ValidationError);
  EXPECT_THROW(idler_params_from_json(Json::parse(R"({"p_h":"x","xi":0,"purity":1})")), ValidationError);
  EXPECT_THROW(idler_params_from_json(Json::parse(R"({"xi":0,"purity":1})")), ValidationError);
}

TEST(JsonConfig, RoundTripIsExact) {
  auto cfg = InterferometerConfig::make(0.6, 0.8, 2.1, std::polar(0.9, 0.4), std::polar(0.7, -1.0),
                                        {0.25, 5.5, 0.6}, {0.4, 0.3}, SignalSetting::V_setting);
  expect_same_config(config_from_json(Json::parse(to_json(cfg).dump())), cfg);
}

TEST(JsonConfig, DefaultsToBalancedArrangement) {
  const InterferometerConfig cfg = config_from_json(Json::parse(R"({"t_h": 0.85, "t_v": 0.73})"));
  EXPECT_NEAR(cfg.b1 * cfg.b1, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(cfg.b2_mag * cfg.b2_mag, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(cfg.t_h, cplx(0.85));
  EXPECT_EQ(cfg.t_v, cplx(0.73));
  EXPECT_EQ(cfg.q2.p_h2, 0.5);
  EXPECT_EQ(cfg.idler.p_h, 1.0);
  EXPECT_EQ(cfg.coherence_l, cfg.idler.purity);
}

TEST(JsonConfig, InvalidInputThrows) {
  EXPECT_THROW(config_from_json(Json::parse("[1,2]")), ValidationError);
  EXPECT_THROW(config_from_json(Json::parse(R"({"t_h": 1.5})")), ValidationError);
  EXPECT_THROW(config_from_json(Json::parse(R"({"b1": 0.9, "b2": 0.9})")), ValidationError);
  EXPECT_THROW(config_from_json(Json::parse(R"({"t_h": {"im": 0.5}})")), ValidationError);
  EXPECT_THROW(config_from_json(Json::parse(R"({"t_h": "0.5"})")), ValidationError);
  EXPECT_EQ(config_from_json(Json::parse(R"({"t_h": {"re": 0.5}})")).t_h, cplx(0.5));
}

TEST(JsonScan, RoundTripIsExact) {
  const ScanRecord rec = noisy_scan(SignalSetting::V_setting);
  const ScanRecord back = scan_record_from_json(Json::parse(to_json(rec).dump()));
  EXPECT_EQ(back.plan.setting, rec.plan.setting);
  EXPECT_EQ(back.plan.seed, rec.plan.seed);
  EXPECT_EQ(back.plan.counts_per_point, rec.plan.counts_per_point);
  EXPECT_EQ(back.plan.noiseless, rec.plan.noiseless);
  EXPECT_EQ(back.plan.phases, rec.plan.phases);
  EXPECT_EQ(back.counts_primary, rec.counts_primary);
  EXPECT_EQ(back.counts_constant, rec.counts_constant);
  ASSERT_TRUE(back.truth.has_value());
  expect_same_config(*back.truth, *rec.truth);
}

TEST(JsonScan, LengthMismatchThrows) {
  Json j = to_json(noisy_scan(SignalSetting::H_setting));
  j["counts_fringe"].erase(0);
  EXPECT_THROW(scan_record_from_json(j), ValidationError);
}

TEST(CsvScan, FormatAndExactRoundTrip) {
  const ScanRecord rec = noisy_scan(SignalSetting::H_setting);
  const std::string csv = scan_record_to_csv(rec);
  EXPECT_EQ(csv.rfind("# setting=H seed=18446744073709551601 n=1234\nphi_rad,counts_fringe,counts_const\n", 0), 0u);
  const ScanRecord back = scan_record_from_csv(csv);
  EXPECT_EQ(back.plan.setting, SignalSetting::H_setting);
  EXPECT_EQ(back.plan.seed, rec.plan.seed);
  EXPECT_EQ(back.plan.counts_per_point, 1234);
  EXPECT_EQ(back.plan.phases, rec.plan.phases);
  EXPECT_EQ(back.counts_primary, rec.counts_primary);
  EXPECT_EQ(back.counts_constant, rec.counts_constant);
  EXPECT_EQ(scan_record_to_csv(back), csv);
}

TEST(CsvScan, ToleratesBlankLinesAndSpaces) {
  const std::string csv =
      "# setting=V seed=3 n=10\n\nphi_rad,counts_fringe,counts_const\n"
      "0, 1, 2\n1,3,4\n2,5,6\n3,7,8\n4 ,9,10\n\n";
  const ScanRecord rec = scan_record_from_csv(csv);
  EXPECT_EQ(rec.plan.setting, SignalSetting::V_setting);
  EXPECT_EQ(rec.counts_primary, (std::vector<std::int64_t>{1, 3, 5, 7, 9}));
  EXPECT_EQ(rec.counts_constant, (std::vector<std::int64_t>{2, 4, 6, 8, 10}));
}

TEST(CsvScan, MalformedInputThrows) {
  const std::string head = "# setting=H seed=1 n=10\nphi_rad,counts_fringe,counts_const\n";
  const std::string rows = "0,1,1\n1,1,1\n2,1,1\n3,1,1\n";
  EXPECT_THROW(scan_record_from_csv(""), ValidationError);
  EXPECT_THROW(scan_record_from_csv("phi_rad,counts_fringe,counts_const\n" + rows + "4,1,1\n"), ValidationError);
  EXPECT_THROW(scan_record_from_csv("# setting=H n=10\nphi_rad,counts_fringe,counts_const\n" + rows), ValidationError);
  EXPECT_THROW(scan_record_from_csv("# setting=X seed=1 n=10\nphi_rad,counts_fringe,counts_const\n" + rows),
               ValidationError);
  EXPECT_THROW(scan_record_from_csv("# setting=H seed=1 n=10\nphi,a,b\n" + rows), ValidationError);
  EXPECT_THROW(scan_record_from_csv(head + rows + "4,1\n"), ValidationError);
  EXPECT_THROW(scan_record_from_csv(head + rows + "4,-1,1\n"), ValidationError);
  EXPECT_THROW(scan_record_from_csv(head + rows + "4,1.5,1\n"), ValidationError);
  EXPECT_THROW(scan_record_from_csv(head + rows + "four,1,1\n"), ValidationError);
  EXPECT_THROW(scan_record_from_csv(head + rows), ValidationError);  // only 4 points
}

TEST(JsonReconstruction, RoundTripKeepsEverything) {
  const ScanRecord h = noisy_scan(SignalSetting::H_setting);
  const ScanRecord v = noisy_scan(SignalSetting::V_setting);
  ReconstructionResult r = extract_parameters(h, v, 0.85, 0.73);
  report_fidelity(r, {0.3, 1.2, 0.9});
  const ReconstructionResult back = reconstruction_result_from_json(Json::parse(to_json(r).dump()));
  EXPECT_EQ(back.method, r.method);
  EXPECT_EQ(back.params.p_h, r.params.p_h);
  EXPECT_EQ(back.params.xi, r.params.xi);
  EXPECT_EQ(back.params.purity, r.params.purity);
  EXPECT_EQ(max_abs_diff(back.rho.matrix(), r.rho.matrix()), 0.0);
  EXPECT_EQ(back.cost, r.cost);
  EXPECT_EQ(back.fidelity_vs_reference, r.fidelity_vs_reference);
  EXPECT_EQ(back.flags.purity_clamped, r.flags.purity_clamped);
  ASSERT_TRUE(back.errors && back.fit_h && back.fit_v);
  EXPECT_EQ(back.errors->xi, r.errors->xi);
  EXPECT_EQ(back.fit_h->visibility, r.fit_h->visibility);
  EXPECT_EQ(back.fit_v->phase_stderr, r.fit_v->phase_stderr);
}

TEST(JsonReconstruction, NonFiniteValuesBecomeNull) {
  ReconstructionResult r;
  r.errors = ParameterErrors{0.1, std::numeric_limits<double>::infinity(), 0.2};
  const Json j = to_json(r);
  EXPECT_TRUE(j.at("stderr").at("xi").is_null());
  EXPECT_TRUE(j.at("fidelity").is_null());
  const ReconstructionResult back = reconstruction_result_from_json(Json::parse(j.dump()));
  EXPECT_EQ(back.errors->xi, std::numeric_limits<double>::infinity());
  EXPECT_FALSE(back.fidelity_vs_reference.has_value());
}

TEST(JsonCalibration, RoundTripAndAdmissibility) {
  const CalibrationEstimate c{0.85, 0.73, 0.03, 0.02};
  const Json j = to_json(c);
  EXPECT_EQ(j.dump(), R"({"t_h":0.85,"t_v":0.73,"stderr":{"t_h":0.03,"t_v":0.02}})");
  const CalibrationEstimate back = calibration_from_json(j);
  EXPECT_EQ(back.t_h, 0.85);
  EXPECT_EQ(back.t_v_stderr, 0.02);
  EXPECT_EQ(calibration_from_json(Json::parse(R"({"t_h":1.01,"t_v":1,"stderr":{"t_h":0.01}})")).t_h, 1.0);
  EXPECT_THROW(calibration_from_json(Json::parse(R"({"t_h":1.01,"t_v":1})")), ValidationError);
  EXPECT_THROW(calibration_from_json(Json::parse(R"({"t_h":0,"t_v":1})")), ValidationError);
  EXPECT_THROW(calibration_from_json(Json::parse(R"({"t_v":1})")), ValidationError);
}

TEST(Files, ReadWriteAndErrors) {
  const auto dir = std::filesystem::temp_directory_path() / ("pathtomo_ser_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "x.json").string();
  write_text_file(path, R"({"a": 1})");
  EXPECT_EQ(read_json_file(path).at("a"), 1);
  write_text_file(path, "{not json");
  EXPECT_THROW(read_json_file(path), ValidationError);
  EXPECT_THROW(read_text_file((dir / "missing").string()), ValidationError);
  std::filesystem::remove_all(dir);
}
