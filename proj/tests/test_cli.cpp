#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <unistd.h>

#include "pathtomo/cli/commands.hpp"
#include "pathtomo/serialization.hpp"

using namespace pathtomo;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
const std::string kData = PATHTOMO_DATA_DIR;

struct CliRun {
  int code;
  std::string out, err;
};

CliRun invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("pathtomo_cli_" + std::to_string(::getpid()) + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write_config(const std::string& name, const std::string& json) const {
    write_text_file(path(name), json);
    return path(name);
  }

  std::vector<std::vector<double>> read_csv(const std::string& file) const {
    std::istringstream in(read_text_file(file));
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
      std::vector<double> row;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
      rows.push_back(row);
    }
    return rows;
  }

  fs::path dir_;
};

const char* kGenericConfig = R"({"t_h": 0.85, "t_v": 0.73, "idler": {"p_h": 0.3, "xi": 1.2, "purity": 0.9}})";

}  // namespace

TEST(ParseAngles, RangesAndLists) {
  EXPECT_EQ(cli::parse_angles("0:90:45"), (std::vector<double>{0, 45, 90}));
  EXPECT_EQ(cli::parse_angles("0:10:3"), (std::vector<double>{0, 3, 6, 9}));
  EXPECT_EQ(cli::parse_angles("10,22.5, 40"), (std::vector<double>{10, 22.5, 40}));
  EXPECT_EQ(cli::parse_angles("0:90:5").size(), 19u);
  EXPECT_THROW(cli::parse_angles("0:90:0"), std::exception);
  EXPECT_THROW(cli::parse_angles("a,b"), std::exception);
  EXPECT_THROW(cli::parse_angles(""), std::exception);
}

TEST_F(CliTest, SimulateIsDeterministic) {
  const std::string cfg = write_config("c.json", kGenericConfig);
  for (const char* sub : {"a", "b"}) {
    ASSERT_EQ(invoke({"simulate", "--config", cfg, "--seed", "42", "--out", path(sub)}).code, 0);
  }
  for (const char* f : {"scan_H.csv", "scan_V.csv", "scan_H.json", "scan_V.json"}) {
    EXPECT_EQ(read_text_file(path(std::string("a/") + f)), read_text_file(path(std::string("b/") + f))) << f;
  }
  ASSERT_EQ(invoke({"simulate", "--config", cfg, "--seed", "43", "--out", path("c")}).code, 0);
  EXPECT_NE(read_text_file(path("a/scan_H.csv")), read_text_file(path("c/scan_H.csv")));
  const Json m = read_json_file(path("a/manifest.json"));
  EXPECT_EQ(m.at("command"), "simulate");
  EXPECT_EQ(m.at("seed"), 42);
  for (const char* key : {"config_path", "output_dir", "version", "timestamp", "args"}) EXPECT_TRUE(m.contains(key));
}

TEST_F(CliTest, SimulateNoiselessCountsAreRoundedRates) {
  const std::string cfg = write_config("c.json", kGenericConfig);
  ASSERT_EQ(invoke({"simulate", "--config", cfg, "--seed", "1", "--noiseless", "--n", "1000", "--setting", "V",
                 "--points", "8", "--out", path("o")})
                .code,
            0);
  EXPECT_FALSE(fs::exists(path("o/scan_H.csv")));
  const ScanRecord rec = scan_record_from_csv(read_text_file(path("o/scan_V.csv")));
  ASSERT_EQ(rec.plan.phases.size(), 8u);
  const auto truth = config_from_json(Json::parse(kGenericConfig)).with_setting(SignalSetting::V_setting);
  for (std::size_t k = 0; k < 8; ++k) {
    EXPECT_EQ(rec.plan.phases[k], 2 * kPi * k / 8);
    EXPECT_EQ(rec.counts_primary[k], std::llround(1000 * rates_exact(truth.with_phi(rec.plan.phases[k])).rate_v));
  }
}

TEST_F(CliTest, SeedIsRequiredForRandomizedCommands) {
  for (const char* sub : {"simulate", "calibrate", "sweep"}) {
    const CliRun r = invoke({sub, "--out", path(sub)});
    EXPECT_EQ(r.code, cli::kExitUsage) << sub;
    EXPECT_NE(r.err.find("--seed"), std::string::npos) << r.err;
  }
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(invoke({}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"simulate", "--seed", "1", "--setting", "X"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"simulate", "--seed", "1", "--points", "3"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"reconstruct", "--scan-h", "x.csv"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"--version"}).code, 0);
}

TEST_F(CliTest, CalibrateRecoversTransmissions) {
  const std::string cfg = write_config("c.json", kGenericConfig);
  const CliRun r = invoke({"calibrate", "--config", cfg, "--seed", "1", "--noiseless", "--n", "10000000000",
                     "--out", path("cal")});
  ASSERT_EQ(r.code, 0) << r.err;
  const CalibrationEstimate c = calibration_from_json(read_json_file(path("cal/calibration.json")));
  EXPECT_NEAR(c.t_h, 0.85, 1e-6);
  EXPECT_NEAR(c.t_v, 0.73, 1e-6);
  EXPECT_EQ(calibration_from_json(Json::parse(r.out)).t_h, c.t_h);
  EXPECT_TRUE(fs::exists(path("cal/calibration_scan_H.csv")));

  const std::string perfect = write_config("p.json", "{}");
  ASSERT_EQ(invoke({"calibrate", "--config", perfect, "--seed", "1", "--noiseless", "--n", "10000000000",
                 "--out", path("cal1")})
                .code,
            0);
  const CalibrationEstimate one = calibration_from_json(read_json_file(path("cal1/calibration.json")));
  EXPECT_NEAR(one.t_h, 1.0, 1e-6);
  EXPECT_NEAR(one.t_v, 1.0, 1e-6);
}

TEST_F(CliTest, BundledExampleRoundTrip) {
  const std::string ex = kData + "/example";
  for (const char* method : {"fringe", "mle"}) {
    const CliRun r = invoke({"reconstruct", "--scan-h", ex + "/scan_H.json", "--scan-v", ex + "/scan_V.json",
                       "--calibration", ex + "/calibration/calibration.json", "--method", method, "--out",
                       path(method)});
    ASSERT_EQ(r.code, 0) << r.err;
    const ReconstructionResult res =
        reconstruction_result_from_json(read_json_file(path(std::string(method) + "/reconstruction.json")));
    ASSERT_TRUE(res.fidelity_vs_reference.has_value());
    EXPECT_NEAR(*res.fidelity_vs_reference, 1.0, 1e-6) << method;
    EXPECT_NEAR(res.params.p_h, 0.3, 1e-4);
    EXPECT_NEAR(res.params.xi, 1.2, 1e-4);
    EXPECT_NEAR(res.params.purity, 0.9, 1e-4);
    EXPECT_NE(r.out.find("fidelity"), std::string::npos);
  }
}

TEST_F(CliTest, CsvScansWithExplicitReference) {
  const std::string ex = kData + "/example";
  const CliRun r = invoke({"reconstruct", "--scan-h", ex + "/scan_H.csv", "--scan-v", ex + "/scan_V.csv",
                     "--calibration", ex + "/calibration/calibration.json", "--reference", "0.3,1.2,0.9",
                     "--format", "json", "--out", path("r")});
  ASSERT_EQ(r.code, 0) << r.err;
  const ReconstructionResult res = reconstruction_result_from_json(Json::parse(r.out));
  EXPECT_NEAR(*res.fidelity_vs_reference, 1.0, 1e-6);
  EXPECT_EQ(read_text_file(path("r/report.txt")).find("reconstruction (fringe)"), 0u);
}

TEST_F(CliTest, MleAgreesWithFringeExtraction) {
  const std::string cfg = write_config("c.json", kGenericConfig);
  ASSERT_EQ(invoke({"simulate", "--config", cfg, "--seed", "9", "--noiseless", "--n", "10000000000", "--format",
                 "json", "--out", path("s")})
                .code,
            0);
  ASSERT_EQ(invoke({"calibrate", "--config", cfg, "--seed", "9", "--noiseless", "--n", "10000000000", "--out",
                 path("c")})
                .code,
            0);
  ReconstructionResult res[2];
  int i = 0;
  for (const char* method : {"fringe", "mle"}) {
    const CliRun r = invoke({"reconstruct", "--scan-h", path("s/scan_H.json"), "--scan-v", path("s/scan_V.json"),
                       "--calibration", path("c/calibration.json"), "--method", method, "--format", "json",
                       "--out", path(method)});
    ASSERT_EQ(r.code, 0) << r.err;
    res[i++] = reconstruction_result_from_json(Json::parse(r.out));
  }
  EXPECT_NEAR(res[0].params.p_h, res[1].params.p_h, 1e-4);
  EXPECT_NEAR(std::remainder(res[0].params.xi - res[1].params.xi, 2 * kPi), 0.0, 1e-4);
  EXPECT_NEAR(res[0].params.purity, res[1].params.purity, 1e-4);
  EXPECT_EQ(res[1].method, ReconstructionMethod::mle);
}

TEST_F(CliTest, DataErrorsExitWithThree) {
  const std::string ex = kData + "/example";
  EXPECT_EQ(invoke({"reconstruct", "--scan-h", ex + "/scan_H.csv", "--scan-v", ex + "/scan_V.csv",
                 "--calibration", path("missing.json"), "--out", path("o")})
                .code,
            cli::kExitData);
  EXPECT_EQ(invoke({"reconstruct", "--scan-h", ex + "/scan_V.csv", "--scan-v", ex + "/scan_H.csv",
                 "--calibration", ex + "/calibration/calibration.json", "--out", path("o")})
                .code,
            cli::kExitData);
  const std::string bad = write_config("bad.json", R"({"t_h": 2.0})");
  EXPECT_EQ(invoke({"simulate", "--config", bad, "--seed", "1", "--out", path("o")}).code, cli::kExitData);
  const std::string broken = write_config("broken.json", "{");
  EXPECT_EQ(invoke({"simulate", "--config", broken, "--seed", "1", "--out", path("o")}).code, cli::kExitData);
  EXPECT_EQ(invoke({"reconstruct", "--scan-h", ex + "/scan_H.csv", "--scan-v", ex + "/scan_V.csv",
                 "--calibration", ex + "/calibration/calibration.json", "--method", "bayes"})
                .code,
            cli::kExitUsage);
}

TEST_F(CliTest, SweepHalfWaveColumns) {
  const std::string cfg = write_config("c.json", R"({"t_h": 0.85, "t_v": 0.73})");
  ASSERT_EQ(invoke({"sweep", "--config", cfg, "--seed", "1", "--plate", "hwp", "--angles", "0:45:5", "--noiseless",
                 "--n", "10000000000", "--format", "json", "--out", path("s")})
                .code,
            0);
  const auto rows = read_csv(path("s/sweep.csv"));
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_EQ(read_text_file(path("s/sweep.csv")).substr(0, 62),
            "angle_deg,v_h,v_v,p_h,xi,purity,fidelity,v_h_theory,v_v_theory");
  for (const auto& r : rows) {
    ASSERT_EQ(r.size(), 9u);
    const double a = r[0] * kPi / 180;
    EXPECT_NEAR(r[1], 0.85 * std::abs(std::cos(2 * a)), 1e-6);
    EXPECT_NEAR(r[2], 0.73 * std::abs(std::sin(2 * a)), 1e-6);
    EXPECT_NEAR(r[3], std::pow(std::cos(2 * a), 2), 1e-6);
    EXPECT_NEAR(r[6], 1.0, 1e-6);
  }
  EXPECT_TRUE(fs::exists(path("s/sweep.json")));
}

TEST_F(CliTest, SweepQuarterWaveColumns) {
  const std::string cfg = write_config("c.json", "{}");
  ASSERT_EQ(invoke({"sweep", "--config", cfg, "--seed", "1", "--plate", "qwp", "--angles", "0,45,90", "--noiseless",
                 "--n", "10000000000", "--out", path("s")})
                .code,
            0);
  const auto rows = read_csv(path("s/sweep.csv"));
  ASSERT_EQ(rows.size(), 3u);
  // QWP at 45 deg on |H>: equal populations, both visibilities 1/sqrt2.
  EXPECT_NEAR(rows[1][1], 1 / std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(rows[1][2], 1 / std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(rows[1][3], 0.5, 1e-6);
  EXPECT_NEAR(rows[1][4], 3 * kPi / 2, 1e-6);
  EXPECT_NEAR(rows[0][3], 1.0, 1e-6);
  EXPECT_NEAR(rows[2][3], 1.0, 1e-6);
}

TEST_F(CliTest, VerifyIsDeterministicAndDetectsInjection) {
  const CliRun a = invoke({"verify", "--trials", "100"});
  const CliRun b = invoke({"verify", "--trials", "100"});
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("all checks passed"), std::string::npos);
  const CliRun inj = invoke({"verify", "--trials", "50", "--inject-invalid", "--out", path("v")});
  EXPECT_EQ(inj.code, 0) << inj.out;
  EXPECT_NE(inj.out.find("violation detected"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("v/manifest.json")));
}

TEST_F(CliTest, ReportPrintsStoredResult) {
  const std::string ex = kData + "/example";
  ASSERT_EQ(invoke({"reconstruct", "--scan-h", ex + "/scan_H.json", "--scan-v", ex + "/scan_V.json",
                 "--calibration", ex + "/calibration/calibration.json", "--out", path("r")})
                .code,
            0);
  const CliRun r = invoke({"report", "--input", path("r/reconstruction.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, read_text_file(path("r/report.txt")));
  EXPECT_EQ(invoke({"report", "--input", path("nothing.json")}).code, cli::kExitData);
}

TEST_F(CliTest, InstalledBinaryRuns) {
  const std::string cmd = std::string("\"") + PATHTOMO_CLI_PATH + "\" simulate --seed 5 --points 6 --out \"" +
                          path("bin") + "\" > \"" + path("stdout.txt") + "\" 2>&1";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(path("bin/scan_H.csv")));
  const std::string no_seed = std::string("\"") + PATHTOMO_CLI_PATH + "\" simulate > /dev/null 2>&1";
  const int status = std::system(no_seed.c_str());
  EXPECT_EQ(WEXITSTATUS(status), cli::kExitUsage);
}
