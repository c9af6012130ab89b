#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>

#include "pathtomo/acquisition.hpp"
#include "pathtomo/errors.hpp"
#include "pathtomo/rng.hpp"

using namespace pathtomo;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::int64_t kExactN = 10'000'000'000;

ScanPlan plan(SignalSetting s, std::int64_t n, bool noiseless, std::uint64_t seed = 7) {
  ScanPlan p;
  p.phases = uniform_phases(kDefaultScanPoints);
  p.counts_per_point = n;
  p.setting = s;
  p.noiseless = noiseless;
  p.seed = seed;
  return p;
}

double empirical_visibility(const std::vector<std::int64_t>& c) {
  const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
  return static_cast<double>(*hi - *lo) / static_cast<double>(*hi + *lo);
}

}  // namespace

TEST(Rng, SameSeedAndStreamRepeat) {
  Xoshiro256 a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  bool differs_stream = false, differs_seed = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs_stream |= x != c.next();
    differs_seed |= x != d.next();
  }
  EXPECT_TRUE(differs_stream);
  EXPECT_TRUE(differs_seed);
}

TEST(Rng, UniformRanges) {
  Xoshiro256 rng(5);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform(), v = rng.uniform_open();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(Rng, SplitmixReferenceValues) {
  // Reference outputs of splitmix64 seeded with 0.
  std::uint64_t s = 0;
  EXPECT_EQ(splitmix64(s), 0xE220A8397B1DCDAFull);
  EXPECT_EQ(splitmix64(s), 0x6E789E6AA1B965F4ull);
  EXPECT_EQ(splitmix64(s), 0x06C45D188009454Full);
}

class PoissonMoments : public ::testing::TestWithParam<double> {};

TEST_P(PoissonMoments, MeanAndVariance) {
  const double mu = GetParam();
  constexpr int kDraws = 100000;
  Xoshiro256 rng(2024, static_cast<std::uint64_t>(mu * 10));
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const auto k = poisson(rng, mu);
    ASSERT_GE(k, 0);
    sum += static_cast<double>(k);
    sum2 += static_cast<double>(k) * static_cast<double>(k);
  }
  const double mean = sum / kDraws;
  const double var = (sum2 - kDraws * mean * mean) / (kDraws - 1);
  EXPECT_LE(std::abs(mean - mu), 3.0 * std::sqrt(mu / kDraws));
  EXPECT_LE(std::abs(var - mu), 0.05 * mu);
}

INSTANTIATE_TEST_SUITE_P(Means, PoissonMoments, ::testing::Values(0.5, 5.0, 50.0, 29.9, 30.0, 1e4));

TEST(Poisson, ZeroMeanAndBadInput) {
  Xoshiro256 rng(1);
  EXPECT_EQ(poisson(rng, 0.0), 0);
  EXPECT_THROW(poisson(rng, -1.0), ValidationError);
  EXPECT_THROW(poisson(rng, std::nan("")), ValidationError);
}

TEST(ScanPlan, Validation) {
  auto p = plan(SignalSetting::H_setting, 1000, false);
  EXPECT_NO_THROW(p.validate());
  p.phases.resize(4);
  EXPECT_THROW(p.validate(), ValidationError);
  p = plan(SignalSetting::H_setting, 1000, false);
  std::swap(p.phases[2], p.phases[3]);
  EXPECT_THROW(p.validate(), ValidationError);
  p = plan(SignalSetting::H_setting, 1000, false);
  p.phases.back() = 2 * kPi + 0.1;
  EXPECT_THROW(p.validate(), ValidationError);
  p = plan(SignalSetting::H_setting, 0, false);
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(UniformPhases, EquallySpacedOverOnePeriod) {
  const auto ph = uniform_phases(20);
  ASSERT_EQ(ph.size(), 20u);
  EXPECT_EQ(ph[0], 0.0);
  for (std::size_t k = 1; k < ph.size(); ++k) EXPECT_NEAR(ph[k] - ph[k - 1], kPi / 10, 1e-15);
}

TEST(RunScan, NoiselessQuadraturePoint) {
  const auto cfg = InterferometerConfig::balanced({1.0, 0.0, 1.0});
  ScanPlan p = plan(SignalSetting::H_setting, 1000, true);
  p.phases = {0.0, kPi / 2, kPi, 1.2 * kPi, 1.5 * kPi};
  const ScanRecord rec = run_scan(cfg, p);
  EXPECT_EQ(rec.counts_primary[1], std::llround(1000.0 / 3.0));
  EXPECT_EQ(rec.counts_primary[0], std::llround(2000.0 / 3.0));
  EXPECT_EQ(rec.counts_primary[2], 0);
  ASSERT_TRUE(rec.truth.has_value());
  EXPECT_EQ(rec.truth->signal_setting, SignalSetting::H_setting);
}

TEST(RunScan, NoiselessCountsAreRoundedRates) {
  const auto cfg = InterferometerConfig::balanced({0.3, 1.2, 0.9}, 0.85, 0.73);
  for (const auto s : {SignalSetting::H_setting, SignalSetting::V_setting}) {
    const ScanRecord rec = run_scan(cfg, plan(s, 12347, true));
    for (std::size_t k = 0; k < rec.plan.phases.size(); ++k) {
      const DetectionRates r = rates_exact(cfg.with_setting(s).with_phi(rec.plan.phases[k]));
      const double fr = s == SignalSetting::H_setting ? r.rate_h : r.rate_v;
      const double cr = s == SignalSetting::H_setting ? r.rate_v : r.rate_h;
      EXPECT_EQ(rec.counts_primary[k], std::llround(12347 * fr));
      EXPECT_EQ(rec.counts_constant[k], std::llround(12347 * cr));
    }
  }
}

TEST(RunScan, NoiselessVisibilityWithinTwoOverN) {
  const std::int64_t n = 1000;
  for (double ph : {0.2, 0.5, 0.9}) {
    for (double t : {0.5, 0.85, 1.0}) {
      // xi on the phase grid so the sampled extremes are the true extremes.
      const IdlerStateParams idler{ph, 0.3 * kPi, 0.8};
      const auto cfg = InterferometerConfig::balanced(idler, t, t);
      const Visibilities v = visibilities_closed_form(cfg);
      EXPECT_NEAR(empirical_visibility(run_scan(cfg, plan(SignalSetting::H_setting, n, true)).counts_primary),
                  v.v_h, 2.0 / n);
      EXPECT_NEAR(empirical_visibility(run_scan(cfg, plan(SignalSetting::V_setting, n, true)).counts_primary),
                  v.v_v, 2.0 / n);
    }
  }
}

TEST(RunScan, SeededNoiseIsReproducible) {
  const auto cfg = InterferometerConfig::balanced({0.3, 1.2, 0.9}, 0.85, 0.73);
  const ScanRecord a = run_scan(cfg, plan(SignalSetting::V_setting, 1000, false, 99));
  const ScanRecord b = run_scan(cfg, plan(SignalSetting::V_setting, 1000, false, 99));
  const ScanRecord c = run_scan(cfg, plan(SignalSetting::V_setting, 1000, false, 100));
  EXPECT_EQ(a.counts_primary, b.counts_primary);
  EXPECT_EQ(a.counts_constant, b.counts_constant);
  EXPECT_NE(a.counts_primary, c.counts_primary);
}

TEST(RunScanProperty, NoiselessIndependentOfSeed) {
  const auto cfg = InterferometerConfig::balanced({0.4, 2.0, 0.7}, 0.9, 0.8);
  const ScanRecord a = run_scan(cfg, plan(SignalSetting::H_setting, 5000, true, 1));
  const ScanRecord b = run_scan(cfg, plan(SignalSetting::H_setting, 5000, true, 123476789));
  EXPECT_EQ(a.counts_primary, b.counts_primary);
  EXPECT_EQ(a.counts_constant, b.counts_constant);
}

TEST(RunScanProperty, CountsNonnegativeAndShapedLikePlan) {
  Xoshiro256 rng(50);
  for (int t = 0; t < 100; ++t) {
    const IdlerStateParams idler{rng.uniform(), kTwoPi * rng.uniform(), rng.uniform()};
    const auto cfg = InterferometerConfig::balanced(idler, rng.uniform(), rng.uniform(), kTwoPi * rng.uniform());
    const auto s = t % 2 ? SignalSetting::V_setting : SignalSetting::H_setting;
    const ScanRecord rec = run_scan(cfg, plan(s, 1 + t, t % 3 == 0, t));
    ASSERT_EQ(rec.counts_primary.size(), rec.plan.phases.size());
    ASSERT_EQ(rec.counts_constant.size(), rec.plan.phases.size());
    for (auto c : rec.counts_primary) EXPECT_GE(c, 0);
    for (auto c : rec.counts_constant) EXPECT_GE(c, 0);
  }
}

TEST(Calibration, NoiselessRecoversTransmissions) {
  const auto cfg = InterferometerConfig::balanced({0.3, 1.2, 0.9}, 0.85, 0.73);
  const CalibrationResult cal = run_calibration(cfg, plan(SignalSetting::H_setting, kExactN, true));
  EXPECT_NEAR(cal.t_h, 0.85, 1e-6);
  EXPECT_NEAR(cal.t_v, 0.73, 1e-6);
  EXPECT_EQ(cal.scan_h.plan.setting, SignalSetting::H_setting);
  EXPECT_EQ(cal.scan_v.plan.setting, SignalSetting::V_setting);
  EXPECT_EQ(cal.scan_h.truth->idler.p_h, 1.0);
  EXPECT_EQ(cal.scan_v.truth->idler.p_h, 0.0);
}

TEST(Calibration, UnbalancedSourcesAndComplexTransmission) {
  const auto cfg = InterferometerConfig::make(0.6, 0.8, 0.0, std::polar(0.9, 0.4), std::polar(0.7, -1.0),
                                              {0.5, 0.0, 1.0}, {0.4, 0.0});
  const CalibrationResult cal = run_calibration(cfg, plan(SignalSetting::H_setting, kExactN, true));
  EXPECT_NEAR(cal.t_h, 0.9, 1e-6);
  EXPECT_NEAR(cal.t_v, 0.7, 1e-6);
}

TEST(Calibration, NoInterferenceIsAFitError) {
  const auto cfg = InterferometerConfig::make(1.0, 0.0, 0.0, 1.0, 1.0, {0.5, 0.0, 1.0}, {0.5, 0.0});
  EXPECT_THROW(run_calibration(cfg, plan(SignalSetting::H_setting, 1000, true)), FitError);
}

TEST(CalibrationProperty, PoissonCoverageAtPerfectAlignment) {
  const auto cfg = InterferometerConfig::balanced({1.0, 0.0, 1.0}, 1.0, 1.0);
  int inside_h = 0, inside_v = 0;
  constexpr int kTrials = 500;
  for (int t = 0; t < kTrials; ++t) {
    const CalibrationResult cal =
        run_calibration(cfg, plan(SignalSetting::H_setting, 10000, false, 1000 + t));
    inside_h += std::abs(cal.t_h - 1.0) <= 3.0 * cal.t_h_stderr;
    inside_v += std::abs(cal.t_v - 1.0) <= 3.0 * cal.t_v_stderr;
  }
  EXPECT_GE(inside_h, 0.99 * kTrials);
  EXPECT_GE(inside_v, 0.99 * kTrials);
}
