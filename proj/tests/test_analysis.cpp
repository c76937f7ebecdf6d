#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qdiff/analysis.hpp"
#include "qdiff/evolution.hpp"

using namespace qdiff;

namespace {

std::vector<double> log_times(double lo, double hi, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = lo * std::pow(hi / lo, double(i) / double(n - 1));
  return t;
}

std::vector<double> apply(const std::vector<double>& t, auto f) {
  std::vector<double> y;
  for (double x : t) y.push_back(f(x));
  return y;
}

Trajectory synthetic(const std::vector<double>& t, auto sigma2) {
  Trajectory traj;
  for (double x : t) {
    ObservableSample s;
    s.t = x;
    s.sigma2 = sigma2(x);
    s.p_l = std::exp(-0.1 * x);
    s.qtr_right = 0.01 * x;
    s.purity = 1.0;
    traj.samples.push_back(s);
  }
  return traj;
}

}  // namespace

TEST(PowerLaw, ExactBallisticLaw) {
  const auto t = log_times(0.1, 100, 200);
  const auto fit = fit_power_law(t, apply(t, [](double x) { return 2 * x * x; }), {1.0, 100.0});
  EXPECT_NEAR(fit.exponent, 2.0, 1e-12);
  EXPECT_NEAR(fit.prefactor, 2.0, 1e-10);
  EXPECT_LE(fit.stderr_exponent, 1e-10);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(PowerLaw, ExactNonIntegerExponent) {
  const auto t = log_times(0.1, 100, 200);
  const auto fit = fit_power_law(t, apply(t, [](double x) { return std::pow(x, 2.79); }), {1.0, 60.0});
  EXPECT_NEAR(fit.exponent, 2.79, 1e-12);
}

TEST(PowerLaw, WindowIndependentOnExactLaw) {
  const auto t = log_times(0.01, 100, 400);
  const auto y = apply(t, [](double x) { return 3.5 * std::pow(x, 1.37); });
  const double a = fit_power_law(t, y, {0.1, 1.0}).exponent;
  const double b = fit_power_law(t, y, {1.0, 100.0}).exponent;
  const double c = fit_power_law(t, y, {0.02, 50.0}).exponent;
  EXPECT_NEAR(a, b, 1e-10);
  EXPECT_NEAR(b, c, 1e-10);
}

TEST(PowerLaw, ResampledSubsetAgreesWithinStderr) {
  const auto t = log_times(1, 100, 201);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> y;
  for (double x : t) y.push_back(std::pow(x, 1.8) * std::exp(noise(rng)));
  const auto full = fit_power_law(t, y, {1, 100});
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < t.size(); i += 2) {
    ts.push_back(t[i]);
    ys.push_back(y[i]);
  }
  const auto half = fit_power_law(ts, ys, {1, 100});
  EXPECT_LT(std::abs(full.exponent - half.exponent), 3 * half.stderr_exponent);

  const auto exact = apply(t, [](double x) { return std::pow(x, 1.8); });
  std::vector<double> es;
  for (std::size_t i = 0; i < t.size(); i += 2) es.push_back(exact[i]);
  EXPECT_NEAR(fit_power_law(t, exact, {1, 100}).exponent, fit_power_law(ts, es, {1, 100}).exponent, 1e-10);
}

TEST(PowerLaw, Errors) {
  const auto t = log_times(1, 100, 50);
  auto y = apply(t, [](double x) { return x; });
  EXPECT_THROW(fit_power_law(t, y, {200, 300}), ConfigError);   // empty window
  EXPECT_THROW(fit_power_law(t, y, {1, 1.3}), ConfigError);     // too few points
  EXPECT_THROW(fit_power_law(t, y, {5, 2}), ConfigError);       // inverted
  y[25] = 0.0;
  EXPECT_THROW(fit_power_law(t, y, {1, 100}), ConfigError);     // nonpositive
}

TEST(Saturation, PurePowerLawIsNotDetected) {
  const auto t = log_times(0.01, 100, 400);
  const auto report = detect_saturation(t, apply(t, [](double x) { return 2 * x * x; }));
  EXPECT_FALSE(report.detected);
}

TEST(Saturation, ConstructedElbow) {
  const auto t = log_times(0.01, 1000, 500);
  const auto report = detect_saturation(t, apply(t, [](double x) { return std::min(x * x, 100.0); }));
  ASSERT_TRUE(report.detected);
  EXPECT_NEAR(report.t_sat, 10.0, 1.5);
  EXPECT_NEAR(report.sigma2_sat, 100.0, 1.0);
}

TEST(Saturation, ShortDipIsNotAPlateau) {
  // A flat stretch of 0.12 decades inside otherwise ballistic growth.
  const auto t = log_times(0.01, 100, 500);
  const auto y = apply(t, [](double x) {
    if (x < 3.0) return x * x;
    if (x < 3.0 * std::pow(10.0, 0.12)) return 9.0;
    return 9.0 * std::pow(x / (3.0 * std::pow(10.0, 0.12)), 2.0);
  });
  EXPECT_FALSE(detect_saturation(t, y).detected);
}

TEST(Saturation, TooFewSamples) {
  const auto t = log_times(1, 100, 20);
  EXPECT_FALSE(detect_saturation(t, apply(t, [](double) { return 5.0; })).detected);
}

TEST(Saturation, LargerFreeLatticeSaturatesHigher) {
  auto plateau = [](std::size_t n) {
    const LatticeSpec spec(n, 0);
    const auto traj = schrodinger_evolve(build_hamiltonian(zero_potential(spec)), spec.center(),
                                         TimeGrid::log_spaced(1000.0, 500, 0.01), {spec});
    const auto r = detect_saturation(traj.times(), traj.sigma2());
    EXPECT_TRUE(r.detected);
    return r.sigma2_sat;
  };
  EXPECT_GT(plateau(401), plateau(201));
}

TEST(FitWindowPolicy, EndsAtSaturation) {
  SaturationReport r{true, 40.0, 10.0};
  EXPECT_EQ(default_fit_window(r, 100.0).t_hi, 40.0);
  EXPECT_EQ(default_fit_window(r, 100.0).t_lo, 1.0);
  EXPECT_EQ(default_fit_window(SaturationReport{}, 100.0).t_hi, 100.0);
}

TEST(TailFluctuation, LinearTrendIsRemoved) {
  const auto t = log_times(1, 100, 100);
  EXPECT_NEAR(tail_fluctuation(t, apply(t, [](double x) { return 5 + 0.3 * x; }), 10.0), 0.0, 1e-20);
  const auto wobbly = apply(t, [](double x) { return 5 + 0.3 * x + std::sin(x); });
  EXPECT_GT(tail_fluctuation(t, wobbly, 10.0), 0.1);
}

TEST(StretchedExp, SimpleExponential) {
  const auto t = log_times(0.1, 50, 100);
  const auto fit = fit_stretched_exponential(t, apply(t, [](double x) { return std::exp(-0.1 * x); }), {0.1, 50});
  EXPECT_NEAR(fit.exponent, 1.0, 1e-10);
  EXPECT_NEAR(fit.rate, 0.1, 1e-10);
}

TEST(StretchedExp, Gaussian) {
  const auto t = log_times(0.1, 20, 100);
  const auto fit = fit_stretched_exponential(t, apply(t, [](double x) { return std::exp(-0.01 * x * x); }), {0.1, 20});
  EXPECT_NEAR(fit.exponent, 2.0, 1e-10);
  EXPECT_NEAR(fit.rate, 0.01, 1e-10);
}

TEST(StretchedExp, NoDecayIsRejected) {
  const auto t = log_times(0.1, 20, 100);
  EXPECT_THROW(fit_stretched_exponential(t, apply(t, [](double) { return 0.7; }), {0.1, 20}), ConfigError);
  EXPECT_THROW(fit_stretched_exponential(t, apply(t, [](double) { return 1.0; }), {0.1, 20}), ConfigError);
}

TEST(StretchedExp, DropsSamplesOutsideUnitInterval) {
  const auto t = log_times(0.1, 50, 100);
  auto p = apply(t, [](double x) { return std::exp(-0.1 * x); });
  p[0] = 1.0;
  p[1] = 0.0;
  const auto fit = fit_stretched_exponential(t, p, {0.1, 50});
  EXPECT_EQ(fit.n_points, 98u);
  EXPECT_NEAR(fit.exponent, 1.0, 1e-10);
}

TEST(Ensemble, SingleTrajectoryIsIdentity) {
  const auto traj = synthetic(log_times(1, 10, 20), [](double x) { return x * x; });
  const std::vector<Trajectory> runs{traj};
  const auto avg = ensemble_average(runs);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    EXPECT_EQ(avg.mean.samples[i].sigma2, traj.samples[i].sigma2);
    EXPECT_EQ(avg.sigma2_sem[i], 0.0);
  }
}

TEST(Ensemble, CopiesAverageToThemselves) {
  const auto traj = synthetic(log_times(1, 10, 20), [](double x) { return 1.7 * x * x; });
  const std::vector<Trajectory> runs(5, traj);
  const auto avg = ensemble_average(runs);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    EXPECT_DOUBLE_EQ(avg.mean.samples[i].sigma2, traj.samples[i].sigma2);
    EXPECT_DOUBLE_EQ(avg.mean.samples[i].p_l, traj.samples[i].p_l);
    EXPECT_NEAR(avg.sigma2_sem[i], 0.0, 1e-12);
  }
}

TEST(Ensemble, MeanAndStandardError) {
  const auto t = log_times(1, 10, 10);
  const std::vector<Trajectory> runs{synthetic(t, [](double x) { return x; }),
                                     synthetic(t, [](double x) { return 3 * x; })};
  const auto avg = ensemble_average(runs);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_DOUBLE_EQ(avg.mean.samples[i].sigma2, 2 * t[i]);
    // sample sd = sqrt(2) t, sem = sd / sqrt(2) = t
    EXPECT_NEAR(avg.sigma2_sem[i], t[i], 1e-12 * t[i]);
  }
}

TEST(Ensemble, AverageThenFitDiffersFromFitThenAverage) {
  const auto t = log_times(1, 100, 100);
  const std::vector<Trajectory> runs{synthetic(t, [](double x) { return x; }),
                                     synthetic(t, [](double x) { return x * x * x; })};
  const auto avg = ensemble_average(runs);
  const double protocol = fit_power_law(avg.mean.times(), avg.mean.sigma2(), {1, 100}).exponent;
  EXPECT_GT(protocol, 2.0);  // dominated by the faster member, not the mean exponent 2
}

TEST(Ensemble, GridMismatchRejected) {
  const std::vector<Trajectory> runs{synthetic(log_times(1, 10, 10), [](double x) { return x; }),
                                     synthetic(log_times(1, 11, 10), [](double x) { return x; })};
  EXPECT_THROW(ensemble_average(runs), ConfigError);
  EXPECT_THROW(ensemble_average(std::span<const Trajectory>{}), ConfigError);
}

TEST(Pulse, TriangleHalfWidth) {
  // Tent rising 0->1 on [0, 2], falling to 0 on [2, 4]: above half for [1, 3].
  std::vector<double> t, y;
  for (int i = 0; i <= 40; ++i) {
    t.push_back(0.1 * i);
    y.push_back(1.0 - std::abs(0.1 * i - 2.0) / 2.0);
  }
  const auto p = pulse_shape(t, y);
  EXPECT_DOUBLE_EQ(p.peak, 1.0);
  EXPECT_NEAR(p.peak_time, 2.0, 1e-12);
  EXPECT_NEAR(p.time_above_half, 2.0, 1e-12);
}

TEST(Pulse, CrossingBetweenSamplesIsInterpolated) {
  const std::vector<double> t{0, 1, 2, 3};
  const std::vector<double> y{0, 4, 0, 0};
  EXPECT_NEAR(pulse_shape(t, y).time_above_half, 1.0, 1e-15);
  EXPECT_THROW(pulse_shape(t, std::vector<double>{1, 2}), ConfigError);
}
