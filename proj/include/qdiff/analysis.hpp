#pragma once

// Exponent extraction and ensemble reduction over sampled observables.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdiff/error.hpp"
#include "qdiff/observables.hpp"

namespace qdiff {

struct FitWindow {
  double t_lo = 1.0;
  double t_hi = std::numeric_limits<double>::infinity();
};

/// Power-law fit sigma2 ~ prefactor * t^exponent.
struct FitResult {
  double exponent = 0.0;
  double prefactor = 0.0;
  double stderr_exponent = 0.0;
  double stderr_log_prefactor = 0.0;
  FitWindow window;
  double r_squared = 0.0;
  std::size_t n_points = 0;
};

struct SaturationReport {
  bool detected = false;
  double t_sat = 0.0;
  double sigma2_sat = 0.0;
};

struct StretchedExpFit {
  double rate = 0.0;      // lambda
  double exponent = 0.0;  // alpha
  double stderr_rate = 0.0;
  double stderr_exponent = 0.0;
  FitWindow window;
  double r_squared = 0.0;
  std::size_t n_points = 0;
};

inline constexpr std::size_t kMinFitPoints = 8;

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double stderr_intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope * x with textbook standard errors.
inline LineFit ordinary_least_squares(std::span<const double> x, std::span<const double> y) {
  const auto n = x.size();
  if (n < 2 || y.size() != n) throw ConfigError("least squares needs matching series of >= 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw ConfigError("least squares needs at least two distinct abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += r * r;
  }
  if (n > 2) {
    const double s2 = ssr / static_cast<double>(n - 2);
    fit.stderr_slope = std::sqrt(s2 / sxx);
    fit.stderr_intercept = std::sqrt(s2 * (1.0 / static_cast<double>(n) + mx * mx / sxx));
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return fit;
}

/// OLS on (ln t, ln sigma2) over samples with t in [t_lo, t_hi].
inline FitResult fit_power_law(std::span<const double> t, std::span<const double> sigma2,
                               FitWindow window) {
  if (t.size() != sigma2.size()) throw ConfigError("time and variance series differ in length");
  if (!(window.t_lo < window.t_hi)) throw ConfigError("fit window must satisfy t_lo < t_hi");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window.t_lo || t[i] > window.t_hi) continue;
    if (!(t[i] > 0.0) || !(sigma2[i] > 0.0)) {
      throw ConfigError("power-law fit needs positive t and sigma2 inside the window");
    }
    x.push_back(std::log(t[i]));
    y.push_back(std::log(sigma2[i]));
  }
  if (x.size() < kMinFitPoints) {
    throw ConfigError("fit window [" + std::to_string(window.t_lo) + ", " +
                      std::to_string(window.t_hi) + "] holds " + std::to_string(x.size()) +
                      " samples; at least " + std::to_string(kMinFitPoints) + " are required");
  }
  const auto line = ordinary_least_squares(x, y);
  FitResult r;
  r.exponent = line.slope;
  r.prefactor = std::exp(line.intercept);
  r.stderr_exponent = line.stderr_slope;
  r.stderr_log_prefactor = line.stderr_intercept;
  r.window = window;
  r.r_squared = line.r_squared;
  r.n_points = x.size();
  return r;
}

struct SaturationOptions {
  double slope_threshold = 0.2;
  // Width, in decades of t, of the local-slope window.
  double window_decades = 0.1;
  // Span the slope has to stay below the threshold; wider than the slope
  // window so that a short trapping dip is not mistaken for a plateau.
  double stay_decades = 0.2;
  std::size_t min_samples = 32;
};

/// Log-log slope at each sample from a centered window of `decades` width.
/// Entries are NaN where fewer than three positive samples fall in the window.
inline std::vector<double> local_log_slopes(std::span<const double> t, std::span<const double> y,
                                            double decades) {
  const double half = std::pow(10.0, decades / 2.0);
  std::vector<double> slopes(t.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!(t[k] > 0.0)) continue;
    lx.clear();
    ly.clear();
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (t[j] >= t[k] / half && t[j] <= t[k] * half && t[j] > 0.0 && y[j] > 0.0) {
        lx.push_back(std::log(t[j]));
        ly.push_back(std::log(y[j]));
      }
    }
    if (lx.size() >= 3) slopes[k] = ordinary_least_squares(lx, ly).slope;
  }
  return slopes;
}

/// Finite-size plateau: the first sample from which the local log-log slope
/// stays below the threshold for the full stay span. t_sat is the lower edge of
/// that sample's slope window; the plateau is the mean of sigma2 beyond t_sat.
inline SaturationReport detect_saturation(std::span<const double> t,
                                          std::span<const double> sigma2,
                                          SaturationOptions options = {}) {
  SaturationReport report;
  if (t.size() != sigma2.size()) throw ConfigError("time and variance series differ in length");
  if (t.size() < options.min_samples) return report;
  const auto slopes = local_log_slopes(t, sigma2, options.window_decades);
  const double span = std::pow(10.0, options.stay_decades);
  const double t_last = t.back();
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (std::isnan(slopes[k]) || t[k] * span > t_last) continue;
    bool flat = true;
    for (std::size_t j = k; j < t.size() && t[j] <= t[k] * span; ++j) {
      if (std::isnan(slopes[j]) || !(slopes[j] < options.slope_threshold)) {
        flat = false;
        break;
      }
    }
    if (!flat) continue;
    report.detected = true;
    report.t_sat = std::max(t.front(), t[k] / std::pow(10.0, options.window_decades / 2.0));
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (t[j] >= report.t_sat) {
        sum += sigma2[j];
        ++count;
      }
    }
    report.sigma2_sat = sum / static_cast<double>(count);
    return report;
  }
  return report;
}

/// Default exponent window: [1, min(t_sat, t_end)].
inline FitWindow default_fit_window(const SaturationReport& saturation, double t_end,
                                    double t_lo = 1.0) {
  return {t_lo, saturation.detected ? std::min(saturation.t_sat, t_end) : t_end};
}

/// Variance of sigma2 about its least-squares line in t, over t >= t_from.
/// Measures the post-saturation fluctuation once the plateau trend is removed.
inline double tail_fluctuation(std::span<const double> t, std::span<const double> sigma2,
                               double t_from) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= t_from) {
      x.push_back(t[i]);
      y.push_back(sigma2[i]);
    }
  }
  if (x.size() < 3) throw ConfigError("tail holds fewer than three samples");
  const auto line = ordinary_least_squares(x, y);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - line.intercept - line.slope * x[i];
    acc += r * r;
  }
  return acc / static_cast<double>(x.size());
}

/// Peak of a pulse-like series and how long it stays at or above half of that peak.
struct PulseShape {
  double peak = 0.0;
  double peak_time = 0.0;
  double time_above_half = 0.0;
};

inline PulseShape pulse_shape(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size() || t.empty()) throw ConfigError("pulse needs matching, non-empty series");
  PulseShape p;
  const auto top = std::max_element(y.begin(), y.end()) - y.begin();
  p.peak = y[top];
  p.peak_time = t[top];
  const double half = 0.5 * p.peak;
  // Piecewise-linear crossings, so the result does not snap to the sample grid.
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double a = y[i - 1] - half, b = y[i] - half, dt = t[i] - t[i - 1];
    if (a >= 0 && b >= 0) {
      p.time_above_half += dt;
    } else if (a >= 0 || b >= 0) {
      p.time_above_half += dt * std::max(a, b) / std::abs(a - b);
    }
  }
  return p;
}

/// P_L(t) = exp(-rate * t^exponent), fitted by OLS on (ln t, ln(-ln P_L)).
/// Samples with P_L outside (0, 1) are dropped.
inline StretchedExpFit fit_stretched_exponential(std::span<const double> t,
                                                 std::span<const double> survival,
                                                 FitWindow window) {
  if (t.size() != survival.size()) throw ConfigError("time and survival series differ in length");
  if (!(window.t_lo < window.t_hi)) throw ConfigError("fit window must satisfy t_lo < t_hi");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window.t_lo || t[i] > window.t_hi || !(t[i] > 0.0)) continue;
    if (!(survival[i] > 0.0 && survival[i] < 1.0)) continue;
    x.push_back(std::log(t[i]));
    y.push_back(std::log(-std::log(survival[i])));
  }
  if (x.size() < kMinFitPoints) {
    throw ConfigError("stretched-exponential fit has " + std::to_string(x.size()) +
                      " usable samples; at least " + std::to_string(kMinFitPoints) +
                      " are required");
  }
  if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); })) {
    throw ConfigError("survival probability is constant in the window; no decay to fit");
  }
  const auto line = ordinary_least_squares(x, y);
  StretchedExpFit r;
  r.exponent = line.slope;
  r.rate = std::exp(line.intercept);
  r.stderr_exponent = line.stderr_slope;
  r.stderr_rate = r.rate * line.stderr_intercept;
  r.window = window;
  r.r_squared = line.r_squared;
  r.n_points = x.size();
  return r;
}

/// Pointwise ensemble mean with standard errors of the mean.
struct EnsembleTrajectory {
  Trajectory mean;
  std::vector<double> sigma2_sem;
  std::vector<double> p_l_sem;
  std::vector<double> qtr_left_sem;
  std::vector<double> qtr_right_sem;
  std::size_t count = 0;
};

inline EnsembleTrajectory ensemble_average(std::span<const Trajectory> runs) {
  if (runs.empty()) throw ConfigError("ensemble average of zero trajectories");
  const auto samples = runs.front().size();
  for (const auto& r : runs) {
    if (r.size() != samples) throw ConfigError("ensemble members have different output grids");
    for (std::size_t i = 0; i < samples; ++i) {
      if (r.samples[i].t != runs.front().samples[i].t) {
        throw ConfigError("ensemble members have different output grids");
      }
    }
  }
  const auto k = static_cast<double>(runs.size());
  EnsembleTrajectory out;
  out.count = runs.size();
  out.mean.samples.resize(samples);
  out.sigma2_sem.resize(samples);
  out.p_l_sem.resize(samples);
  out.qtr_left_sem.resize(samples);
  out.qtr_right_sem.resize(samples);

  auto mean_sem = [&](std::size_t i, double ObservableSample::*field, double& mean, double& sem) {
    double m = 0.0;
    for (const auto& r : runs) m += r.samples[i].*field;
    m /= k;
    double ss = 0.0;
    for (const auto& r : runs) {
      const double d = r.samples[i].*field - m;
      ss += d * d;
    }
    mean = runs.size() == 1 ? runs.front().samples[i].*field : m;
    sem = runs.size() > 1 ? std::sqrt(ss / (k - 1.0) / k) : 0.0;
  };

  for (std::size_t i = 0; i < samples; ++i) {
    auto& s = out.mean.samples[i];
    s.t = runs.front().samples[i].t;
    double unused = 0.0;
    mean_sem(i, &ObservableSample::sigma2, s.sigma2, out.sigma2_sem[i]);
    mean_sem(i, &ObservableSample::p_l, s.p_l, out.p_l_sem[i]);
    mean_sem(i, &ObservableSample::qtr_left, s.qtr_left, out.qtr_left_sem[i]);
    mean_sem(i, &ObservableSample::qtr_right, s.qtr_right, out.qtr_right_sem[i]);
    mean_sem(i, &ObservableSample::purity, s.purity, unused);
    // Diagnostics reduce to the worst member.
    s.trace_defect = 0.0;
    s.hermiticity_defect = 0.0;
    s.min_diag = std::numeric_limits<double>::infinity();
    for (const auto& r : runs) {
      s.trace_defect = std::max(s.trace_defect, r.samples[i].trace_defect);
      s.hermiticity_defect = std::max(s.hermiticity_defect, r.samples[i].hermiticity_defect);
      s.min_diag = std::min(s.min_diag, r.samples[i].min_diag);
    }
  }
  return out;
}

}  // namespace qdiff
