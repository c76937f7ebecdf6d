#pragma once

// Scalar functionals of the state, sampled along a trajectory.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "qdiff/density_matrix.hpp"
#include "qdiff/lattice.hpp"

namespace qdiff {

enum class Border { left, right };

struct ObservableSample {
  double t = 0.0;
  double sigma2 = 0.0;
  double p_l = 0.0;
  double qtr_left = 0.0;
  double qtr_right = 0.0;
  double trace_defect = 0.0;
  double hermiticity_defect = 0.0;
  double min_diag = 0.0;
  double purity = 0.0;
};

struct DiagonalProfile {
  double t = 0.0;
  std::vector<double> populations;
};

/// Sampled observables of one evolution. Full state history is never kept.
struct Trajectory {
  std::vector<ObservableSample> samples;
  std::vector<DiagonalProfile> profiles;

  std::size_t size() const noexcept { return samples.size(); }

  template <class Field>
  std::vector<double> column(Field field) const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.*field);
    return out;
  }
  std::vector<double> times() const { return column(&ObservableSample::t); }
  std::vector<double> sigma2() const { return column(&ObservableSample::sigma2); }
  std::vector<double> survival() const { return column(&ObservableSample::p_l); }
  std::vector<double> qtr_right() const { return column(&ObservableSample::qtr_right); }
  std::vector<double> qtr_left() const { return column(&ObservableSample::qtr_left); }
};

/// Second moment of the site occupation about the launch site.
inline double variance(std::span<const double> populations, std::size_t center) {
  double acc = 0.0;
  for (std::size_t n = 0; n < populations.size(); ++n) {
    const double offset = static_cast<double>(n) - static_cast<double>(center);
    acc += offset * offset * populations[n];
  }
  return acc;
}

inline std::vector<double> populations(const DensityMatrix& rho) {
  std::vector<double> p(rho.size());
  for (std::size_t n = 0; n < p.size(); ++n) p[n] = rho.population(n);
  return p;
}

inline std::vector<double> populations(std::span<const Complex> psi) {
  std::vector<double> p(psi.size());
  std::transform(psi.begin(), psi.end(), p.begin(), [](Complex a) { return std::norm(a); });
  return p;
}

inline double variance(const DensityMatrix& rho, std::size_t center) {
  return variance(populations(rho), center);
}

inline double survival_probability(std::span<const double> populations, const LatticeSpec& spec) {
  double acc = 0.0;
  for (auto i = spec.first_sublattice_site(); i <= spec.last_sublattice_site(); ++i) {
    acc += populations[i];
  }
  return acc;
}

inline double survival_probability(const DensityMatrix& rho, const LatticeSpec& spec) {
  double acc = 0.0;
  for (auto i = spec.first_sublattice_site(); i <= spec.last_sublattice_site(); ++i) {
    acc += rho.population(i);
  }
  return acc;
}

// Sites (m, m+1) straddling the chosen sublattice border, or false if the
// sublattice touches the lattice edge on that side.
inline bool border_pair(const LatticeSpec& spec, Border side, std::size_t& m) {
  if (side == Border::right) {
    m = spec.last_sublattice_site();
    return m + 1 < spec.sites();
  }
  if (spec.first_sublattice_site() == 0) return false;
  m = spec.first_sublattice_site() - 1;
  return true;
}

/// |rho_{m,m+1}| across the sublattice / perfect-lattice border.
inline double boundary_coherence(const DensityMatrix& rho, const LatticeSpec& spec,
                                 Border side = Border::right) {
  std::size_t m = 0;
  if (!border_pair(spec, side, m)) return 0.0;
  return std::abs(rho(m, m + 1));
}

inline double boundary_coherence(std::span<const Complex> psi, const LatticeSpec& spec,
                                 Border side = Border::right) {
  std::size_t m = 0;
  if (!border_pair(spec, side, m)) return 0.0;
  return std::abs(psi[m] * std::conj(psi[m + 1]));
}

/// All scalar observables and diagnostics of a density matrix.
inline ObservableSample observe(double t, const DensityMatrix& rho, const LatticeSpec& spec,
                                std::size_t center) {
  ObservableSample s;
  s.t = t;
  const auto p = populations(rho);
  s.sigma2 = variance(p, center);
  s.p_l = survival_probability(p, spec);
  s.qtr_left = boundary_coherence(rho, spec, Border::left);
  s.qtr_right = boundary_coherence(rho, spec, Border::right);
  s.trace_defect = std::abs(rho.trace() - 1.0);
  s.hermiticity_defect = rho.hermiticity_defect();
  s.min_diag = *std::min_element(p.begin(), p.end());
  s.purity = rho.purity();
  return s;
}

/// Same observables for a pure state rho = |psi><psi|.
inline ObservableSample observe(double t, std::span<const Complex> psi, const LatticeSpec& spec,
                                std::size_t center) {
  ObservableSample s;
  s.t = t;
  const auto p = populations(psi);
  double norm = 0.0;
  for (double x : p) norm += x;
  s.sigma2 = variance(p, center);
  s.p_l = survival_probability(p, spec);
  s.qtr_left = boundary_coherence(psi, spec, Border::left);
  s.qtr_right = boundary_coherence(psi, spec, Border::right);
  s.trace_defect = std::abs(norm - 1.0);
  s.hermiticity_defect = 0.0;
  s.min_diag = *std::min_element(p.begin(), p.end());
  s.purity = norm * norm;
  return s;
}

}  // namespace qdiff
