#pragma once

// Density-matrix propagation under the pure-dephasing master equation
//
//   d rho / dt = -i [H, rho] + Gamma * sum_i (2 A_i rho A_i - rho A_i - A_i rho),
//   A_i = |i><i|,
//
// and the noiseless state-vector path used as its Gamma = 0 counterpart.
// For site projectors the dissipator keeps populations and damps every
// coherence rho_mn (m != n) at rate 2 Gamma, so one right-hand side costs
// O(N^2) with a tridiagonal H.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qdiff/density_matrix.hpp"
#include "qdiff/error.hpp"
#include "qdiff/lattice.hpp"
#include "qdiff/observables.hpp"

namespace qdiff {

struct NoiseSpec {
  double gamma = 0.0;

  void validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
      throw ConfigError("dephasing rate must be finite and non-negative");
    }
  }
};

/// Output sample times, stored as integer multiples of the integrator step.
/// Always contains t = 0; samples are strictly increasing, so the step never
/// exceeds the sample spacing.
class TimeGrid {
 public:
  static TimeGrid from_steps(double dt, std::vector<std::uint64_t> steps) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
    if (steps.empty() || steps.front() != 0) throw ConfigError("time grid must include t = 0");
    for (std::size_t i = 1; i < steps.size(); ++i) {
      if (steps[i] <= steps[i - 1]) throw ConfigError("sample times must be strictly increasing");
    }
    TimeGrid g;
    g.dt_ = dt;
    g.steps_ = std::move(steps);
    return g;
  }

  /// t = 0 plus up to `count` geometrically spaced samples in [t_first, t_end],
  /// snapped to the step lattice (duplicates after snapping are merged).
  static TimeGrid log_spaced(double t_end, std::size_t count, double dt, double t_first = 0.0) {
    if (t_first <= 0.0) t_first = dt;
    check_span(t_end, dt);
    if (count < 2) throw ConfigError("log-spaced grid needs at least two samples");
    if (!(t_first < t_end)) throw ConfigError("first sample must precede t_end");
    std::vector<std::uint64_t> steps{0};
    const double ratio = std::log(t_end / t_first) / static_cast<double>(count - 1);
    for (std::size_t k = 0; k < count; ++k) {
      const double t = k + 1 == count ? t_end : t_first * std::exp(ratio * static_cast<double>(k));
      const auto s = static_cast<std::uint64_t>(std::llround(t / dt));
      if (s > steps.back()) steps.push_back(s);
    }
    return from_steps(dt, std::move(steps));
  }

  /// t = 0 plus `count` evenly spaced samples ending at t_end.
  static TimeGrid linear(double t_end, std::size_t count, double dt) {
    check_span(t_end, dt);
    if (count < 1) throw ConfigError("linear grid needs at least one sample");
    std::vector<std::uint64_t> steps{0};
    for (std::size_t k = 1; k <= count; ++k) {
      const double t = t_end * static_cast<double>(k) / static_cast<double>(count);
      const auto s = static_cast<std::uint64_t>(std::llround(t / dt));
      if (s > steps.back()) steps.push_back(s);
    }
    return from_steps(dt, std::move(steps));
  }

  double dt() const noexcept { return dt_; }
  const std::vector<std::uint64_t>& steps() const noexcept { return steps_; }
  std::size_t size() const noexcept { return steps_.size(); }
  double time(std::size_t i) const noexcept { return static_cast<double>(steps_[i]) * dt_; }
  double t_end() const noexcept { return time(steps_.size() - 1); }

  std::vector<double> times() const {
    std::vector<double> t(steps_.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = time(i);
    return t;
  }

 private:
  static void check_span(double t_end, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
    if (!(t_end >= dt) || !std::isfinite(t_end)) throw ConfigError("t_end must be at least one step");
  }

  double dt_ = 0.01;
  std::vector<std::uint64_t> steps_;
};

// What to record along a run besides the scalar observables.
struct ObserverSet {
  LatticeSpec lattice;
  bool record_profiles = false;
  std::size_t profile_stride = 1;  // keep the diagonal at every k-th sample
};

struct EvolveOptions {
  // Abort once |Tr rho - 1| exceeds this.
  double trace_abort = 1e-6;
  // Sites are added to the active window once any coherence on its edge row
  // or column exceeds this magnitude. Zero disables windowing.
  double support_threshold = 1e-30;
  std::size_t support_margin = 8;
};

inline ComplexMatrix site_projector(std::size_t sites, std::size_t site) {
  ComplexMatrix a = ComplexMatrix::Zero(static_cast<Eigen::Index>(sites),
                                        static_cast<Eigen::Index>(sites));
  a(static_cast<Eigen::Index>(site), static_cast<Eigen::Index>(site)) = 1.0;
  return a;
}

inline ComplexMatrix dense_hamiltonian(const Hamiltonian& h) {
  const auto n = static_cast<Eigen::Index>(h.size());
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = h.diagonal[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    m(i, i + 1) = m(i + 1, i) = h.bonds[static_cast<std::size_t>(i)];
  }
  return m;
}

namespace detail {

inline void check_shapes(std::size_t rho_size, const Hamiltonian& h) {
  if (rho_size != h.size() || h.bonds.size() + 1 != h.size()) {
    throw ConfigError("density matrix and Hamiltonian sizes differ");
  }
}

/// Upper-triangle kernel of the dephasing right-hand side on the active
/// window [lo, hi]. Reads and writes only entries (m, n) with lo <= m <= n <= hi;
/// the lower triangle is implied by Hermiticity.
class DephasingKernel {
 public:
  DephasingKernel(const Hamiltonian& h, double gamma)
      : diag_(h.diagonal), bonds_(h.bonds), damping_(2.0 * gamma) {}

  void operator()(const ComplexMatrix& y, ComplexMatrix& out, std::size_t lo,
                  std::size_t hi) const {
    if (zeros_.size() < static_cast<std::size_t>(y.rows())) {
      zeros_.assign(static_cast<std::size_t>(y.rows()), Complex(0.0, 0.0));
    }
    const double* d = diag_.data();
    const double* b = bonds_.data();
    const double g = damping_;
    const auto rows = y.rows();
    for (std::size_t n = lo; n <= hi; ++n) {
      const Complex* c = y.data() + static_cast<Eigen::Index>(n) * rows;
      // Entries outside the window are zero; a zero column stands in for n + 1 at the edge.
      const Complex* cn = n < hi ? c + rows : zeros_.data();
      const double bn = n < hi ? b[n] : 0.0;
      Complex* o = out.data() + static_cast<Eigen::Index>(n) * out.rows();
      double dn = -2.0 * bn * cn[n].imag();
      if (n > lo) {
        const Complex* cp = c - rows;
        const double bp = b[n - 1];
        const double dd = d[n];
        // [H, rho]_mn for tridiagonal H. With m < n the neighbours
        // rho_{m+1,n} and rho_{m,n-1} lie in the upper triangle.
        {
          const std::size_t m = lo;
          const Complex acc = (d[m] - dd) * c[m] + b[m] * c[m + 1] - bp * cp[m] - bn * cn[m];
          o[m] = Complex(acc.imag() - g * c[m].real(), -acc.real() - g * c[m].imag());
        }
        for (std::size_t m = lo + 1; m < n; ++m) {
          const double re = (d[m] - dd) * c[m].real() + b[m] * c[m + 1].real() +
                            b[m - 1] * c[m - 1].real() - bp * cp[m].real() - bn * cn[m].real();
          const double im = (d[m] - dd) * c[m].imag() + b[m] * c[m + 1].imag() +
                            b[m - 1] * c[m - 1].imag() - bp * cp[m].imag() - bn * cn[m].imag();
          o[m] = Complex(im - g * c[m].real(), -re - g * c[m].imag());
        }
        dn += 2.0 * bp * c[n - 1].imag();
      }
      o[n] = Complex(dn, 0.0);
    }
  }

 private:
  std::vector<double> diag_;
  std::vector<double> bonds_;
  double damping_;
  mutable std::vector<Complex> zeros_;
};

// Copy the upper triangle of `m` into its lower triangle as the conjugate.
inline void mirror_upper(ComplexMatrix& m) {
  const auto n = m.rows();
  for (Eigen::Index col = 0; col < n; ++col) {
    for (Eigen::Index row = col + 1; row < n; ++row) m(row, col) = std::conj(m(col, row));
  }
}

}  // namespace detail

/// Time derivative of rho under the dephasing master equation (O(N^2)).
/// rho must be Hermitian; only its upper triangle is read.
inline ComplexMatrix dephasing_rhs(const DensityMatrix& rho, const Hamiltonian& h, double gamma) {
  detail::check_shapes(rho.size(), h);
  ComplexMatrix out = ComplexMatrix::Zero(rho.matrix().rows(), rho.matrix().cols());
  if (rho.size() == 0) return out;
  detail::DephasingKernel(h, gamma)(rho.matrix(), out, 0, rho.size() - 1);
  detail::mirror_upper(out);
  return out;
}

/// Literal sum over Lindblad generators, with dense matrix products. Test oracle.
inline ComplexMatrix general_dissipator_rhs(const DensityMatrix& rho, const Hamiltonian& h,
                                            double gamma,
                                            std::span<const ComplexMatrix> generators) {
  detail::check_shapes(rho.size(), h);
  const auto n = static_cast<Eigen::Index>(rho.size());
  for (const auto& a : generators) {
    if (a.rows() != n || a.cols() != n) throw ConfigError("generator has the wrong shape");
    Eigen::Index hits = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const Complex v = a(i, j);
        if (v == Complex(1.0, 0.0) && i == j) {
          ++hits;
        } else if (v != Complex(0.0, 0.0)) {
          throw ConfigError("generator is not a site projector");
        }
      }
    }
    if (hits != 1) throw ConfigError("generator is not a site projector");
  }
  const ComplexMatrix hm = dense_hamiltonian(h);
  const ComplexMatrix& r = rho.matrix();
  const Complex minus_i(0.0, -1.0);
  ComplexMatrix out = minus_i * (hm * r - r * hm);
  for (const auto& a : generators) {
    const ComplexMatrix ad = a.adjoint();
    out += gamma * (2.0 * a * r * ad - r * ad * a - ad * a * r);
  }
  return out;
}

inline std::vector<ComplexMatrix> all_site_projectors(std::size_t sites) {
  std::vector<ComplexMatrix> out;
  out.reserve(sites);
  for (std::size_t i = 0; i < sites; ++i) out.push_back(site_projector(sites, i));
  return out;
}

/// Fixed-step classical RK4 propagator for the dephasing master equation.
/// Owns its state buffers; one instance per run.
class DephasingPropagator {
 public:
  DephasingPropagator(const Hamiltonian& h, NoiseSpec noise, const DensityMatrix& initial,
                      double dt, EvolveOptions options = {})
      : kernel_(h, noise.gamma), dt_(dt), options_(options) {
    noise.validate();
    detail::check_shapes(initial.size(), h);
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    sites_ = initial.size();
    y_ = initial.matrix();
    acc_ = ComplexMatrix::Zero(y_.rows(), y_.cols());
    tmp_ = acc_;
    k_ = acc_;
    init_window();
  }

  void advance(std::uint64_t steps) {
    for (std::uint64_t s = 0; s < steps; ++s) step();
  }

  void step() {
    if (options_.support_threshold > 0.0) grow_window();
    const std::size_t lo = lo_, hi = hi_;
    const double h = dt_;
    copy(y_, acc_, lo, hi);
    kernel_(y_, k_, lo, hi);
    combine(h / 6.0, 0.5 * h, lo, hi);
    kernel_(tmp_, k_, lo, hi);
    combine(h / 3.0, 0.5 * h, lo, hi);
    kernel_(tmp_, k_, lo, hi);
    combine(h / 3.0, h, lo, hi);
    kernel_(tmp_, k_, lo, hi);
    finish(h / 6.0, lo, hi);
    y_.swap(acc_);
    ++steps_;
  }

  double time() const noexcept { return static_cast<double>(steps_) * dt_; }
  std::uint64_t steps_taken() const noexcept { return steps_; }
  std::size_t window_lo() const noexcept { return lo_; }
  std::size_t window_hi() const noexcept { return hi_; }

  DensityMatrix state() const {
    ComplexMatrix full = ComplexMatrix::Zero(y_.rows(), y_.cols());
    for (std::size_t n = lo_; n <= hi_; ++n) {
      for (std::size_t m = lo_; m <= n; ++m) full(idx(m), idx(n)) = y_(idx(m), idx(n));
    }
    detail::mirror_upper(full);
    return DensityMatrix(std::move(full));
  }

 private:
  static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

  void init_window() {
    if (options_.support_threshold <= 0.0) {
      lo_ = 0;
      hi_ = sites_ - 1;
      return;
    }
    lo_ = sites_;
    hi_ = 0;
    for (std::size_t n = 0; n < sites_; ++n) {
      for (std::size_t m = 0; m <= n; ++m) {
        if (y_(idx(m), idx(n)) != Complex(0.0, 0.0)) {
          lo_ = std::min(lo_, m);
          hi_ = std::max(hi_, n);
        }
      }
    }
    if (lo_ > hi_) lo_ = hi_ = 0;
    lo_ = lo_ > options_.support_margin ? lo_ - options_.support_margin : 0;
    hi_ = std::min(sites_ - 1, hi_ + options_.support_margin);
  }

  void grow_window() {
    const double thr2 = options_.support_threshold * options_.support_threshold;
    if (lo_ > 0) {
      double edge = 0.0;
      for (std::size_t n = lo_; n <= hi_; ++n) edge = std::max(edge, std::norm(y_(idx(lo_), idx(n))));
      if (edge > thr2) lo_ = lo_ > options_.support_margin ? lo_ - options_.support_margin : 0;
    }
    if (hi_ + 1 < sites_) {
      double edge = 0.0;
      for (std::size_t m = lo_; m <= hi_; ++m) edge = std::max(edge, std::norm(y_(idx(m), idx(hi_))));
      if (edge > thr2) hi_ = std::min(sites_ - 1, hi_ + options_.support_margin);
    }
  }

  static void copy(const ComplexMatrix& from, ComplexMatrix& to, std::size_t lo, std::size_t hi) {
    for (std::size_t n = lo; n <= hi; ++n) {
      const auto len = static_cast<Eigen::Index>(n - lo + 1);
      to.col(idx(n)).segment(idx(lo), len) = from.col(idx(n)).segment(idx(lo), len);
    }
  }

  // acc += wa * k;  tmp = y + wt * k
  void combine(double wa, double wt, std::size_t lo, std::size_t hi) {
    for (std::size_t n = lo; n <= hi; ++n) {
      const auto len = static_cast<Eigen::Index>(n - lo + 1);
      auto k = k_.col(idx(n)).segment(idx(lo), len);
      acc_.col(idx(n)).segment(idx(lo), len) += wa * k;
      tmp_.col(idx(n)).segment(idx(lo), len) = y_.col(idx(n)).segment(idx(lo), len) + wt * k;
    }
  }

  void finish(double wa, std::size_t lo, std::size_t hi) {
    for (std::size_t n = lo; n <= hi; ++n) {
      const auto len = static_cast<Eigen::Index>(n - lo + 1);
      acc_.col(idx(n)).segment(idx(lo), len) += wa * k_.col(idx(n)).segment(idx(lo), len);
    }
  }

  detail::DephasingKernel kernel_;
  double dt_;
  EvolveOptions options_;
  std::size_t sites_ = 0;
  std::size_t lo_ = 0, hi_ = 0;
  std::uint64_t steps_ = 0;
  ComplexMatrix y_, acc_, tmp_, k_;
};

/// Master-equation run from |initial_site><initial_site|, sampled on `grid`.
/// Throws NumericError when the trace defect passes options.trace_abort.
inline Trajectory evolve(const Hamiltonian& h, NoiseSpec noise, std::size_t initial_site,
                         const TimeGrid& grid, const ObserverSet& observers,
                         EvolveOptions options = {}) {
  noise.validate();
  if (observers.lattice.sites() != h.size()) {
    throw ConfigError("observer lattice does not match the Hamiltonian size");
  }
  DephasingPropagator prop(h, noise, DensityMatrix::point_mass(h.size(), initial_site),
                           grid.dt(), options);
  Trajectory traj;
  traj.samples.reserve(grid.size());
  const std::size_t stride = std::max<std::size_t>(1, observers.profile_stride);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    prop.advance(grid.steps()[i] - prop.steps_taken());
    const double t = grid.time(i);
    const auto rho = prop.state();
    const auto sample = observe(t, rho, observers.lattice, initial_site);
    if (!(sample.trace_defect <= options.trace_abort)) {
      throw NumericError("trace defect " + std::to_string(sample.trace_defect) +
                             " exceeds the hard limit at t = " + std::to_string(t),
                         t);
    }
    traj.samples.push_back(sample);
    if (observers.record_profiles && i % stride == 0) {
      traj.profiles.push_back({t, populations(rho)});
    }
  }
  return traj;
}

/// Noiseless evolution of |initial_site> by spectral decomposition of the
/// tridiagonal Hamiltonian: psi(t) = sum_k exp(-i E_k t) <k|c> |k>.
inline Trajectory schrodinger_evolve(const Hamiltonian& h, std::size_t initial_site,
                                     const TimeGrid& grid, const ObserverSet& observers) {
  if (initial_site >= h.size()) throw ConfigError("initial site outside the lattice");
  if (observers.lattice.sites() != h.size()) {
    throw ConfigError("observer lattice does not match the Hamiltonian size");
  }
  const auto n = static_cast<Eigen::Index>(h.size());
  Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(h.diagonal.data(), n);
  Eigen::VectorXd sub = n > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(h.bonds.data(), n - 1))
                              : Eigen::VectorXd(0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericError("tridiagonal eigensolver did not converge");
  }
  const Eigen::VectorXd& energies = solver.eigenvalues();
  const Eigen::MatrixXd& modes = solver.eigenvectors();
  const Eigen::VectorXd overlap = modes.row(static_cast<Eigen::Index>(initial_site)).transpose();
  const ComplexMatrix cmodes = modes.cast<Complex>();

  Trajectory traj;
  traj.samples.reserve(grid.size());
  const std::size_t stride = std::max<std::size_t>(1, observers.profile_stride);
  Eigen::VectorXcd coeff(n), psi(n);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid.time(i);
    for (Eigen::Index k = 0; k < n; ++k) {
      coeff(k) = overlap(k) * std::polar(1.0, -energies(k) * t);
    }
    psi.noalias() = cmodes * coeff;
    const std::span<const Complex> view(psi.data(), static_cast<std::size_t>(n));
    traj.samples.push_back(observe(t, view, observers.lattice, initial_site));
    if (observers.record_profiles && i % stride == 0) {
      traj.profiles.push_back({t, populations(view)});
    }
  }
  return traj;
}

}  // namespace qdiff
