#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <cstddef>

#include "qdiff/error.hpp"

namespace qdiff {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Dense N x N site-basis density matrix.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw ConfigError("density matrix must be square");
  }

  // |site><site|
  static DensityMatrix point_mass(std::size_t sites, std::size_t site) {
    if (site >= sites) throw ConfigError("initial site outside the lattice");
    ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(sites),
                                          static_cast<Eigen::Index>(sites));
    m(static_cast<Eigen::Index>(site), static_cast<Eigen::Index>(site)) = 1.0;
    return DensityMatrix(std::move(m));
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(m_.rows()); }

  Complex operator()(std::size_t row, std::size_t col) const {
    return m_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }
  double population(std::size_t site) const { return (*this)(site, site).real(); }

  const ComplexMatrix& matrix() const noexcept { return m_; }
  ComplexMatrix& matrix() noexcept { return m_; }

  double trace() const { return m_.diagonal().real().sum(); }

  // Tr(rho^2) = sum |rho_mn|^2 for Hermitian rho.
  double purity() const { return m_.squaredNorm(); }

  double hermiticity_defect() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }

  double min_population() const { return m_.diagonal().real().minCoeff(); }

 private:
  ComplexMatrix m_;
};

}  // namespace qdiff
