#pragma once
// Dense complex linear algebra for the handful of small Hilbert spaces the
// interferometer model needs (dimension 2 to 16).

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "pathtomo/errors.hpp"

namespace pathtomo {

using cplx = std::complex<double>;
using StateVector = std::vector<cplx>;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kNormTol = 1e-10;

/// Row-major dense complex matrix. All entries are finite.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(std::span<const cplx> diag);
  /// |v><w|
  static ComplexMatrix outer(std::span<const cplx> v, std::span<const cplx> w);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const cplx> entries() const noexcept { return data_; }

  ComplexMatrix adjoint() const;
  cplx trace() const;

  /// Largest entrywise |M - M^dagger|.
  double hermiticity_error() const;
  bool is_hermitian(double tol = kHermitianTol) const { return hermiticity_error() <= tol; }

  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(cplx s);

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
  friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
  friend StateVector operator*(const ComplexMatrix& a, std::span<const cplx> v);

  /// Largest entrywise modulus of the difference.
  friend double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
  double frobenius_norm() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

/// U * M * U^dagger
ComplexMatrix conjugate_by(const ComplexMatrix& u, const ComplexMatrix& m);

/// A validated density operator: Hermitian, unit trace, positive semidefinite.
/// Basis labels are carried as metadata only.
class DensityMatrix {
 public:
  /// Throws ValidationError when any invariant fails.
  explicit DensityMatrix(ComplexMatrix m, std::vector<std::string> basis_labels = {});

  std::size_t dim() const noexcept { return matrix_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  const std::vector<std::string>& basis_labels() const noexcept { return labels_; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return matrix_(r, c); }

 private:
  ComplexMatrix matrix_;
  std::vector<std::string> labels_;
};

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Reduced operator over the subsystems listed in `keep` (indices into
/// subsystem_dims, first subsystem most significant in the flat index).
ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const std::size_t> subsystem_dims,
                            std::span<const std::size_t> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> subsystem_dims,
                            std::span<const std::size_t> keep);

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // columns, matching `values`
};

/// Cyclic complex Jacobi. Throws ValidationError on non-Hermitian input.
EigenDecomposition eigen_hermitian(const ComplexMatrix& m);
std::vector<double> eigenvalues_hermitian(const ComplexMatrix& m);

bool is_positive_semidefinite(const ComplexMatrix& m, double tol = kPsdTol);

double norm(std::span<const cplx> v);
cplx inner(std::span<const cplx> a, std::span<const cplx> b);  // <a|b>

/// |<a|b>|^2 for unit vectors.
double fidelity_pure(std::span<const cplx> psi_th, std::span<const cplx> psi_ex);
/// <psi|rho|psi>.
double fidelity_mixed(const DensityMatrix& rho, std::span<const cplx> psi);
/// Uhlmann fidelity of two qubit states, tr(rho sigma) + 2 sqrt(det rho det sigma).
double fidelity_qubit(const DensityMatrix& rho, const DensityMatrix& sigma);

}  // namespace pathtomo
