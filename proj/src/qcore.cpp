#include "pathtomo/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace pathtomo {

namespace {

void require_finite(std::span<const cplx> entries) {
  for (const auto& z : entries) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw ValidationError("matrix entry is not finite");
    }
  }
}

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << what << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
       << b.cols();
    throw DimensionError(os.str());
  }
}

std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return labels;
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, cplx{0.0, 0.0}) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("entries length does not equal rows*cols");
  }
  require_finite(data_);
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_);
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const cplx> diag) {
  ComplexMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

ComplexMatrix ComplexMatrix::outer(std::span<const cplx> v, std::span<const cplx> w) {
  ComplexMatrix m(v.size(), w.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < w.size(); ++j) m(i, j) = v[i] * std::conj(w[j]);
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
  return out;
}

cplx ComplexMatrix::trace() const {
  if (!is_square()) throw DimensionError("trace of a non-square matrix");
  cplx t{0.0, 0.0};
  for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::hermiticity_error() const {
  if (!is_square()) return INFINITY;
  double err = 0.0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i; j < cols_; ++j)
      err = std::max(err, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
  return err;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
  require_same_shape(*this, o, "operator+");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
  require_same_shape(*this, o, "operator-");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
  for (auto& z : data_) z *= s;
  return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols_ != b.rows_) throw DimensionError("matrix product: inner dimensions differ");
  ComplexMatrix out(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i) {
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx{}) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

StateVector operator*(const ComplexMatrix& a, std::span<const cplx> v) {
  if (a.cols_ != v.size()) throw DimensionError("matrix-vector product: dimension mismatch");
  StateVector out(a.rows_, cplx{});
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t k = 0; k < a.cols_; ++k) out[i] += a(i, k) * v[k];
  return out;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double err = 0.0;
  for (std::size_t i = 0; i < a.data_.size(); ++i) err = std::max(err, std::abs(a.data_[i] - b.data_[i]));
  return err;
}

double ComplexMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

ComplexMatrix conjugate_by(const ComplexMatrix& u, const ComplexMatrix& m) {
  return u * m * u.adjoint();
}

DensityMatrix::DensityMatrix(ComplexMatrix m, std::vector<std::string> basis_labels)
    : matrix_(std::move(m)), labels_(std::move(basis_labels)) {
  if (!matrix_.is_square() || matrix_.rows() == 0) {
    throw DimensionError("density matrix must be square and non-empty");
  }
  if (labels_.empty()) labels_ = default_labels(matrix_.rows());
  if (labels_.size() != matrix_.rows()) {
    throw DimensionError("basis label count does not match dimension");
  }
  if (const double h = matrix_.hermiticity_error(); h > kHermitianTol) {
    std::ostringstream os;
    os << "density matrix is not Hermitian (max |M - M^dagger| = " << h << ")";
    throw ValidationError(os.str());
  }
  const cplx tr = matrix_.trace();
  if (std::abs(tr.real() - 1.0) > kTraceTol || std::abs(tr.imag()) > kTraceTol) {
    std::ostringstream os;
    os << "density matrix trace is " << tr.real() << (tr.imag() < 0 ? "" : "+") << tr.imag()
       << "i, expected 1";
    throw ValidationError(os.str());
  }
  const auto ev = eigenvalues_hermitian(matrix_);
  if (ev.front() < -kPsdTol) {
    std::ostringstream os;
    os << "density matrix is not positive semidefinite (min eigenvalue " << ev.front() << ")";
    throw ValidationError(os.str());
  }
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const std::size_t> subsystem_dims,
                            std::span<const std::size_t> keep) {
  if (!m.is_square()) throw DimensionError("partial_trace: matrix must be square");
  const std::size_t nsub = subsystem_dims.size();
  std::size_t total = 1;
  for (auto d : subsystem_dims) {
    if (d == 0) throw DimensionError("partial_trace: zero subsystem dimension");
    total *= d;
  }
  if (total != m.rows()) {
    std::ostringstream os;
    os << "partial_trace: subsystem dimensions multiply to " << total << " but matrix is "
       << m.rows() << "x" << m.rows();
    throw DimensionError(os.str());
  }
  std::vector<bool> kept(nsub, false);
  for (auto k : keep) {
    if (k >= nsub || kept[k]) throw DimensionError("partial_trace: invalid keep index");
    kept[k] = true;
  }

  // Strides for the flat index, first subsystem most significant.
  std::vector<std::size_t> stride(nsub, 1);
  for (std::size_t s = nsub; s-- > 1;) stride[s - 1] = stride[s] * subsystem_dims[s];

  std::size_t kept_dim = 1;
  for (std::size_t s = 0; s < nsub; ++s)
    if (kept[s]) kept_dim *= subsystem_dims[s];

  auto split = [&](std::size_t flat, std::size_t& kept_idx, std::size_t& traced_idx) {
    kept_idx = 0;
    traced_idx = 0;
    for (std::size_t s = 0; s < nsub; ++s) {
      const std::size_t digit = (flat / stride[s]) % subsystem_dims[s];
      if (kept[s])
        kept_idx = kept_idx * subsystem_dims[s] + digit;
      else
        traced_idx = traced_idx * subsystem_dims[s] + digit;
    }
  };

  std::vector<std::size_t> kidx(total), tidx(total);
  for (std::size_t f = 0; f < total; ++f) split(f, kidx[f], tidx[f]);

  ComplexMatrix out(kept_dim, kept_dim);
  for (std::size_t r = 0; r < total; ++r)
    for (std::size_t c = 0; c < total; ++c)
      if (tidx[r] == tidx[c]) out(kidx[r], kidx[c]) += m(r, c);
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> subsystem_dims,
                            std::span<const std::size_t> keep) {
  return DensityMatrix(partial_trace(rho.matrix(), subsystem_dims, keep));
}

EigenDecomposition eigen_hermitian(const ComplexMatrix& m) {
  if (!m.is_square()) throw DimensionError("eigen_hermitian: matrix must be square");
  if (const double h = m.hermiticity_error(); h > kHermitianTol) {
    std::ostringstream os;
    os << "eigen_hermitian: input is not Hermitian (max |M - M^dagger| = " << h << ")";
    throw ValidationError(os.str());
  }
  const std::size_t n = m.rows();
  ComplexMatrix a = m;
  ComplexMatrix v = ComplexMatrix::identity(n);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };
  const double threshold = 1e-13 * std::max(1.0, m.frobenius_norm());

  for (int sweep = 0; sweep < 100 && off_norm() >= threshold; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double g = std::abs(apq);
        if (g == 0.0) continue;
        // Phase w makes the (p,q) element real, then a real rotation zeroes it.
        const cplx w = std::conj(apq) / g;
        const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * g);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // J: J_pp = c, J_pq = s, J_qp = -s w, J_qq = c w. Apply A <- J^dagger A J, V <- V J.
        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * w * akq;
          a(k, q) = s * akp + c * w * akq;
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * w * vkq;
          v(k, q) = s * vkp + c * w * vkq;
        }
        const cplx wc = std::conj(w);
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * wc * aqk;
          a(q, k) = s * apk + c * wc * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

  EigenDecomposition out{std::vector<double>(n), ComplexMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

std::vector<double> eigenvalues_hermitian(const ComplexMatrix& m) {
  return eigen_hermitian(m).values;
}

bool is_positive_semidefinite(const ComplexMatrix& m, double tol) {
  return eigenvalues_hermitian(m).front() >= -tol;
}

double norm(std::span<const cplx> v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw DimensionError("inner product: dimension mismatch");
  cplx s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double fidelity_pure(std::span<const cplx> psi_th, std::span<const cplx> psi_ex) {
  if (std::abs(norm(psi_th) - 1.0) > kNormTol || std::abs(norm(psi_ex) - 1.0) > kNormTol) {
    throw ValidationError("fidelity_pure: state vectors must be unit-norm");
  }
  return std::clamp(std::norm(inner(psi_th, psi_ex)), 0.0, 1.0);
}

double fidelity_mixed(const DensityMatrix& rho, std::span<const cplx> psi) {
  if (rho.dim() != psi.size()) throw DimensionError("fidelity_mixed: dimension mismatch");
  if (std::abs(norm(psi) - 1.0) > kNormTol) {
    throw ValidationError("fidelity_mixed: state vector must be unit-norm");
  }
  const StateVector rp = rho.matrix() * psi;
  return std::clamp(inner(psi, rp).real(), 0.0, 1.0);
}

double fidelity_qubit(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != 2 || sigma.dim() != 2) throw DimensionError("fidelity_qubit: 2x2 states only");
  const double overlap = (rho.matrix() * sigma.matrix()).trace().real();
  // Determinants at rounding level belong to pure states.
  auto det = [](const ComplexMatrix& m) {
    const double d = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)).real();
    return d > 1e-14 ? d : 0.0;
  };
  const double dd = det(rho.matrix()) * det(sigma.matrix());
  return std::clamp(overlap + 2.0 * std::sqrt(dd), 0.0, 1.0);
}

}  // namespace pathtomo
