#pragma once

// Dense complex linear algebra used by every other module: a small row-major
// matrix type, a deterministic cyclic Jacobi eigensolver for Hermitian
// matrices, spectral matrix functions, the Moore-Penrose pseudoinverse and
// the rank / definiteness / spectral-gap queries. One eigenvalue cutoff
// (rank_rel * max|lambda|) is shared by all classification routines so that
// kernels and ranges agree across modules.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kgl/error.hpp"

namespace kgl {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
      throw Error(ErrorCode::ShapeMismatch, "entry count " + std::to_string(data_.size()) +
                                                " does not match " + std::to_string(rows_) + "x" +
                                                std::to_string(cols_));
    }
  }
  CMatrix(std::initializer_list<std::initializer_list<cplx>> init) {
    rows_ = init.size();
    cols_ = rows_ == 0 ? 0 : init.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) throw Error(ErrorCode::ShapeMismatch, "ragged initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static CMatrix zeros(std::size_t rows, std::size_t cols) { return CMatrix(rows, cols); }

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static CMatrix diagonal(std::span<const double> d) {
    CMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  static CMatrix column(std::span<const cplx> v) {
    return CMatrix(v.size(), 1, std::vector<cplx>(v.begin(), v.end()));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const cplx> entries() const noexcept { return data_; }
  std::span<cplx> entries() noexcept { return data_; }

  CMatrix adjoint() const {
    CMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
  }

  CMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) throw Error(ErrorCode::ShapeMismatch, "block out of range");
    CMatrix out(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) out(i, j) = (*this)(r0 + i, c0 + j);
    return out;
  }

  void set_block(std::size_t r0, std::size_t c0, const CMatrix& b) {
    if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_)
      throw Error(ErrorCode::ShapeMismatch, "set_block out of range");
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
  }

  CMatrix col(std::size_t j) const { return block(0, j, rows_, 1); }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z));
    return m;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
  }

  CMatrix& operator+=(const CMatrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  CMatrix& operator-=(const CMatrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  CMatrix& operator*=(cplx s) {
    for (auto& z : data_) z *= s;
    return *this;
  }

  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
  friend CMatrix operator*(CMatrix a, cplx s) { return a *= s; }
  friend CMatrix operator*(cplx s, CMatrix a) { return a *= s; }
  friend CMatrix operator-(CMatrix a) { return a *= -1.0; }

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols_ != b.rows_) {
      throw Error(ErrorCode::ShapeMismatch, "product of " + a.shape_string() + " and " + b.shape_string());
    }
    CMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      cplx* orow = &out.data_[i * out.cols_];
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const cplx aik = a.data_[i * a.cols_ + k];
        if (aik == cplx{}) continue;
        const cplx* brow = &b.data_[k * b.cols_];
        for (std::size_t j = 0; j < b.cols_; ++j) orow[j] += aik * brow[j];
      }
    }
    return out;
  }

  friend bool operator==(const CMatrix&, const CMatrix&) = default;

  std::string shape_string() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

 private:
  void require_same_shape(const CMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw Error(ErrorCode::ShapeMismatch, shape_string() + " vs " + o.shape_string());
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

/// Horizontal concatenation; all pieces must share the row count (`rows` is
/// used when `pieces` is empty).
inline CMatrix hstack(std::span<const CMatrix> pieces, std::size_t rows) {
  std::size_t cols = 0;
  for (const auto& p : pieces) {
    if (p.rows() != rows) throw Error(ErrorCode::ShapeMismatch, "hstack row mismatch");
    cols += p.cols();
  }
  CMatrix out(rows, cols);
  std::size_t c0 = 0;
  for (const auto& p : pieces) {
    out.set_block(0, c0, p);
    c0 += p.cols();
  }
  return out;
}

struct Tolerances {
  double atol = 1e-9;
  double rank_rel = 1e-10;

  void validate() const {
    if (!(atol > 0.0 && atol < 1.0 && rank_rel > 0.0))
      throw Error(ErrorCode::BadFamilyParams, "tolerances must satisfy 0 < atol < 1 and rank_rel > 0");
  }

  /// atol * max(1, scale): the residual acceptance bound used throughout.
  double bound(double scale) const { return atol * std::max(1.0, scale); }
};

struct HermEig {
  std::vector<double> eigenvalues;  // ascending
  CMatrix basis;                    // unitary, columns are eigenvectors

  double max_abs_eigenvalue() const {
    double m = 0.0;
    for (double l : eigenvalues) m = std::max(m, std::abs(l));
    return m;
  }
};

inline void require_finite(const CMatrix& a, const char* what) {
  if (!a.all_finite()) throw Error(ErrorCode::NonFinite, std::string(what) + " has non-finite entries");
}

inline double hermitian_residual(const CMatrix& a) { return (a - a.adjoint()).frobenius_norm(); }

inline bool is_hermitian(const CMatrix& a, const Tolerances& tol) {
  return a.is_square() && hermitian_residual(a) <= tol.bound(a.frobenius_norm());
}

inline void require_hermitian(const CMatrix& a, const Tolerances& tol, const char* what = "matrix") {
  require_finite(a, what);
  if (!a.is_square()) throw Error(ErrorCode::NotHermitian, std::string(what) + " is not square");
  const double r = hermitian_residual(a);
  if (r > tol.bound(a.frobenius_norm()))
    throw Error(ErrorCode::NotHermitian, std::string(what) + " ||A - A*||_F = " + std::to_string(r));
}

namespace detail {

// Cyclic Jacobi on a Hermitian matrix, fixed (p, q) sweep order. Each
// rotation R = D P D* uses the phase D that makes a_pq real, so the
// real-symmetric rotation P annihilates it.
inline void jacobi_sweeps(CMatrix& a, CMatrix& v) {
  const std::size_t n = a.rows();
  const double norm = a.frobenius_norm();
  if (n < 2 || norm == 0.0) return;
  constexpr int kMaxSweeps = 100;
  constexpr double kRelTol = 1e-13;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q)
        if (p != q) off += std::norm(a(p, q));
    if (std::sqrt(off) <= kRelTol * norm) return;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag < 1e-300) continue;
        const cplx phase = apq / mag;  // e^{i phi}
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * mag);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cplx rpq = s * phase;              // R(p,q)
        const cplx rqp = -s * std::conj(phase);  // R(q,p)
        // A <- A R (columns p, q)
        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = a(k, p);
          const cplx akq = a(k, q);
          a(k, p) = akp * c + akq * rqp;
          a(k, q) = akp * rpq + akq * c;
        }
        // A <- R* A (rows p, q)
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = a(p, k);
          const cplx aqk = a(q, k);
          a(p, k) = c * apk + std::conj(rqp) * aqk;
          a(q, k) = std::conj(rpq) * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        // V <- V R
        for (std::size_t k = 0; k < n; ++k) {
          const cplx vkp = v(k, p);
          const cplx vkq = v(k, q);
          v(k, p) = vkp * c + vkq * rqp;
          v(k, q) = vkp * rpq + vkq * c;
        }
      }
    }
  }
}

inline bool lex_less_column(const CMatrix& m, std::size_t a, std::size_t b) {
  for (std::size_t k = 0; k < m.rows(); ++k) {
    const cplx x = m(k, a);
    const cplx y = m(k, b);
    if (x.real() != y.real()) return x.real() < y.real();
    if (x.imag() != y.imag()) return x.imag() < y.imag();
  }
  return false;
}

}  // namespace detail

/// Eigendecomposition A = U diag(lambda) U* of a Hermitian matrix.
/// Eigenvalues ascend; each eigenvector is phase-normalised so its first
/// coordinate of modulus > 1e-8 is real positive; exact eigenvalue ties are
/// ordered lexicographically by the normalised eigenvector.
inline HermEig herm_eig(const CMatrix& a, const Tolerances& tol = {}) {
  require_hermitian(a, tol, "herm_eig input");
  const std::size_t n = a.rows();
  // Work on the exactly Hermitian part so tiny asymmetries cannot bias the sweep.
  CMatrix work = (a + a.adjoint()) * cplx{0.5};
  CMatrix v = CMatrix::identity(n);
  detail::jacobi_sweeps(work, v);

  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      const double mag = std::abs(v(k, j));
      if (mag > 1e-8) {
        const cplx fix = std::conj(v(k, j)) / mag;
        for (std::size_t i = 0; i < n; ++i) v(i, j) *= fix;
        v(k, j) = cplx{v(k, j).real(), 0.0};
        break;
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const double li = work(i, i).real();
    const double lj = work(j, j).real();
    if (li != lj) return li < lj;
    return detail::lex_less_column(v, i, j);
  });

  HermEig out;
  out.eigenvalues.resize(n);
  out.basis = CMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = work(order[j], order[j]).real();
    for (std::size_t i = 0; i < n; ++i) out.basis(i, j) = v(i, order[j]);
  }
  return out;
}

/// The single classification threshold: eigenvalues with |lambda| at or
/// below it are treated as zero everywhere.
inline double eigen_cutoff(const HermEig& eig, const Tolerances& tol) {
  return tol.rank_rel * eig.max_abs_eigenvalue();
}

/// U f(Lambda) U*, summing only over eigenpairs where f is nonzero.
template <class F>
CMatrix apply_spectral(const HermEig& eig, F&& f) {
  const std::size_t n = eig.eigenvalues.size();
  CMatrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = f(eig.eigenvalues[k]);
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx ui = eig.basis(i, k) * w;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += ui * std::conj(eig.basis(j, k));
    }
  }
  return out;
}

enum class HermFn { abs, sqrt_psd, sign };

inline CMatrix herm_fn(const HermEig& eig, HermFn f, const Tolerances& tol) {
  const double cut = eigen_cutoff(eig, tol);
  switch (f) {
    case HermFn::abs:
      return apply_spectral(eig, [&](double l) { return std::abs(l) > cut ? std::abs(l) : 0.0; });
    case HermFn::sign:
      return apply_spectral(eig, [&](double l) { return l > cut ? 1.0 : (l < -cut ? -1.0 : 0.0); });
    case HermFn::sqrt_psd: {
      const double floor = -tol.bound(eig.max_abs_eigenvalue());
      for (double l : eig.eigenvalues) {
        if (l < floor)
          throw Error(ErrorCode::NegativeForSqrt, "eigenvalue " + std::to_string(l) + " below -tolerance");
      }
      return apply_spectral(eig, [](double l) { return l > 0.0 ? std::sqrt(l) : 0.0; });
    }
  }
  return {};
}

inline CMatrix herm_fn(const CMatrix& a, HermFn f, const Tolerances& tol = {}) {
  return herm_fn(herm_eig(a, tol), f, tol);
}

struct SpectralProjections {
  CMatrix e_minus;
  CMatrix e_zero;
  CMatrix e_plus;
};

inline SpectralProjections spectral_projections(const HermEig& eig, const Tolerances& tol) {
  const double cut = eigen_cutoff(eig, tol);
  const std::size_t n = eig.eigenvalues.size();
  SpectralProjections p;
  p.e_plus = apply_spectral(eig, [&](double l) { return l > cut ? 1.0 : 0.0; });
  p.e_minus = apply_spectral(eig, [&](double l) { return l < -cut ? 1.0 : 0.0; });
  p.e_zero = CMatrix::identity(n) - p.e_plus - p.e_minus;
  return p;
}

inline SpectralProjections spectral_projections(const CMatrix& a, const Tolerances& tol = {}) {
  return spectral_projections(herm_eig(a, tol), tol);
}

/// Moore-Penrose pseudoinverse from the Hermitian dilation [[0, A], [A*, 0]]:
/// its eigenpairs (+sigma, (u; v)/sqrt 2) give A+ = sum 2 v u* / sigma over
/// sigma above the shared cutoff.
inline CMatrix pinv(const CMatrix& a, const Tolerances& tol = {}) {
  require_finite(a, "pinv input");
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  CMatrix out(n, m);
  if (m == 0 || n == 0) return out;
  CMatrix dil(m + n, m + n);
  dil.set_block(0, m, a);
  dil.set_block(m, 0, a.adjoint());
  const HermEig eig = herm_eig(dil, tol);
  const double cut = eigen_cutoff(eig, tol);
  for (std::size_t k = 0; k < m + n; ++k) {
    const double s = eig.eigenvalues[k];
    if (s <= cut) continue;
    const double w = 2.0 / s;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx vi = eig.basis(m + i, k) * w;
      for (std::size_t j = 0; j < m; ++j) out(i, j) += vi * std::conj(eig.basis(j, k));
    }
  }
  return out;
}

inline std::size_t rank_tol(const HermEig& eig, const Tolerances& tol) {
  const double cut = eigen_cutoff(eig, tol);
  return static_cast<std::size_t>(
      std::count_if(eig.eigenvalues.begin(), eig.eigenvalues.end(), [&](double l) { return std::abs(l) > cut; }));
}

inline std::size_t rank_tol(const CMatrix& a, const Tolerances& tol = {}) { return rank_tol(herm_eig(a, tol), tol); }

inline bool psd_check(const HermEig& eig, const Tolerances& tol) {
  if (eig.eigenvalues.empty()) return true;
  return eig.eigenvalues.front() >= -tol.bound(eig.max_abs_eigenvalue());
}

inline bool psd_check(const CMatrix& a, const Tolerances& tol = {}) { return psd_check(herm_eig(a, tol), tol); }

/// Distances from 0 to the nearest negative / positive eigenvalue outside
/// the cutoff; an absent side has no such eigenvalue.
struct ZeroGaps {
  std::optional<double> gap_neg;
  std::optional<double> gap_pos;
};

inline ZeroGaps gap_at_zero(const HermEig& eig, const Tolerances& tol) {
  const double cut = eigen_cutoff(eig, tol);
  ZeroGaps g;
  for (double l : eig.eigenvalues) {
    if (l > cut) g.gap_pos = g.gap_pos ? std::min(*g.gap_pos, l) : l;
    if (l < -cut) g.gap_neg = g.gap_neg ? std::min(*g.gap_neg, -l) : -l;
  }
  return g;
}

inline ZeroGaps gap_at_zero(const CMatrix& a, const Tolerances& tol = {}) { return gap_at_zero(herm_eig(a, tol), tol); }

/// Spectral norm, sqrt of the top eigenvalue of the smaller Gram product.
inline double op_norm(const CMatrix& a) {
  if (a.empty()) return 0.0;
  const CMatrix gram = a.rows() <= a.cols() ? a * a.adjoint() : a.adjoint() * a;
  const HermEig eig = herm_eig(gram, Tolerances{});
  return std::sqrt(std::max(0.0, eig.eigenvalues.back()));
}

/// Rank of an arbitrary (rectangular) matrix via its Gram product.
inline std::size_t matrix_rank(const CMatrix& a, const Tolerances& tol = {}) {
  if (a.empty()) return 0;
  const CMatrix gram = a.rows() <= a.cols() ? a * a.adjoint() : a.adjoint() * a;
  return rank_tol(gram, tol);
}

}  // namespace kgl
