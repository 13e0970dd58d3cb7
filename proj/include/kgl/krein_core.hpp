#pragma once

// Finite-dimensional Krein spaces with diagonal fundamental symmetries, the
// Krein space induced by a Hermitian matrix, Krein adjoints, lifting of
// operator pairs to induced spaces, and the zero-gap uniqueness test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kgl/error.hpp"
#include "kgl/numlin.hpp"

namespace kgl {

/// C^{p+q} with [u, v] = <J u, v> and J = diag(+1 x p, -1 x q).
struct KreinSpace {
  CMatrix j;
  std::size_t p = 0;
  std::size_t q = 0;

  std::size_t dim() const noexcept { return p + q; }

  static KreinSpace with_signature(std::size_t p, std::size_t q) {
    KreinSpace k;
    k.p = p;
    k.q = q;
    k.j = CMatrix(p + q, p + q);
    for (std::size_t i = 0; i < p + q; ++i) k.j(i, i) = i < p ? 1.0 : -1.0;
    return k;
  }

  /// [u, v] for coordinate vectors of length dim().
  cplx pairing(const CVector& u, const CVector& v) const {
    cplx s{};
    for (std::size_t i = 0; i < dim(); ++i) s += j(i, i) * u[i] * std::conj(v[i]);
    return s;
  }

  /// max of ||J - J*||_F and ||J^2 - I||_F.
  double symmetry_residual() const {
    return std::max((j - j.adjoint()).frobenius_norm(), (j * j - CMatrix::identity(dim())).frobenius_norm());
  }
};

/// Krein space induced by a Hermitian A on C^n: Pi* J Pi = A with Pi onto.
struct InducedKrein {
  std::size_t source_dim = 0;
  KreinSpace space;
  CMatrix pi;            // dim x n
  CMatrix pi_right_inv;  // n x dim, Pi Pi+ = I
};

/// T^# = J_dom T* J_cod for T : dom -> cod.
inline CMatrix krein_adjoint(const CMatrix& t, const KreinSpace& dom, const KreinSpace& cod) {
  if (t.rows() != cod.dim() || t.cols() != dom.dim())
    throw Error(ErrorCode::ShapeMismatch, "operator " + t.shape_string() + " between Krein spaces of dimension " +
                                              std::to_string(dom.dim()) + " and " + std::to_string(cod.dim()));
  return dom.j * t.adjoint() * cod.j;
}

struct InducedOptions {
  // Eigendecompose in reversed coordinates and order each sign block by
  // decreasing |lambda|: a second, independent basis choice.
  bool reversed = false;
};

inline InducedKrein induced_krein(const CMatrix& a, const Tolerances& tol = {}, InducedOptions opts = {}) {
  require_hermitian(a, tol, "induced Krein space input");
  const std::size_t n = a.rows();
  HermEig eig;
  CMatrix rev(n, n);
  for (std::size_t i = 0; i < n; ++i) rev(i, n - 1 - i) = 1.0;
  if (opts.reversed) {
    eig = herm_eig(rev * a * rev, tol);
    eig.basis = rev * eig.basis;
  } else {
    eig = herm_eig(a, tol);
  }
  const double cut = eigen_cutoff(eig, tol);
  std::vector<std::size_t> pos, neg;
  for (std::size_t k = 0; k < n; ++k) {
    if (eig.eigenvalues[k] > cut) pos.push_back(k);
    if (eig.eigenvalues[k] < -cut) neg.push_back(k);
  }
  // Ascending order puts the largest |lambda| of the negative block first.
  if (opts.reversed) std::reverse(pos.begin(), pos.end());
  else std::reverse(neg.begin(), neg.end());
  std::vector<std::size_t> keep = pos;
  keep.insert(keep.end(), neg.begin(), neg.end());

  InducedKrein out;
  out.source_dim = n;
  out.space = KreinSpace::with_signature(pos.size(), neg.size());
  out.pi = CMatrix(keep.size(), n);
  out.pi_right_inv = CMatrix(n, keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const double s = std::sqrt(std::abs(eig.eigenvalues[keep[r]]));
    for (std::size_t i = 0; i < n; ++i) {
      out.pi(r, i) = std::conj(eig.basis(i, keep[r])) * s;
      out.pi_right_inv(i, r) = eig.basis(i, keep[r]) / s;
    }
  }
  return out;
}

/// ||Pi* J Pi - A||_F.
inline double induced_residual(const InducedKrein& k, const CMatrix& a) {
  return (k.pi.adjoint() * k.space.j * k.pi - a).frobenius_norm();
}

struct LiftResult {
  InducedKrein a;
  InducedKrein b;
  CMatrix t_lift;          // K_A -> K_B
  CMatrix s_lift;          // K_B -> K_A
  double precondition = 0.0;  // ||B T - S* A||_F
  double well_defined = 0.0;  // max of ||Pi_B T P_ker A||_F, ||Pi_A S P_ker B||_F
  double factor_t = 0.0;      // ||T_lift Pi_A - Pi_B T||_F
  double factor_s = 0.0;      // ||S_lift Pi_B - Pi_A S||_F
  double pairing = 0.0;       // ||T_lift^# - S_lift||_F
};

/// Lifts T : H -> G and S : G -> H with B T = S* A to the induced Krein
/// spaces, T_lift = Pi_B T Pi_A+ and S_lift = Pi_A S Pi_B+.
inline LiftResult lift_operator(const CMatrix& a, const CMatrix& b, const CMatrix& t, const CMatrix& s,
                                const Tolerances& tol = {}) {
  require_hermitian(a, tol, "A");
  require_hermitian(b, tol, "B");
  if (t.rows() != b.rows() || t.cols() != a.rows() || s.rows() != a.rows() || s.cols() != b.rows())
    throw Error(ErrorCode::ShapeMismatch, "T " + t.shape_string() + ", S " + s.shape_string() + " for A " +
                                              a.shape_string() + ", B " + b.shape_string());
  LiftResult r;
  r.precondition = (b * t - s.adjoint() * a).frobenius_norm();
  const double scale = std::max(b.frobenius_norm() * t.frobenius_norm(), s.frobenius_norm() * a.frobenius_norm());
  if (r.precondition > tol.bound(scale))
    throw Error(ErrorCode::PairingViolated, "||BT - S*A||_F = " + std::to_string(r.precondition));
  r.a = induced_krein(a, tol);
  r.b = induced_krein(b, tol);
  r.t_lift = r.b.pi * t * r.a.pi_right_inv;
  r.s_lift = r.a.pi * s * r.b.pi_right_inv;
  const CMatrix ker_a = CMatrix::identity(a.rows()) - r.a.pi_right_inv * r.a.pi;
  const CMatrix ker_b = CMatrix::identity(b.rows()) - r.b.pi_right_inv * r.b.pi;
  r.well_defined = std::max((r.b.pi * t * ker_a).frobenius_norm(), (r.a.pi * s * ker_b).frobenius_norm());
  r.factor_t = (r.t_lift * r.a.pi - r.b.pi * t).frobenius_norm();
  r.factor_s = (r.s_lift * r.b.pi - r.a.pi * s).frobenius_norm();
  r.pairing = (krein_adjoint(r.t_lift, r.a.space, r.b.space) - r.s_lift).frobenius_norm();
  return r;
}

struct GapUniqueness {
  bool unique = true;
  std::optional<double> gap_neg;
  std::optional<double> gap_pos;
  double epsilon = 1.0;  // witnessing gap
};

/// In finite dimensions 0 is never an accumulation point of the spectrum,
/// so one side always has a gap and `unique` is always true.
inline GapUniqueness gap_uniqueness(const CMatrix& a, const Tolerances& tol = {}) {
  require_hermitian(a, tol, "gap test input");
  const ZeroGaps g = gap_at_zero(a, tol);
  GapUniqueness u;
  u.gap_neg = g.gap_neg;
  u.gap_pos = g.gap_pos;
  if (g.gap_neg || g.gap_pos) u.epsilon = std::max(g.gap_neg.value_or(0.0), g.gap_pos.value_or(0.0));
  u.unique = u.epsilon > 0.0;
  return u;
}

}  // namespace kgl
