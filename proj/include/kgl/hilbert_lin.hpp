#pragma once

// Minimal Hilbert-space linearisations K(x, y) = V_x* V_y of partially
// positive semidefinite kernels, the reproducing kernel Hilbert space they
// carry, unitary equivalence between two linearisations, and the
// *-representation induced on them by an invariant kernel.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kgl/kernel.hpp"
#include "kgl/numlin.hpp"
#include "kgl/random.hpp"
#include "kgl/sgpd.hpp"

namespace kgl {

/// Factor G_s = B* B of one part with rank r = rows(B), and the right inverse
/// B+ (B B+ = I_r) that the quotient map needs.
struct PartFactor {
  CMatrix factor;         // r x n
  CMatrix right_inverse;  // n x r
  std::vector<double> eigenvalues;

  std::size_t rank() const noexcept { return factor.rows(); }
};

struct HilbertLinearisation {
  Partition partition;
  std::vector<PartFactor> parts;

  std::size_t rank(std::size_t s) const { return parts.at(s).rank(); }

  /// V_x : H_x -> K_{a(x)}, the column slice of the part factor.
  CMatrix feature(PointId x) const {
    const std::size_t s = partition.part_of.at(x);
    const PartIndex& idx = partition.parts[s];
    return parts[s].factor.block(0, idx.offset(x), parts[s].rank(), idx.dim(x));
  }
};

struct LinearisationOptions {
  // Eigendecompose the coordinate-reversed Gram matrix and keep the
  // eigenpairs in descending order: a second, independent tie-breaking.
  bool reversed = false;
};

namespace detail {

inline CMatrix reversal(std::size_t n) {
  CMatrix r(n, n);
  for (std::size_t i = 0; i < n; ++i) r(i, n - 1 - i) = 1.0;
  return r;
}

/// Retained eigenpairs (lambda > cutoff) of a PSD matrix, as B = L^{1/2} U*.
inline PartFactor psd_factor(const CMatrix& g, const Tolerances& tol, bool reversed) {
  const std::size_t n = g.rows();
  HermEig eig;
  if (reversed) {
    const CMatrix r = reversal(n);
    eig = herm_eig(r * g * r, tol);
    eig.basis = r * eig.basis;
  } else {
    eig = herm_eig(g, tol);
  }
  const double cut = eigen_cutoff(eig, tol);
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < n; ++k)
    if (eig.eigenvalues[k] > cut) keep.push_back(k);
  if (reversed) std::reverse(keep.begin(), keep.end());
  PartFactor pf;
  pf.factor = CMatrix(keep.size(), n);
  pf.right_inverse = CMatrix(n, keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const double l = eig.eigenvalues[keep[j]];
    const double sq = std::sqrt(l);
    pf.eigenvalues.push_back(l);
    for (std::size_t i = 0; i < n; ++i) {
      pf.factor(j, i) = std::conj(eig.basis(i, keep[j])) * sq;
      pf.right_inverse(i, j) = eig.basis(i, keep[j]) / sq;
    }
  }
  return pf;
}

}  // namespace detail

inline HilbertLinearisation minimal_linearisation(const OpKernel& k, const Partition& p, const Tolerances& tol = {},
                                                  LinearisationOptions opts = {}) {
  HilbertLinearisation lin;
  lin.partition = p;
  for (std::size_t s = 0; s < p.size(); ++s) {
    const CMatrix g = gram_block(k, p.parts[s]);
    if (!is_hermitian(g, tol) || !psd_check(g, tol))
      throw Error(ErrorCode::NotPartiallyPSD, "Gram block of part '" + p.labels[s] + "' is not PSD");
    lin.parts.push_back(detail::psd_factor(g, tol, opts.reversed));
  }
  return lin;
}

struct LinearisationCheck {
  double reconstruction = 0.0;  // max_s max_{x,y} ||V_x* V_y - K(x,y)||_F / max(1, ||G_s||_F)
  double factor = 0.0;          // max_s ||B* B - G_s||_F / max(1, ||G_s||_F)
  bool minimal = true;          // rank of [V_x]_x equals r_s on every part
  bool rank_matches = true;     // r_s = rank_tol(G_s)
};

inline LinearisationCheck check_linearisation(const HilbertLinearisation& lin, const OpKernel& k,
                                              const Tolerances& tol = {}) {
  LinearisationCheck out;
  const Partition& p = lin.partition;
  for (std::size_t s = 0; s < p.size(); ++s) {
    const CMatrix g = gram_block(k, p.parts[s]);
    const double scale = std::max(1.0, g.frobenius_norm());
    const CMatrix& b = lin.parts[s].factor;
    out.factor = std::max(out.factor, (b.adjoint() * b - g).frobenius_norm() / scale);
    std::vector<CMatrix> feats;
    for (PointId x : p.parts[s].points()) feats.push_back(lin.feature(x));
    for (std::size_t i = 0; i < feats.size(); ++i)
      for (std::size_t j = 0; j < feats.size(); ++j) {
        const PointId x = p.parts[s].points()[i], y = p.parts[s].points()[j];
        out.reconstruction =
            std::max(out.reconstruction, (feats[i].adjoint() * feats[j] - k.block(x, y)).frobenius_norm() / scale);
      }
    const std::size_t r = b.rows();
    out.minimal = out.minimal && matrix_rank(hstack(feats, r), tol) == r;
    out.rank_matches = out.rank_matches && rank_tol(g, tol) == r;
  }
  return out;
}

/// The reproducing kernel Hilbert space of a minimal linearisation: members
/// are the sections y -> V_y* f for f in K_s, with <V* f, V* g> = <f, g>.
class RkhsView {
 public:
  RkhsView(const HilbertLinearisation& lin, const OpKernel& k) : lin_(&lin), k_(&k) {}

  const HilbertLinearisation& linearisation() const noexcept { return *lin_; }

  /// Section y -> V_y* f on part s (zero elsewhere).
  Section member(std::size_t s, const CVector& f) const {
    const CMatrix& b = lin_->parts.at(s).factor;
    if (f.size() != b.rows()) throw Error(ErrorCode::DimMismatch, "coefficient length vs part rank");
    const CMatrix col = b.adjoint() * CMatrix::column(f);
    CVector v(col.entries().begin(), col.entries().end());
    return unstack(v, lin_->partition.parts[s], k_->bundle());
  }

  /// Kernel column K_x h = K(., x) h as a section on the part of x.
  Section kernel_column(PointId x, const CVector& h) const {
    const std::size_t s = lin_->partition.part_of.at(x);
    const PartIndex& idx = lin_->partition.parts[s];
    Section out(k_->bundle());
    for (PointId y : idx.points()) {
      const CMatrix v = k_->block(y, x) * CMatrix::column(h);
      out.set(y, CVector(v.entries().begin(), v.entries().end()));
    }
    return out;
  }

  /// Recovers f from a member section: f = (B+)* stack(phi).
  CVector coefficients(std::size_t s, const Section& phi) const {
    const CMatrix c = lin_->parts.at(s).right_inverse.adjoint() * CMatrix::column(stack(phi, lin_->partition.parts[s]));
    return {c.entries().begin(), c.entries().end()};
  }

  cplx inner(std::size_t s, const Section& phi, const Section& psi) const {
    const CVector f = coefficients(s, phi), g = coefficients(s, psi);
    cplx sum{};
    for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * std::conj(g[i]);
    return sum;
  }

 private:
  const HilbertLinearisation* lin_;
  const OpKernel* k_;
};

inline RkhsView rkhs(const HilbertLinearisation& lin, const OpKernel& k) { return RkhsView(lin, k); }

struct RkhsReport {
  double kernel_columns = 0.0;  // kernel columns are members
  double reproducing = 0.0;     // <phi(x), h> = <phi, K_x h>
  double gram = 0.0;            // <K_y k, K_x h> = <K(x,y) k, h>
  double min_eigenvalue = 0.0;  // reproduced kernel is PSD (>= -tol)
  bool total = true;            // kernel columns span the space
  std::vector<std::string> violations;
};

/// Residuals are relative to max(1, ||G_s||_F).
inline RkhsReport verify_reproducing(const RkhsView& view, const OpKernel& k, const Tolerances& tol = {},
                                     std::uint64_t seed = 0) {
  RkhsReport rep;
  const HilbertLinearisation& lin = view.linearisation();
  const Partition& p = lin.partition;
  const HilbertBundle& bundle = k.bundle();
  CounterRng rng(seed, 0x4B48);
  for (std::size_t s = 0; s < p.size(); ++s) {
    const PartIndex& idx = p.parts[s];
    const std::size_t r = lin.rank(s);
    const CMatrix g = gram_block(k, idx);
    const double scale = std::max(1.0, g.frobenius_norm());
    // Coefficients of every kernel column K_x e_i, as the columns of C.
    CMatrix coeffs(r, idx.total_dim());
    for (PointId x : idx.points()) {
      const CMatrix vx = lin.feature(x);
      for (std::size_t i = 0; i < idx.dim(x); ++i) {
        CVector h(idx.dim(x));
        h[i] = 1.0;
        const Section col = view.kernel_column(x, h);
        const CMatrix vcol = vx.col(i);
        const CVector vh(vcol.entries().begin(), vcol.entries().end());
        const Section as_member = r == 0 ? Section(bundle) : view.member(s, vh);
        CVector diff = stack(col, idx);
        const CVector mem = stack(as_member, idx);
        double d2 = 0.0;
        for (std::size_t t = 0; t < diff.size(); ++t) d2 += std::norm(diff[t] - mem[t]);
        rep.kernel_columns = std::max(rep.kernel_columns, std::sqrt(d2) / scale);
        if (r > 0) {
          const CVector c = view.coefficients(s, col);
          for (std::size_t t = 0; t < r; ++t) coeffs(t, idx.offset(x) + i) = c[t];
        }
      }
    }
    rep.gram = std::max(rep.gram, (coeffs.adjoint() * coeffs - g).frobenius_norm() / scale);
    if (idx.total_dim() > 0) {
      const CMatrix reproduced = coeffs.adjoint() * coeffs;
      const HermEig e = herm_eig((reproduced + reproduced.adjoint()) * cplx{0.5}, tol);
      rep.min_eigenvalue = std::min(rep.min_eigenvalue, e.eigenvalues.front() / scale);
    }
    rep.total = rep.total && matrix_rank(coeffs, tol) == r;
    if (r == 0) continue;

    // Reproducing property on random members.
    for (int trial = 0; trial < 3; ++trial) {
      CVector f(r);
      for (auto& z : f) z = rng.complex_normal();
      const Section phi = view.member(s, f);
      for (PointId x : idx.points()) {
        const CVector value = phi.at(x);
        for (std::size_t i = 0; i < idx.dim(x); ++i) {
          CVector h(idx.dim(x));
          h[i] = 1.0;
          const cplx lhs = value[i];
          const cplx rhs = view.inner(s, phi, view.kernel_column(x, h));
          rep.reproducing = std::max(rep.reproducing, std::abs(lhs - rhs) / scale);
        }
      }
    }
  }
  if (rep.kernel_columns > tol.atol) rep.violations.push_back("kernel columns are not members");
  if (rep.reproducing > tol.atol) rep.violations.push_back("reproducing property");
  if (rep.gram > tol.atol) rep.violations.push_back("K(x,y) = K_x* K_y");
  if (rep.min_eigenvalue < -tol.atol) rep.violations.push_back("reproduced kernel not PSD");
  if (!rep.total) rep.violations.push_back("kernel columns not total");
  return rep;
}

struct UnitaryEquivalence {
  std::vector<CMatrix> unitaries;  // U_s : K_s -> K'_s
  double unitarity = 0.0;          // max ||U*U - I||_F
  double intertwining = 0.0;       // max ||U V_x - V'_x||_F
  bool certified = false;
};

/// U_s = B'_s B_s+; certified when U_s is unitary and carries V_x to V'_x.
inline UnitaryEquivalence unitary_equivalence(const HilbertLinearisation& a, const HilbertLinearisation& b,
                                              const Tolerances& tol = {}) {
  if (a.parts.size() != b.parts.size()) throw Error(ErrorCode::RankMismatch, "different number of parts");
  UnitaryEquivalence out;
  double scale = 1.0;
  for (std::size_t s = 0; s < a.parts.size(); ++s) {
    if (a.rank(s) != b.rank(s))
      throw Error(ErrorCode::RankMismatch, "part '" + a.partition.labels[s] + "' has ranks " +
                                               std::to_string(a.rank(s)) + " and " + std::to_string(b.rank(s)));
    const CMatrix u = b.parts[s].factor * a.parts[s].right_inverse;
    out.unitarity = std::max(out.unitarity, (u.adjoint() * u - CMatrix::identity(u.rows())).frobenius_norm());
    for (PointId x : a.partition.parts[s].points()) {
      const CMatrix vx = a.feature(x);
      scale = std::max(scale, vx.frobenius_norm());
      out.intertwining = std::max(out.intertwining, (u * vx - b.feature(x)).frobenius_norm());
    }
    out.unitaries.push_back(u);
  }
  out.certified = out.unitarity <= tol.atol && out.intertwining <= tol.bound(scale);
  return out;
}

struct HilbertRepresentation {
  std::vector<CMatrix> phi;                          // per element, r_c x r_d
  std::vector<std::optional<double>> shift_constant;  // M_a, nullopt = undefined
};

struct RepresentationLaws {
  double multiplicativity = 0.0;  // max ||Phi(ab) - Phi(a) Phi(b)||_F
  double star = 0.0;              // max ||Phi(a*) - Phi(a)^#||_F
  double intertwining = 0.0;      // max ||Phi(a) V_x - V_{a.x}||_F
};

/// Phi(a) = B_c Psi(a) B_d+, after checking invariance and that Psi(a)
/// maps ker G_d into ker G_c.
inline std::pair<HilbertLinearisation, HilbertRepresentation> invariant_representation(const OpKernel& k,
                                                                                       const ActionFrame& frame,
                                                                                       const Tolerances& tol = {}) {
  const Partition& p = frame.partition();
  if (!is_partially_psd(k, p, tol)) throw Error(ErrorCode::NotPartiallyPSD, "kernel is not partially PSD");
  const InvarianceResult inv = is_invariant(k, frame, tol);
  if (!inv.invariant) {
    const auto& w = *inv.witness;
    throw Error(ErrorCode::NotInvariant, "witness (" + frame.sg().label(w.element) + ", " +
                                             frame.bundle().label(w.x) + ", " + frame.bundle().label(w.y) + ")");
  }
  HilbertLinearisation lin = minimal_linearisation(k, p, tol);
  HilbertRepresentation rep;
  const StarSemigroupoid& sg = frame.sg();
  for (ElemId a = 0; a < sg.size(); ++a) {
    const PartFactor& dom = lin.parts[sg.d(a)];
    const PartFactor& cod = lin.parts[sg.c(a)];
    const CMatrix psi = frame.shift(a);
    const CMatrix bc_psi = cod.factor * psi;
    const std::size_t n = psi.cols();
    const CMatrix ker_proj = CMatrix::identity(n) - dom.right_inverse * dom.factor;
    if ((bc_psi * ker_proj).frobenius_norm() > tol.bound(cod.factor.frobenius_norm()))
      throw Error(ErrorCode::QuotientIncompatible, "shift of '" + sg.label(a) + "' does not preserve the null space");
    rep.phi.push_back(bc_psi * dom.right_inverse);
    rep.shift_constant.push_back(bounded_shift_constant(k, frame, a, tol));
  }
  return {std::move(lin), std::move(rep)};
}

template <class FeatureFn>
RepresentationLaws representation_laws(const std::vector<CMatrix>& phi, const ActionFrame& frame, FeatureFn feature,
                                       const std::vector<CMatrix>& adjoint_of) {
  RepresentationLaws laws;
  const StarSemigroupoid& sg = frame.sg();
  for (ElemId a = 0; a < sg.size(); ++a) {
    for (ElemId b = 0; b < sg.size(); ++b) {
      if (!sg.composable(a, b)) continue;
      laws.multiplicativity =
          std::max(laws.multiplicativity, (phi[sg.compose(a, b)] - phi[a] * phi[b]).frobenius_norm());
    }
    laws.star = std::max(laws.star, (phi[sg.star(a)] - adjoint_of[a]).frobenius_norm());
    for (PointId x : frame.domain_part(a).points())
      laws.intertwining = std::max(
          laws.intertwining, (phi[a] * feature(x) - feature(frame.action().act(a, x))).frobenius_norm());
  }
  return laws;
}

inline RepresentationLaws hilbert_laws(const HilbertRepresentation& rep, const HilbertLinearisation& lin,
                                       const ActionFrame& frame) {
  std::vector<CMatrix> adj;
  for (const auto& m : rep.phi) adj.push_back(m.adjoint());
  return representation_laws(rep.phi, frame, [&](PointId x) { return lin.feature(x); }, adj);
}

/// max_a |M_a - ||Phi(a)||^2| / max(1, M_a); +inf if some M_a is undefined.
inline double shift_constant_consistency(const HilbertRepresentation& rep) {
  double worst = 0.0;
  for (std::size_t a = 0; a < rep.phi.size(); ++a) {
    if (!rep.shift_constant[a]) return std::numeric_limits<double>::infinity();
    const double m = *rep.shift_constant[a];
    const double nrm = op_norm(rep.phi[a]);
    worst = std::max(worst, std::abs(m - nrm * nrm) / std::max(1.0, m));
  }
  return worst;
}

struct PartialIsometryEntry {
  ElemId element = kNone;
  double isometry_residual = 0.0;    // ||Phi Phi* Phi - Phi||_F
  double projection_residual = 0.0;  // ||(Phi* Phi)^2 - Phi* Phi||_F
};

struct PartialIsometryReport {
  std::vector<PartialIsometryEntry> entries;
  bool required = false;  // the semigroupoid is inverse
  bool pass = true;       // every residual within tolerance (only binding when required)
  double worst = 0.0;
};

inline PartialIsometryReport partial_isometry_report(const std::vector<CMatrix>& phi, const Classification& cl,
                                                     const Tolerances& tol = {}) {
  PartialIsometryReport rep;
  rep.required = cl.is_inverse;
  for (ElemId a = 0; a < phi.size(); ++a) {
    const CMatrix& m = phi[a];
    const CMatrix mm = m.adjoint() * m;
    PartialIsometryEntry e{a, (m * mm - m).frobenius_norm(), (mm * mm - mm).frobenius_norm()};
    rep.worst = std::max({rep.worst, e.isometry_residual, e.projection_residual});
    rep.entries.push_back(e);
  }
  rep.pass = rep.worst <= tol.atol;
  return rep;
}

}  // namespace kgl
