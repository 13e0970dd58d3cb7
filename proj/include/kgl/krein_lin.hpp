#pragma once

// Partially Hermitian kernels: canonical dominants, Gram operators relative
// to a dominant, Jordan splits, minimal Krein linearisations
// K(x, y) = V_x* J_s V_y, reproducing kernel Krein spaces, invariant Krein
// representations and the fundamental-symmetry commutation test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kgl/hilbert_lin.hpp"
#include "kgl/kernel.hpp"
#include "kgl/krein_core.hpp"
#include "kgl/numlin.hpp"
#include "kgl/random.hpp"

namespace kgl {

inline void require_partially_hermitian(const OpKernel& k, const Partition& p, const Tolerances& tol) {
  for (std::size_t s = 0; s < p.size(); ++s) {
    const CMatrix g = gram_block(k, p.parts[s]);
    if (!is_hermitian(g, tol))
      throw Error(ErrorCode::NotHermitian, "Gram block of part '" + p.labels[s] + "' is not Hermitian");
  }
}

struct CanonicalDominant {
  OpKernel kernel;
  std::optional<InvarianceResult> invariance;  // set when an action was supplied
};

/// L with Gram blocks |G_s|, so -L <= K <= L part by part.
inline CanonicalDominant canonical_dominant(const OpKernel& k, const Partition& p, const Tolerances& tol = {}) {
  require_partially_hermitian(k, p, tol);
  std::vector<CMatrix> blocks;
  for (const auto& part : p.parts) blocks.push_back(herm_fn(gram_block(k, part), HermFn::abs, tol));
  return {kernel_from_blocks(k.bundle(), p, blocks), std::nullopt};
}

inline CanonicalDominant canonical_dominant(const OpKernel& k, const ActionFrame& frame, const Tolerances& tol = {}) {
  CanonicalDominant out = canonical_dominant(k, frame.partition(), tol);
  out.invariance = is_invariant(out.kernel, frame, tol);
  return out;
}

struct GramPart {
  PartFactor l;         // G^L_s = B* B
  CMatrix gram;         // r x r Hermitian contraction
  ZeroGaps gaps;
  double norm = 0.0;        // ||G_hat||
  double identity = 0.0;    // ||B* G_hat B - G^K_s||_F
  double kernel_leak = 0.0; // ||G^K_s P_ker(G^L_s)||_F
};

struct GramData {
  Partition partition;
  std::vector<GramPart> parts;
};

/// G_hat_s = (B+)* G^K_s B+ on the quotient by ker G^L_s.
inline GramData gram_operator(const OpKernel& k, const OpKernel& l, const Partition& p, const Tolerances& tol = {}) {
  require_same_bundle(k, l);
  require_partially_hermitian(k, p, tol);
  GramData out;
  out.partition = p;
  for (std::size_t s = 0; s < p.size(); ++s) {
    const CMatrix gk = gram_block(k, p.parts[s]);
    const CMatrix gl = gram_block(l, p.parts[s]);
    if (!is_hermitian(gl, tol) || !psd_check(gl, tol))
      throw Error(ErrorCode::KernelNotDominated, "dominant is not PSD on part '" + p.labels[s] + "'");
    GramPart gp;
    gp.l = detail::psd_factor(gl, tol, false);
    const std::size_t n = gk.rows();
    const CMatrix ker = CMatrix::identity(n) - gp.l.right_inverse * gp.l.factor;
    gp.kernel_leak = (gk * ker).frobenius_norm();
    if (gp.kernel_leak > tol.bound(gk.frobenius_norm()))
      throw Error(ErrorCode::KernelNotDominated, "ker G^L not inside ker G^K on part '" + p.labels[s] + "'");
    const CMatrix g = gp.l.right_inverse.adjoint() * gk * gp.l.right_inverse;
    gp.gram = (g + g.adjoint()) * cplx{0.5};
    const HermEig eig = herm_eig(gp.gram, tol);
    gp.gaps = gap_at_zero(eig, tol);
    gp.norm = eig.max_abs_eigenvalue();
    // Rounding in G_hat grows like ||G^K|| / lambda_min(G^L).
    const double lmin = gp.l.eigenvalues.empty() ? 1.0 : *std::min_element(gp.l.eigenvalues.begin(), gp.l.eigenvalues.end());
    if (gp.norm > 1.0 + tol.bound(gk.frobenius_norm() / lmin))
      throw Error(ErrorCode::KernelNotDominated,
                  "Gram operator of part '" + p.labels[s] + "' has norm " + std::to_string(gp.norm));
    gp.identity = (gp.l.factor.adjoint() * gp.gram * gp.l.factor - gk).frobenius_norm();
    out.parts.push_back(std::move(gp));
  }
  return out;
}

struct DisjointnessCertificate {
  std::size_t rank_plus = 0;
  std::size_t rank_minus = 0;
  std::size_t rank_sum = 0;

  bool holds() const noexcept { return rank_plus + rank_minus == rank_sum; }
};

struct JordanSplit {
  OpKernel plus;
  OpKernel minus;
  std::vector<DisjointnessCertificate> certificates;
  double reconstruction = 0.0;  // max_s ||G+ - G- - G_s||_F

  bool certified() const {
    return std::all_of(certificates.begin(), certificates.end(), [](const auto& c) { return c.holds(); });
  }
};

/// K+ from the positive spectral part of each G_s and K- = K+ - K, so that
/// K = K+ - K- on every part up to one rounding per entry.
inline JordanSplit jordan_split(const OpKernel& k, const Partition& p, const Tolerances& tol = {}) {
  require_partially_hermitian(k, p, tol);
  std::vector<CMatrix> gp, gm;
  JordanSplit out{OpKernel(k.bundle()), OpKernel(k.bundle()), {}, 0.0};
  for (const auto& part : p.parts) {
    const CMatrix g = gram_block(k, part);
    const HermEig eig = herm_eig(g, tol);
    const double cut = eigen_cutoff(eig, tol);
    const CMatrix plus = apply_spectral(eig, [&](double l) { return l > cut ? l : 0.0; });
    const CMatrix minus = plus - g;
    out.reconstruction = std::max(out.reconstruction, (plus - minus - g).frobenius_norm());
    // Both ranks are measured against the cutoff of G itself.
    const double gmax = eig.max_abs_eigenvalue();
    auto rank_of = [&](const CMatrix& m) {
      if (m.empty()) return std::size_t{0};
      const HermEig e = herm_eig((m + m.adjoint()) * cplx{0.5}, tol);
      const double c = tol.rank_rel * gmax;
      return static_cast<std::size_t>(
          std::count_if(e.eigenvalues.begin(), e.eigenvalues.end(), [&](double l) { return std::abs(l) > c; }));
    };
    out.certificates.push_back({rank_of(plus), rank_of(minus), rank_of(plus + minus)});
    gp.push_back(plus);
    gm.push_back(minus);
  }
  out.plus = kernel_from_blocks(k.bundle(), p, gp);
  out.minus = kernel_from_blocks(k.bundle(), p, gm);
  return out;
}

enum class KreinRoute { direct, dominant };

inline const char* to_string(KreinRoute r) { return r == KreinRoute::direct ? "direct" : "dominant"; }

struct KreinPart {
  KreinSpace space;
  CMatrix factor;         // W_s, m x n, W* J W = G_s
  CMatrix right_inverse;  // W_s+, W W+ = I
};

struct KreinLinearisation {
  Partition partition;
  std::vector<KreinPart> parts;
  KreinRoute route = KreinRoute::direct;

  std::size_t dim(std::size_t s) const { return parts.at(s).space.dim(); }

  CMatrix feature(PointId x) const {
    const std::size_t s = partition.part_of.at(x);
    const PartIndex& idx = partition.parts[s];
    return parts[s].factor.block(0, idx.offset(x), parts[s].space.dim(), idx.dim(x));
  }
};

struct KreinOptions {
  const OpKernel* dominant = nullptr;  // route through this L when set
  bool reversed = false;               // alternative eigenbasis choice
};

inline KreinLinearisation krein_linearisation(const OpKernel& k, const Partition& p, const Tolerances& tol = {},
                                              KreinOptions opts = {}) {
  require_partially_hermitian(k, p, tol);
  KreinLinearisation lin;
  lin.partition = p;
  const InducedOptions io{opts.reversed};
  if (!opts.dominant) {
    lin.route = KreinRoute::direct;
    for (const auto& part : p.parts) {
      InducedKrein ik = induced_krein(gram_block(k, part), tol, io);
      lin.parts.push_back({std::move(ik.space), std::move(ik.pi), std::move(ik.pi_right_inv)});
    }
    return lin;
  }
  lin.route = KreinRoute::dominant;
  const GramData gd = gram_operator(k, *opts.dominant, p, tol);
  for (const auto& gp : gd.parts) {
    InducedKrein ik = induced_krein(gp.gram, tol, io);
    lin.parts.push_back({std::move(ik.space), ik.pi * gp.l.factor, gp.l.right_inverse * ik.pi_right_inv});
  }
  return lin;
}

struct KreinLinearisationCheck {
  double reconstruction = 0.0;  // max ||V_x* J V_y - K(x,y)||_F / max(1, ||G_s||_F)
  bool minimal = true;          // columns of the V_x span each Krein space
  bool rank_matches = true;     // m_s = rank(G_s)
  double symmetry = 0.0;        // max ||J^2 - I||, ||J - J*||
};

inline KreinLinearisationCheck check_krein_linearisation(const KreinLinearisation& lin, const OpKernel& k,
                                                         const Tolerances& tol = {}) {
  KreinLinearisationCheck out;
  const Partition& p = lin.partition;
  for (std::size_t s = 0; s < p.size(); ++s) {
    const CMatrix g = gram_block(k, p.parts[s]);
    const double scale = std::max(1.0, g.frobenius_norm());
    const KreinPart& kp = lin.parts[s];
    std::vector<CMatrix> feats;
    for (PointId x : p.parts[s].points()) feats.push_back(lin.feature(x));
    for (std::size_t i = 0; i < feats.size(); ++i)
      for (std::size_t j = 0; j < feats.size(); ++j) {
        const PointId x = p.parts[s].points()[i], y = p.parts[s].points()[j];
        const CMatrix r = feats[i].adjoint() * kp.space.j * feats[j] - k.block(x, y);
        out.reconstruction = std::max(out.reconstruction, r.frobenius_norm() / scale);
      }
    const std::size_t m = kp.space.dim();
    out.minimal = out.minimal && matrix_rank(hstack(feats, m), tol) == m;
    out.rank_matches = out.rank_matches && rank_tol(g, tol) == m;
    out.symmetry = std::max(out.symmetry, kp.space.symmetry_residual());
  }
  return out;
}

struct KreinEquivalence {
  std::vector<CMatrix> unitaries;  // U_s : K_s -> K'_s
  double j_unitarity = 0.0;        // max ||U^# U - I||_F
  double intertwining = 0.0;       // max ||U V_x - V'_x||_F
  bool certified = false;
};

/// U_s = W'_s W_s+, certified when it is J-unitary and carries V_x to V'_x.
inline KreinEquivalence krein_equivalence(const KreinLinearisation& a, const KreinLinearisation& b,
                                          const Tolerances& tol = {}) {
  if (a.parts.size() != b.parts.size()) throw Error(ErrorCode::RankMismatch, "different number of parts");
  KreinEquivalence out;
  double scale = 1.0;
  for (std::size_t s = 0; s < a.parts.size(); ++s) {
    const KreinSpace& sa = a.parts[s].space;
    const KreinSpace& sb = b.parts[s].space;
    if (sa.p != sb.p || sa.q != sb.q)
      throw Error(ErrorCode::RankMismatch, "part '" + a.partition.labels[s] + "' has different signatures");
    const CMatrix u = b.parts[s].factor * a.parts[s].right_inverse;
    out.j_unitarity =
        std::max(out.j_unitarity, (krein_adjoint(u, sa, sb) * u - CMatrix::identity(sa.dim())).frobenius_norm());
    for (PointId x : a.partition.parts[s].points()) {
      const CMatrix vx = a.feature(x);
      scale = std::max(scale, vx.frobenius_norm());
      out.intertwining = std::max(out.intertwining, (u * vx - b.feature(x)).frobenius_norm());
    }
    out.unitaries.push_back(u);
  }
  out.certified = out.j_unitarity <= tol.atol && out.intertwining <= tol.bound(scale);
  return out;
}

/// Reproducing kernel Krein space of a Krein linearisation: members are the
/// sections y -> (J V_y)* f, with [V*J f, V*J g] = [f, g].
class RkksView {
 public:
  RkksView(const KreinLinearisation& lin, const OpKernel& k) : lin_(&lin), k_(&k) {}

  const KreinLinearisation& linearisation() const noexcept { return *lin_; }

  Section member(std::size_t s, const CVector& f) const {
    const KreinPart& kp = lin_->parts.at(s);
    if (f.size() != kp.space.dim()) throw Error(ErrorCode::DimMismatch, "coefficient length vs Krein dimension");
    const CMatrix col = kp.factor.adjoint() * kp.space.j * CMatrix::column(f);
    return unstack(CVector(col.entries().begin(), col.entries().end()), lin_->partition.parts[s], k_->bundle());
  }

  Section kernel_column(PointId x, const CVector& h) const {
    const PartIndex& idx = lin_->partition.parts[lin_->partition.part_of.at(x)];
    Section out(k_->bundle());
    for (PointId y : idx.points()) {
      const CMatrix v = k_->block(y, x) * CMatrix::column(h);
      out.set(y, CVector(v.entries().begin(), v.entries().end()));
    }
    return out;
  }

  /// f = J (W+)* stack(phi).
  CVector coefficients(std::size_t s, const Section& phi) const {
    const KreinPart& kp = lin_->parts.at(s);
    const CMatrix c =
        kp.space.j * kp.right_inverse.adjoint() * CMatrix::column(stack(phi, lin_->partition.parts[s]));
    return {c.entries().begin(), c.entries().end()};
  }

  cplx pairing(std::size_t s, const Section& phi, const Section& psi) const {
    return lin_->parts.at(s).space.pairing(coefficients(s, phi), coefficients(s, psi));
  }

 private:
  const KreinLinearisation* lin_;
  const OpKernel* k_;
};

struct RkksReport {
  double kernel_columns = 0.0;  // K_x h is the member with f = V_x h
  double reproducing = 0.0;     // <phi(x), h> = [phi, K_x h]
  double gram = 0.0;            // [K_y k, K_x h] = <K(x,y) k, h>
  bool total = true;            // kernel columns span the space
  std::vector<std::string> violations;
};

inline RkksReport verify_rk_krein(const RkksView& view, const OpKernel& k, const Tolerances& tol = {},
                                  std::uint64_t seed = 0) {
  RkksReport rep;
  const KreinLinearisation& lin = view.linearisation();
  const Partition& p = lin.partition;
  CounterRng rng(seed, 0x4B4B);
  for (std::size_t s = 0; s < p.size(); ++s) {
    const PartIndex& idx = p.parts[s];
    const KreinPart& kp = lin.parts[s];
    const std::size_t m = kp.space.dim();
    const CMatrix g = gram_block(k, idx);
    const double scale = std::max(1.0, g.frobenius_norm());
    CMatrix coeffs(m, idx.total_dim());
    for (PointId x : idx.points()) {
      const CMatrix vx = lin.feature(x);
      for (std::size_t i = 0; i < idx.dim(x); ++i) {
        CVector h(idx.dim(x));
        h[i] = 1.0;
        const CVector col = stack(view.kernel_column(x, h), idx);
        CVector mem(idx.total_dim());
        if (m > 0) {
          const CMatrix vcol = vx.col(i);
          const CVector f(vcol.entries().begin(), vcol.entries().end());
          mem = stack(view.member(s, f), idx);
          const CVector c = view.coefficients(s, unstack(col, idx, k.bundle()));
          for (std::size_t t = 0; t < m; ++t) coeffs(t, idx.offset(x) + i) = c[t];
        }
        double d2 = 0.0;
        for (std::size_t t = 0; t < col.size(); ++t) d2 += std::norm(col[t] - mem[t]);
        rep.kernel_columns = std::max(rep.kernel_columns, std::sqrt(d2) / scale);
      }
    }
    rep.gram = std::max(rep.gram, (coeffs.adjoint() * kp.space.j * coeffs - g).frobenius_norm() / scale);
    rep.total = rep.total && matrix_rank(coeffs, tol) == m;
    if (m == 0) continue;
    for (int trial = 0; trial < 3; ++trial) {
      CVector f(m);
      for (auto& z : f) z = rng.complex_normal();
      const Section phi = view.member(s, f);
      for (PointId x : idx.points()) {
        const CVector value = phi.at(x);
        for (std::size_t i = 0; i < idx.dim(x); ++i) {
          CVector h(idx.dim(x));
          h[i] = 1.0;
          const cplx rhs = view.pairing(s, phi, view.kernel_column(x, h));
          rep.reproducing = std::max(rep.reproducing, std::abs(value[i] - rhs) / scale);
        }
      }
    }
  }
  if (rep.kernel_columns > tol.atol) rep.violations.push_back("kernel columns are not members");
  if (rep.reproducing > tol.atol) rep.violations.push_back("reproducing property");
  if (rep.gram > tol.atol) rep.violations.push_back("K(x,y) = K_x^# K_y");
  if (!rep.total) rep.violations.push_back("kernel columns not total");
  return rep;
}

inline RkksReport rk_krein_space(const KreinLinearisation& lin, const OpKernel& k, const Tolerances& tol = {},
                                 std::uint64_t seed = 0) {
  return verify_rk_krein(RkksView(lin, k), k, tol, seed);
}

inline constexpr const char* kFiniteUniquenessNote =
    "Non-uniqueness would need 0 to be an accumulation point of the Gram operator spectrum from both sides. "
    "A finite spectrum has no accumulation points, so that branch is unreachable in finite dimensions and "
    "every part has a spectral gap at 0.";

struct UniquenessReport {
  std::vector<GapUniqueness> parts;
  bool unique = true;
  std::string note = kFiniteUniquenessNote;
};

inline UniquenessReport uniqueness_report(const OpKernel& k, const OpKernel& l, const Partition& p,
                                          const Tolerances& tol = {}) {
  const GramData gd = gram_operator(k, l, p, tol);
  UniquenessReport rep;
  for (const auto& gp : gd.parts) {
    GapUniqueness u = gp.gram.empty() ? GapUniqueness{} : gap_uniqueness(gp.gram, tol);
    rep.unique = rep.unique && u.unique;
    rep.parts.push_back(u);
  }
  return rep;
}

struct KreinRepresentation {
  std::vector<CMatrix> psi;          // per element, m_c x m_d
  std::vector<double> precondition;  // ||G_c Psi(a) - Psi(a*)* G_d||_F
  std::vector<double> well_defined;  // ||W_c Psi(a) P_ker W_d||_F
  RepresentationLaws laws;           // star law uses the Krein adjoint
};

/// Psi~(a) = W_c Psi(a) W_d+, the lift of the shift pair (Psi(a), Psi(a*)).
inline std::pair<KreinLinearisation, KreinRepresentation> invariant_krein_representation(
    const OpKernel& k, const ActionFrame& frame, const Tolerances& tol = {}, const OpKernel* dominant = nullptr) {
  const Partition& p = frame.partition();
  require_partially_hermitian(k, p, tol);
  const InvarianceResult inv = is_invariant(k, frame, tol);
  if (!inv.invariant) {
    const auto& w = *inv.witness;
    throw Error(ErrorCode::NotInvariant, "witness (" + frame.sg().label(w.element) + ", " +
                                             frame.bundle().label(w.x) + ", " + frame.bundle().label(w.y) + ")");
  }
  KreinLinearisation lin = krein_linearisation(k, p, tol, KreinOptions{dominant, false});
  const ConvBlocks cb = conv_blocks(k, p);
  const StarSemigroupoid& sg = frame.sg();
  KreinRepresentation rep;
  for (ElemId a = 0; a < sg.size(); ++a) {
    const KreinPart& dom = lin.parts[sg.d(a)];
    const KreinPart& cod = lin.parts[sg.c(a)];
    const CMatrix psi = frame.shift(a);
    const CMatrix pre = cb.g[sg.c(a)] * psi - frame.shift(sg.star(a)).adjoint() * cb.g[sg.d(a)];
    const double scale = std::max(cb.g[sg.c(a)].frobenius_norm(), cb.g[sg.d(a)].frobenius_norm());
    rep.precondition.push_back(pre.frobenius_norm());
    if (rep.precondition.back() > tol.bound(scale))
      throw Error(ErrorCode::PairingViolated, "shift pair of '" + sg.label(a) + "' violates the pairing");
    const CMatrix wc_psi = cod.factor * psi;
    const CMatrix ker = CMatrix::identity(psi.cols()) - dom.right_inverse * dom.factor;
    rep.well_defined.push_back((wc_psi * ker).frobenius_norm());
    if (rep.well_defined.back() > tol.bound(cod.factor.frobenius_norm()))
      throw Error(ErrorCode::PairingViolated, "shift of '" + sg.label(a) + "' does not preserve the null space");
    rep.psi.push_back(wc_psi * dom.right_inverse);
  }
  std::vector<CMatrix> adj;
  for (ElemId a = 0; a < sg.size(); ++a)
    adj.push_back(krein_adjoint(rep.psi[a], lin.parts[sg.d(a)].space, lin.parts[sg.c(a)].space));
  rep.laws = representation_laws(rep.psi, frame, [&](PointId x) { return lin.feature(x); }, adj);
  return {std::move(lin), std::move(rep)};
}

struct ReducibilityReport {
  bool applicable = false;
  std::optional<InvarianceWitness> witness;  // why L is not invariant
  std::vector<double> commutators;           // ||J_c Psi~(a) - Psi~(a) J_d||_F
  std::vector<double> quotient_commutators;  // same with sign(G_hat) on the L-quotient
  double worst = 0.0;
  bool pass = false;
};

/// With an invariant dominant L, the symmetries J_s = sign(G_hat_s) commute
/// with the representation. `lin` and `rep` must come from the route via L.
inline ReducibilityReport fundamental_reducibility_check(const KreinLinearisation& lin, const KreinRepresentation& rep,
                                                         const OpKernel& k, const OpKernel& l,
                                                         const ActionFrame& frame, const Tolerances& tol = {}) {
  ReducibilityReport out;
  const InvarianceResult inv = is_invariant(l, frame, tol);
  if (!inv.invariant) {
    out.witness = inv.witness;
    return out;
  }
  out.applicable = true;
  const GramData gd = gram_operator(k, l, frame.partition(), tol);
  std::vector<CMatrix> signs;
  for (const auto& gp : gd.parts) signs.push_back(herm_fn(gp.gram, HermFn::sign, tol));
  const StarSemigroupoid& sg = frame.sg();
  for (ElemId a = 0; a < sg.size(); ++a) {
    const CMatrix& jd = lin.parts[sg.d(a)].space.j;
    const CMatrix& jc = lin.parts[sg.c(a)].space.j;
    out.commutators.push_back((jc * rep.psi[a] - rep.psi[a] * jd).frobenius_norm());
    const PartFactor& fd = gd.parts[sg.d(a)].l;
    const PartFactor& fc = gd.parts[sg.c(a)].l;
    const CMatrix phi_l = fc.factor * frame.shift(a) * fd.right_inverse;
    out.quotient_commutators.push_back((signs[sg.c(a)] * phi_l - phi_l * signs[sg.d(a)]).frobenius_norm());
    out.worst = std::max({out.worst, out.commutators.back(), out.quotient_commutators.back()});
  }
  out.pass = out.worst <= tol.atol;
  return out;
}

}  // namespace kgl
