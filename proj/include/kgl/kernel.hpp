#pragma once

// Operator-valued kernels over a Hilbert bundle and everything that reads
// them part by part: Gram block matrices, partial hermiticity and
// positivity, the kernel form, partial domination, shift matrices of an
// action, invariance and bounded-shift constants.

#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kgl/bundle.hpp"
#include "kgl/error.hpp"
#include "kgl/numlin.hpp"
#include "kgl/sgpd.hpp"

namespace kgl {

/// K(x, y) : H_y -> H_x, stored sparsely; absent blocks are zero. Holds a
/// non-owning pointer to its bundle.
class OpKernel {
 public:
  explicit OpKernel(const HilbertBundle& bundle) : bundle_(&bundle) {}

  const HilbertBundle& bundle() const noexcept { return *bundle_; }
  const std::map<std::pair<PointId, PointId>, CMatrix>& stored() const noexcept { return blocks_; }

  void set(PointId x, PointId y, CMatrix block) {
    if (x >= bundle_->size() || y >= bundle_->size())
      throw Error(ErrorCode::UnknownPoint, "kernel block index out of range");
    if (block.rows() != bundle_->dim(x) || block.cols() != bundle_->dim(y))
      throw Error(ErrorCode::ShapeMismatch, "block (" + bundle_->label(x) + ", " + bundle_->label(y) + ") is " +
                                                block.shape_string() + ", expected " +
                                                std::to_string(bundle_->dim(x)) + "x" +
                                                std::to_string(bundle_->dim(y)));
    require_finite(block, "kernel block");
    blocks_[{x, y}] = std::move(block);
  }

  CMatrix block(PointId x, PointId y) const {
    auto it = blocks_.find({x, y});
    if (it != blocks_.end()) return it->second;
    return CMatrix(bundle_->dim(x), bundle_->dim(y));
  }

  /// Drops blocks that are exactly zero.
  void prune() {
    for (auto it = blocks_.begin(); it != blocks_.end();) {
      if (it->second.max_abs() == 0.0) {
        it = blocks_.erase(it);
      } else {
        ++it;
      }
    }
  }

 private:
  const HilbertBundle* bundle_;
  std::map<std::pair<PointId, PointId>, CMatrix> blocks_;
};

inline void require_same_bundle(const OpKernel& a, const OpKernel& b) {
  if (&a.bundle() != &b.bundle()) throw Error(ErrorCode::BundleMismatch, "kernels over different bundles");
}

/// a K + b L, blockwise over the union of stored blocks.
inline OpKernel combine(cplx a, const OpKernel& k, cplx b, const OpKernel& l) {
  require_same_bundle(k, l);
  OpKernel out(k.bundle());
  std::map<std::pair<PointId, PointId>, bool> keys;
  for (const auto& [key, _] : k.stored()) keys[key] = true;
  for (const auto& [key, _] : l.stored()) keys[key] = true;
  for (const auto& [key, _] : keys) out.set(key.first, key.second, k.block(key.first, key.second) * a + l.block(key.first, key.second) * b);
  return out;
}

/// K*(x, y) = K(y, x)*.
inline OpKernel adjoint_kernel(const OpKernel& k) {
  OpKernel out(k.bundle());
  for (const auto& [key, m] : k.stored()) out.set(key.second, key.first, m.adjoint());
  return out;
}

/// (Re K, Im K) with Re = (K + K*)/2, Im = (K - K*)/(2i); both Hermitian and
/// K = Re K + i Im K.
inline std::pair<OpKernel, OpKernel> re_im(const OpKernel& k) {
  const OpKernel ks = adjoint_kernel(k);
  return {combine(0.5, k, 0.5, ks), combine(cplx{0.0, -0.5}, k, cplx{0.0, 0.5}, ks)};
}

/// Disjoint parts covering the base, each with its block layout.
struct Partition {
  std::vector<std::string> labels;
  std::vector<PartIndex> parts;
  std::vector<std::size_t> part_of;  // point -> part

  std::size_t size() const noexcept { return parts.size(); }

  static Partition from_parts(const HilbertBundle& bundle, std::vector<std::string> labels,
                              const std::vector<std::vector<PointId>>& members) {
    if (labels.size() != members.size()) throw Error(ErrorCode::CrossRefError, "one label per part");
    Partition p;
    p.labels = std::move(labels);
    p.part_of.assign(bundle.size(), kNone);
    for (std::size_t s = 0; s < members.size(); ++s) {
      for (PointId x : members[s]) {
        if (x >= bundle.size()) throw Error(ErrorCode::UnknownPoint, "point id " + std::to_string(x));
        if (p.part_of[x] != kNone) throw Error(ErrorCode::CrossRefError, "parts overlap at '" + bundle.label(x) + "'");
        p.part_of[x] = s;
      }
      p.parts.emplace_back(bundle, members[s]);
    }
    for (PointId x = 0; x < bundle.size(); ++x)
      if (p.part_of[x] == kNone) throw Error(ErrorCode::CrossRefError, "parts miss '" + bundle.label(x) + "'");
    return p;
  }

  static Partition single(const HilbertBundle& bundle) {
    std::vector<PointId> all(bundle.size());
    std::iota(all.begin(), all.end(), PointId{0});
    return from_parts(bundle, {"X"}, {all});
  }

  /// Blocks X_s = {x : a(x) = s}, one per symbol, in symbol order.
  static Partition from_anchor(const StarSemigroupoid& sg, const LeftAction& act, const HilbertBundle& bundle) {
    require_same_base(act, bundle);
    std::vector<std::vector<PointId>> members(sg.symbol_count());
    for (PointId x = 0; x < act.size(); ++x) members[act.anchor(x)].push_back(x);
    return from_parts(bundle, sg.symbols(), members);
  }
};

/// G_s with (x, y) block K(x, y), points in global order.
inline CMatrix gram_block(const OpKernel& k, const PartIndex& part) {
  CMatrix g(part.total_dim(), part.total_dim());
  for (PointId x : part.points())
    for (PointId y : part.points()) {
      auto it = k.stored().find({x, y});
      if (it != k.stored().end()) g.set_block(part.offset(x), part.offset(y), it->second);
    }
  return g;
}

struct ConvBlocks {
  std::vector<CMatrix> g;  // one per part

  double max_frobenius() const {
    double m = 0.0;
    for (const auto& b : g) m = std::max(m, b.frobenius_norm());
    return m;
  }
};

inline ConvBlocks conv_blocks(const OpKernel& k, const Partition& p) {
  ConvBlocks out;
  out.g.reserve(p.size());
  for (const auto& part : p.parts) out.g.push_back(gram_block(k, part));
  return out;
}

/// Inverse of conv_blocks on within-part blocks; cross-part blocks are zero.
inline OpKernel kernel_from_blocks(const HilbertBundle& bundle, const Partition& p, const std::vector<CMatrix>& g) {
  if (g.size() != p.size()) throw Error(ErrorCode::ShapeMismatch, "one Gram block per part required");
  OpKernel out(bundle);
  for (std::size_t s = 0; s < p.size(); ++s) {
    const PartIndex& part = p.parts[s];
    if (g[s].rows() != part.total_dim() || g[s].cols() != part.total_dim())
      throw Error(ErrorCode::ShapeMismatch, "Gram block of part '" + p.labels[s] + "'");
    for (PointId x : part.points())
      for (PointId y : part.points())
        out.set(x, y, g[s].block(part.offset(x), part.offset(y), part.dim(x), part.dim(y)));
  }
  out.prune();
  return out;
}

inline bool is_partially_hermitian(const OpKernel& k, const Partition& p, const Tolerances& tol = {}) {
  for (const auto& part : p.parts)
    if (!is_hermitian(gram_block(k, part), tol)) return false;
  return true;
}

inline bool is_partially_psd(const OpKernel& k, const Partition& p, const Tolerances& tol = {}) {
  for (const auto& part : p.parts) {
    const CMatrix g = gram_block(k, part);
    if (!is_hermitian(g, tol) || !psd_check(g, tol)) return false;
  }
  return true;
}

/// <f, g>_K = (stack g)* G_s (stack f) for f, g supported in one part.
inline cplx kernel_inner(const OpKernel& k, const Partition& p, const Section& f, const Section& g) {
  std::optional<std::size_t> part;
  auto claim = [&](const Section& s) {
    for (const auto& [x, _] : s.support()) {
      const std::size_t q = p.part_of.at(x);
      if (part && *part != q) throw Error(ErrorCode::CrossPartSupport, "sections span several parts");
      part = q;
    }
  };
  claim(f);
  claim(g);
  if (!part) return {};
  const PartIndex& idx = p.parts[*part];
  const CMatrix gf = gram_block(k, idx) * CMatrix::column(stack(f, idx));
  const CVector sg = stack(g, idx);
  cplx sum{};
  for (std::size_t i = 0; i < sg.size(); ++i) sum += std::conj(sg[i]) * gf(i, 0);
  return sum;
}

struct Dominance {
  bool dominates = false;  // K <=_P L
  bool two_sided = false;  // -L <=_P K <=_P L
};

inline Dominance dominates(const OpKernel& l, const OpKernel& k, const Partition& p, const Tolerances& tol = {}) {
  if (!is_partially_hermitian(l, p, tol) || !is_partially_hermitian(k, p, tol))
    throw Error(ErrorCode::NotHermitian, "domination needs partially Hermitian kernels");
  Dominance out;
  out.dominates = is_partially_psd(combine(1.0, l, -1.0, k), p, tol);
  out.two_sided = out.dominates && is_partially_psd(combine(1.0, l, 1.0, k), p, tol);
  return out;
}

/// A semigroupoid action on the base of a bundle, with the anchor partition
/// and the shift matrices it induces. Non-owning; all three inputs must
/// outlive it.
class ActionFrame {
 public:
  ActionFrame(const StarSemigroupoid& sg, const LeftAction& act, const HilbertBundle& bundle)
      : sg_(&sg), act_(&act), bundle_(&bundle), partition_(Partition::from_anchor(sg, act, bundle)),
        orbit_trivial_(orbit_trivial_bundle(sg, act, bundle)) {}

  const StarSemigroupoid& sg() const noexcept { return *sg_; }
  const LeftAction& action() const noexcept { return *act_; }
  const HilbertBundle& bundle() const noexcept { return *bundle_; }
  const Partition& partition() const noexcept { return partition_; }
  bool orbit_trivial() const noexcept { return orbit_trivial_; }

  const PartIndex& domain_part(ElemId a) const { return partition_.parts.at(sg_->d(a)); }
  const PartIndex& codomain_part(ElemId a) const { return partition_.parts.at(sg_->c(a)); }

  /// Psi(a): stacked delta_x h  ->  stacked delta_{a.x} h, a 0/1 block matrix
  /// of shape total_dim(c(a)) x total_dim(d(a)).
  CMatrix shift(ElemId a) const {
    if (!orbit_trivial_) throw Error(ErrorCode::OrbitBundleNotTrivial, "fibre dimension varies along an orbit");
    const PartIndex& dom = domain_part(a);
    const PartIndex& cod = codomain_part(a);
    CMatrix psi(cod.total_dim(), dom.total_dim());
    for (PointId x : dom.points()) {
      const PointId y = act_->act(a, x);
      for (std::size_t i = 0; i < dom.dim(x); ++i) psi(cod.offset(y) + i, dom.offset(x) + i) = 1.0;
    }
    return psi;
  }

 private:
  const StarSemigroupoid* sg_;
  const LeftAction* act_;
  const HilbertBundle* bundle_;
  Partition partition_;
  bool orbit_trivial_;
};

struct InvarianceWitness {
  ElemId element = kNone;
  PointId x = kNone;
  PointId y = kNone;
  double residual = 0.0;
};

struct InvarianceResult {
  bool invariant = true;
  double max_residual = 0.0;
  std::optional<InvarianceWitness> witness;  // first violating triple
};

/// Exhaustive check of K(a.x, y) = K(x, a*.y) over all a, x in X_d(a),
/// y in X_c(a).
inline InvarianceResult is_invariant(const OpKernel& k, const ActionFrame& frame, const Tolerances& tol = {}) {
  if (!frame.orbit_trivial()) throw Error(ErrorCode::OrbitBundleNotTrivial, "fibre dimension varies along an orbit");
  const ConvBlocks cb = conv_blocks(k, frame.partition());
  const double bound = tol.bound(cb.max_frobenius());
  const StarSemigroupoid& sg = frame.sg();
  const LeftAction& act = frame.action();
  InvarianceResult res;
  for (ElemId a = 0; a < sg.size(); ++a) {
    const ElemId as = sg.star(a);
    for (PointId x : frame.domain_part(a).points()) {
      for (PointId y : frame.codomain_part(a).points()) {
        const double r = (k.block(act.act(a, x), y) - k.block(x, act.act(as, y))).frobenius_norm();
        res.max_residual = std::max(res.max_residual, r);
        if (r > bound && !res.witness) {
          res.invariant = false;
          res.witness = InvarianceWitness{a, x, y, r};
        }
      }
    }
  }
  return res;
}

/// ||G_c(a) Psi(a) - Psi(a*)* G_d(a)||_F for each element.
inline std::vector<double> invariance_matrix_residuals(const OpKernel& k, const ActionFrame& frame) {
  const ConvBlocks cb = conv_blocks(k, frame.partition());
  std::vector<double> out;
  for (ElemId a = 0; a < frame.sg().size(); ++a) {
    const CMatrix lhs = cb.g[frame.sg().c(a)] * frame.shift(a);
    const CMatrix rhs = frame.shift(frame.sg().star(a)).adjoint() * cb.g[frame.sg().d(a)];
    out.push_back((lhs - rhs).frobenius_norm());
  }
  return out;
}

/// Least M with <Psi f, Psi f>_L <= M <f, f>_L on the domain part of `a`,
/// i.e. the top eigenvalue of (B+)* Psi* G_c Psi B+ where G_d = B* B.
/// nullopt when Psi(a) does not map ker G_d into ker G_c (no finite
/// constant on the quotient).
inline std::optional<double> bounded_shift_constant(const OpKernel& l, const ActionFrame& frame, ElemId a,
                                                    const Tolerances& tol = {}) {
  const CMatrix gd = gram_block(l, frame.domain_part(a));
  const CMatrix gc = gram_block(l, frame.codomain_part(a));
  if (!is_hermitian(gd, tol) || !is_hermitian(gc, tol) || !psd_check(gd, tol) || !psd_check(gc, tol))
    throw Error(ErrorCode::NotPSD, "bounded-shift constant needs L partially PSD");
  const CMatrix psi = frame.shift(a);
  const CMatrix pulled = psi.adjoint() * gc * psi;
  const HermEig eig = herm_eig(gd, tol);
  const double cut = eigen_cutoff(eig, tol);
  const std::size_t n = gd.rows();
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < n; ++k)
    if (eig.eigenvalues[k] > cut) keep.push_back(k);

  // Kernel inclusion: the pulled-back form must vanish on ker G_d.
  CMatrix ker(n, n - keep.size());
  {
    std::size_t col = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (eig.eigenvalues[k] > cut) continue;
      for (std::size_t i = 0; i < n; ++i) ker(i, col) = eig.basis(i, k);
      ++col;
    }
  }
  if (ker.cols() > 0 && (pulled * ker).frobenius_norm() > tol.bound(pulled.frobenius_norm())) return std::nullopt;
  if (keep.empty()) return 0.0;

  CMatrix bplus(n, keep.size());  // U_+ Lambda_+^{-1/2}
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const double w = 1.0 / std::sqrt(eig.eigenvalues[keep[j]]);
    for (std::size_t i = 0; i < n; ++i) bplus(i, j) = eig.basis(i, keep[j]) * w;
  }
  const CMatrix m = bplus.adjoint() * pulled * bplus;
  const HermEig me = herm_eig((m + m.adjoint()) * cplx{0.5}, tol);
  return std::max(0.0, me.eigenvalues.back());
}

}  // namespace kgl
