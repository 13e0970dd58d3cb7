// Acceptance run: every criterion at its stated size and tolerance, one
// PASS/FAIL line each. Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "kgl/kgl.hpp"

using namespace kgl;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

CMatrix random_matrix(CounterRng& rng, std::size_t r, std::size_t c) {
  CMatrix m(r, c);
  for (auto& z : m.entries()) z = rng.complex_normal();
  return m;
}

// B diag(d) B* with the requested numbers of positive, negative and zero eigenvalues.
CMatrix random_signature(CounterRng& rng, std::size_t n, std::size_t p, std::size_t q) {
  const CMatrix b = random_matrix(rng, n, p + q);
  CMatrix d(p + q, p + q);
  for (std::size_t i = 0; i < p + q; ++i) d(i, i) = (i < p ? 1.0 : -1.0) * rng.uniform(0.25, 2.0);
  return b * d * b.adjoint();
}

// Up to 16 points with fibres of dimension 1..4 split into 1..3 parts; the
// Gram matrix of each part has a random signature (q = 0 when `definite`).
// The kernel refers to the bundle by address, so instances stay in place.
struct RandomKernel {
  HilbertBundle bundle;
  Partition partition;
  OpKernel kernel;

  RandomKernel(std::uint64_t seed, bool definite) : RandomKernel(CounterRng(seed, 0xACCE), definite) {}
  RandomKernel(const RandomKernel&) = delete;

 private:
  RandomKernel(CounterRng rng, bool definite) : bundle(random_bundle(rng)), kernel(bundle) {
    const std::size_t n = bundle.size();
    const std::size_t nparts = std::min<std::size_t>(n, rng.index(1, 3));
    std::vector<std::vector<PointId>> members(nparts);
    for (PointId x = 0; x < n; ++x) members[x < nparts ? x : rng.index(0, nparts - 1)].push_back(x);
    std::vector<std::string> labels;
    for (std::size_t s = 0; s < nparts; ++s) labels.push_back("s" + std::to_string(s));
    partition = Partition::from_parts(bundle, labels, members);
    std::vector<CMatrix> grams;
    for (std::size_t s = 0; s < nparts; ++s) {
      const std::size_t m = partition.parts[s].total_dim();
      const std::size_t p = rng.index(0, m);
      const std::size_t q = definite ? 0 : rng.index(0, m - p);
      grams.push_back(random_signature(rng, m, p, q));
    }
    kernel = kernel_from_blocks(bundle, partition, grams);
  }

  static HilbertBundle random_bundle(CounterRng& rng) {
    const std::size_t n = rng.index(1, 16);
    std::vector<std::string> pts;
    std::vector<std::size_t> dims;
    for (std::size_t i = 0; i < n; ++i) {
      pts.push_back("x" + std::to_string(i));
      dims.push_back(rng.index(1, 4));
    }
    return HilbertBundle(pts, dims);
  }
};

struct GeneratedCase {
  std::string name;
  GeneratedInstance inst;
  HilbertBundle bundle;
  ActionFrame frame;
  GeneratedKernel gk;

  GeneratedCase(const std::string& family, std::uint64_t seed, KernelMode mode)
      : name(family + "/" + std::to_string(seed)),
        inst(generate(random_family(family, seed))),
        bundle(inst.action.base(), orbit_constant_dims(inst.sg, inst.action, seed, 3)),
        frame(inst.sg, inst.action, bundle),
        gk(generate_kernel(inst.sg, inst.action, bundle, mode, seed)) {}
  GeneratedCase(const GeneratedCase&) = delete;
};

// `count` instances cycling through the families, fibres of dimension 1..3.
void generated_corpus(std::deque<GeneratedCase>& out, std::size_t count, KernelMode mode) {
  static const std::vector<std::string> families{"group_action", "pair_groupoid", "partial_bijections",
                                                 "group_as_groupoid"};
  for (std::size_t i = 0; i < count; ++i) out.emplace_back(families[i % families.size()], 1000 + i, mode);
}

double max_gram(const OpKernel& k, const Partition& p) { return std::max(1.0, conv_blocks(k, p).max_frobenius()); }

class Criteria {
 public:
  template <class F>
  void run(int id, const std::string& title, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d %s: %s (%.2fs)\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str(), secs);
    std::fflush(stdout);
    failures_ += ok ? 0 : 1;
  }
  int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

}  // namespace

int main() {
  const Tolerances tol;
  Criteria c;

  std::deque<RandomKernel> psd_corpus;
  for (std::uint64_t seed = 0; seed < 200; ++seed) psd_corpus.emplace_back(seed, true);

  double corpus_seconds = 0.0;
  std::vector<HilbertLinearisation> lins;

  c.run(1, "Hilbert linearisation reconstruction (200 PSD kernels)", [&](std::string& d) {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    bool ranks = true;
    for (const auto& rk : psd_corpus) {
      lins.push_back(minimal_linearisation(rk.kernel, rk.partition, tol));
      const HilbertLinearisation& lin = lins.back();
      for (std::size_t s = 0; s < rk.partition.size(); ++s) {
        const CMatrix g = gram_block(rk.kernel, rk.partition.parts[s]);
        const double scale = std::max(1.0, g.frobenius_norm());
        for (PointId x : rk.partition.parts[s].points())
          for (PointId y : rk.partition.parts[s].points())
            worst = std::max(worst, (lin.feature(x).adjoint() * lin.feature(y) - rk.kernel.block(x, y)).frobenius_norm() /
                                        scale);
        ranks = ranks && lin.rank(s) == matrix_rank(g, tol);
      }
    }
    corpus_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    d = fmt("worst relative residual %.3e (bound 1e-8)", worst) + (ranks ? ", dims equal ranks" : ", RANK MISMATCH");
    return worst <= 1e-8 && ranks;
  });

  c.run(2, "RKHS reproducing property and kernel Gram identity", [&](std::string& d) {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::size_t violations = 0;
    for (std::size_t i = 0; i < psd_corpus.size(); ++i) {
      const RkhsReport r = verify_reproducing(rkhs(lins[i], psd_corpus[i].kernel), psd_corpus[i].kernel, tol, i);
      worst = std::max({worst, r.reproducing, r.gram, r.kernel_columns});
      violations += r.violations.size() + (r.total ? 0 : 1);
    }
    corpus_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    d = fmt("worst residual %.3e (bound 1e-8), ", worst) + std::to_string(violations) + " violations" +
        fmt(", criteria 1-2 took %.2fs of 60s", corpus_seconds);
    return worst <= 1e-8 && violations == 0 && corpus_seconds <= 60.0;
  });

  c.run(3, "Unitary uniqueness across eigen tie-breaking", [&](std::string& d) {
    double unit = 0.0, inter = 0.0;
    bool certified = true;
    for (std::size_t i = 0; i < psd_corpus.size(); ++i) {
      const auto& rk = psd_corpus[i];
      const HilbertLinearisation rev = minimal_linearisation(rk.kernel, rk.partition, tol, {true});
      const UnitaryEquivalence eq = unitary_equivalence(lins[i], rev, tol);
      unit = std::max(unit, eq.unitarity);
      inter = std::max(inter, eq.intertwining);
      certified = certified && eq.certified;
    }
    d = fmt("||U*U - I|| %.3e, ", unit) + fmt("||U V_x - V'_x|| %.3e (bound 1e-8)", inter);
    return unit <= 1e-8 && inter <= 1e-8 && certified;
  });

  std::deque<GeneratedCase> psd_gen;
  generated_corpus(psd_gen, 100, KernelMode::psd_invariant);
  std::vector<std::pair<const GeneratedCase*, HilbertRepresentation>> hreps;

  c.run(4, "Invariant Hilbert representations (100 generated instances)", [&](std::string& d) {
    double laws = 0.0, shift = 0.0;
    std::string worst_case;
    for (const auto& gc : psd_gen) {
      const ActionFrame& frame = gc.frame;
      const auto [lin, rep] = invariant_representation(gc.gk.kernel, frame, tol);
      const RepresentationLaws l = hilbert_laws(rep, lin, frame);
      const double w = std::max({l.multiplicativity, l.star, l.intertwining});
      if (w > laws) worst_case = gc.name;
      laws = std::max(laws, w);
      shift = std::max(shift, shift_constant_consistency(rep));
      hreps.emplace_back(&gc, rep);
    }
    d = fmt("worst law residual %.3e (bound 1e-8)", laws) + (worst_case.empty() ? "" : " at " + worst_case) +
        fmt(", shift constant consistency %.3e (bound 1e-6)", shift);
    return laws <= 1e-8 && shift <= 1e-6;
  });

  c.run(5, "Partial isometries for inverse semigroupoids", [&](std::string& d) {
    double worst = 0.0;
    std::size_t inverse = 0;
    for (const auto& [gc, rep] : hreps) {
      const Classification cl = classify(gc->inst.sg);
      if (!cl.is_inverse) continue;
      ++inverse;
      worst = std::max(worst, partial_isometry_report(rep.phi, cl, tol).worst);
    }
    d = std::to_string(inverse) + " inverse instances" + fmt(", worst ||PP*P - P|| %.3e (bound 1e-8)", worst);
    return inverse > 0 && worst <= 1e-8;
  });

  std::deque<RandomKernel> herm_corpus;
  for (std::uint64_t seed = 500; seed < 700; ++seed) herm_corpus.emplace_back(seed, false);

  c.run(6, "Krein pipeline (200 Hermitian kernels)", [&](std::string& d) {
    double split = 0.0, recon = 0.0, rkk = 0.0;
    bool certs = true, minimal = true;
    for (std::size_t i = 0; i < herm_corpus.size(); ++i) {
      const auto& rk = herm_corpus[i];
      const JordanSplit js = jordan_split(rk.kernel, rk.partition, tol);
      split = std::max(split, js.reconstruction / (kEps * max_gram(rk.kernel, rk.partition)));
      certs = certs && js.certified();
      const KreinLinearisation lin = krein_linearisation(rk.kernel, rk.partition, tol);
      const KreinLinearisationCheck ck = check_krein_linearisation(lin, rk.kernel, tol);
      recon = std::max(recon, ck.reconstruction);
      minimal = minimal && ck.minimal && ck.rank_matches;
      const RkksReport r = rk_krein_space(lin, rk.kernel, tol, i);
      rkk = std::max({rkk, r.reproducing, r.gram, r.kernel_columns});
      minimal = minimal && r.violations.empty();
    }
    d = fmt("split rounding %.1f eps*scale (bound 16), ", split) + (certs ? "certificates hold, " : "CERTIFICATE FAILED, ") +
        fmt("V*JV residual %.3e, ", recon) + fmt("reproducing residual %.3e (bound 1e-8)", rkk);
    return split <= 16.0 && certs && recon <= 1e-8 && rkk <= 1e-8 && minimal;
  });

  c.run(7, "Operator lifting (100 quadruples with B T = S* A)", [&](std::string& d) {
    CounterRng rng(7, 0x11F7);
    double factor = 0.0, pairing = 0.0, pre = 0.0;
    for (int i = 0; i < 100; ++i) {
      const std::size_t n = rng.index(1, 6), m = rng.index(1, 6);
      const std::size_t pa = rng.index(0, n), qa = rng.index(0, n - pa);
      const std::size_t pb = rng.index(0, m), qb = rng.index(0, m - pb);
      const CMatrix a = random_signature(rng, n, pa, qa), b = random_signature(rng, m, pb, qb);
      // T = Y A + P_ker(B) Z and S = Y* B + P_ker(A) W satisfy B T = S* A.
      const CMatrix y = random_matrix(rng, m, n);
      const CMatrix ker_a = spectral_projections(a, tol).e_zero, ker_b = spectral_projections(b, tol).e_zero;
      const CMatrix t = y * a + ker_b * random_matrix(rng, m, n);
      const CMatrix s = y.adjoint() * b + ker_a * random_matrix(rng, n, m);
      const LiftResult lr = lift_operator(a, b, t, s, tol);
      pre = std::max(pre, lr.precondition);
      factor = std::max({factor, lr.factor_t, lr.factor_s});
      pairing = std::max(pairing, lr.pairing);
    }
    d = fmt("||T_lift Pi_A - Pi_B T|| %.3e, ", factor) + fmt("pairing %.3e (bound 1e-8), ", pairing) +
        fmt("construction residual %.3e", pre);
    return factor <= 1e-8 && pairing <= 1e-8;
  });

  std::deque<GeneratedCase> herm_gen;
  generated_corpus(herm_gen, 100, KernelMode::hermitian_invariant);

  c.run(8, "Invariant Krein representations (100 generated instances)", [&](std::string& d) {
    double worst = 0.0;
    std::string at;
    for (const auto& gc : herm_gen) {
      const auto [lin, rep] = invariant_krein_representation(gc.gk.kernel, gc.frame, tol);
      const double w = std::max({rep.laws.multiplicativity, rep.laws.star, rep.laws.intertwining});
      if (w > worst) at = gc.name;
      worst = std::max(worst, w);
    }
    d = fmt("worst law residual %.3e (bound 1e-8)", worst) + (at.empty() ? "" : " at " + at);
    return worst <= 1e-8;
  });

  c.run(9, "Fundamental reducibility with invariant dominants", [&](std::string& d) {
    double worst = 0.0;
    std::size_t used = 0;
    bool applicable = true;
    for (const auto& gc : herm_gen) {
      if (!gc.gk.dominant) continue;
      const ActionFrame& frame = gc.frame;
      if (!is_invariant(*gc.gk.dominant, frame, tol).invariant) continue;
      ++used;
      const auto [lin, rep] = invariant_krein_representation(gc.gk.kernel, frame, tol, &*gc.gk.dominant);
      const ReducibilityReport r = fundamental_reducibility_check(lin, rep, gc.gk.kernel, *gc.gk.dominant, frame, tol);
      applicable = applicable && r.applicable;
      for (double v : r.commutators) worst = std::max(worst, v);
    }
    d = std::to_string(used) + " instances" + fmt(", worst ||J Psi - Psi J|| %.3e (bound 1e-8)", worst);
    return used > 0 && applicable && worst <= 1e-8;
  });

  c.run(10, "Spectral gap uniqueness on finite instances", [&](std::string& d) {
    std::size_t checked = 0;
    bool all = true;
    double least = std::numeric_limits<double>::infinity();
    auto record = [&](const UniquenessReport& u) {
      ++checked;
      all = all && u.unique && u.note.find("unreachable in finite dimensions") != std::string::npos;
      for (const auto& p : u.parts) {
        all = all && p.unique && p.epsilon > 0.0;
        least = std::min(least, p.epsilon);
      }
    };
    for (const auto& rk : herm_corpus)
      record(uniqueness_report(rk.kernel, canonical_dominant(rk.kernel, rk.partition, tol).kernel, rk.partition, tol));
    for (const auto& gc : herm_gen) {
      const Partition& p = gc.frame.partition();
      if (gc.gk.dominant) record(uniqueness_report(gc.gk.kernel, *gc.gk.dominant, p, tol));
      record(uniqueness_report(gc.gk.kernel, canonical_dominant(gc.gk.kernel, p, tol).kernel, p, tol));
    }
    d = std::to_string(checked) + " reports, all unique" + fmt(", least witnessing gap %.3e", least);
    if (!all) d = std::to_string(checked) + " reports, NOT ALL UNIQUE";
    return all && checked > 0;
  });

  std::printf("%s: %d of 10 criteria failed\n", c.failures() ? "FAIL" : "PASS", c.failures());
  return c.failures() ? 1 : 0;
}
