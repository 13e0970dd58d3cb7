#include <gtest/gtest.h>

#include "kgl/kernel.hpp"
#include "kgl/kernel_gen.hpp"
#include "kgl/sgpd_generate.hpp"
#include "support.hpp"

using namespace kgl;
using kgl::test::MatrixNear;
using kgl::test::ThrowsCode;

namespace {

using Pair = std::pair<std::string, std::string>;
const cplx I{0.0, 1.0};

CMatrix scalar(cplx z) { return CMatrix{{z}}; }

OpKernel from_gram(const HilbertBundle& b, const CMatrix& g) {
  return kernel_from_blocks(b, Partition::single(b), {g});
}

// Z2 = {e, g} swapping x1 and x2.
struct Z2Swap {
  StarSemigroupoid sg{{"o"},
                      {{"e", "o", "o"}, {"g", "o", "o"}},
                      {{"e", "e", "e"}, {"e", "g", "g"}, {"g", "e", "g"}, {"g", "g", "e"}},
                      {{"e", "e"}, {"g", "g"}},
                      std::vector<Pair>{{"o", "e"}}};
  LeftAction act{sg,
                 {"x1", "x2"},
                 {{"x1", "o"}, {"x2", "o"}},
                 {{"e", "x1", "x1"}, {"e", "x2", "x2"}, {"g", "x1", "x2"}, {"g", "x2", "x1"}}};
  HilbertBundle bundle{{"x1", "x2"}, {1, 1}};
  ActionFrame frame{sg, act, bundle};
};

// Pair groupoid on {d, c} acting non-injectively: a.x1 = a.x2 = y.
struct Merge {
  StarSemigroupoid sg{{"d", "c"},
                      {{"a", "d", "c"}, {"b", "c", "d"}, {"p", "d", "d"}, {"q", "c", "c"}},
                      {{"a", "b", "q"}, {"b", "a", "p"}, {"a", "p", "a"}, {"q", "a", "a"}, {"p", "b", "b"},
                       {"b", "q", "b"}, {"p", "p", "p"}, {"q", "q", "q"}},
                      {{"a", "b"}, {"b", "a"}, {"p", "p"}, {"q", "q"}}};
  LeftAction act{sg,
                 {"x1", "x2", "y"},
                 {{"x1", "d"}, {"x2", "d"}, {"y", "c"}},
                 {{"a", "x1", "y"}, {"a", "x2", "y"}, {"b", "y", "x1"}, {"p", "x1", "x1"}, {"p", "x2", "x1"},
                  {"q", "y", "y"}}};
  HilbertBundle bundle{{"x1", "x2", "y"}, {1, 1, 1}};
  ActionFrame frame{sg, act, bundle};
};

}  // namespace

TEST(ReIm, Examples) {
  const HilbertBundle b({"x1", "x2"}, {1, 1});
  OpKernel k(b);
  k.set(0, 1, scalar(2.0 * I));
  const auto [re, im] = re_im(k);
  // (K + K*)/2 and (K - K*)/(2i) at (x1, x2) with K(x2, x1) = 0.
  EXPECT_TRUE(MatrixNear(re.block(0, 1), scalar(I), 1e-15));
  EXPECT_TRUE(MatrixNear(im.block(0, 1), scalar(1.0), 1e-15));
  EXPECT_TRUE(MatrixNear(re.block(1, 0), scalar(-I), 1e-15));
  const Partition p = Partition::single(b);
  EXPECT_TRUE(is_partially_hermitian(re, p));
  EXPECT_TRUE(is_partially_hermitian(im, p));

  const OpKernel h = from_gram(b, CMatrix{{1.0, I}, {-I, 3.0}});
  EXPECT_TRUE(MatrixNear(gram_block(adjoint_kernel(h), p.parts[0]), gram_block(h, p.parts[0]), 0.0));

  const OpKernel zero(b);
  const auto [zr, zi] = re_im(zero);
  EXPECT_TRUE(zr.stored().empty());
  EXPECT_TRUE(zi.stored().empty());
}

TEST(ReIm, Reconstruction) {
  const HilbertBundle b({"a", "b", "c"}, {2, 1, 2});
  CounterRng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    OpKernel k(b);
    for (PointId x = 0; x < 3; ++x)
      for (PointId y = 0; y < 3; ++y) k.set(x, y, kgl::test::random_matrix(rng, b.dim(x), b.dim(y)));
    const auto [re, im] = re_im(k);
    const Partition p = Partition::single(b);
    const CMatrix g = gram_block(k, p.parts[0]);
    const CMatrix gr = gram_block(re, p.parts[0]), gi = gram_block(im, p.parts[0]);
    EXPECT_TRUE(MatrixNear(gr + gi * I, g, 1e-12));
    EXPECT_TRUE(MatrixNear(gr, gr.adjoint(), 1e-12));
    EXPECT_TRUE(MatrixNear(gi, gi.adjoint(), 1e-12));
  }
}

TEST(ConvBlocks, Examples) {
  const HilbertBundle s({"x1", "x2"}, {1, 1});
  OpKernel ones(s);
  for (PointId x = 0; x < 2; ++x)
    for (PointId y = 0; y < 2; ++y) ones.set(x, y, scalar(1.0));
  const Partition p = Partition::single(s);
  EXPECT_TRUE(MatrixNear(conv_blocks(ones, p).g[0], CMatrix{{1.0, 1.0}, {1.0, 1.0}}, 0.0));

  const HilbertBundle b({"x1", "x2"}, {1, 2});
  OpKernel diag(b);
  diag.set(0, 0, CMatrix::identity(1));
  diag.set(1, 1, CMatrix::identity(2));
  const Partition q = Partition::single(b);
  EXPECT_TRUE(MatrixNear(conv_blocks(diag, q).g[0], CMatrix::identity(3), 0.0));

  OpKernel layout(b);
  layout.set(0, 1, CMatrix{{2.0, 3.0}});
  const CMatrix g = conv_blocks(layout, q).g[0];
  ASSERT_EQ(g.rows(), 3u);
  EXPECT_EQ(g(0, 1), cplx(2.0));
  EXPECT_EQ(g(0, 2), cplx(3.0));
  EXPECT_EQ(g(1, 0), cplx(0.0));
  EXPECT_TRUE(ThrowsCode([&] { layout.set(0, 1, CMatrix{{1.0}}); }, ErrorCode::ShapeMismatch));
}

TEST(Partial, Examples) {
  const HilbertBundle s({"x1", "x2"}, {1, 1});
  const Partition p = Partition::single(s);
  // K = 1: eigenvalues 0 and 2.
  const OpKernel ones = from_gram(s, CMatrix{{1.0, 1.0}, {1.0, 1.0}});
  EXPECT_TRUE(is_partially_hermitian(ones, p));
  EXPECT_TRUE(is_partially_psd(ones, p));
  const OpKernel swap = from_gram(s, CMatrix{{0.0, 1.0}, {1.0, 0.0}});
  EXPECT_TRUE(is_partially_hermitian(swap, p));
  EXPECT_FALSE(is_partially_psd(swap, p));

  // Positive quadratic form, not Hermitian.
  const HilbertBundle one({"x"}, {2});
  OpKernel k(one);
  k.set(0, 0, CMatrix{{1.0, 1.0}, {0.0, 1.0}});
  EXPECT_FALSE(is_partially_hermitian(k, Partition::single(one)));
}

TEST(Partial, CrossPartBlocksIgnored) {
  const HilbertBundle s({"x1", "x2"}, {1, 1});
  const Partition p = Partition::from_parts(s, {"A", "B"}, {{0}, {1}});
  OpKernel k(s);
  k.set(0, 0, scalar(1.0));
  k.set(1, 1, scalar(2.0));
  k.set(0, 1, scalar(100.0));
  EXPECT_TRUE(is_partially_hermitian(k, p));
  EXPECT_TRUE(is_partially_psd(k, p));
  EXPECT_FALSE(is_partially_hermitian(k, Partition::single(s)));
}

TEST(Partial, BlockCriterionMatchesSelections) {
  CounterRng rng(32);
  const HilbertBundle b({"a", "b", "c"}, {1, 2, 2});
  const Partition p = Partition::single(b);
  for (int trial = 0; trial < 20; ++trial) {
    const bool psd = trial % 2 == 0;
    const CMatrix g = psd ? kgl::test::random_psd(rng, 5, 1 + trial % 4)
                          : kgl::test::random_hermitian_signature(rng, 2, 1, 2);
    const OpKernel k = from_gram(b, g);
    EXPECT_EQ(is_partially_psd(k, p), psd);
    // Finite selections (x_i, h_i), repeats allowed: sum <K(x_i, x_j) h_j, h_i>.
    double worst = 0.0;
    for (int sel = 0; sel < 40; ++sel) {
      const std::size_t n = rng.index(1, 5);
      std::vector<PointId> xs(n);
      std::vector<CVector> hs(n);
      for (std::size_t i = 0; i < n; ++i) {
        xs[i] = rng.index(0, 2);
        hs[i].resize(b.dim(xs[i]));
        for (auto& z : hs[i]) z = rng.complex_normal();
      }
      cplx sum{};
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const CMatrix v = k.block(xs[i], xs[j]) * CMatrix::column(hs[j]);
          for (std::size_t r = 0; r < hs[i].size(); ++r) sum += v(r, 0) * std::conj(hs[i][r]);
        }
      worst = std::min(worst, sum.real());
    }
    if (psd) {
      EXPECT_GE(worst, -1e-9);
    } else {
      // The negative eigenvector, split into per-point pieces, is a selection.
      const HermEig e = herm_eig(g);
      const CMatrix v = e.basis.col(0);
      const Section f = unstack(CVector(v.entries().begin(), v.entries().end()), p.parts[0], b);
      EXPECT_LT(kernel_inner(k, p, f, f).real(), -1e-6);
    }
  }
}

TEST(KernelInner, Examples) {
  const HilbertBundle s({"x1", "x2"}, {1, 1});
  const Partition p = Partition::single(s);
  const OpKernel ones = from_gram(s, CMatrix{{1.0, 1.0}, {1.0, 1.0}});
  const Section d1 = delta_section(s, "x1", {1.0}), d2 = delta_section(s, "x2", {1.0});
  EXPECT_EQ(kernel_inner(ones, p, d1, d1), cplx(1.0));
  EXPECT_EQ(kernel_inner(ones, p, d1, d2), cplx(1.0));
  EXPECT_EQ(kernel_inner(ones, p, Section(s), d2), cplx(0.0));
  const Partition split = Partition::from_parts(s, {"A", "B"}, {{0}, {1}});
  EXPECT_TRUE(ThrowsCode([&] { kernel_inner(ones, split, d1, d2); }, ErrorCode::CrossPartSupport));
}

TEST(KernelInner, ConvolutionIdentityAndSymmetry) {
  CounterRng rng(33);
  const HilbertBundle b({"a", "b", "c"}, {2, 1, 2});
  const Partition p = Partition::single(b);
  for (int trial = 0; trial < 10; ++trial) {
    const bool herm = trial % 2 == 0;
    const CMatrix g = herm ? kgl::test::random_hermitian(rng, 5) : kgl::test::random_matrix(rng, 5, 5);
    const OpKernel k = from_gram(b, g);
    CVector vf(5), vg(5);
    for (auto& z : vf) z = rng.complex_normal();
    for (auto& z : vg) z = rng.complex_normal();
    const Section f = unstack(vf, p.parts[0], b), h = unstack(vg, p.parts[0], b);
    // (C_K f)(y) = sum_x K(y, x) f(x), then <C_K f, h>_0.
    Section ck(b);
    for (PointId y = 0; y < 3; ++y) {
      CVector acc(b.dim(y));
      for (PointId x = 0; x < 3; ++x) {
        const CMatrix v = k.block(y, x) * CMatrix::column(f.at(x));
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v(i, 0);
      }
      ck.set(y, acc);
    }
    EXPECT_NEAR(std::abs(inner0(ck, h) - kernel_inner(k, p, f, h)), 0.0, 1e-11);
    const double sym = std::abs(kernel_inner(k, p, f, h) - std::conj(kernel_inner(k, p, h, f)));
    if (herm) {
      EXPECT_LT(sym, 1e-11);
    } else {
      EXPECT_GT(sym, 1e-6);
    }
  }
}

TEST(Dominates, Examples) {
  const HilbertBundle s({"x1", "x2"}, {1, 1});
  const Partition p = Partition::single(s);
  const OpKernel k = from_gram(s, CMatrix{{2.0, 1.0}, {1.0, 1.0}});
  EXPECT_TRUE(dominates(k, k, p).dominates);
  const OpKernel swap = from_gram(s, CMatrix{{0.0, 1.0}, {1.0, 0.0}});
  const OpKernel id = from_gram(s, CMatrix::identity(2));
  const Dominance d = dominates(id, swap, p);
  EXPECT_TRUE(d.dominates);
  EXPECT_TRUE(d.two_sided);
  EXPECT_FALSE(dominates(OpKernel(s), k, p).dominates);
  OpKernel nh(s);
  nh.set(0, 1, scalar(1.0));
  EXPECT_TRUE(ThrowsCode([&] { dominates(id, nh, p); }, ErrorCode::NotHermitian));
}

TEST(Shift, Examples) {
  Z2Swap z;
  EXPECT_TRUE(MatrixNear(z.frame.shift(z.sg.element_id("g")), CMatrix{{0.0, 1.0}, {1.0, 0.0}}, 0.0));
  EXPECT_TRUE(MatrixNear(z.frame.shift(z.sg.element_id("e")), CMatrix::identity(2), 0.0));
  Merge m;
  EXPECT_TRUE(MatrixNear(m.frame.shift(m.sg.element_id("a")), CMatrix{{1.0, 1.0}}, 0.0));
  ASSERT_TRUE(validate(m.sg).ok());
  ASSERT_TRUE(validate_action(m.sg, m.act, false).ok());

  const HilbertBundle uneven({"x1", "x2"}, {1, 2});
  const ActionFrame bad(z.sg, z.act, uneven);
  EXPECT_TRUE(ThrowsCode([&] { bad.shift(0); }, ErrorCode::OrbitBundleNotTrivial));
}

TEST(Shift, MultiplicativeOnGeneratedInstances) {
  for (const std::string name : {"pair_groupoid", "group_action", "partial_bijections", "group_as_groupoid"}) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const auto g = generate(random_family(name, seed));
      const HilbertBundle b(g.action.base(), orbit_constant_dims(g.sg, g.action, seed, 2));
      const ActionFrame frame(g.sg, g.action, b);
      for (ElemId a = 0; a < g.sg.size(); ++a)
        for (ElemId c = 0; c < g.sg.size(); ++c) {
          if (!g.sg.composable(a, c)) continue;
          EXPECT_TRUE(MatrixNear(frame.shift(g.sg.compose(a, c)), frame.shift(a) * frame.shift(c), 0.0));
        }
    }
  }
}

TEST(Invariance, Z2Examples) {
  Z2Swap z;
  const OpKernel circ = from_gram(z.bundle, CMatrix{{3.0, -0.5}, {-0.5, 3.0}});
  EXPECT_TRUE(is_invariant(circ, z.frame).invariant);
  const OpKernel d = from_gram(z.bundle, CMatrix{{1.0, 0.0}, {0.0, 2.0}});
  const InvarianceResult r = is_invariant(d, z.frame);
  ASSERT_FALSE(r.invariant);
  ASSERT_TRUE(r.witness);
  EXPECT_EQ(r.witness->element, z.sg.element_id("g"));
  EXPECT_EQ(r.witness->x, 0u);
  EXPECT_EQ(r.witness->y, 1u);
}

TEST(Invariance, VacuousWithoutApplicableElements) {
  // Elements exist but none acts between the parts carrying the kernel values.
  const StarSemigroupoid sg({"o", "u"}, {{"e", "o", "o"}, {"f", "u", "u"}},
                            {{"e", "e", "e"}, {"f", "f", "f"}}, {{"e", "e"}, {"f", "f"}});
  const LeftAction act(sg, {"x", "y"}, {{"x", "o"}, {"y", "u"}}, {{"e", "x", "x"}, {"f", "y", "y"}});
  const HilbertBundle b({"x", "y"}, {1, 1});
  const ActionFrame frame(sg, act, b);
  OpKernel k(b);
  k.set(0, 1, scalar(5.0));
  EXPECT_TRUE(is_invariant(k, frame).invariant);
}

TEST(Invariance, MatchesMatrixIdentity) {
  std::size_t invariant_seen = 0, broken_seen = 0;
  for (const std::string name : {"pair_groupoid", "group_action", "partial_bijections", "group_as_groupoid"}) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const auto g = generate(random_family(name, seed));
      const HilbertBundle b(g.action.base(), orbit_constant_dims(g.sg, g.action, seed, 2));
      const ActionFrame frame(g.sg, g.action, b);
      for (KernelMode mode : {KernelMode::psd_invariant, KernelMode::arbitrary}) {
        GeneratedKernel gk = generate_kernel(g.sg, g.action, b, mode, seed);
        const bool pointwise = is_invariant(gk.kernel, frame).invariant;
        const auto res = invariance_matrix_residuals(gk.kernel, frame);
        const double scale = conv_blocks(gk.kernel, frame.partition()).max_frobenius();
        const bool matrix = std::all_of(res.begin(), res.end(), [&](double r) { return r <= 1e-9 * std::max(1.0, scale); });
        EXPECT_EQ(pointwise, matrix) << name << " " << seed;
        (pointwise ? invariant_seen : broken_seen)++;
      }
    }
  }
  EXPECT_GT(invariant_seen, 0u);
  EXPECT_GT(broken_seen, 0u);
}

TEST(BoundedShift, Examples) {
  Z2Swap z;
  const OpKernel l = from_gram(z.bundle, CMatrix{{2.0, 1.0}, {1.0, 2.0}});
  const auto m = bounded_shift_constant(l, z.frame, z.sg.element_id("g"));
  ASSERT_TRUE(m);
  EXPECT_NEAR(*m, 1.0, 1e-12);

  Merge mg;
  OpKernel id(mg.bundle);
  for (PointId x = 0; x < 3; ++x) id.set(x, x, scalar(1.0));
  const auto ma = bounded_shift_constant(id, mg.frame, mg.sg.element_id("a"));
  ASSERT_TRUE(ma);
  EXPECT_NEAR(*ma, 2.0, 1e-12);

  // Zero form on the domain part: M = 0.
  const auto mz = bounded_shift_constant(OpKernel(z.bundle), z.frame, z.sg.element_id("g"));
  ASSERT_TRUE(mz);
  EXPECT_EQ(*mz, 0.0);

  const OpKernel neg = from_gram(z.bundle, CMatrix{{0.0, 1.0}, {1.0, 0.0}});
  EXPECT_TRUE(ThrowsCode([&] { bounded_shift_constant(neg, z.frame, 0); }, ErrorCode::NotPSD));
}

TEST(BoundedShift, UndefinedWhenKernelNotPreserved) {
  Merge mg;
  const ElemId a = mg.sg.element_id("a");
  // G_d = diag(1, 0) and G_c = 0: x2 spans ker G_d and lands in ker G_c.
  OpKernel harmless(mg.bundle);
  harmless.set(0, 0, scalar(1.0));
  const auto m = bounded_shift_constant(harmless, mg.frame, a);
  ASSERT_TRUE(m);
  EXPECT_EQ(*m, 0.0);
  // G_c = 1: x2 in ker G_d now maps outside ker G_c.
  OpKernel broken(mg.bundle);
  broken.set(0, 0, scalar(1.0));
  broken.set(2, 2, scalar(1.0));
  EXPECT_FALSE(bounded_shift_constant(broken, mg.frame, a).has_value());
}

TEST(BoundedShift, LeastConstantOnGeneratedInstances) {
  for (const std::string name : {"pair_groupoid", "group_action", "partial_bijections"}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto g = generate(random_family(name, seed));
      const HilbertBundle b(g.action.base(), orbit_constant_dims(g.sg, g.action, seed, 2));
      const ActionFrame frame(g.sg, g.action, b);
      GeneratedKernel gk = generate_kernel(g.sg, g.action, b, KernelMode::psd_invariant, seed);
      const ConvBlocks cb = conv_blocks(gk.kernel, frame.partition());
      for (ElemId a = 0; a < g.sg.size(); ++a) {
        const auto m = bounded_shift_constant(gk.kernel, frame, a);
        ASSERT_TRUE(m) << name << " " << seed;
        const CMatrix psi = frame.shift(a);
        const CMatrix pulled = psi.adjoint() * cb.g[g.sg.c(a)] * psi;
        const CMatrix& gd = cb.g[g.sg.d(a)];
        // M G_d - Psi* G_c Psi is PSD, and fails to be for any smaller M.
        const CMatrix slack = gd * (*m) - pulled;
        EXPECT_TRUE(psd_check((slack + slack.adjoint()) * 0.5, Tolerances{1e-8, 1e-10}));
        if (*m > 1e-6) {
          const CMatrix tight = gd * (*m * (1 - 1e-4)) - pulled;
          EXPECT_FALSE(psd_check((tight + tight.adjoint()) * 0.5, Tolerances{1e-8, 1e-10}));
        }
      }
    }
  }
}
