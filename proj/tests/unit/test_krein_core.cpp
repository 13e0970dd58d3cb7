#include <gtest/gtest.h>

#include "kgl/krein_core.hpp"
#include "support.hpp"

using namespace kgl;
using kgl::test::MatrixNear;
using kgl::test::ThrowsCode;

namespace {

const cplx I{0.0, 1.0};

CMatrix diag(std::initializer_list<double> d) {
  std::vector<double> v(d);
  return CMatrix::diagonal(v);
}

CMatrix swap2() { return CMatrix{{0.0, 1.0}, {1.0, 0.0}}; }

}  // namespace

TEST(KreinSpace, WithSignature) {
  const KreinSpace k = KreinSpace::with_signature(2, 1);
  EXPECT_EQ(k.dim(), 3u);
  EXPECT_TRUE(MatrixNear(k.j, diag({1, 1, -1}), 0.0));
  EXPECT_EQ(k.symmetry_residual(), 0.0);
  EXPECT_EQ(k.pairing({1.0, 0.0, 1.0}, {1.0, 0.0, 1.0}), cplx(0.0));
  EXPECT_EQ(k.pairing({0.0, I, 0.0}, {0.0, 1.0, 0.0}), I);
}

TEST(KreinAdjoint, Examples) {
  CounterRng rng(51);
  const KreinSpace h = KreinSpace::with_signature(3, 0), g = KreinSpace::with_signature(2, 0);
  const CMatrix t = kgl::test::random_matrix(rng, 2, 3);
  EXPECT_TRUE(MatrixNear(krein_adjoint(t, h, g), t.adjoint(), 0.0));

  const KreinSpace k = KreinSpace::with_signature(1, 1);
  EXPECT_TRUE(MatrixNear(krein_adjoint(k.j, k, k), k.j, 0.0));
  // diag(1,-1) [[0,1],[1,0]] diag(1,-1).
  EXPECT_TRUE(MatrixNear(krein_adjoint(swap2(), k, k), CMatrix{{0.0, -1.0}, {-1.0, 0.0}}, 0.0));
  EXPECT_TRUE(ThrowsCode([&] { krein_adjoint(t, g, h); }, ErrorCode::ShapeMismatch));
}

TEST(KreinAdjoint, InvolutiveConjugateLinearAntiMultiplicative) {
  CounterRng rng(52);
  for (int trial = 0; trial < 20; ++trial) {
    const KreinSpace a = KreinSpace::with_signature(rng.index(0, 2), rng.index(1, 2));
    const KreinSpace b = KreinSpace::with_signature(rng.index(1, 2), rng.index(0, 2));
    const KreinSpace c = KreinSpace::with_signature(rng.index(0, 3), rng.index(0, 1) + 1);
    const CMatrix t = kgl::test::random_matrix(rng, b.dim(), a.dim());
    const CMatrix t2 = kgl::test::random_matrix(rng, b.dim(), a.dim());
    const CMatrix s = kgl::test::random_matrix(rng, c.dim(), b.dim());
    EXPECT_TRUE(MatrixNear(krein_adjoint(krein_adjoint(t, a, b), b, a), t, 0.0));
    const cplx z = rng.complex_normal();
    EXPECT_TRUE(MatrixNear(krein_adjoint(t * z + t2, a, b),
                           krein_adjoint(t, a, b) * std::conj(z) + krein_adjoint(t2, a, b), 1e-12));
    EXPECT_TRUE(MatrixNear(krein_adjoint(s * t, a, c), krein_adjoint(t, a, b) * krein_adjoint(s, b, c), 1e-12));
    // [T u, v]_b = [u, T# v]_a.
    CVector u(a.dim()), v(b.dim());
    for (auto& x : u) x = rng.complex_normal();
    for (auto& x : v) x = rng.complex_normal();
    const CMatrix tu = t * CMatrix::column(u);
    const CMatrix tsv = krein_adjoint(t, a, b) * CMatrix::column(v);
    const cplx lhs = b.pairing(CVector(tu.entries().begin(), tu.entries().end()), v);
    const cplx rhs = a.pairing(u, CVector(tsv.entries().begin(), tsv.entries().end()));
    EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-11);
  }
}

TEST(InducedKrein, Examples) {
  const InducedKrein d = induced_krein(diag({1, -1}));
  EXPECT_EQ(d.space.p, 1u);
  EXPECT_EQ(d.space.q, 1u);
  EXPECT_TRUE(MatrixNear(d.space.j, diag({1, -1}), 0.0));
  EXPECT_TRUE(MatrixNear(d.pi, CMatrix::identity(2), 1e-15));

  const InducedKrein s = induced_krein(swap2());
  EXPECT_EQ(s.space.p, 1u);
  EXPECT_EQ(s.space.q, 1u);
  EXPECT_LE(induced_residual(s, swap2()), 1e-12);
  // Hand eigenvectors: + block (1,1)/sqrt2, - block (1,-1)/sqrt2, |lambda| = 1.
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_TRUE(MatrixNear(s.pi, CMatrix{{r, r}, {r, -r}}, 1e-13));

  const InducedKrein z = induced_krein(CMatrix::zeros(2, 2));
  EXPECT_EQ(z.space.dim(), 0u);
  EXPECT_EQ(z.pi.rows(), 0u);
  EXPECT_EQ(z.pi.cols(), 2u);

  EXPECT_TRUE(ThrowsCode([] { induced_krein(CMatrix{{0.0, 1.0}, {0.0, 0.0}}); }, ErrorCode::NotHermitian));
}

TEST(InducedKrein, RandomHermitian) {
  CounterRng rng(53);
  const Tolerances tol;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t p = rng.index(0, 3), q = rng.index(0, 3), z = rng.index(0, 2);
    if (p + q + z == 0) continue;
    const CMatrix a = kgl::test::random_hermitian_signature(rng, p, q, z);
    for (bool reversed : {false, true}) {
      const InducedKrein k = induced_krein(a, tol, {reversed});
      EXPECT_EQ(k.space.p, p);
      EXPECT_EQ(k.space.q, q);
      EXPECT_LE(induced_residual(k, a), tol.bound(a.frobenius_norm()));
      EXPECT_EQ(matrix_rank(k.pi), p + q);
      EXPECT_TRUE(MatrixNear(k.pi * k.pi_right_inv, CMatrix::identity(p + q), 1e-9));
      EXPECT_EQ(k.space.symmetry_residual(), 0.0);
    }
  }
}

TEST(Lift, Example) {
  const CMatrix a = diag({1, -1});
  const CMatrix t = swap2();
  const CMatrix s{{0.0, -1.0}, {-1.0, 0.0}};
  const LiftResult r = lift_operator(a, a, t, s);
  EXPECT_TRUE(MatrixNear(r.t_lift, t, 1e-14));
  EXPECT_TRUE(MatrixNear(r.s_lift, s, 1e-14));
  EXPECT_LE(r.pairing, 1e-14);
}

TEST(Lift, ZeroAndErrors) {
  CounterRng rng(54);
  const CMatrix a = kgl::test::random_hermitian_signature(rng, 1, 1, 1);
  const CMatrix b = kgl::test::random_hermitian_signature(rng, 2, 0, 0);
  const LiftResult r = lift_operator(a, b, CMatrix::zeros(2, 3), CMatrix::zeros(3, 2));
  EXPECT_EQ(r.t_lift.max_abs(), 0.0);
  EXPECT_EQ(r.s_lift.max_abs(), 0.0);
  EXPECT_TRUE(ThrowsCode([&] { lift_operator(a, b, kgl::test::random_matrix(rng, 2, 3), CMatrix::zeros(3, 2)); },
                         ErrorCode::PairingViolated));
  EXPECT_TRUE(ThrowsCode([&] { lift_operator(a, b, CMatrix::zeros(3, 2), CMatrix::zeros(2, 3)); },
                         ErrorCode::ShapeMismatch));
}

TEST(Lift, InvertibleCase) {
  CounterRng rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix a = kgl::test::random_hermitian_signature(rng, 2, 1, 0);
    const CMatrix b = kgl::test::random_hermitian_signature(rng, 1, 1, 0);
    const CMatrix t = kgl::test::random_matrix(rng, 2, 3);
    // S* A = B T with A invertible: S = A^{-1} T* B.
    const CMatrix s = pinv(a) * t.adjoint() * b;
    const LiftResult r = lift_operator(a, b, t, s);
    const CMatrix pa_inv = pinv(r.a.pi);
    EXPECT_TRUE(MatrixNear(r.t_lift, r.b.pi * t * pa_inv, 1e-10));
    EXPECT_LE(r.factor_t, 1e-10);
    EXPECT_LE(r.factor_s, 1e-10);
    EXPECT_LE(r.pairing, 1e-9);
  }
}

TEST(Lift, SingularSources) {
  CounterRng rng(56);
  for (int trial = 0; trial < 15; ++trial) {
    const CMatrix a = kgl::test::random_hermitian_signature(rng, 1, 1, 2);
    const CMatrix b = kgl::test::random_hermitian_signature(rng, 2, 1, 0);
    const CMatrix s = kgl::test::random_matrix(rng, 4, 3);
    // B invertible: T = B^{-1} S* A satisfies B T = S* A and kills ker A.
    const CMatrix t = pinv(b) * s.adjoint() * a;
    const LiftResult r = lift_operator(a, b, t, s);
    const double scale = std::max(1.0, r.b.pi.frobenius_norm() * t.frobenius_norm());
    EXPECT_LE(r.well_defined, 1e-9 * scale);
    EXPECT_LE(r.factor_t, 1e-9 * scale);
    EXPECT_LE(r.factor_s, 1e-9 * scale);
    EXPECT_LE(r.pairing, 1e-9 * scale);
  }
}

TEST(GapUniqueness, Examples) {
  const GapUniqueness d = gap_uniqueness(diag({1, -1}));
  EXPECT_TRUE(d.unique);
  EXPECT_DOUBLE_EQ(*d.gap_neg, 1.0);
  EXPECT_DOUBLE_EQ(*d.gap_pos, 1.0);
  const GapUniqueness z = gap_uniqueness(CMatrix::zeros(2, 2));
  EXPECT_TRUE(z.unique);
  EXPECT_FALSE(z.gap_neg);
  EXPECT_FALSE(z.gap_pos);
  EXPECT_TRUE(ThrowsCode([] { gap_uniqueness(CMatrix{{0.0, 1.0}, {0.0, 0.0}}); }, ErrorCode::NotHermitian));
}

TEST(GapUniqueness, AlwaysUniqueInFiniteDimensions) {
  CounterRng rng(57);
  for (int trial = 0; trial < 50; ++trial) {
    const CMatrix a = kgl::test::random_hermitian(rng, 1 + trial % 7);
    const GapUniqueness u = gap_uniqueness(a);
    EXPECT_TRUE(u.unique);
    EXPECT_GT(u.epsilon, 0.0);
  }
}
