#pragma once

// Generators and matrix assertions shared by the unit tests.

#include <gtest/gtest.h>

#include <cstdint>
#include <string>

#include "kgl/numlin.hpp"
#include "kgl/random.hpp"

namespace kgl::test {

inline CMatrix random_matrix(CounterRng& rng, std::size_t r, std::size_t c) {
  CMatrix m(r, c);
  for (auto& z : m.entries()) z = rng.complex_normal();
  return m;
}

inline CMatrix random_hermitian(CounterRng& rng, std::size_t n) {
  const CMatrix a = random_matrix(rng, n, n);
  return (a + a.adjoint()) * 0.5;
}

// Hermitian with prescribed numbers of positive, negative and zero eigenvalues.
inline CMatrix random_hermitian_signature(CounterRng& rng, std::size_t p, std::size_t q, std::size_t z) {
  const std::size_t n = p + q + z;
  const CMatrix b = random_matrix(rng, n, p + q);
  CMatrix d(p + q, p + q);
  for (std::size_t i = 0; i < p + q; ++i) d(i, i) = (i < p ? 1.0 : -1.0) * rng.uniform(0.5, 2.0);
  return b * d * b.adjoint();
}

inline CMatrix random_psd(CounterRng& rng, std::size_t n, std::size_t rank) {
  const CMatrix b = random_matrix(rng, n, rank);
  return b * b.adjoint();
}

inline ::testing::AssertionResult MatrixNear(const CMatrix& a, const CMatrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    return ::testing::AssertionFailure() << "shape " << a.shape_string() << " vs " << b.shape_string();
  const double r = (a - b).frobenius_norm();
  if (r <= tol) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << "||A - B||_F = " << r << " > " << tol;
}

template <class F>
::testing::AssertionResult ThrowsCode(F&& f, ErrorCode code) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == code) return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << "threw " << e.what() << ", expected " << to_string(code);
  }
  return ::testing::AssertionFailure() << "did not throw " << to_string(code);
}

}  // namespace kgl::test
