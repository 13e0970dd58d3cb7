#pragma once

// Seeded kernel generators on a validated instance skeleton. Groupoid
// actions get orbit averages G_t = sum_{a : s0 -> t} Psi(a) A Psi(a)*;
// inverse semigroupoids acting on themselves get K(x, y) = V_x* J V_y with
// V_x = Phi(x) W from the left regular partial representation.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "kgl/kernel.hpp"
#include "kgl/random.hpp"
#include "kgl/sgpd.hpp"

namespace kgl {

enum class KernelMode { psd_invariant, hermitian_invariant, arbitrary };

inline const char* to_string(KernelMode m) {
  switch (m) {
    case KernelMode::psd_invariant: return "psd_invariant";
    case KernelMode::hermitian_invariant: return "hermitian_invariant";
    case KernelMode::arbitrary: return "arbitrary";
  }
  return "?";
}

inline KernelMode parse_kernel_mode(const std::string& s) {
  if (s == "psd_invariant") return KernelMode::psd_invariant;
  if (s == "hermitian_invariant") return KernelMode::hermitian_invariant;
  if (s == "arbitrary") return KernelMode::arbitrary;
  throw Error(ErrorCode::BadFamilyParams, "unknown kernel mode '" + s + "'");
}

struct GeneratedKernel {
  OpKernel kernel;
  std::optional<OpKernel> dominant;  // invariant L with -L <= K <= L, when the method yields one
  std::string method;                // "orbit-average", "regular-representation" or "random"
};

namespace detail {

inline CMatrix random_matrix(CounterRng& rng, std::size_t r, std::size_t c) {
  CMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rng.complex_normal();
  return m;
}

/// R diag(w) R* with R of random rank 1..n; w = 1 or a random sign pattern
/// containing both signs when n allows it.
inline CMatrix random_hermitian(CounterRng& rng, std::size_t n, bool definite) {
  if (n == 0) return {};
  const std::size_t k = rng.index(1, n);
  const CMatrix r = random_matrix(rng, n, k);
  std::vector<double> w(k, 1.0);
  if (!definite) {
    for (auto& x : w) x = rng.index(0, 1) ? 1.0 : -1.0;
    if (k > 1) {
      w[0] = 1.0;
      w[1] = -1.0;
    }
  }
  return r * CMatrix::diagonal(w) * r.adjoint();
}

inline bool is_left_multiplication(const StarSemigroupoid& sg, const LeftAction& act) {
  if (act.size() != sg.size()) return false;
  for (PointId x = 0; x < act.size(); ++x)
    if (act.label(x) != sg.label(x)) return false;
  for (ElemId a = 0; a < sg.size(); ++a)
    for (ElemId x = 0; x < sg.size(); ++x) {
      const PointId y = act.table(a, x);
      const ElemId ax = sg.composable(a, x) ? sg.table(a, x) : kNone;
      if (y != ax) return false;
    }
  return true;
}

inline GeneratedKernel orbit_average(const StarSemigroupoid& sg, const ActionFrame& frame, CounterRng& rng,
                                     bool definite) {
  const std::size_t ns = sg.symbol_count();
  const Partition& p = frame.partition();
  // Symbols joined by arrows; the smallest of each class is the source s0.
  std::vector<std::size_t> root(ns);
  std::iota(root.begin(), root.end(), std::size_t{0});
  auto find = [&](std::size_t s) {
    while (root[s] != s) s = root[s] = root[root[s]];
    return s;
  };
  for (ElemId a = 0; a < sg.size(); ++a) {
    const std::size_t u = find(sg.d(a)), v = find(sg.c(a));
    if (u != v) root[std::max(u, v)] = std::min(u, v);
  }
  std::vector<CMatrix> g(ns), l(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    g[s] = CMatrix(p.parts[s].total_dim(), p.parts[s].total_dim());
    l[s] = g[s];
  }
  for (std::size_t s0 = 0; s0 < ns; ++s0) {
    if (find(s0) != s0) continue;
    const std::size_t n = p.parts[s0].total_dim();
    const CMatrix a = random_hermitian(rng, n, definite);
    const CMatrix abs_a = herm_fn(a, HermFn::abs);
    for (ElemId e = 0; e < sg.size(); ++e) {
      if (sg.d(e) != s0) continue;
      const CMatrix psi = frame.shift(e);
      g[sg.c(e)] += psi * a * psi.adjoint();
      l[sg.c(e)] += psi * abs_a * psi.adjoint();
    }
  }
  for (std::size_t s = 0; s < ns; ++s) {
    g[s] = (g[s] + g[s].adjoint()) * cplx{0.5};
    l[s] = (l[s] + l[s].adjoint()) * cplx{0.5};
  }
  return {kernel_from_blocks(frame.bundle(), p, g), kernel_from_blocks(frame.bundle(), p, l), "orbit-average"};
}

inline GeneratedKernel regular_representation(const StarSemigroupoid& sg, const ActionFrame& frame, CounterRng& rng,
                                              bool definite) {
  const std::size_t n = sg.size();
  const HilbertBundle& bundle = frame.bundle();
  const std::size_t m = rng.index(1, 3);
  std::vector<double> j0(m, 1.0);
  if (!definite) {
    for (auto& x : j0) x = rng.index(0, 1) ? 1.0 : -1.0;
    if (m > 1) {
      j0[0] = 1.0;
      j0[m - 1] = -1.0;
    }
  }
  const std::size_t big = n * m;
  // Phi(x) e_g = e_{xg} when x* x g = g, else 0; tensored with I_m.
  auto phi = [&](ElemId x) {
    CMatrix out(big, big);
    for (ElemId g = 0; g < n; ++g) {
      if (!sg.composable(x, g)) continue;
      const ElemId xg = sg.compose(x, g);
      if (sg.compose(sg.star(x), xg) != g) continue;
      for (std::size_t i = 0; i < m; ++i) out(xg * m + i, g * m + i) = 1.0;
    }
    return out;
  };
  // One W per component of x ~ a.x, so that V_{a.x} = Phi(a) V_x.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (ElemId a = 0; a < n; ++a)
    for (PointId x = 0; x < n; ++x)
      if (sg.composable(a, x)) parent[find(x)] = find(sg.compose(a, x));
  std::vector<std::optional<CMatrix>> w(n);
  std::vector<CMatrix> v(n);
  for (PointId x = 0; x < n; ++x) {
    const std::size_t r = find(x);
    if (!w[r]) w[r] = random_matrix(rng, big, bundle.dim(x));
    v[x] = phi(x) * *w[r];
  }
  std::vector<double> jd(big);
  for (std::size_t i = 0; i < big; ++i) jd[i] = j0[i % m];
  const CMatrix j = CMatrix::diagonal(jd);
  OpKernel k(bundle), l(bundle);
  const Partition& p = frame.partition();
  for (PointId x = 0; x < n; ++x)
    for (PointId y = 0; y < n; ++y) {
      if (p.part_of[x] != p.part_of[y]) continue;
      k.set(x, y, v[x].adjoint() * j * v[y]);
      l.set(x, y, v[x].adjoint() * v[y]);
    }
  k.prune();
  l.prune();
  return {std::move(k), std::move(l), "regular-representation"};
}

inline GeneratedKernel random_kernel(const HilbertBundle& bundle, CounterRng& rng) {
  OpKernel k(bundle);
  for (PointId x = 0; x < bundle.size(); ++x)
    for (PointId y = x; y < bundle.size(); ++y) {
      CMatrix b = random_matrix(rng, bundle.dim(x), bundle.dim(y));
      if (x == y) {
        b = (b + b.adjoint()) * cplx{0.5};
        k.set(x, x, b);
      } else {
        k.set(y, x, b.adjoint());
        k.set(x, y, std::move(b));
      }
    }
  return {std::move(k), std::nullopt, "random"};
}

}  // namespace detail

/// Deterministic in `seed`. Invariant modes need a groupoid with a unital
/// action (orbit averages) or an inverse semigroupoid whose star is the
/// inverse acting on itself by left multiplication; anything else raises
/// UnsupportedFamily.
inline GeneratedKernel generate_kernel(const StarSemigroupoid& sg, const LeftAction& act, const HilbertBundle& bundle,
                                       KernelMode mode, std::uint64_t seed) {
  CounterRng rng(seed, 0xCE51);
  if (mode == KernelMode::arbitrary) return detail::random_kernel(bundle, rng);
  const ActionFrame frame(sg, act, bundle);
  if (!frame.orbit_trivial()) throw Error(ErrorCode::OrbitBundleNotTrivial, "fibre dimension varies along an orbit");
  const bool definite = mode == KernelMode::psd_invariant;
  const Classification cl = classify(sg);
  if (cl.is_groupoid && validate_action(sg, act, true).ok()) return detail::orbit_average(sg, frame, rng, definite);
  if (cl.is_inverse && cl.star_is_inverse && detail::is_left_multiplication(sg, act))
    return detail::regular_representation(sg, frame, rng, definite);
  throw Error(ErrorCode::UnsupportedFamily,
              "invariant generation needs a groupoid with a unital action or an inverse semigroupoid acting on itself");
}

}  // namespace kgl
