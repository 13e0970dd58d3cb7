#pragma once

// Built-in families of finite *-semigroupoids with actions: pair groupoids,
// finite groups acting by permutations, groups acting on themselves, and
// partial bijections between finite fibres acting on themselves by left
// multiplication. Every generated instance passes validate and
// validate_action.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <tuple>
#include <type_traits>
#include <variant>
#include <vector>

#include "kgl/random.hpp"
#include "kgl/sgpd.hpp"

namespace kgl {

struct GroupTable {
  std::vector<std::string> labels;
  std::vector<std::size_t> mul;  // mul[g * n + h] = g h
  std::size_t identity = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t product(std::size_t g, std::size_t h) const { return mul.at(g * size() + h); }
  std::size_t inverse(std::size_t g) const {
    for (std::size_t h = 0; h < size(); ++h)
      if (product(g, h) == identity) return h;
    throw Error(ErrorCode::BadFamilyParams, "group element '" + labels.at(g) + "' has no inverse");
  }
};

/// A group together with a permutation action: perms[g][x] = g.x.
struct PermutationGroup {
  GroupTable group;
  std::vector<std::vector<std::size_t>> perms;
};

inline PermutationGroup cyclic_group(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::BadFamilyParams, "cyclic group of order 0");
  PermutationGroup pg;
  for (std::size_t k = 0; k < n; ++k) pg.group.labels.push_back(k == 0 ? "e" : "r" + std::to_string(k));
  pg.group.mul.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) pg.group.mul[i * n + j] = (i + j) % n;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::size_t> p(n);
    for (std::size_t x = 0; x < n; ++x) p[x] = (x + k) % n;
    pg.perms.push_back(std::move(p));
  }
  return pg;
}

/// Symmetries of the regular n-gon acting on its vertices; element (f, k) is
/// x -> k + (f ? -x : x) mod n.
inline PermutationGroup dihedral_group(std::size_t n) {
  if (n < 3) throw Error(ErrorCode::BadFamilyParams, "dihedral group needs n >= 3");
  PermutationGroup pg;
  const std::size_t m = 2 * n;
  auto encode = [n](std::size_t f, std::size_t k) { return f * n + k; };
  for (std::size_t f = 0; f < 2; ++f)
    for (std::size_t k = 0; k < n; ++k)
      pg.group.labels.push_back(f == 0 ? (k == 0 ? "e" : "r" + std::to_string(k)) : "s" + std::to_string(k));
  pg.group.mul.resize(m * m);
  for (std::size_t f1 = 0; f1 < 2; ++f1)
    for (std::size_t k1 = 0; k1 < n; ++k1)
      for (std::size_t f2 = 0; f2 < 2; ++f2)
        for (std::size_t k2 = 0; k2 < n; ++k2) {
          const std::size_t k = (k1 + (f1 ? n - k2 : k2)) % n;
          pg.group.mul[encode(f1, k1) * m + encode(f2, k2)] = encode(f1 ^ f2, k);
        }
  for (std::size_t f = 0; f < 2; ++f)
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<std::size_t> p(n);
      for (std::size_t x = 0; x < n; ++x) p[x] = (k + (f ? n - x : x)) % n;
      pg.perms.push_back(std::move(p));
    }
  return pg;
}

/// Full symmetric group on k <= 5 points, elements in lexicographic order.
inline PermutationGroup symmetric_group(std::size_t k) {
  if (k == 0 || k > 5) throw Error(ErrorCode::BadFamilyParams, "symmetric group supported for 1 <= k <= 5");
  PermutationGroup pg;
  std::vector<std::size_t> p(k);
  std::iota(p.begin(), p.end(), std::size_t{0});
  do {
    pg.perms.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  const std::size_t n = pg.perms.size();
  for (std::size_t g = 0; g < n; ++g) {
    std::string label = "p";
    for (std::size_t v : pg.perms[g]) label += std::to_string(v);
    pg.group.labels.push_back(g == 0 ? "e" : label);
  }
  pg.group.mul.resize(n * n);
  for (std::size_t g = 0; g < n; ++g)
    for (std::size_t h = 0; h < n; ++h) {
      std::vector<std::size_t> gh(k);
      for (std::size_t x = 0; x < k; ++x) gh[x] = pg.perms[g][pg.perms[h][x]];
      pg.group.mul[g * n + h] = static_cast<std::size_t>(
          std::find(pg.perms.begin(), pg.perms.end(), gh) - pg.perms.begin());
    }
  return pg;
}

/// Disjoint union of two permutation actions of the same group.
inline std::vector<std::vector<std::size_t>> union_action(const std::vector<std::vector<std::size_t>>& a,
                                                         const std::vector<std::vector<std::size_t>>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::BadFamilyParams, "union of actions of different groups");
  std::vector<std::vector<std::size_t>> out(a.size());
  const std::size_t off = a.empty() ? 0 : a[0].size();
  for (std::size_t g = 0; g < a.size(); ++g) {
    out[g] = a[g];
    for (std::size_t y : b[g]) out[g].push_back(off + y);
  }
  return out;
}

/// Left-regular permutation action of a group on itself.
inline std::vector<std::vector<std::size_t>> regular_action(const GroupTable& g) {
  std::vector<std::vector<std::size_t>> out(g.size(), std::vector<std::size_t>(g.size()));
  for (std::size_t a = 0; a < g.size(); ++a)
    for (std::size_t b = 0; b < g.size(); ++b) out[a][b] = g.product(a, b);
  return out;
}

struct PairGroupoidFamily {
  std::vector<std::string> symbols{"s", "t"};
  std::size_t points_per_symbol = 1;
};

struct GroupActionFamily {
  PermutationGroup group;
};

struct PartialBijectionsFamily {
  std::vector<std::size_t> fiber_sizes{1, 1};
};

struct GroupAsGroupoidFamily {
  GroupTable group;
};

using Family = std::variant<PairGroupoidFamily, GroupActionFamily, PartialBijectionsFamily, GroupAsGroupoidFamily>;

struct GeneratedInstance {
  StarSemigroupoid sg;
  LeftAction action;
  bool unital = false;
};

namespace detail {

using Triple = std::tuple<std::string, std::string, std::string>;
using Pair = std::pair<std::string, std::string>;

inline StarSemigroupoid group_semigroupoid(const GroupTable& g) {
  const std::size_t n = g.size();
  if (n == 0 || g.mul.size() != n * n) throw Error(ErrorCode::BadFamilyParams, "malformed group table");
  std::vector<ElementDecl> elems;
  std::vector<Triple> compose;
  std::vector<Pair> star;
  for (std::size_t a = 0; a < n; ++a) elems.push_back({g.labels[a], "o", "o"});
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) compose.emplace_back(g.labels[a], g.labels[b], g.labels[g.product(a, b)]);
    star.emplace_back(g.labels[a], g.labels[g.inverse(a)]);
  }
  return StarSemigroupoid({"o"}, elems, compose, star, std::vector<Pair>{{"o", g.labels[g.identity]}});
}

/// Action of a semigroupoid on itself by left multiplication, anchor = c.
inline LeftAction self_action(const StarSemigroupoid& sg) {
  std::vector<Pair> anchor;
  std::vector<Triple> act;
  for (ElemId x = 0; x < sg.size(); ++x) anchor.emplace_back(sg.label(x), sg.symbol_label(sg.c(x)));
  for (ElemId a = 0; a < sg.size(); ++a)
    for (ElemId x = 0; x < sg.size(); ++x)
      if (sg.composable(a, x)) act.emplace_back(sg.label(a), sg.label(x), sg.label(sg.compose(a, x)));
  return LeftAction(sg, sg.elements(), anchor, act);
}

// All injective partial maps {0..m-1} -> {0..n-1}; -1 marks "undefined".
inline void partial_injections(std::size_t m, std::size_t n, std::vector<int>& cur, std::vector<bool>& used,
                               std::vector<std::vector<int>>& out) {
  if (cur.size() == m) {
    out.push_back(cur);
    return;
  }
  cur.push_back(-1);
  partial_injections(m, n, cur, used, out);
  cur.pop_back();
  for (std::size_t y = 0; y < n; ++y) {
    if (used[y]) continue;
    used[y] = true;
    cur.push_back(static_cast<int>(y));
    partial_injections(m, n, cur, used, out);
    cur.pop_back();
    used[y] = false;
  }
}

inline std::string map_label(std::size_t from, std::size_t to, const std::vector<int>& m) {
  std::string s = "F" + std::to_string(to) + "<F" + std::to_string(from) + "|";
  for (int v : m) s += v < 0 ? std::string("-") : std::to_string(v);
  return s;
}

}  // namespace detail

/// Action of a semigroupoid on its symbol set: a.s = c(a), anchor = identity.
inline LeftAction symbol_action(const StarSemigroupoid& sg) {
  std::vector<std::pair<std::string, std::string>> anchor;
  std::vector<std::tuple<std::string, std::string, std::string>> act;
  for (SymbolId s = 0; s < sg.symbol_count(); ++s) anchor.emplace_back(sg.symbol_label(s), sg.symbol_label(s));
  for (ElemId a = 0; a < sg.size(); ++a)
    act.emplace_back(sg.label(a), sg.symbol_label(sg.d(a)), sg.symbol_label(sg.c(a)));
  return LeftAction(sg, sg.symbols(), anchor, act);
}

inline LeftAction self_action(const StarSemigroupoid& sg) { return detail::self_action(sg); }

inline GeneratedInstance generate(const Family& family) {
  using detail::Pair;
  using detail::Triple;
  return std::visit(
      [](const auto& f) -> GeneratedInstance {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PairGroupoidFamily>) {
          if (f.symbols.empty() || f.points_per_symbol == 0)
            throw Error(ErrorCode::BadFamilyParams, "pair groupoid needs symbols and points");
          auto el = [](const std::string& u, const std::string& v) { return "(" + u + "," + v + ")"; };
          std::vector<ElementDecl> elems;
          std::vector<Triple> compose;
          std::vector<Pair> star, units;
          for (const auto& u : f.symbols)
            for (const auto& v : f.symbols) elems.push_back({el(u, v), v, u});
          for (const auto& u : f.symbols)
            for (const auto& v : f.symbols) {
              star.emplace_back(el(u, v), el(v, u));
              for (const auto& w : f.symbols) compose.emplace_back(el(u, v), el(v, w), el(u, w));
            }
          for (const auto& s : f.symbols) units.emplace_back(s, el(s, s));
          StarSemigroupoid sg(f.symbols, elems, compose, star, units);
          std::vector<std::string> base;
          std::vector<Pair> anchor;
          std::vector<Triple> act;
          for (const auto& s : f.symbols)
            for (std::size_t p = 0; p < f.points_per_symbol; ++p) {
              base.push_back(s + "#" + std::to_string(p));
              anchor.emplace_back(base.back(), s);
            }
          for (const auto& u : f.symbols)
            for (const auto& v : f.symbols)
              for (std::size_t p = 0; p < f.points_per_symbol; ++p)
                act.emplace_back(el(u, v), v + "#" + std::to_string(p), u + "#" + std::to_string(p));
          LeftAction action(sg, base, anchor, act);
          return {std::move(sg), std::move(action), true};
        } else if constexpr (std::is_same_v<T, GroupActionFamily>) {
          const GroupTable& g = f.group.group;
          if (f.group.perms.size() != g.size() || g.size() == 0)
            throw Error(ErrorCode::BadFamilyParams, "one permutation per group element required");
          const std::size_t npts = f.group.perms[0].size();
          for (std::size_t a = 0; a < g.size(); ++a) {
            if (f.group.perms[a].size() != npts) throw Error(ErrorCode::BadFamilyParams, "ragged permutations");
            for (std::size_t b = 0; b < g.size(); ++b)
              for (std::size_t x = 0; x < npts; ++x)
                if (f.group.perms[g.product(a, b)][x] != f.group.perms[a][f.group.perms[b][x]])
                  throw Error(ErrorCode::BadFamilyParams, "permutations do not form an action");
          }
          StarSemigroupoid sg = detail::group_semigroupoid(g);
          std::vector<std::string> base;
          std::vector<Pair> anchor;
          std::vector<Triple> act;
          for (std::size_t x = 0; x < npts; ++x) {
            base.push_back("x" + std::to_string(x));
            anchor.emplace_back(base.back(), "o");
          }
          for (std::size_t a = 0; a < g.size(); ++a)
            for (std::size_t x = 0; x < npts; ++x) act.emplace_back(g.labels[a], base[x], base[f.group.perms[a][x]]);
          LeftAction action(sg, base, anchor, act);
          return {std::move(sg), std::move(action), true};
        } else if constexpr (std::is_same_v<T, PartialBijectionsFamily>) {
          if (f.fiber_sizes.empty()) throw Error(ErrorCode::BadFamilyParams, "at least one fibre required");
          for (std::size_t sz : f.fiber_sizes)
            if (sz == 0 || sz > 4) throw Error(ErrorCode::BadFamilyParams, "fibre sizes must lie in 1..4");
          const std::size_t k = f.fiber_sizes.size();
          struct PMap {
            std::size_t from, to;
            std::vector<int> m;
          };
          std::vector<PMap> maps;
          for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) {
              std::vector<std::vector<int>> all;
              std::vector<int> cur;
              std::vector<bool> used(f.fiber_sizes[j], false);
              detail::partial_injections(f.fiber_sizes[i], f.fiber_sizes[j], cur, used, all);
              for (auto& m : all) maps.push_back({i, j, std::move(m)});
            }
          std::vector<std::string> symbols;
          for (std::size_t i = 0; i < k; ++i) symbols.push_back("F" + std::to_string(i));
          std::vector<ElementDecl> elems;
          for (const auto& p : maps)
            elems.push_back({detail::map_label(p.from, p.to, p.m), symbols[p.from], symbols[p.to]});
          auto find = [&](std::size_t from, std::size_t to, const std::vector<int>& m) {
            return detail::map_label(from, to, m);
          };
          std::vector<Triple> compose;
          std::vector<Pair> star, units;
          for (const auto& a : maps) {
            for (const auto& b : maps) {
              if (b.to != a.from) continue;
              std::vector<int> ab(b.m.size(), -1);
              for (std::size_t x = 0; x < b.m.size(); ++x)
                if (b.m[x] >= 0) ab[x] = a.m[static_cast<std::size_t>(b.m[x])];
              compose.emplace_back(find(a.from, a.to, a.m), find(b.from, b.to, b.m), find(b.from, a.to, ab));
            }
            std::vector<int> inv(f.fiber_sizes[a.to], -1);
            for (std::size_t x = 0; x < a.m.size(); ++x)
              if (a.m[x] >= 0) inv[static_cast<std::size_t>(a.m[x])] = static_cast<int>(x);
            star.emplace_back(find(a.from, a.to, a.m), find(a.to, a.from, inv));
          }
          for (std::size_t i = 0; i < k; ++i) {
            std::vector<int> id(f.fiber_sizes[i]);
            std::iota(id.begin(), id.end(), 0);
            units.emplace_back(symbols[i], find(i, i, id));
          }
          StarSemigroupoid sg(symbols, elems, compose, star, units);
          LeftAction action = detail::self_action(sg);
          return {std::move(sg), std::move(action), true};
        } else {
          StarSemigroupoid sg = detail::group_semigroupoid(f.group);
          LeftAction action = detail::self_action(sg);
          return {std::move(sg), std::move(action), true};
        }
      },
      family);
}

/// Family parameters drawn deterministically from `seed`. Names:
/// pair_groupoid, group_action, partial_bijections, group_as_groupoid.
inline Family random_family(const std::string& name, std::uint64_t seed) {
  CounterRng rng(seed, 0xFA111);
  if (name == "pair_groupoid") {
    PairGroupoidFamily f;
    const std::size_t k = rng.index(1, 3);
    f.symbols.clear();
    for (std::size_t i = 0; i < k; ++i) f.symbols.push_back("s" + std::to_string(i));
    f.points_per_symbol = rng.index(1, 3);
    return f;
  }
  if (name == "group_action") {
    PermutationGroup pg;
    switch (rng.index(0, 3)) {
      case 0: pg = cyclic_group(rng.index(2, 5)); break;
      case 1: pg = dihedral_group(rng.index(3, 4)); break;
      case 2: pg = symmetric_group(3); break;
      default: pg = cyclic_group(2); break;
    }
    if (rng.index(0, 1) == 1) pg.perms = union_action(pg.perms, pg.perms);
    if (pg.group.size() <= 6 && rng.index(0, 2) == 0) pg.perms = union_action(pg.perms, regular_action(pg.group));
    return GroupActionFamily{std::move(pg)};
  }
  if (name == "partial_bijections") {
    static const std::vector<std::vector<std::size_t>> choices{{1}, {2}, {1, 1}, {2, 1}, {1, 2}, {1, 1, 1}, {2, 2}};
    return PartialBijectionsFamily{choices[rng.index(0, choices.size() - 1)]};
  }
  if (name == "group_as_groupoid") {
    const std::size_t pick = rng.index(0, 2);
    PermutationGroup pg = pick == 0 ? cyclic_group(rng.index(1, 4)) : pick == 1 ? dihedral_group(3) : symmetric_group(3);
    return GroupAsGroupoidFamily{pg.group};
  }
  throw Error(ErrorCode::BadFamilyParams, "unknown family '" + name + "'");
}

/// Fibre dimensions constant on the connected components of x ~ a.x, each
/// component drawn uniformly from 1..max_dim.
inline std::vector<std::size_t> orbit_constant_dims(const StarSemigroupoid& sg, const LeftAction& act,
                                                    std::uint64_t seed, std::size_t max_dim) {
  std::vector<std::size_t> parent(act.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (ElemId a = 0; a < sg.size(); ++a)
    for (PointId x = 0; x < act.size(); ++x) {
      const PointId y = act.table(a, x);
      if (y != kNone) parent[find(x)] = find(y);
    }
  CounterRng rng(seed, 0xD1A5);
  std::vector<std::size_t> comp_dim(act.size(), 0);
  std::vector<std::size_t> dims(act.size());
  for (PointId x = 0; x < act.size(); ++x) {
    const std::size_t r = find(x);
    if (comp_dim[r] == 0) comp_dim[r] = rng.index(1, std::max<std::size_t>(1, max_dim));
    dims[x] = comp_dim[r];
  }
  return dims;
}

}  // namespace kgl
