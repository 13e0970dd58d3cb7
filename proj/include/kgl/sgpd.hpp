#pragma once

// Finite *-semigroupoids given by explicit tables, exhaustive axiom
// validation, classification (unit / transitive / inverse / groupoid),
// left actions on finite sets and their orbits.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "kgl/bundle.hpp"
#include "kgl/error.hpp"

namespace kgl {

using ElemId = std::size_t;
using SymbolId = std::size_t;
inline constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct ElementDecl {
  std::string id;
  std::string d;
  std::string c;
};

class StarSemigroupoid {
 public:
  StarSemigroupoid() = default;

  /// Builds the tables from labels. Dangling or duplicate labels raise
  /// MalformedTable; axiom violations are left for validate() to report.
  StarSemigroupoid(std::vector<std::string> symbols, const std::vector<ElementDecl>& elements,
                   const std::vector<std::tuple<std::string, std::string, std::string>>& compose,
                   const std::vector<std::pair<std::string, std::string>>& star,
                   const std::optional<std::vector<std::pair<std::string, std::string>>>& units = std::nullopt)
      : symbols_(std::move(symbols)) {
    for (SymbolId s = 0; s < symbols_.size(); ++s) {
      if (!symbol_index_.emplace(symbols_[s], s).second)
        throw Error(ErrorCode::MalformedTable, "duplicate symbol '" + symbols_[s] + "'");
    }
    for (const auto& e : elements) {
      if (!element_index_.emplace(e.id, elements_.size()).second)
        throw Error(ErrorCode::MalformedTable, "duplicate element '" + e.id + "'");
      elements_.push_back(e.id);
      dom_.push_back(symbol_id(e.d));
      cod_.push_back(symbol_id(e.c));
    }
    const std::size_t n = elements_.size();
    compose_.assign(n * n, kNone);
    for (const auto& [a, b, ab] : compose) {
      const ElemId ia = element_id(a), ib = element_id(b), iab = element_id(ab);
      if (compose_[ia * n + ib] != kNone && compose_[ia * n + ib] != iab)
        throw Error(ErrorCode::MalformedTable, "conflicting compose entries for (" + a + ", " + b + ")");
      compose_[ia * n + ib] = iab;
    }
    star_.assign(n, kNone);
    for (const auto& [a, as] : star) {
      const ElemId ia = element_id(a), ias = element_id(as);
      if (star_[ia] != kNone && star_[ia] != ias)
        throw Error(ErrorCode::MalformedTable, "conflicting star entries for '" + a + "'");
      star_[ia] = ias;
    }
    if (units) {
      std::vector<ElemId> u(symbols_.size(), kNone);
      for (const auto& [s, e] : *units) u[symbol_id(s)] = element_id(e);
      units_ = std::move(u);
    }
  }

  std::size_t size() const noexcept { return elements_.size(); }
  std::size_t symbol_count() const noexcept { return symbols_.size(); }
  const std::vector<std::string>& symbols() const noexcept { return symbols_; }
  const std::vector<std::string>& elements() const noexcept { return elements_; }
  const std::string& label(ElemId a) const { return elements_.at(a); }
  const std::string& symbol_label(SymbolId s) const { return symbols_.at(s); }

  SymbolId d(ElemId a) const { return dom_.at(a); }
  SymbolId c(ElemId a) const { return cod_.at(a); }
  ElemId star(ElemId a) const { return star_.at(a); }
  const std::optional<std::vector<ElemId>>& units() const noexcept { return units_; }
  bool has_declared_units() const noexcept { return units_.has_value(); }

  bool composable(ElemId a, ElemId b) const { return d(a) == c(b); }

  /// Raw table lookup; kNone when no entry is stored.
  ElemId table(ElemId a, ElemId b) const { return compose_.at(a * size() + b); }

  /// The product ab. Composing outside the composable-pair set is an error.
  ElemId compose(ElemId a, ElemId b) const {
    if (!composable(a, b))
      throw Error(ErrorCode::InvalidSemigroupoid, "(" + label(a) + ", " + label(b) + ") is not composable");
    const ElemId ab = table(a, b);
    if (ab == kNone)
      throw Error(ErrorCode::InvalidSemigroupoid, "missing product for (" + label(a) + ", " + label(b) + ")");
    return ab;
  }

  ElemId element_id(const std::string& label) const {
    auto it = element_index_.find(label);
    if (it == element_index_.end()) throw Error(ErrorCode::MalformedTable, "unknown element '" + label + "'");
    return it->second;
  }

  SymbolId symbol_id(const std::string& label) const {
    auto it = symbol_index_.find(label);
    if (it == symbol_index_.end()) throw Error(ErrorCode::MalformedTable, "unknown symbol '" + label + "'");
    return it->second;
  }

  void set_star(ElemId a, ElemId as) { star_.at(a) = as; }
  void set_table(ElemId a, ElemId b, ElemId ab) { compose_.at(a * size() + b) = ab; }

  friend bool operator==(const StarSemigroupoid& x, const StarSemigroupoid& y) {
    return x.symbols_ == y.symbols_ && x.elements_ == y.elements_ && x.dom_ == y.dom_ && x.cod_ == y.cod_ &&
           x.compose_ == y.compose_ && x.star_ == y.star_ && x.units_ == y.units_;
  }

 private:
  std::vector<std::string> symbols_;
  std::vector<std::string> elements_;
  std::vector<SymbolId> dom_;
  std::vector<SymbolId> cod_;
  std::vector<ElemId> compose_;
  std::vector<ElemId> star_;
  std::optional<std::vector<ElemId>> units_;
  std::unordered_map<std::string, SymbolId> symbol_index_;
  std::unordered_map<std::string, ElemId> element_index_;
};

struct Violation {
  std::string axiom;
  std::string witness;
  std::size_t count = 1;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool violates(const std::string& axiom) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.axiom == axiom; });
  }

  /// Keeps the first witness per axiom and counts the rest.
  void add(const std::string& axiom, const std::string& witness) {
    for (auto& v : violations) {
      if (v.axiom == axiom) {
        ++v.count;
        return;
      }
    }
    violations.push_back({axiom, witness, 1});
  }
};

namespace detail {
inline std::string tuple_str(std::initializer_list<std::string> parts) {
  std::string out = "(";
  bool first = true;
  for (const auto& p : parts) {
    if (!first) out += ", ";
    out += p;
    first = false;
  }
  return out + ")";
}
}  // namespace detail

/// Exhaustive check of SG3, SG4, I1-I3, U1-U3 (with eps* = eps) and of the
/// no-isolated-symbol requirement. Empty report iff every axiom holds.
inline ValidationReport validate(const StarSemigroupoid& sg) {
  using detail::tuple_str;
  ValidationReport rep;
  const std::size_t n = sg.size();
  auto L = [&](ElemId a) { return sg.label(a); };

  for (SymbolId s = 0; s < sg.symbol_count(); ++s) {
    bool used = false;
    for (ElemId a = 0; a < n && !used; ++a) used = sg.d(a) == s || sg.c(a) == s;
    if (!used) rep.add("isolated-symbol", tuple_str({sg.symbol_label(s)}));
  }

  for (ElemId a = 0; a < n; ++a) {
    for (ElemId b = 0; b < n; ++b) {
      const ElemId ab = sg.table(a, b);
      if (sg.composable(a, b)) {
        if (ab == kNone) {
          rep.add("SG3", tuple_str({L(a), L(b)}) + " composable but product missing");
        } else if (sg.d(ab) != sg.d(b) || sg.c(ab) != sg.c(a)) {
          rep.add("SG3", tuple_str({L(a), L(b), L(ab)}) + " product has wrong domain/codomain");
        }
      } else if (ab != kNone) {
        rep.add("SG3", tuple_str({L(a), L(b)}) + " product defined for a non-composable pair");
      }
    }
  }

  for (ElemId a = 0; a < n; ++a) {
    for (ElemId b = 0; b < n; ++b) {
      if (!sg.composable(a, b) || sg.table(a, b) == kNone) continue;
      const ElemId ab = sg.table(a, b);
      for (ElemId c = 0; c < n; ++c) {
        if (!sg.composable(b, c) || sg.table(b, c) == kNone) continue;
        const ElemId bc = sg.table(b, c);
        const ElemId left = sg.composable(ab, c) ? sg.table(ab, c) : kNone;
        const ElemId right = sg.composable(a, bc) ? sg.table(a, bc) : kNone;
        if (left != right || left == kNone) rep.add("SG4", tuple_str({L(a), L(b), L(c)}));
      }
    }
  }

  bool star_total = true;
  for (ElemId a = 0; a < n; ++a) {
    const ElemId as = sg.star(a);
    if (as == kNone) {
      rep.add("I1", tuple_str({L(a)}) + " has no star");
      star_total = false;
      continue;
    }
    if (sg.d(as) != sg.c(a) || sg.c(as) != sg.d(a)) rep.add("I1", tuple_str({L(a), L(as)}));
  }
  if (star_total) {
    for (ElemId a = 0; a < n; ++a) {
      if (sg.star(sg.star(a)) != a) rep.add("I3", tuple_str({L(a)}));
      for (ElemId b = 0; b < n; ++b) {
        if (!sg.composable(a, b) || sg.table(a, b) == kNone) continue;
        const ElemId lhs = sg.star(sg.table(a, b));
        const ElemId bs = sg.star(b), as = sg.star(a);
        const ElemId rhs = sg.composable(bs, as) ? sg.table(bs, as) : kNone;
        if (lhs != rhs) rep.add("I2", tuple_str({L(a), L(b)}));
      }
    }
  }

  if (const auto& units = sg.units()) {
    std::set<ElemId> seen;
    for (SymbolId s = 0; s < sg.symbol_count(); ++s) {
      const ElemId e = (*units)[s];
      if (e == kNone) {
        rep.add("U1", tuple_str({sg.symbol_label(s)}) + " has no unit");
        continue;
      }
      if (!seen.insert(e).second) rep.add("U1", tuple_str({sg.symbol_label(s), L(e)}) + " unit map not injective");
      if (sg.d(e) != s || sg.c(e) != s) {
        rep.add("U1", tuple_str({sg.symbol_label(s), L(e)}));
        continue;
      }
      for (ElemId a = 0; a < n; ++a) {
        if (sg.c(a) == s && sg.table(e, a) != a) rep.add("U2", tuple_str({L(e), L(a)}));
        if (sg.d(a) == s && sg.table(a, e) != a) rep.add("U3", tuple_str({L(a), L(e)}));
      }
      if (star_total && sg.star(e) != e) rep.add("unit-star", tuple_str({L(e)}));
    }
  }
  return rep;
}

struct Classification {
  bool has_unit = false;
  bool is_transitive = false;
  bool is_inverse = false;
  bool is_groupoid = false;
  std::optional<std::vector<ElemId>> unit_map;     // per symbol, when has_unit
  std::optional<std::vector<ElemId>> inverse_map;  // unique pseudo-inverse, when is_inverse
  bool star_is_inverse = false;                    // star table equals inverse_map
};

/// Exhaustive classification. Units are searched for, not taken on trust.
inline Classification classify(const StarSemigroupoid& sg) {
  if (!validate(sg).ok()) throw Error(ErrorCode::InvalidSemigroupoid, "classify requires a valid semigroupoid");
  const std::size_t n = sg.size();
  Classification cl;

  std::vector<ElemId> units(sg.symbol_count(), kNone);
  bool all_units = true;
  for (SymbolId s = 0; s < sg.symbol_count(); ++s) {
    for (ElemId e = 0; e < n && units[s] == kNone; ++e) {
      if (sg.d(e) != s || sg.c(e) != s) continue;
      bool ok = true;
      for (ElemId a = 0; a < n && ok; ++a) {
        if (sg.c(a) == s && sg.compose(e, a) != a) ok = false;
        if (sg.d(a) == s && sg.compose(a, e) != a) ok = false;
      }
      if (ok) units[s] = e;
    }
    all_units = all_units && units[s] != kNone;
  }
  cl.has_unit = all_units;
  if (all_units) cl.unit_map = units;

  std::set<std::pair<SymbolId, SymbolId>> pairs;
  for (ElemId a = 0; a < n; ++a) pairs.emplace(sg.d(a), sg.c(a));
  cl.is_transitive = pairs.size() == sg.symbol_count() * sg.symbol_count();

  std::vector<ElemId> inverse(n, kNone);
  bool inverse_ok = true;
  for (ElemId a = 0; a < n && inverse_ok; ++a) {
    std::size_t found = 0;
    for (ElemId b = 0; b < n; ++b) {
      if (sg.d(b) != sg.c(a) || sg.c(b) != sg.d(a)) continue;
      const bool aba = sg.compose(sg.compose(a, b), a) == a;
      const bool bab = sg.compose(sg.compose(b, a), b) == b;
      if (aba && bab) {
        ++found;
        inverse[a] = b;
      }
    }
    inverse_ok = found == 1;
  }
  cl.is_inverse = inverse_ok;
  if (inverse_ok) {
    cl.inverse_map = inverse;
    cl.star_is_inverse = true;
    for (ElemId a = 0; a < n; ++a) cl.star_is_inverse = cl.star_is_inverse && sg.star(a) == inverse[a];
  }

  if (cl.has_unit) {
    bool groupoid = true;
    for (ElemId a = 0; a < n && groupoid; ++a) {
      bool has_inv = false;
      for (ElemId b = 0; b < n && !has_inv; ++b) {
        if (sg.d(b) != sg.c(a) || sg.c(b) != sg.d(a)) continue;
        has_inv = sg.compose(a, b) == units[sg.c(a)] && sg.compose(b, a) == units[sg.d(a)];
      }
      groupoid = has_inv;
    }
    cl.is_groupoid = groupoid;
  }
  return cl;
}

/// Left action (anchor, act) of a semigroupoid on a finite labelled set.
class LeftAction {
 public:
  LeftAction() = default;

  LeftAction(const StarSemigroupoid& sg, std::vector<std::string> base,
             const std::vector<std::pair<std::string, std::string>>& anchor,
             const std::vector<std::tuple<std::string, std::string, std::string>>& act)
      : base_(std::move(base)) {
    for (PointId x = 0; x < base_.size(); ++x) {
      if (!index_.emplace(base_[x], x).second)
        throw Error(ErrorCode::MalformedTable, "duplicate base point '" + base_[x] + "'");
    }
    anchor_.assign(base_.size(), kNone);
    for (const auto& [x, s] : anchor) anchor_[point_id(x)] = sg.symbol_id(s);
    for (PointId x = 0; x < base_.size(); ++x) {
      if (anchor_[x] == kNone) throw Error(ErrorCode::MalformedTable, "point '" + base_[x] + "' has no anchor");
    }
    elements_ = sg.size();
    act_.assign(elements_ * base_.size(), kNone);
    for (const auto& [a, x, y] : act) {
      const std::size_t slot = sg.element_id(a) * base_.size() + point_id(x);
      const PointId py = point_id(y);
      if (act_[slot] != kNone && act_[slot] != py)
        throw Error(ErrorCode::MalformedTable, "conflicting act entries for (" + a + ", " + x + ")");
      act_[slot] = py;
    }
  }

  std::size_t size() const noexcept { return base_.size(); }
  std::size_t element_count() const noexcept { return elements_; }
  const std::vector<std::string>& base() const noexcept { return base_; }
  const std::string& label(PointId x) const { return base_.at(x); }
  SymbolId anchor(PointId x) const { return anchor_.at(x); }

  /// Raw lookup; kNone where undefined.
  PointId table(ElemId a, PointId x) const { return act_.at(a * base_.size() + x); }

  PointId act(ElemId a, PointId x) const {
    const PointId y = table(a, x);
    if (y == kNone) throw Error(ErrorCode::MalformedTable, "action undefined at (" + std::to_string(a) + ", " + label(x) + ")");
    return y;
  }

  void set_table(ElemId a, PointId x, PointId y) { act_.at(a * base_.size() + x) = y; }

  PointId point_id(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw Error(ErrorCode::UnknownPoint, "'" + label + "'");
    return it->second;
  }

  /// Points of the block X_s, in base order.
  std::vector<PointId> part(SymbolId s) const {
    std::vector<PointId> out;
    for (PointId x = 0; x < base_.size(); ++x)
      if (anchor_[x] == s) out.push_back(x);
    return out;
  }

  friend bool operator==(const LeftAction& a, const LeftAction& b) {
    return a.base_ == b.base_ && a.anchor_ == b.anchor_ && a.act_ == b.act_;
  }

 private:
  std::vector<std::string> base_;
  std::vector<SymbolId> anchor_;
  std::vector<PointId> act_;
  std::size_t elements_ = 0;
  std::unordered_map<std::string, PointId> index_;
};

/// Exhaustive A1-A3 check; with `unital`, also eps_{a(x)} x = x.
inline ValidationReport validate_action(const StarSemigroupoid& sg, const LeftAction& act, bool unital) {
  using detail::tuple_str;
  if (act.element_count() != sg.size())
    throw Error(ErrorCode::MalformedTable, "action table built for a different semigroupoid");
  ValidationReport rep;
  const std::size_t n = sg.size();

  std::vector<bool> hit(sg.symbol_count(), false);
  for (PointId x = 0; x < act.size(); ++x) hit[act.anchor(x)] = true;
  for (SymbolId s = 0; s < sg.symbol_count(); ++s)
    if (!hit[s]) rep.add("A1", tuple_str({sg.symbol_label(s)}) + " not in the anchor's range");

  for (ElemId a = 0; a < n; ++a) {
    for (PointId x = 0; x < act.size(); ++x) {
      const PointId y = act.table(a, x);
      const bool should = sg.d(a) == act.anchor(x);
      if (should && y == kNone) {
        rep.add("A2", tuple_str({sg.label(a), act.label(x)}) + " action undefined");
      } else if (!should && y != kNone) {
        rep.add("A2", tuple_str({sg.label(a), act.label(x)}) + " action defined off the anchor fibre");
      } else if (should && act.anchor(y) != sg.c(a)) {
        rep.add("A2", tuple_str({sg.label(a), act.label(x), act.label(y)}) + " anchor(a.x) != c(a)");
      }
    }
  }

  for (ElemId a = 0; a < n; ++a) {
    for (ElemId b = 0; b < n; ++b) {
      if (!sg.composable(a, b) || sg.table(a, b) == kNone) continue;
      const ElemId ab = sg.table(a, b);
      for (PointId x = 0; x < act.size(); ++x) {
        if (sg.d(b) != act.anchor(x)) continue;
        const PointId bx = act.table(b, x);
        const PointId lhs = act.table(ab, x);
        const PointId rhs = bx == kNone ? kNone : act.table(a, bx);
        if (lhs != rhs || lhs == kNone) rep.add("A3", tuple_str({sg.label(a), sg.label(b), act.label(x)}));
      }
    }
  }

  if (unital) {
    const auto& units = sg.units();
    if (!units) {
      rep.add("unital", "semigroupoid declares no units");
    } else {
      for (PointId x = 0; x < act.size(); ++x) {
        const ElemId e = (*units)[act.anchor(x)];
        if (e == kNone || act.table(e, x) != x)
          rep.add("unital", tuple_str({e == kNone ? std::string("?") : sg.label(e), act.label(x)}));
      }
    }
  }
  return rep;
}

/// {a.x : d(a) = anchor(x)} together with x itself, sorted.
inline std::vector<PointId> orbit(const StarSemigroupoid& sg, const LeftAction& act, PointId x) {
  if (x >= act.size()) throw Error(ErrorCode::UnknownPoint, "point id " + std::to_string(x));
  std::set<PointId> out{x};
  for (ElemId a = 0; a < sg.size(); ++a) {
    if (sg.d(a) == act.anchor(x)) out.insert(act.act(a, x));
  }
  return {out.begin(), out.end()};
}

/// The bundle's base must coincide with the action's base (same labels, same
/// order).
inline void require_same_base(const LeftAction& act, const HilbertBundle& bundle) {
  if (act.base() != bundle.points())
    throw Error(ErrorCode::CrossRefError, "action base and bundle points differ");
}

/// True iff the fibre dimension is constant along every orbit.
inline bool orbit_trivial_bundle(const StarSemigroupoid& sg, const LeftAction& act, const HilbertBundle& bundle) {
  require_same_base(act, bundle);
  for (PointId x = 0; x < act.size(); ++x) {
    for (PointId y : orbit(sg, act, x))
      if (bundle.dim(y) != bundle.dim(x)) return false;
  }
  return true;
}

}  // namespace kgl
