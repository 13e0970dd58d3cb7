#pragma once

// Certification reports: one record per check with its residual, the
// tolerance it was held to and a tag naming the result it certifies.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kgl/io.hpp"
#include "kgl/numlin.hpp"

namespace kgl {

struct TagInfo {
  const char* tag;
  const char* statement;
};

/// The fixed tag vocabulary.
inline const std::vector<TagInfo>& check_tags() {
  static const std::vector<TagInfo> tags{
      {"semigroupoid-axioms", "associativity, involution and unit axioms of a *-semigroupoid"},
      {"action-axioms", "anchor surjectivity, domain matching and compatibility of a left action"},
      {"classification", "unit, transitivity, inverse and groupoid properties (informational)"},
      {"partial-hermitian", "K(x,y) = K(y,x)* within every part"},
      {"partial-psd", "every part Gram matrix is positive semidefinite"},
      {"invariance", "K(a.x, y) = K(x, a*.y) for all a and points in its domain and codomain parts"},
      {"bounded-shift", "each shift has a finite constant M_a on the quotient by the kernel of L"},
      {"orbit-trivial", "fibre dimension is constant along every orbit"},
      {"kolmogorov-decomposition", "K(x,y) = V_x* V_y with a minimal Hilbert space linearisation"},
      {"minimality", "the ranges of the V_x span the linearisation space"},
      {"reproducing-property", "<f(x), h> = <f, K_x h> in the reproducing kernel space"},
      {"kernel-gram", "K(x,y) = K_x* K_y for the kernel columns"},
      {"unitary-uniqueness", "minimal linearisations are unitarily equivalent"},
      {"invariant-hilbert-representation", "Phi(ab) = Phi(a)Phi(b), Phi(a*) = Phi(a)*, Phi(a)V_x = V_{a.x}"},
      {"bounded-shift-norm", "M_a = ||Phi(a)||^2"},
      {"inverse-partial-isometry", "for inverse semigroupoids every Phi(a) is a partial isometry"},
      {"jordan-disjointness", "K = K+ - K- with disjoint positive parts, certified by rank additivity"},
      {"krein-linearisation", "K(x,y) = V_x* J_s V_y with a minimal Krein space linearisation"},
      {"reproducing-krein-property", "<f(x), h> = [f, K_x h] in the reproducing kernel Krein space"},
      {"route-equivalence", "direct and dominant Krein linearisations are J-unitarily equivalent"},
      {"gram-gap-uniqueness", "the Gram operator has a spectral gap at 0, so the Krein space is unique"},
      {"operator-lifting", "B T = S* A lifts to induced Krein spaces with T_lift# = S_lift"},
      {"invariant-krein-representation", "Psi(ab) = Psi(a)Psi(b), Psi(a*) = Psi(a)#, Psi(a)V_x = V_{a.x}"},
      {"fundamental-reducibility", "an invariant dominant yields symmetries J_s commuting with the representation"},
      {"generator-soundness", "a generated kernel passes its declared definiteness and invariance checks"},
  };
  return tags;
}

inline bool is_known_tag(const std::string& t) {
  const auto& tags = check_tags();
  return std::any_of(tags.begin(), tags.end(), [&](const TagInfo& i) { return t == i.tag; });
}

struct CheckRecord {
  std::string name;
  std::string tag;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::optional<std::string> witness;
};

struct Report {
  std::string command;
  std::string digest;
  Tolerances tol;
  std::vector<CheckRecord> records;
  Json details = Json::object();

  bool pass() const {
    return std::all_of(records.begin(), records.end(), [](const CheckRecord& r) { return r.pass; });
  }

  /// pass = residual <= tolerance.
  CheckRecord& add(std::string name, std::string tag, double residual, double tolerance,
                   std::optional<std::string> witness = std::nullopt) {
    const bool ok = residual <= tolerance;
    records.push_back({std::move(name), std::move(tag), residual, tolerance, ok, std::move(witness)});
    return records.back();
  }

  CheckRecord& add_flag(std::string name, std::string tag, bool ok, std::optional<std::string> witness = std::nullopt) {
    records.push_back({std::move(name), std::move(tag), ok ? 0.0 : 1.0, 0.0, ok, std::move(witness)});
    return records.back();
  }
};

inline Json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

inline Json report_to_json(const Report& r) {
  Json recs = Json::array();
  for (const auto& c : r.records) {
    Json j{{"name", c.name},
           {"tag", c.tag},
           {"residual", number_or_string(c.residual)},
           {"tolerance", c.tolerance},
           {"pass", c.pass}};
    if (c.witness) j["witness"] = *c.witness;
    recs.push_back(std::move(j));
  }
  Json j{{"command", r.command},
         {"digest", r.digest},
         {"tolerances", Json{{"atol", r.tol.atol}, {"rank_rel", r.tol.rank_rel}}},
         {"pass", r.pass()},
         {"records", std::move(recs)}};
  if (!r.details.empty()) j["details"] = r.details;
  return j;
}

inline std::string report_text(const Report& r) { return dump(report_to_json(r)); }

inline void save_report(const Report& r, const std::string& path) { write_text_file(path, report_text(r)); }

}  // namespace kgl
