#pragma once

// The command layer behind the kgl tool: each command runs its checks on a
// loaded instance and returns a report. Numerical hypotheses that fail
// (non-invariant, not dominated, ...) become failing records with a witness;
// malformed input propagates as an Error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kgl/hilbert_lin.hpp"
#include "kgl/io.hpp"
#include "kgl/kernel_gen.hpp"
#include "kgl/krein_lin.hpp"
#include "kgl/report.hpp"
#include "kgl/sgpd.hpp"
#include "kgl/sgpd_generate.hpp"

namespace kgl {

namespace detail {

inline bool is_check_failure(ErrorCode c) {
  switch (c) {
    case ErrorCode::NotHermitian:
    case ErrorCode::NotPSD:
    case ErrorCode::NotPartiallyPSD:
    case ErrorCode::NotInvariant:
    case ErrorCode::QuotientIncompatible:
    case ErrorCode::RankMismatch:
    case ErrorCode::PairingViolated:
    case ErrorCode::KernelNotDominated:
    case ErrorCode::OrbitBundleNotTrivial:
      return true;
    default:
      return false;
  }
}

/// Runs `body`; a hypothesis failure becomes one failing record.
inline void guarded(Report& rep, const std::string& name, const std::string& tag, const std::function<void()>& body) {
  try {
    body();
  } catch (const Error& e) {
    if (!is_check_failure(e.code())) throw;
    rep.add_flag(name, tag, false, std::string(e.what()));
  }
}

inline Report start(const std::string& command, const Instance* inst, const Tolerances& tol) {
  Report r;
  r.command = command;
  r.tol = tol;
  if (inst) r.digest = digest(instance_to_json(*inst));
  return r;
}

inline std::string triple(const Instance& inst, const InvarianceWitness& w) {
  return "(" + inst.sg.label(w.element) + ", " + inst.bundle.label(w.x) + ", " + inst.bundle.label(w.y) + ")";
}

inline double max_gram_norm(const OpKernel& k, const Partition& p) { return conv_blocks(k, p).max_frobenius(); }

}  // namespace detail

// --- validate / classify --------------------------------------------------

inline Report run_validate(const Instance& inst, const Tolerances& tol = {}) {
  Report rep = detail::start("validate", &inst, tol);
  const ValidationReport sr = validate(inst.sg);
  for (const char* ax : {"isolated-symbol", "SG3", "SG4", "I1", "I2", "I3", "U1", "U2", "U3", "unit-star"}) {
    auto it = std::find_if(sr.violations.begin(), sr.violations.end(), [&](const Violation& v) { return v.axiom == ax; });
    if (it == sr.violations.end()) {
      rep.add(ax, "semigroupoid-axioms", 0.0, 0.0);
    } else {
      rep.add(ax, "semigroupoid-axioms", static_cast<double>(it->count), 0.0, it->witness);
    }
  }
  const bool unital = inst.sg.has_declared_units();
  const ValidationReport ar = validate_action(inst.sg, inst.action, unital);
  std::vector<const char*> axioms{"A1", "A2", "A3"};
  if (unital) axioms.push_back("unital");
  for (const char* ax : axioms) {
    auto it = std::find_if(ar.violations.begin(), ar.violations.end(), [&](const Violation& v) { return v.axiom == ax; });
    if (it == ar.violations.end()) {
      rep.add(ax, "action-axioms", 0.0, 0.0);
    } else {
      rep.add(ax, "action-axioms", static_cast<double>(it->count), 0.0, it->witness);
    }
  }
  return rep;
}

inline Report run_classify(const Instance& inst, const Tolerances& tol = {}) {
  Report rep = detail::start("classify", &inst, tol);
  const Classification cl = classify(inst.sg);
  rep.details = Json{{"has_unit", cl.has_unit},
                     {"is_transitive", cl.is_transitive},
                     {"is_inverse", cl.is_inverse},
                     {"is_groupoid", cl.is_groupoid},
                     {"star_is_inverse", cl.star_is_inverse}};
  rep.add_flag("classified", "classification", true);
  return rep;
}

// --- check ----------------------------------------------------------------

inline const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{"hermitian", "psd", "invariant", "bounded", "orbit"};
  return names;
}

inline void add_check(Report& rep, const Instance& inst, const std::string& what, const Tolerances& tol) {
  const OpKernel& k = inst.require_kernel();
  const ActionFrame frame = inst.frame();
  const Partition& p = frame.partition();
  if (what == "hermitian") {
    double worst = 0.0;
    std::optional<std::string> wit;
    for (std::size_t s = 0; s < p.size(); ++s) {
      const CMatrix g = gram_block(k, p.parts[s]);
      const double r = hermitian_residual(g) / std::max(1.0, g.frobenius_norm());
      if (r > worst) {
        worst = r;
        wit = "part " + p.labels[s];
      }
    }
    rep.add("partially Hermitian", "partial-hermitian", worst, tol.atol, worst > tol.atol ? wit : std::nullopt);
  } else if (what == "psd") {
    double worst = 0.0;
    std::optional<std::string> wit;
    for (std::size_t s = 0; s < p.size(); ++s) {
      const CMatrix g = gram_block(k, p.parts[s]);
      if (!is_hermitian(g, tol)) {
        rep.add_flag("partially PSD", "partial-psd", false, "part " + p.labels[s] + " is not Hermitian");
        return;
      }
      const HermEig e = herm_eig(g, tol);
      const double r = e.eigenvalues.empty() ? 0.0 : std::max(0.0, -e.eigenvalues.front()) /
                                                         std::max(1.0, e.max_abs_eigenvalue());
      if (r > worst) {
        worst = r;
        wit = "part " + p.labels[s] + ", least eigenvalue " + std::to_string(e.eigenvalues.front());
      }
    }
    rep.add("partially PSD", "partial-psd", worst, tol.atol, worst > tol.atol ? wit : std::nullopt);
  } else if (what == "invariant") {
    if (!frame.orbit_trivial()) {
      rep.add_flag("invariant", "invariance", false, "fibre dimension varies along an orbit");
      return;
    }
    const InvarianceResult r = is_invariant(k, frame, tol);
    const double scale = std::max(1.0, detail::max_gram_norm(k, p));
    std::optional<std::string> wit;
    if (r.witness) wit = detail::triple(inst, *r.witness);
    rep.add("invariant", "invariance", r.max_residual / scale, tol.atol, wit);
  } else if (what == "bounded") {
    if (!frame.orbit_trivial()) {
      rep.add_flag("bounded shift", "bounded-shift", false, "fibre dimension varies along an orbit");
      return;
    }
    if (!is_partially_psd(k, p, tol)) {
      rep.add_flag("bounded shift", "bounded-shift", false, "kernel is not partially PSD");
      return;
    }
    Json consts = Json::object();
    std::optional<std::string> wit;
    for (ElemId a = 0; a < inst.sg.size(); ++a) {
      const auto m = bounded_shift_constant(k, frame, a, tol);
      consts[inst.sg.label(a)] = m ? Json(*m) : Json("undefined");
      if (!m && !wit) wit = "element " + inst.sg.label(a);
    }
    rep.details["shift_constants"] = std::move(consts);
    rep.add_flag("bounded shift", "bounded-shift", !wit, wit);
  } else if (what == "orbit") {
    rep.add_flag("orbit-trivial bundle", "orbit-trivial", frame.orbit_trivial(),
                 frame.orbit_trivial() ? std::nullopt : std::optional<std::string>("fibre dimension varies"));
  } else {
    throw Error(ErrorCode::ParseError, "unknown check '" + what + "'");
  }
}

inline Report run_check(const Instance& inst, const std::string& what, const Tolerances& tol = {}) {
  Report rep = detail::start("check " + what, &inst, tol);
  if (what == "all") {
    for (const auto& w : check_names()) add_check(rep, inst, w, tol);
  } else {
    add_check(rep, inst, what, tol);
  }
  return rep;
}

// --- linearize --------------------------------------------------------------

inline void add_hilbert_linearisation(Report& rep, const Instance& inst, const Tolerances& tol) {
  const OpKernel& k = inst.require_kernel();
  const Partition p = inst.frame().partition();
  detail::guarded(rep, "Hilbert linearisation", "kolmogorov-decomposition", [&] {
    const HilbertLinearisation lin = minimal_linearisation(k, p, tol);
    const LinearisationCheck chk = check_linearisation(lin, k, tol);
    rep.add("reconstruction", "kolmogorov-decomposition", chk.reconstruction, tol.atol);
    rep.add("factor", "kolmogorov-decomposition", chk.factor, tol.atol);
    rep.add_flag("minimal", "minimality", chk.minimal && chk.rank_matches);
    Json ranks = Json::object();
    for (std::size_t s = 0; s < p.size(); ++s) ranks[p.labels[s]] = lin.rank(s);
    rep.details["hilbert_ranks"] = std::move(ranks);
    const RkhsReport rk = verify_reproducing(rkhs(lin, k), k, tol);
    rep.add("kernel columns are members", "reproducing-property", rk.kernel_columns, tol.atol);
    rep.add("reproducing property", "reproducing-property", rk.reproducing, tol.atol);
    rep.add("kernel column Gram", "kernel-gram", rk.gram, tol.atol);
    rep.add("reproduced kernel PSD", "kernel-gram", std::max(0.0, -rk.min_eigenvalue), tol.atol);
    rep.add_flag("kernel columns total", "minimality", rk.total);
    const HilbertLinearisation alt = minimal_linearisation(k, p, tol, {true});
    const UnitaryEquivalence ue = unitary_equivalence(lin, alt, tol);
    rep.add("U*U = I", "unitary-uniqueness", ue.unitarity, tol.atol);
    rep.add("U V_x = V'_x", "unitary-uniqueness", ue.intertwining, tol.atol);
  });
}

inline void add_krein_linearisation(Report& rep, const Instance& inst, const OpKernel* dominant,
                                    const Tolerances& tol) {
  const OpKernel& k = inst.require_kernel();
  const Partition p = inst.frame().partition();
  detail::guarded(rep, "Krein linearisation", "krein-linearisation", [&] {
    const KreinLinearisation lin = krein_linearisation(k, p, tol, {dominant, false});
    const KreinLinearisationCheck chk = check_krein_linearisation(lin, k, tol);
    rep.add("reconstruction", "krein-linearisation", chk.reconstruction, tol.atol);
    rep.add("fundamental symmetry", "krein-linearisation", chk.symmetry, tol.atol);
    rep.add_flag("minimal", "minimality", chk.minimal && chk.rank_matches);
    Json sig = Json::object();
    for (std::size_t s = 0; s < p.size(); ++s)
      sig[p.labels[s]] = Json::array({lin.parts[s].space.p, lin.parts[s].space.q});
    rep.details["route"] = to_string(lin.route);
    rep.details["signatures"] = std::move(sig);
    const RkksReport rk = rk_krein_space(lin, k, tol);
    rep.add("kernel columns are members", "reproducing-krein-property", rk.kernel_columns, tol.atol);
    rep.add("reproducing property", "reproducing-krein-property", rk.reproducing, tol.atol);
    rep.add("kernel column Gram", "reproducing-krein-property", rk.gram, tol.atol);
    rep.add_flag("kernel columns total", "minimality", rk.total);
    const KreinLinearisation other =
        dominant ? krein_linearisation(k, p, tol) : krein_linearisation(k, p, tol, {nullptr, true});
    const KreinEquivalence eq = krein_equivalence(lin, other, tol);
    rep.add("U# U = I", "route-equivalence", eq.j_unitarity, tol.atol);
    rep.add("U V_x = V'_x", "route-equivalence", eq.intertwining, tol.atol);
    const CanonicalDominant canon = canonical_dominant(k, p, tol);
    const UniquenessReport ur = uniqueness_report(k, dominant ? *dominant : canon.kernel, p, tol);
    Json gaps = Json::object();
    double eps = INFINITY;
    for (std::size_t s = 0; s < p.size(); ++s) {
      const auto& g = ur.parts[s];
      gaps[p.labels[s]] = Json{{"gap_neg", g.gap_neg ? Json(*g.gap_neg) : Json("absent")},
                               {"gap_pos", g.gap_pos ? Json(*g.gap_pos) : Json("absent")},
                               {"epsilon", g.epsilon}};
      eps = std::min(eps, g.epsilon);
    }
    rep.details["gram_gaps"] = std::move(gaps);
    rep.details["uniqueness_note"] = ur.note;
    rep.add_flag("Gram gap at 0", "gram-gap-uniqueness", ur.unique && eps > 0.0);
  });
}

inline Report run_linearize(const Instance& inst, bool krein, const OpKernel* dominant, const Tolerances& tol = {}) {
  Report rep = detail::start(krein ? "linearize --krein" : "linearize --hilbert", &inst, tol);
  if (krein) {
    add_krein_linearisation(rep, inst, dominant, tol);
  } else {
    add_hilbert_linearisation(rep, inst, tol);
  }
  return rep;
}

// --- split --------------------------------------------------------------

inline void add_split(Report& rep, const Instance& inst, const Tolerances& tol) {
  const OpKernel& k = inst.require_kernel();
  const Partition p = inst.frame().partition();
  detail::guarded(rep, "Jordan split", "jordan-disjointness", [&] {
    const JordanSplit js = jordan_split(k, p, tol);
    const double scale = std::max(1.0, detail::max_gram_norm(k, p));
    rep.add("K = K+ - K-", "jordan-disjointness", js.reconstruction / scale, tol.atol);
    rep.add_flag("K+ partially PSD", "jordan-disjointness", is_partially_psd(js.plus, p, tol));
    rep.add_flag("K- partially PSD", "jordan-disjointness", is_partially_psd(js.minus, p, tol));
    Json certs = Json::array();
    std::optional<std::string> wit;
    for (std::size_t s = 0; s < p.size(); ++s) {
      const auto& c = js.certificates[s];
      certs.push_back(Json{{"part", p.labels[s]}, {"rank_plus", c.rank_plus}, {"rank_minus", c.rank_minus},
                           {"rank_sum", c.rank_sum}});
      if (!c.holds() && !wit) wit = "part " + p.labels[s];
    }
    rep.details["disjointness"] = std::move(certs);
    rep.details["disjointness_argument"] =
        "In finite dimensions P <= Q implies ran P inside ran Q, so a PSD kernel below both K+ and K- has range in "
        "ran G+ and ran G-; rank(G+) + rank(G-) = rank(G+ + G-) says these ranges meet only in 0.";
    rep.add_flag("rank additivity", "jordan-disjointness", !wit, wit);
  });
}

inline Report run_split(const Instance& inst, const Tolerances& tol = {}) {
  Report rep = detail::start("split", &inst, tol);
  add_split(rep, inst, tol);
  return rep;
}

// --- represent ------------------------------------------------------------

inline void add_hilbert_representation(Report& rep, const Instance& inst, const Tolerances& tol) {
  const OpKernel& k = inst.require_kernel();
  detail::guarded(rep, "Hilbert representation", "invariant-hilbert-representation", [&] {
    const ActionFrame frame = inst.frame();
    if (!frame.orbit_trivial()) throw Error(ErrorCode::OrbitBundleNotTrivial, "fibre dimension varies along an orbit");
    const auto [lin, hr] = invariant_representation(k, frame, tol);
    const RepresentationLaws laws = hilbert_laws(hr, lin, frame);
    rep.add("multiplicative", "invariant-hilbert-representation", laws.multiplicativity, tol.atol);
    rep.add("Phi(a*) = Phi(a)*", "invariant-hilbert-representation", laws.star, tol.atol);
    rep.add("Phi(a) V_x = V_{a.x}", "invariant-hilbert-representation", laws.intertwining, tol.atol);
    rep.add("M_a = ||Phi(a)||^2", "bounded-shift-norm", shift_constant_consistency(hr), 1e-6);
    const Classification cl = classify(inst.sg);
    const PartialIsometryReport pi = partial_isometry_report(hr.phi, cl, tol);
    if (pi.required) {
      rep.add("partial isometries", "inverse-partial-isometry", pi.worst, tol.atol);
    } else {
      rep.details["partial_isometry_worst"] = pi.worst;
    }
  });
}

inline void add_krein_representation(Report& rep, const Instance& inst, const OpKernel* dominant, bool reducibility,
                                     const Tolerances& tol) {
  const OpKernel& k = inst.require_kernel();
  detail::guarded(rep, "Krein representation", "invariant-krein-representation", [&] {
    const ActionFrame frame = inst.frame();
    if (!frame.orbit_trivial()) throw Error(ErrorCode::OrbitBundleNotTrivial, "fibre dimension varies along an orbit");
    std::optional<CanonicalDominant> canon;
    const OpKernel* l = dominant;
    if (reducibility && !l) {
      canon = canonical_dominant(k, frame, tol);
      l = &canon->kernel;
    }
    const auto [lin, kr] = invariant_krein_representation(k, frame, tol, l);
    rep.details["route"] = to_string(lin.route);
    rep.add("multiplicative", "invariant-krein-representation", kr.laws.multiplicativity, tol.atol);
    rep.add("Psi(a*) = Psi(a)#", "invariant-krein-representation", kr.laws.star, tol.atol);
    rep.add("Psi(a) V_x = V_{a.x}", "invariant-krein-representation", kr.laws.intertwining, tol.atol);
    if (reducibility) {
      const ReducibilityReport rr = fundamental_reducibility_check(lin, kr, k, *l, frame, tol);
      if (!rr.applicable) {
        rep.add_flag("J commutes with Psi", "fundamental-reducibility", false,
                     "not applicable: dominant is not invariant at " + detail::triple(inst, *rr.witness));
      } else {
        rep.add("J commutes with Psi", "fundamental-reducibility", rr.worst, tol.atol);
      }
    }
  });
}

inline Report run_represent(const Instance& inst, bool krein, const OpKernel* dominant, bool reducibility,
                            const Tolerances& tol = {}) {
  Report rep = detail::start(krein ? "represent --krein" : "represent --hilbert", &inst, tol);
  if (krein) {
    add_krein_representation(rep, inst, dominant, reducibility, tol);
  } else {
    add_hilbert_representation(rep, inst, tol);
  }
  return rep;
}

// --- lift ---------------------------------------------------------------

/// `doc` holds matrices A, B, T, S as {re, im} objects.
inline Report run_lift(const Json& doc, const Tolerances& tol = {}) {
  Report rep = detail::start("lift", nullptr, tol);
  rep.digest = digest(doc);
  auto get = [&](const char* key) {
    if (!doc.is_object() || !doc.contains(key)) throw Error(ErrorCode::ParseError, std::string("lift: missing ") + key);
    return matrix_from_json(doc.at(key), std::string("lift.") + key);
  };
  const CMatrix a = get("A"), b = get("B"), t = get("T"), s = get("S");
  detail::guarded(rep, "lift", "operator-lifting", [&] {
    const LiftResult lr = lift_operator(a, b, t, s, tol);
    const double scale = std::max(b.frobenius_norm() * t.frobenius_norm(), s.frobenius_norm() * a.frobenius_norm());
    rep.add("B T = S* A", "operator-lifting", lr.precondition, tol.bound(scale));
    rep.add("T ker A in ker B", "operator-lifting", lr.well_defined, tol.bound(scale));
    rep.add("T_lift Pi_A = Pi_B T", "operator-lifting", lr.factor_t, tol.bound(scale));
    rep.add("S_lift Pi_B = Pi_A S", "operator-lifting", lr.factor_s, tol.bound(scale));
    rep.add("T_lift# = S_lift", "operator-lifting", lr.pairing, tol.bound(scale));
    rep.details["T_lift"] = matrix_to_json(lr.t_lift);
    rep.details["S_lift"] = matrix_to_json(lr.s_lift);
  });
  return rep;
}

// --- report (everything) --------------------------------------------------

inline Report run_report(const Instance& inst, const Tolerances& tol = {}) {
  Report rep = detail::start("report", &inst, tol);
  auto merge = [&](Report r) {
    for (auto& c : r.records) rep.records.push_back(std::move(c));
    for (auto& [key, v] : r.details.items()) rep.details[key] = v;
  };
  merge(run_validate(inst, tol));
  if (!inst.kernel) return rep;
  const Partition p = inst.frame().partition();
  const bool psd = is_partially_psd(*inst.kernel, p, tol);
  rep.details["definiteness"] = psd ? "psd" : "indefinite";
  for (const char* w : {"hermitian", "orbit", "invariant"}) add_check(rep, inst, w, tol);
  if (psd) {
    add_check(rep, inst, "psd", tol);
    if (inst.frame().orbit_trivial()) add_check(rep, inst, "bounded", tol);
  }
  if (psd) add_hilbert_linearisation(rep, inst, tol);
  if (is_partially_hermitian(*inst.kernel, p, tol)) {
    add_krein_linearisation(rep, inst, nullptr, tol);
    add_split(rep, inst, tol);
    if (inst.frame().orbit_trivial() && is_invariant(*inst.kernel, inst.frame(), tol).invariant) {
      if (psd) add_hilbert_representation(rep, inst, tol);
      add_krein_representation(rep, inst, nullptr, false, tol);
    }
  }
  return rep;
}

// --- generate ---------------------------------------------------------------

struct GeneratedDocuments {
  Json semigroupoid;
  Json action;
  Json bundle;
  Json kernel;
  Json dominant;  // null when the generator yields none
};

/// Family instance, orbit-constant bundle (fibre dims 1..max_dim) and a
/// kernel in `mode`, all from `seed`. The report re-loads the documents and
/// checks the declared properties.
inline std::pair<GeneratedDocuments, Report> run_generate(const std::string& family, std::uint64_t seed,
                                                          KernelMode mode, std::size_t max_dim = 2,
                                                          const Tolerances& tol = {}) {
  const GeneratedInstance gi = generate(random_family(family, seed));
  const std::vector<std::size_t> dims = orbit_constant_dims(gi.sg, gi.action, seed, max_dim);
  const HilbertBundle bundle(gi.action.base(), dims);
  const GeneratedKernel gk = generate_kernel(gi.sg, gi.action, bundle, mode, seed);
  GeneratedDocuments docs{semigroupoid_to_json(gi.sg), action_to_json(gi.action, gi.sg), bundle_to_json(bundle),
                          kernel_to_json(gk.kernel), gk.dominant ? kernel_to_json(*gk.dominant) : Json()};
  const auto inst = load_instance(docs.semigroupoid, docs.action, docs.bundle, &docs.kernel);
  Report rep = detail::start("generate", inst.get(), tol);
  rep.details = Json{{"family", family}, {"seed", seed}, {"mode", to_string(mode)}, {"method", gk.method}};
  rep.add_flag("unital action", "generator-soundness", !gi.unital || validate_action(inst->sg, inst->action, true).ok());
  add_check(rep, *inst, "hermitian", tol);
  if (mode == KernelMode::psd_invariant) add_check(rep, *inst, "psd", tol);
  if (mode != KernelMode::arbitrary) add_check(rep, *inst, "invariant", tol);
  for (auto& r : rep.records) r.tag = "generator-soundness";
  return {std::move(docs), std::move(rep)};
}

}  // namespace kgl
