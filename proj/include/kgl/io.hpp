#pragma once

// JSON documents for semigroupoids, actions, bundles, kernels and matrices,
// and the loaded instance that ties the four together.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kgl/bundle.hpp"
#include "kgl/kernel.hpp"
#include "kgl/numlin.hpp"
#include "kgl/sgpd.hpp"

namespace kgl {

using Json = nlohmann::ordered_json;

inline Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, what + ": " + e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path);
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write '" + path + "'");
  out << text;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

namespace detail {

/// Typed field access with ParseError naming the field.
template <class T>
T field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::ParseError, where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, where + ": field '" + key + "': " + e.what());
  }
}

inline std::vector<std::vector<double>> real_rows(const Json& j, const std::string& where) {
  try {
    return j.get<std::vector<std::vector<double>>>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, where + ": " + e.what());
  }
}

}  // namespace detail

// --- matrices -------------------------------------------------------------

/// {re: [[...]], im: [[...]]}; `im` may be omitted.
inline CMatrix matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("re")) throw Error(ErrorCode::ParseError, where + ": matrix needs 're'");
  const auto re = detail::real_rows(j.at("re"), where + ".re");
  const std::size_t r = re.size();
  const std::size_t c = r ? re[0].size() : 0;
  std::vector<std::vector<double>> im;
  if (j.contains("im")) im = detail::real_rows(j.at("im"), where + ".im");
  CMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (re[i].size() != c) throw Error(ErrorCode::ParseError, where + ": ragged rows");
    for (std::size_t k = 0; k < c; ++k) m(i, k) = re[i][k];
  }
  if (!im.empty()) {
    if (im.size() != r) throw Error(ErrorCode::ParseError, where + ": re/im shapes differ");
    for (std::size_t i = 0; i < r; ++i) {
      if (im[i].size() != c) throw Error(ErrorCode::ParseError, where + ": re/im shapes differ");
      for (std::size_t k = 0; k < c; ++k) m(i, k) += cplx(0.0, im[i][k]);
    }
  }
  return m;
}

inline Json matrix_to_json(const CMatrix& m) {
  Json re = Json::array(), im = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json rr = Json::array(), ri = Json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) {
      rr.push_back(m(i, k).real());
      ri.push_back(m(i, k).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return Json{{"re", std::move(re)}, {"im", std::move(im)}};
}

// --- semigroupoid ---------------------------------------------------------

inline StarSemigroupoid semigroupoid_from_json(const Json& j) {
  const std::string w = "semigroupoid";
  auto symbols = detail::field<std::vector<std::string>>(j, "symbols", w);
  std::vector<ElementDecl> elems;
  for (const auto& e : detail::field<Json>(j, "elements", w))
    elems.push_back({detail::field<std::string>(e, "id", w + ".elements"), detail::field<std::string>(e, "d", w + ".elements"),
                     detail::field<std::string>(e, "c", w + ".elements")});
  std::vector<std::tuple<std::string, std::string, std::string>> compose;
  for (const auto& t : detail::field<std::vector<std::vector<std::string>>>(j, "compose", w)) {
    if (t.size() != 3) throw Error(ErrorCode::ParseError, w + ".compose: entries are [a, b, ab]");
    compose.emplace_back(t[0], t[1], t[2]);
  }
  std::vector<std::pair<std::string, std::string>> star;
  for (const auto& t : detail::field<std::vector<std::vector<std::string>>>(j, "star", w)) {
    if (t.size() != 2) throw Error(ErrorCode::ParseError, w + ".star: entries are [a, a*]");
    star.emplace_back(t[0], t[1]);
  }
  std::optional<std::vector<std::pair<std::string, std::string>>> units;
  if (j.contains("units")) {
    units.emplace();
    const Json decl = detail::field<Json>(j, "units", w);
    for (const auto& [s, e] : decl.items()) {
      if (!e.is_string()) throw Error(ErrorCode::ParseError, w + ".units: values are element ids");
      units->emplace_back(s, e.get<std::string>());
    }
  }
  try {
    return StarSemigroupoid(std::move(symbols), elems, compose, star, units);
  } catch (const Error& e) {
    throw Error(ErrorCode::CrossRefError, std::string("semigroupoid: ") + e.what());
  }
}

inline Json semigroupoid_to_json(const StarSemigroupoid& sg) {
  Json j;
  j["symbols"] = sg.symbols();
  Json elems = Json::array();
  for (ElemId a = 0; a < sg.size(); ++a)
    elems.push_back(Json{{"id", sg.label(a)}, {"d", sg.symbol_label(sg.d(a))}, {"c", sg.symbol_label(sg.c(a))}});
  j["elements"] = std::move(elems);
  Json compose = Json::array();
  for (ElemId a = 0; a < sg.size(); ++a)
    for (ElemId b = 0; b < sg.size(); ++b)
      if (sg.table(a, b) != kNone) compose.push_back(Json::array({sg.label(a), sg.label(b), sg.label(sg.table(a, b))}));
  j["compose"] = std::move(compose);
  Json star = Json::array();
  for (ElemId a = 0; a < sg.size(); ++a)
    if (sg.star(a) != kNone) star.push_back(Json::array({sg.label(a), sg.label(sg.star(a))}));
  j["star"] = std::move(star);
  if (sg.units()) {
    Json units = Json::object();
    for (SymbolId s = 0; s < sg.symbol_count(); ++s)
      if ((*sg.units())[s] != kNone) units[sg.symbol_label(s)] = sg.label((*sg.units())[s]);
    j["units"] = std::move(units);
  }
  return j;
}

// --- action ---------------------------------------------------------------

inline LeftAction action_from_json(const Json& j, const StarSemigroupoid& sg) {
  const std::string w = "action";
  std::vector<std::string> base;
  std::vector<std::pair<std::string, std::string>> anchor;
  const Json anchors = detail::field<Json>(j, "anchor", w);
  for (const auto& [x, s] : anchors.items()) {
    if (!s.is_string()) throw Error(ErrorCode::ParseError, w + ".anchor: values are symbols");
    base.push_back(x);
    anchor.emplace_back(x, s.get<std::string>());
  }
  std::vector<std::tuple<std::string, std::string, std::string>> act;
  for (const auto& t : detail::field<std::vector<std::vector<std::string>>>(j, "act", w)) {
    if (t.size() != 3) throw Error(ErrorCode::ParseError, w + ".act: entries are [a, x, a.x]");
    act.emplace_back(t[0], t[1], t[2]);
  }
  try {
    return LeftAction(sg, std::move(base), anchor, act);
  } catch (const Error& e) {
    throw Error(ErrorCode::CrossRefError, std::string("action: ") + e.what());
  }
}

inline Json action_to_json(const LeftAction& act, const StarSemigroupoid& sg) {
  Json anchor = Json::object();
  for (PointId x = 0; x < act.size(); ++x) anchor[act.label(x)] = sg.symbol_label(act.anchor(x));
  Json tbl = Json::array();
  for (ElemId a = 0; a < sg.size(); ++a)
    for (PointId x = 0; x < act.size(); ++x)
      if (act.table(a, x) != kNone) tbl.push_back(Json::array({sg.label(a), act.label(x), act.label(act.table(a, x))}));
  return Json{{"anchor", std::move(anchor)}, {"act", std::move(tbl)}};
}

// --- bundle ---------------------------------------------------------------

/// Points are taken in the order of `base` when given, so that the bundle
/// lines up with an action regardless of key order in the file.
inline HilbertBundle bundle_from_json(const Json& j, const std::vector<std::string>* base = nullptr) {
  const Json dims = detail::field<Json>(j, "dims", "bundle");
  if (!dims.is_object()) throw Error(ErrorCode::ParseError, "bundle.dims must be an object");
  auto dim_of = [&](const std::string& x) -> std::size_t {
    const Json& v = dims.at(x);
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw Error(ErrorCode::ParseError, "bundle.dims['" + x + "'] must be a non-negative integer");
    return v.get<std::size_t>();
  };
  std::vector<std::string> pts;
  std::vector<std::size_t> ds;
  if (base) {
    if (dims.size() != base->size()) throw Error(ErrorCode::CrossRefError, "bundle and action bases differ in size");
    for (const auto& x : *base) {
      if (!dims.contains(x)) throw Error(ErrorCode::CrossRefError, "bundle has no dimension for '" + x + "'");
      pts.push_back(x);
      ds.push_back(dim_of(x));
    }
  } else {
    for (const auto& [x, v] : dims.items()) {
      pts.push_back(x);
      ds.push_back(dim_of(x));
    }
  }
  return HilbertBundle(std::move(pts), std::move(ds));
}

inline Json bundle_to_json(const HilbertBundle& b) {
  Json dims = Json::object();
  for (PointId x = 0; x < b.size(); ++x) dims[b.label(x)] = b.dim(x);
  return Json{{"dims", std::move(dims)}};
}

// --- kernel ---------------------------------------------------------------

inline OpKernel kernel_from_json(const Json& j, const HilbertBundle& bundle) {
  const std::string w = "kernel";
  if (j.contains("field") && j.at("field") != "complex")
    throw Error(ErrorCode::ParseError, w + ": only field 'complex' is supported");
  OpKernel k(bundle);
  for (const auto& e : detail::field<Json>(j, "entries", w)) {
    const auto row = detail::field<std::string>(e, "row", w + ".entries");
    const auto col = detail::field<std::string>(e, "col", w + ".entries");
    if (!bundle.contains(row) || !bundle.contains(col))
      throw Error(ErrorCode::CrossRefError, "kernel entry (" + row + ", " + col + ") names an unknown point");
    const CMatrix m = matrix_from_json(e, "kernel entry (" + row + ", " + col + ")");
    try {
      k.set(bundle.id(row), bundle.id(col), m);
    } catch (const Error& err) {
      if (err.code() == ErrorCode::ShapeMismatch)
        throw Error(ErrorCode::CrossRefError, "kernel entry (" + row + ", " + col + "): " + err.what());
      throw;
    }
  }
  return k;
}

/// Stored blocks in (row, col) point order; all-zero blocks are omitted.
inline Json kernel_to_json(const OpKernel& k) {
  Json entries = Json::array();
  for (const auto& [xy, m] : k.stored()) {
    if (m.max_abs() == 0.0) continue;
    Json e{{"row", k.bundle().label(xy.first)}, {"col", k.bundle().label(xy.second)}};
    Json mj = matrix_to_json(m);
    e["re"] = std::move(mj["re"]);
    e["im"] = std::move(mj["im"]);
    entries.push_back(std::move(e));
  }
  return Json{{"field", "complex"}, {"entries", std::move(entries)}};
}

// --- instance -------------------------------------------------------------

/// A validated instance. Not movable: the action, kernel and frame refer to
/// the semigroupoid and bundle by address.
struct Instance {
  StarSemigroupoid sg;
  LeftAction action;
  HilbertBundle bundle;
  std::optional<OpKernel> kernel;

  Instance() = default;
  Instance(const Instance&) = delete;
  Instance& operator=(const Instance&) = delete;

  ActionFrame frame() const { return ActionFrame(sg, action, bundle); }
  const OpKernel& require_kernel() const {
    if (!kernel) throw Error(ErrorCode::CrossRefError, "this command needs a kernel document");
    return *kernel;
  }
};

struct InstancePaths {
  std::string semigroupoid;
  std::string action;
  std::string bundle;
  std::string kernel;  // optional
};

inline std::string axiom_failures(const ValidationReport& rep) {
  std::string s;
  for (const auto& v : rep.violations) s += (s.empty() ? "" : "; ") + v.axiom + " at " + v.witness;
  return s;
}

/// Builds an instance from parsed documents and, unless `check_axioms` is
/// false, validates the semigroupoid and action. `kernel` may be null.
inline std::unique_ptr<Instance> load_instance(const Json& sg_doc, const Json& act_doc, const Json& bundle_doc,
                                               const Json* kernel_doc, bool check_axioms = true) {
  auto inst = std::make_unique<Instance>();
  inst->sg = semigroupoid_from_json(sg_doc);
  if (check_axioms) {
    const ValidationReport sgr = validate(inst->sg);
    if (!sgr.ok()) throw Error(ErrorCode::AxiomError, "semigroupoid: " + axiom_failures(sgr));
  }
  inst->action = action_from_json(act_doc, inst->sg);
  if (check_axioms) {
    const ValidationReport ar = validate_action(inst->sg, inst->action, false);
    if (!ar.ok()) throw Error(ErrorCode::AxiomError, "action: " + axiom_failures(ar));
  }
  try {
    inst->bundle = bundle_from_json(bundle_doc, &inst->action.base());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DimMismatch || e.code() == ErrorCode::CrossRefError)
      throw Error(ErrorCode::CrossRefError, std::string("bundle: ") + e.what());
    throw;
  }
  if (kernel_doc) inst->kernel.emplace(kernel_from_json(*kernel_doc, inst->bundle));
  return inst;
}

inline std::unique_ptr<Instance> load_instance(const InstancePaths& p, bool check_axioms = true) {
  const Json sg = read_json_file(p.semigroupoid);
  const Json act = read_json_file(p.action);
  const Json bundle = read_json_file(p.bundle);
  if (p.kernel.empty()) return load_instance(sg, act, bundle, nullptr, check_axioms);
  const Json k = read_json_file(p.kernel);
  return load_instance(sg, act, bundle, &k, check_axioms);
}

/// The four documents, kernel omitted when absent.
inline Json instance_to_json(const Instance& inst) {
  Json j{{"semigroupoid", semigroupoid_to_json(inst.sg)},
         {"action", action_to_json(inst.action, inst.sg)},
         {"bundle", bundle_to_json(inst.bundle)}};
  if (inst.kernel) j["kernel"] = kernel_to_json(*inst.kernel);
  return j;
}

/// 64-bit FNV-1a of the compact canonical serialization, as 16 hex digits.
inline std::string digest(const Json& j) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = hex[h & 0xF];
  return s;
}

}  // namespace kgl
