#pragma once

// JSON expression-tree grammar for FnExpr and symbol descriptions (BSpec).
//
//   {"type": "poly", "coeffs": [c0, c1, ...]}
//   {"type": "rational", "num": [...], "den": [...]}
//   {"type": "blaschke", "zeros": [...], "gamma"?: c}
//   {"type": "singular_inner" | "herglotz_inner", "atoms": [{"xi": c, "mass": x}, ...]}
//   {"type": "h2_kernel", "lambda": c}
//   {"type": "hb_kernel" | "ki_kernel", "g": expr, "lambda": c, "value"?: c}
//   {"type": "sum", "terms": [...]}, {"type": "product", "factors": [...]}
//   {"type": "scale", "c": c, "f": expr}, {"type": "compose_power", "f": expr, "k": n}
//
// Complex numbers are [re, im] or a bare real.  "value" is g(lambda); it is
// filled in when omitted.

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hb/clark.hpp"
#include "hb/rational.hpp"

namespace hb {

using json = nlohmann::json;

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& path, const std::string& what) {
  fail(Errc::ParseError, (path.empty() ? std::string("/") : path) + ": " + what);
}

inline void only_fields(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) parse_fail(path + "/" + k, "unknown field");
}

inline const json& field(const json& j, const std::string& path, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) parse_fail(path, std::string("missing field \"") + name + "\"");
  return *it;
}

inline double read_real(const json& j, const std::string& path) {
  if (!j.is_number()) parse_fail(path, "expected a number");
  return j.get<double>();
}

inline cplx read_cplx(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    parse_fail(path, "expected a complex number [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline std::vector<cplx> read_cplx_list(const json& j, const std::string& path) {
  if (!j.is_array()) parse_fail(path, "expected an array");
  std::vector<cplx> v;
  for (size_t i = 0; i < j.size(); ++i) v.push_back(read_cplx(j[i], path + "/" + std::to_string(i)));
  return v;
}

inline Poly read_poly(const json& j, const std::string& path) {
  auto c = read_cplx_list(j, path);
  if (c.empty()) parse_fail(path, "empty coefficient list");
  return Poly(c);
}

inline std::vector<Atom> read_atoms(const json& j, const std::string& path) {
  if (!j.is_array()) parse_fail(path, "expected an array of atoms");
  std::vector<Atom> atoms;
  for (size_t i = 0; i < j.size(); ++i) {
    std::string p = path + "/" + std::to_string(i);
    only_fields(j[i], p, {"xi", "mass"});
    atoms.push_back({read_cplx(field(j[i], p, "xi"), p + "/xi"), read_real(field(j[i], p, "mass"), p + "/mass")});
  }
  return atoms;
}

inline json write_cplx(cplx z) { return json::array({z.real(), z.imag()}); }

inline json write_cplx_list(const std::vector<cplx>& v) {
  json a = json::array();
  for (cplx z : v) a.push_back(write_cplx(z));
  return a;
}

inline json write_poly(const Poly& p) {
  std::vector<cplx> c;
  for (int k = 0; k <= std::max(p.degree(), 0); ++k) c.push_back(p.degree() < 0 ? cplx(0.0) : p[k]);
  return write_cplx_list(c);
}

inline json write_atoms(const std::vector<Atom>& atoms) {
  json a = json::array();
  for (const auto& at : atoms) a.push_back({{"xi", write_cplx(at.xi)}, {"mass", at.mass}});
  return a;
}

inline FnExpr parse_expr(const json& j, const std::string& path);

inline std::vector<FnExpr> parse_list(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) parse_fail(path, "expected a non-empty array of expressions");
  std::vector<FnExpr> v;
  for (size_t i = 0; i < j.size(); ++i) v.push_back(parse_expr(j[i], path + "/" + std::to_string(i)));
  return v;
}

template <class F>
FnExpr validated(const std::string& path, F&& make) {
  try {
    return make();
  } catch (const Error& e) {
    if (e.code() == Errc::ParseError) throw;
    fail(Errc::ValidationError, path + ": " + e.what());
  }
}

inline FnExpr parse_expr(const json& j, const std::string& path) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  const json& t = field(j, path, "type");
  if (!t.is_string()) parse_fail(path + "/type", "expected a string");
  const std::string type = t.get<std::string>();
  auto at = [&](const char* name) { return path + "/" + name; };

  if (type == "poly") {
    only_fields(j, path, {"type", "coeffs"});
    return poly(read_poly(field(j, path, "coeffs"), at("coeffs")));
  }
  if (type == "rational") {
    only_fields(j, path, {"type", "num", "den"});
    Poly n = read_poly(field(j, path, "num"), at("num")), d = read_poly(field(j, path, "den"), at("den"));
    return validated(path, [&] {
      for (cplx r : d.roots())
        if (std::abs(r) <= 1.0) fail(Errc::ValidationError, "denominator vanishes on the closed disc");
      return rational(n, d);
    });
  }
  if (type == "blaschke") {
    only_fields(j, path, {"type", "zeros", "gamma"});
    auto zeros = read_cplx_list(field(j, path, "zeros"), at("zeros"));
    cplx gamma = j.contains("gamma") ? read_cplx(j["gamma"], at("gamma")) : cplx(1.0);
    return validated(path, [&] { return blaschke(zeros, gamma); });
  }
  if (type == "singular_inner" || type == "herglotz_inner") {
    only_fields(j, path, {"type", "atoms"});
    auto atoms = read_atoms(field(j, path, "atoms"), at("atoms"));
    return validated(path, [&] { return type == "singular_inner" ? singular_inner(atoms) : herglotz_inner(atoms); });
  }
  if (type == "h2_kernel") {
    only_fields(j, path, {"type", "lambda"});
    cplx l = read_cplx(field(j, path, "lambda"), at("lambda"));
    return validated(path, [&] { return h2_kernel(l); });
  }
  if (type == "hb_kernel" || type == "ki_kernel") {
    only_fields(j, path, {"type", "g", "lambda", "value"});
    FnExpr g = parse_expr(field(j, path, "g"), at("g"));
    cplx l = read_cplx(field(j, path, "lambda"), at("lambda"));
    const auto kind = type == "hb_kernel" ? fn::KernelKind::Hb : fn::KernelKind::KI;
    return validated(path, [&] {
      if (j.contains("value")) return hb_kernel_expr(g, l, read_cplx(j["value"], at("value")), kind);
      if (kind == fn::KernelKind::KI) return ki_kernel(g, l);
      const bool interior = std::abs(l) < 1.0 - 1e-12;
      return hb_kernel_expr(g, l, interior ? evaluate(g, l) : boundary_value(g, l), kind);
    });
  }
  if (type == "sum") {
    only_fields(j, path, {"type", "terms"});
    return sum(parse_list(field(j, path, "terms"), at("terms")));
  }
  if (type == "product") {
    only_fields(j, path, {"type", "factors"});
    return product(parse_list(field(j, path, "factors"), at("factors")));
  }
  if (type == "scale") {
    only_fields(j, path, {"type", "c", "f"});
    cplx c = read_cplx(field(j, path, "c"), at("c"));
    return scale(c, parse_expr(field(j, path, "f"), at("f")));
  }
  if (type == "compose_power") {
    only_fields(j, path, {"type", "f", "k"});
    const json& k = field(j, path, "k");
    if (!k.is_number_integer()) parse_fail(at("k"), "expected an integer");
    FnExpr f = parse_expr(field(j, path, "f"), at("f"));
    return validated(path, [&] { return compose_power(f, k.get<int>()); });
  }
  parse_fail(at("type"), "unknown expression type \"" + type + "\"");
}

struct Serializer {
  json operator()(const fn::PolyFn& p) const { return {{"type", "poly"}, {"coeffs", write_poly(p.p)}}; }
  json operator()(const fn::RationalFn& r) const {
    return {{"type", "rational"}, {"num", write_poly(r.num)}, {"den", write_poly(r.den)}};
  }
  json operator()(const fn::BlaschkeFn& b) const {
    return {{"type", "blaschke"}, {"zeros", write_cplx_list(b.zeros)}, {"gamma", write_cplx(b.gamma)}};
  }
  json operator()(const fn::SingularInnerFn& s) const { return {{"type", "singular_inner"}, {"atoms", write_atoms(s.atoms)}}; }
  json operator()(const fn::HerglotzInnerFn& h) const { return {{"type", "herglotz_inner"}, {"atoms", write_atoms(h.atoms)}}; }
  json operator()(const fn::H2KernelFn& k) const { return {{"type", "h2_kernel"}, {"lambda", write_cplx(k.lambda)}}; }
  json operator()(const fn::KernelFn& k) const;
  json operator()(const fn::SumFn& s) const;
  json operator()(const fn::ProductFn& p) const;
  json operator()(const fn::ScaleFn& s) const;
  json operator()(const fn::ComposePowerFn& c) const;
};

}  // namespace detail

inline json serialize(const FnExpr& e) { return std::visit(detail::Serializer{}, e.node()); }

namespace detail {

inline json Serializer::operator()(const fn::KernelFn& k) const {
  return {{"type", k.kind == fn::KernelKind::Hb ? "hb_kernel" : "ki_kernel"},
          {"g", serialize(*k.g)},
          {"lambda", write_cplx(k.point)},
          {"value", write_cplx(k.g_at_point)}};
}
inline json Serializer::operator()(const fn::SumFn& s) const {
  json a = json::array();
  for (const auto& t : s.terms) a.push_back(serialize(t));
  return {{"type", "sum"}, {"terms", a}};
}
inline json Serializer::operator()(const fn::ProductFn& p) const {
  json a = json::array();
  for (const auto& t : p.factors) a.push_back(serialize(t));
  return {{"type", "product"}, {"factors", a}};
}
inline json Serializer::operator()(const fn::ScaleFn& s) const {
  return {{"type", "scale"}, {"c", write_cplx(s.c)}, {"f", serialize(*s.f)}};
}
inline json Serializer::operator()(const fn::ComposePowerFn& c) const {
  return {{"type", "compose_power"}, {"f", serialize(*c.f)}, {"k", c.k}};
}

inline json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(Errc::ParseError, std::string("byte ") + std::to_string(e.byte) + ": " + e.what());
  }
}

}  // namespace detail

inline FnExpr parse_function(const json& j) { return detail::parse_expr(j, ""); }
inline FnExpr parse_function(const std::string& text) { return parse_function(detail::parse_text(text)); }

/// {"kind": "rational", "b": expr} | {"kind": "half_inner", "I": expr} |
/// {"kind": "factored", "outer": expr, "zeros"?: [...], "atoms"?: [...]}.
/// A bare expression is read as a rational b.
inline BSpec parse_bspec(const json& j) {
  if (!j.is_object()) detail::parse_fail("", "expected an object");
  if (!j.contains("kind")) return mate(parse_function(j));
  const json& k = j["kind"];
  if (!k.is_string()) detail::parse_fail("/kind", "expected a string");
  const std::string kind = k.get<std::string>();
  if (kind == "rational") {
    detail::only_fields(j, "", {"kind", "b"});
    return mate(detail::parse_expr(detail::field(j, "", "b"), "/b"));
  }
  if (kind == "half_inner") {
    detail::only_fields(j, "", {"kind", "I"});
    return half_inner(detail::parse_expr(detail::field(j, "", "I"), "/I"));
  }
  if (kind == "factored") {
    detail::only_fields(j, "", {"kind", "outer", "zeros", "atoms"});
    FnExpr outer = detail::parse_expr(detail::field(j, "", "outer"), "/outer");
    auto zeros = j.contains("zeros") ? detail::read_cplx_list(j["zeros"], "/zeros") : std::vector<cplx>{};
    auto atoms = j.contains("atoms") ? detail::read_atoms(j["atoms"], "/atoms") : std::vector<Atom>{};
    try {
      return factored(outer, zeros, atoms);
    } catch (const Error& e) {
      fail(Errc::ValidationError, std::string("/: ") + e.what());
    }
  }
  detail::parse_fail("/kind", "unknown symbol kind \"" + kind + "\"");
}
inline BSpec parse_bspec(const std::string& text) { return parse_bspec(detail::parse_text(text)); }

}  // namespace hb
