#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hb/cyclicity.hpp"
#include "hb/json_io.hpp"

namespace hb {

inline constexpr const char* kSchema = "hb/1";

struct JobSpec {
  std::string command;
  std::string b;  // JSON text
  std::string f;  // JSON text
  size_t grid = 4096;
  int taylor = kFplusDegree;
  int clark_n = kClarkDefaultN;
  std::vector<int> degrees;
  double tol = 1e-2;
  std::optional<cplx> point;
  /// Measure per-degree wall time; off by default so output is reproducible.
  bool timing = false;
  std::string format = "json";
  std::string out;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c = {"mate",         "decompose",    "norm",    "kernel", "e0",
                                             "clark-atoms", "cyclic-check", "certify", "witness"};
  return c;
}

/// "a..b", "a..b:step" or "a,b,c".
inline std::vector<int> parse_degrees(const std::string& s) {
  std::vector<int> d;
  auto to_int = [&](const std::string& t) {
    try {
      size_t used = 0;
      int v = std::stoi(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      fail(Errc::ParseError, "degrees: cannot read \"" + t + "\"");
    }
  };
  if (auto dots = s.find(".."); dots != std::string::npos) {
    std::string rest = s.substr(dots + 2);
    int step = 1;
    if (auto colon = rest.find(':'); colon != std::string::npos) {
      step = to_int(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    int a = to_int(s.substr(0, dots)), b = to_int(rest);
    if (step <= 0) fail(Errc::ValidationError, "degrees: step must be positive");
    for (int n = a; n <= b; n += step) d.push_back(n);
  } else {
    std::stringstream ss(s);
    std::string t;
    while (std::getline(ss, t, ',')) d.push_back(to_int(t));
  }
  return d;
}

/// "re,im", "[re,im]" or "re".
inline cplx parse_point(const std::string& s) {
  std::string t = s;
  if (!t.empty() && t.front() == '[') return detail::read_cplx(detail::parse_text(t), "point");
  auto comma = t.find(',');
  try {
    if (comma == std::string::npos) return std::stod(t);
    return {std::stod(t.substr(0, comma)), std::stod(t.substr(comma + 1))};
  } catch (const std::exception&) {
    fail(Errc::ParseError, "point: cannot read \"" + s + "\"");
  }
}

/// Inline JSON, or the contents of a file of that name.
inline std::string read_source(const std::string& s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (s[first] == '{' || s[first] == '[')) return s;
  std::ifstream in(s);
  if (!in) fail(Errc::InvalidArgument, "cannot open \"" + s + "\"");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void validate(const JobSpec& j) {
  if (std::find(commands().begin(), commands().end(), j.command) == commands().end())
    fail(Errc::ValidationError, "unknown command \"" + j.command + "\"");
  if (j.grid < 16 || j.grid > (size_t{1} << 20) || (j.grid & (j.grid - 1)) != 0)
    fail(Errc::ValidationError, "grid M must be a power of two in [16, 2^20]");
  for (size_t i = 0; i < j.degrees.size(); ++i) {
    if (j.degrees[i] < 0) fail(Errc::ValidationError, "degrees must be nonnegative");
    if (i && j.degrees[i] <= j.degrees[i - 1]) fail(Errc::ValidationError, "degrees must be strictly increasing");
  }
  if (j.taylor < 8) fail(Errc::ValidationError, "Taylor truncation must be at least 8");
  if (j.clark_n < 1) fail(Errc::ValidationError, "Clark N must be positive");
  if (!(j.tol > 0.0)) fail(Errc::ValidationError, "tolerance must be positive");
  if (j.format != "json" && j.format != "csv") fail(Errc::ValidationError, "format must be json or csv");
}

namespace detail {

inline const char* kind_name(BKind k) {
  switch (k) {
    case BKind::RationalNonInner: return "rational";
    case BKind::HalfInner: return "half_inner";
    case BKind::Factored: return "factored";
  }
  return "?";
}

inline const char* form_name(ClarkForm f) {
  switch (f) {
    case ClarkForm::Power: return "power";
    case ClarkForm::SingleAtom: return "single_atom";
    case ClarkForm::Herglotz: return "herglotz";
    case ClarkForm::Rational: return "rational";
    case ClarkForm::Numeric: return "numeric";
  }
  return "?";
}

/// A non-finite double is written as a string so the document stays valid JSON.
inline json num(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

inline json report_json(const ConditionsReport& r) {
  json pts = json::array();
  for (const auto& p : r.points) pts.push_back({{"zeta", write_cplx(p.zeta)}, {"value", write_cplx(p.value)}, {"error", num(p.error)}});
  return {{"outer", to_string(r.outer)},
          {"log_gap", num(r.log_gap)},
          {"points", pts},
          {"min_abs", num(r.min_abs)},
          {"nonvanishing", to_string(r.nonvanishing)},
          {"cond_a", to_string(r.cond_a)},
          {"cond_b", to_string(r.cond_b)},
          {"cond_c", to_string(r.cond_c)},
          {"c_partial_sum", num(r.c_partial_sum)},
          {"c_tail_bound", num(r.c_tail_bound)},
          {"c_bound_rigorous", r.c_bound_rigorous},
          {"c_lower_bound", num(r.c_lower_bound)},
          {"detail", r.detail}};
}

struct Output {
  json result;
  std::vector<std::string> csv_header;
  std::vector<std::vector<json>> csv_rows;
  int exit_code = 0;
};

inline std::string csv_cell(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

inline void flatten(const json& j, const std::string& prefix, std::vector<std::vector<json>>& rows) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, rows);
  } else if (j.is_array() && !(j.size() == 2 && j[0].is_number() && j[1].is_number())) {
    for (size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), rows);
  } else {
    rows.push_back({prefix, j.is_array() ? json(j[0].dump() + " " + j[1].dump()) : j});
  }
}

inline ClarkOptions clark_options(const JobSpec& j) {
  ClarkOptions o;
  o.M = j.grid;
  o.tail_tol = j.tol;
  return o;
}

inline FnExpr need_f(const JobSpec& j) {
  if (j.f.empty()) fail(Errc::InvalidArgument, "this command needs --f");
  return parse_function(read_source(j.f));
}
inline BSpec need_b(const JobSpec& j) {
  if (j.b.empty()) fail(Errc::InvalidArgument, "this command needs --b");
  return parse_bspec(read_source(j.b));
}
inline cplx need_point(const JobSpec& j) {
  if (!j.point) fail(Errc::InvalidArgument, "this command needs --point");
  return *j.point;
}

inline Output cmd_mate(const JobSpec& j) {
  BSpec s = need_b(j);
  Output o;
  json nodes = json::array();
  for (const auto& n : s.nodes) nodes.push_back({{"zeta", write_cplx(n.zeta)}, {"mult", n.mult}});
  o.result = {{"kind", kind_name(s.kind)}, {"b", serialize(s.b)}, {"a", serialize(s.a)}, {"nodes", nodes},
              {"N", s.N}, {"a1", write_poly(s.a1)}, {"mate_error", num(s.mate_error)}};
  return o;
}

inline Output cmd_decompose(const JobSpec& j) {
  BSpec s = need_b(j);
  FnExpr f = need_f(j);
  Output o;
  if (s.kind == BKind::HalfInner) {
    ClarkDecomp d = decompose_clark(f, clark_atoms(s.I, 1.0, j.clark_n), clark_options(j));
    ClarkNorms n = hb_norm_clark(d);
    o.result = {{"route", "clark"},
                {"g1_norm2", num(d.g1_norm2)},
                {"g2_norm2", num(d.g2_norm2)},
                {"g2", serialize(d.g2)},
                {"g2_coeffs", write_cplx_list(d.g2_coeffs)},
                {"f_at_atoms", write_cplx_list(d.f_at_atoms)},
                {"tail_estimate", num(d.tail_estimate)},
                {"tail_after_extrapolation", num(d.tail_after_extrapolation)},
                {"omitted_measure", num(d.rule->omitted_measure)},
                {"triple_bar", num(n.triple_bar)},
                {"exact", num(n.exact)}};
    return o;
  }
  RationalDecomp d = decompose_rational(f, s, j.grid);
  o.result = {{"route", "rational"},
              {"p", write_poly(d.p)},
              {"ftilde", serialize(d.ftilde)},
              {"ftilde_exact", d.ftilde_exact},
              {"ftilde_norm", num(d.ftilde_norm)},
              {"p_norm", num(d.p_norm)},
              {"equiv_norm", num(d.equiv_norm)},
              {"reconstruction_error", num(d.reconstruction_error)}};
  return o;
}

inline Output cmd_norm(const JobSpec& j) {
  BSpec s = need_b(j);
  FnExpr f = need_f(j);
  Output o;
  if (s.kind == BKind::HalfInner) {
    ClarkNorms n = hb_norm_clark(decompose_clark(f, clark_atoms(s.I, 1.0, j.clark_n), clark_options(j)));
    o.result = {{"route", "clark"}, {"norm", num(n.exact)}, {"triple_bar", num(n.triple_bar)}};
    return o;
  }
  FplusResult r = fplus(f, s, j.taylor);
  o.result = {{"route", "fplus"}, {"norm", num(r.norm)}, {"f_norm", num(r.f_norm)}, {"fplus_norm", num(r.fplus_norm)},
              {"tail", num(r.tail)}, {"fplus", write_cplx_list(r.fplus)}};
  if (s.kind == BKind::RationalNonInner) o.result["equiv_norm"] = num(decompose_rational(f, s, j.grid).equiv_norm);
  return o;
}

inline Output cmd_kernel(const JobSpec& j) {
  BSpec s = need_b(j);
  cplx l = need_point(j);
  FnExpr k = kernel_kb(s, l);
  Output o;
  o.result = {{"kernel", serialize(k)}, {"lambda", write_cplx(l)}};
  if (std::abs(l) < 1.0 - 1e-12) {
    cplx bl = evaluate(s.b, l);
    o.result["norm2_closed_form"] = num((1.0 - std::norm(bl)) / (1.0 - std::norm(l)));
  }
  if (s.kind == BKind::HalfInner) {
    o.result["norm"] = num(hb_norm_clark(decompose_clark(k, clark_atoms(s.I, 1.0, j.clark_n), clark_options(j))).exact);
  } else {
    o.result["norm"] = num(hb_norm(k, s, j.taylor));
  }
  return o;
}

inline Output cmd_e0(const JobSpec& j) {
  BSpec s = need_b(j);
  cplx z = need_point(j);
  E0Report r = e0_contains(s, z);
  Output o;
  o.result = {{"zeta", write_cplx(z)},          {"contains", r.contains},
              {"blaschke_term", num(r.blaschke_term)}, {"atomic_term", num(r.atomic_term)},
              {"log_term", num(r.log_term)},      {"atomic_diverges", r.atomic_diverges},
              {"log_diverges", r.log_diverges},   {"detail", r.detail}};
  return o;
}

inline Output cmd_clark_atoms(const JobSpec& j) {
  FnExpr I;
  if (!j.b.empty()) {
    BSpec s = need_b(j);
    if (s.kind != BKind::HalfInner) fail(Errc::InvalidArgument, "clark-atoms needs a half_inner symbol or --f inner");
    I = s.I;
  } else {
    I = need_f(j);
  }
  ClarkData d = clark_atoms(I, 1.0, j.clark_n);
  Output o;
  json atoms = json::array();
  o.csv_header = {"index", "zeta_re", "zeta_im", "weight"};
  for (size_t i = 0; i < d.atoms.size(); ++i) {
    const auto& a = d.atoms[i];
    atoms.push_back({{"zeta", write_cplx(a.zeta)}, {"weight", num(a.weight)}, {"dI", write_cplx(a.dI)}});
    o.csv_rows.push_back({static_cast<int>(i), a.zeta.real(), a.zeta.imag(), num(a.weight)});
  }
  o.result = {{"atoms", atoms},
              {"form", form_name(d.form)},
              {"N", d.N_trunc},
              {"total_mass_target", num(d.total_mass_target)},
              {"retained_mass", num(d.retained_mass())},
              {"tail_mass", num(d.tail_mass())}};
  return o;
}

inline bool analytic_on_closed_disc(const FnExpr& f) {
  auto r = as_rational(f);
  if (!r) return false;
  for (cplx z : r->second.roots())
    if (std::abs(z) <= 1.0 + 1e-12) return false;
  return true;
}

inline Output cmd_cyclic_check(const JobSpec& j) {
  BSpec s = need_b(j);
  FnExpr f = need_f(j);
  Output o;
  Cyclicity v = Cyclicity::Inconclusive;
  ConditionsReport r;
  std::string basis;
  switch (s.kind) {
    case BKind::RationalNonInner:
      r = necessary_conditions(f, s);
      v = is_cyclic_rational(f, s);
      basis = "complete characterisation for rational b";
      break;
    case BKind::Factored:
      r = necessary_conditions(f, s);
      if (analytic_on_closed_disc(f)) {
        v = is_cyclic_hol_closure(f, s);
        basis = "characterisation for f analytic on the closed disc";
      } else if (!r.necessary_hold()) {
        v = Cyclicity::NotCyclic;
        basis = "necessary condition fails";
      }
      break;
    case BKind::HalfInner: {
      ClarkData d = clark_atoms(s.I, 1.0, j.clark_n);
      r = thm5_conditions(f, d, j.clark_n);
      if (r.outer == Check::Fail || r.nonvanishing == Check::Fail) {
        v = Cyclicity::NotCyclic;
        basis = "necessary condition fails";
      } else if (r.thm5_hold()) {
        v = Cyclicity::Cyclic;
        basis = "sufficient conditions (a), (b), (c) hold";
      } else {
        basis = "sufficient conditions not all established";
      }
      break;
    }
  }
  o.result = {{"verdict", to_string(v)}, {"basis", basis}, {"report", report_json(r)}};
  if (v == Cyclicity::Inconclusive) o.exit_code = 2;
  return o;
}

inline Output cmd_certify(const JobSpec& j) {
  BSpec s = need_b(j);
  FnExpr f = need_f(j);
  if (j.degrees.empty()) fail(Errc::InvalidArgument, "certify needs --degrees");
  CertifyOptions co;
  co.clark = clark_options(j);
  Certificate c = certify(f, s, j.degrees, co, j.clark_n);
  std::vector<double> wall(j.degrees.size(), 0.0);
  if (j.timing)
    for (size_t i = 0; i < j.degrees.size(); ++i) {
      auto t0 = std::chrono::steady_clock::now();
      certify(f, s, {j.degrees[i]}, co, j.clark_n);
      wall[i] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
  Output o;
  o.csv_header = {"degree", "residual", "tail_estimate", "wall_ms"};
  json rows = json::array();
  const double tail = std::max(c.tail_estimate, c.r_tail_estimate);
  for (size_t i = 0; i < c.degrees.size(); ++i) {
    rows.push_back({{"degree", c.degrees[i]}, {"residual", num(c.residuals[i])}, {"tail_estimate", num(tail)},
                    {"wall_ms", num(wall[i])}});
    o.csv_rows.push_back({c.degrees[i], num(c.residuals[i]), num(tail), num(wall[i])});
  }
  o.result = {{"kind", to_string(c.kind)},
              {"verdict", {{"kind", to_string(c.verdict.kind)}, {"floor", num(c.verdict.floor)}, {"beta", num(c.verdict.beta)}}},
              {"rows", rows},
              {"r", write_poly(c.r)},
              {"q", write_poly(c.q)},
              {"r_coeffs", write_cplx_list(c.r_coeffs)},
              {"r_extrapolated", write_cplx(c.r_extrapolated)},
              {"tail_estimate", num(c.tail_estimate)},
              {"r_tail_estimate", num(c.r_tail_estimate)},
              {"omitted_measure", num(c.omitted_measure)},
              {"q_last", write_poly(c.q_last)},
              {"timing", j.timing},
              {"note", c.note}};
  if (c.verdict.kind == VerdictKind::Inconclusive) o.exit_code = 2;
  return o;
}

inline Output cmd_witness(const JobSpec& j) {
  BSpec s = need_b(j);
  FnExpr f = need_f(j);
  cplx z = need_point(j);
  Output o;
  o.result = {{"zeta", write_cplx(z)}, {"lower_bound", num(noncyclicity_witness(f, s, z))}};
  return o;
}

inline Output dispatch(const JobSpec& j) {
  if (j.command == "mate") return cmd_mate(j);
  if (j.command == "decompose") return cmd_decompose(j);
  if (j.command == "norm") return cmd_norm(j);
  if (j.command == "kernel") return cmd_kernel(j);
  if (j.command == "e0") return cmd_e0(j);
  if (j.command == "clark-atoms") return cmd_clark_atoms(j);
  if (j.command == "cyclic-check") return cmd_cyclic_check(j);
  if (j.command == "certify") return cmd_certify(j);
  return cmd_witness(j);
}

inline std::string render(const JobSpec& j, const Output& o) {
  if (j.format == "json") {
    json doc = {{"schema", kSchema}, {"command", j.command}, {"result", o.result}};
    return doc.dump(2) + "\n";
  }
  std::vector<std::string> header = o.csv_header;
  std::vector<std::vector<json>> rows = o.csv_rows;
  if (header.empty()) {
    header = {"key", "value"};
    flatten(o.result, "", rows);
  }
  std::string s;
  for (size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
  s += "\n";
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + csv_cell(r[i]);
    s += "\n";
  }
  return s;
}

}  // namespace detail

/// Runs one job.  Results go to job.out (or `out` when empty); failures are
/// reported on `err` as a JSON diagnostic.  Exit code 0 on success, 2 when
/// the answer is mathematically inconclusive, 1 on error.
inline int run(const JobSpec& job, std::ostream& out, std::ostream& err) {
  try {
    validate(job);
    detail::Output o = detail::dispatch(job);
    std::string text = detail::render(job, o);
    if (job.out.empty()) {
      out << text;
    } else {
      std::ofstream f(job.out, std::ios::binary);
      if (!f) fail(Errc::InvalidArgument, "cannot write \"" + job.out + "\"");
      f << text;
    }
    return o.exit_code;
  } catch (const Error& e) {
    json d = {{"schema", kSchema}, {"command", job.command},
              {"error", {{"code", std::string(errc_name(e.code()))}, {"message", e.what()}}}};
    err << d.dump(2) << "\n";
    return e.code() == Errc::Inconclusive ? 2 : 1;
  } catch (const std::exception& e) {
    json d = {{"schema", kSchema}, {"command", job.command}, {"error", {{"code", "Internal"}, {"message", e.what()}}}};
    err << d.dump(2) << "\n";
    return 1;
  }
}

}  // namespace hb
