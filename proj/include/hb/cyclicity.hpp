#pragma once
// Cyclicity of the shift on H(b): necessary conditions, the characterisations
// for rational b and for functions analytic on the closed disc, constructive
// certificates ||p_n f - 1||_b -> 0, and lower bounds that rule them out.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hb/clark.hpp"
#include "hb/error.hpp"
#include "hb/fnexpr.hpp"
#include "hb/hardy.hpp"
#include "hb/rational.hpp"

namespace hb {

inline constexpr double kZeroTol = 1e-8;

enum class Check { Pass, Fail, Inconclusive };
enum class Cyclicity { Cyclic, NotCyclic, Inconclusive };

inline const char* to_string(Check c) {
  switch (c) {
    case Check::Pass: return "pass";
    case Check::Fail: return "fail";
    case Check::Inconclusive: return "inconclusive";
  }
  return "?";
}
inline const char* to_string(Cyclicity c) {
  switch (c) {
    case Cyclicity::Cyclic: return "cyclic";
    case Cyclicity::NotCyclic: return "not cyclic";
    case Cyclicity::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct PointValue {
  cplx zeta;
  cplx value;
  double error = 0.0;
};

struct ConditionsReport {
  Check outer = Check::Inconclusive;
  double log_gap = 0.0;
  /// f at the boundary points that matter (nodes, E0 zeros, Clark atoms)
  std::vector<PointValue> points;
  double min_abs = std::numeric_limits<double>::infinity();
  Check nonvanishing = Check::Inconclusive;

  // sufficient conditions for b = (1+I)/2
  Check cond_a = Check::Inconclusive;
  Check cond_b = Check::Inconclusive;
  Check cond_c = Check::Inconclusive;
  double c_partial_sum = 0.0;
  double c_tail_bound = std::numeric_limits<double>::infinity();
  /// c_tail_bound comes from a closed-form lower bound on |f(zeta_n)|
  bool c_bound_rigorous = false;
  double c_lower_bound = 0.0;
  /// max |f(zeta_n) - g2(zeta_n)| over the retained atoms
  double g2_mismatch = 0.0;
  std::string detail;

  bool necessary_hold() const { return outer == Check::Pass && nonvanishing == Check::Pass; }
  bool thm5_hold() const { return cond_a == Check::Pass && cond_b == Check::Pass && cond_c == Check::Pass; }
};

namespace detail {

inline PointValue boundary_point(const FnExpr& f, cplx zeta) {
  try {
    return {zeta, eval(f, zeta), 0.0};
  } catch (const Error& e) {
    if (e.code() != Errc::EvalAtSingularity) throw;
  }
  auto lim = nontangential_limit(f, zeta);
  if (lim.status != LimitStatus::Converged) fail(Errc::EvalAtSingularity, "no finite boundary value");
  return {zeta, lim.value, lim.error};
}

inline void add_point(ConditionsReport& r, PointValue pv) {
  r.min_abs = std::min(r.min_abs, std::abs(pv.value));
  r.points.push_back(pv);
}

}  // namespace detail

/// f outer and f(zeta) != 0 on E0(b).  Either failing proves f is not cyclic.
inline ConditionsReport necessary_conditions(const FnExpr& f, const BSpec& spec) {
  ConditionsReport r;
  OuterReport o = is_outer(f);
  r.outer = o.outer ? Check::Pass : Check::Fail;
  r.log_gap = o.gap;
  switch (spec.kind) {
    case BKind::RationalNonInner:
      for (const auto& n : spec.nodes) detail::add_point(r, detail::boundary_point(f, n.zeta));
      r.nonvanishing = r.min_abs > kZeroTol ? Check::Pass : Check::Fail;
      break;
    case BKind::HalfInner: {
      ClarkData d = clark_atoms(spec.I);
      for (const auto& a : d.atoms) detail::add_point(r, detail::boundary_point(f, a.zeta));
      r.nonvanishing = r.min_abs > kZeroTol ? Check::Pass : Check::Fail;
      if (r.nonvanishing == Check::Pass && d.tail_mass() > 0.0) {
        r.nonvanishing = Check::Inconclusive;
        r.detail = "E0(b) is infinite; only the retained Clark atoms were checked";
      }
      break;
    }
    case BKind::Factored: {
      // f can only vanish on E0(b) at its own boundary zeros
      r.nonvanishing = Check::Pass;
      for (cplx z : boundary_zeros(f)) {
        E0Report e = e0_contains(spec, z);
        if (!e.contains) continue;
        detail::add_point(r, detail::boundary_point(f, z));
        r.nonvanishing = Check::Fail;
      }
      break;
    }
  }
  return r;
}

/// Complete characterisation for rational non-inner b: f is cyclic iff it is
/// outer and f(zeta_k) != 0 at every boundary root of the mate.
inline Cyclicity is_cyclic_rational(const FnExpr& f, const BSpec& spec) {
  if (spec.kind != BKind::RationalNonInner) fail(Errc::InvalidArgument, "is_cyclic_rational needs a rational non-inner b");
  decompose_rational(f, spec);
  return necessary_conditions(f, spec).necessary_hold() ? Cyclicity::Cyclic : Cyclicity::NotCyclic;
}

/// For f analytic on the closed disc: cyclic iff outer and no boundary zero of
/// f lies in E0(b).
inline Cyclicity is_cyclic_hol_closure(const FnExpr& f, const BSpec& spec) {
  if (!is_outer(f).outer) return Cyclicity::NotCyclic;
  for (cplx z : boundary_zeros(f))
    if (e0_contains(spec, z).contains) return Cyclicity::NotCyclic;
  return Cyclicity::Cyclic;
}

// ---------------------------------------------------------------------------
// certificates

enum class CertKind { Rational, Clark, Direct };
enum class VerdictKind { Converging, Stalled, Inconclusive };

inline const char* to_string(CertKind k) {
  switch (k) {
    case CertKind::Rational: return "rational";
    case CertKind::Clark: return "clark";
    case CertKind::Direct: return "direct";
  }
  return "?";
}
inline const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Converging: return "converging";
    case VerdictKind::Stalled: return "stalled";
    case VerdictKind::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct Verdict {
  VerdictKind kind = VerdictKind::Inconclusive;
  double floor = 0.0;  // Stalled
  double beta = 0.0;   // fitted decay exponent on the last half
};

struct VerdictOptions {
  double threshold = 1e-8;
  double min_beta = 0.25;
  double min_drop = 0.5;
  double stall_change = 1e-3;
};

/// Converging: final residual below threshold, or a power-law fit
/// C (n+1)^-beta on the last half with beta >= min_beta and final <
/// min_drop * initial.  Stalled: relative change over the last quarter below
/// stall_change.
inline Verdict classify(const std::vector<int>& degrees, const std::vector<double>& res, const VerdictOptions& o = {}) {
  Verdict v;
  const size_t n = res.size();
  if (n == 0) return v;
  const double first = res.front(), last = res.back();
  if (last <= o.threshold) {
    v.kind = VerdictKind::Converging;
    return v;
  }
  if (n >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    size_t cnt = 0;
    for (size_t i = n / 2; i < n; ++i) {
      if (res[i] <= 0.0) continue;
      double x = std::log(degrees[i] + 1.0), y = std::log(res[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++cnt;
    }
    const double den = cnt * sxx - sx * sx;
    if (cnt >= 2 && den > 0.0) v.beta = -(cnt * sxy - sx * sy) / den;
  }
  if (v.beta >= o.min_beta && last < o.min_drop * first) {
    v.kind = VerdictKind::Converging;
    return v;
  }
  const size_t q = n - std::max<size_t>(1, n / 4) - 1;
  const double ref = res[std::min(q, n - 1)];
  if (ref > 0.0 && (ref - last) / ref < o.stall_change) {
    v.kind = VerdictKind::Stalled;
    v.floor = last;
  }
  return v;
}

struct Certificate {
  CertKind kind = CertKind::Rational;
  // Rational: p_n = a1 q_n + r, r p - 1 = a1 q
  Poly r;
  Poly q;
  // Clark: r = sum r_coeffs[n] k_{zeta_n}^I plus the extrapolated tail
  std::vector<cplx> r_coeffs;
  cplx r_extrapolated = 0.0;
  CircleGrid g3;
  std::vector<int> degrees;
  std::vector<double> residuals;
  /// q_n at the last degree (Direct: p_n itself)
  Poly q_last;
  Verdict verdict;
  /// Clark: truncation estimates (decomposition, r-series) and the arc left
  /// out of the quadrature
  double tail_estimate = 0.0;
  double r_tail_estimate = 0.0;
  double omitted_measure = 0.0;
  std::string note;
};

struct CertifyOptions {
  VerdictOptions verdict;
  double ridge = 1e-12;
  ClarkOptions clark;
};

namespace detail {

inline void check_degrees(const std::vector<int>& degrees) {
  if (degrees.empty()) fail(Errc::InvalidArgument, "empty degree list");
  if (degrees.front() < 0) fail(Errc::InvalidArgument, "negative degree");
  for (size_t i = 1; i < degrees.size(); ++i)
    if (degrees[i] <= degrees[i - 1]) fail(Errc::InvalidArgument, "degrees must be strictly increasing");
}

inline QuadOptions ls_quad(int nmax) {
  QuadOptions q;
  while (q.M < static_cast<size_t>(8 * (nmax + 16))) q.M *= 2;
  q.bandwidth = std::max(q.bandwidth, 2 * nmax + 16);
  return q;
}

inline double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace detail

/// Polynomial of degree < sum m_k with (r p - 1)^{(j)}(zeta_k) = 0 for j < m_k.
inline Poly hermite_r(const std::vector<Node>& nodes, const Poly& p) {
  std::vector<std::vector<cplx>> vals;
  for (const auto& n : nodes) {
    std::vector<cplx> pj(static_cast<size_t>(n.mult));
    for (int j = 0; j < n.mult; ++j) pj[static_cast<size_t>(j)] = p.derivative(j)(n.zeta);
    if (std::abs(pj[0]) < 1e-10 * std::max(1.0, p.max_abs_coeff())) fail(Errc::NodeZero, "p vanishes at a node");
    std::vector<cplx> r(static_cast<size_t>(n.mult));
    r[0] = 1.0 / pj[0];
    for (int j = 1; j < n.mult; ++j) {
      cplx s = 0.0;
      for (int i = 0; i < j; ++i) s += detail::binom(j, i) * r[static_cast<size_t>(i)] * pj[static_cast<size_t>(j - i)];
      r[static_cast<size_t>(j)] = -s / pj[0];
    }
    vals.push_back(std::move(r));
  }
  if (nodes.empty()) return Poly{};
  return hermite_interpolate(nodes, vals);
}

/// Minimises the canonical norm ||p f - 1||_b = (||.||_2^2 + ||.+||_2^2)^(1/2)
/// over deg p <= n in Taylor-coefficient space.
inline Certificate certify_direct(const FnExpr& f, const BSpec& spec, const std::vector<int>& degrees,
                                  const CertifyOptions& o = {}) {
  detail::check_degrees(degrees);
  if (spec.kind == BKind::HalfInner && !as_rational(spec.I))
    fail(Errc::InvalidArgument, "direct certificate needs Taylor coefficients of a rational mate");
  const int nmax = degrees.back();
  auto fr = as_rational(f);
  const bool fpoly = fr && fr->second.degree() == 0;
  const int extra = fpoly ? fr->first.degree() : 256;
  const int D = nmax + extra + 64;
  const int top = D + kToeplitzBuffer;
  const int L = 2 * top + 64;
  std::vector<cplx> fc = taylor_coeffs(f, L);
  auto [bc, ac] = symbol_coeffs(spec, L);

  const Eigen::Index rows = 2 * (D + 1), cols = nmax + 1;
  Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(rows, cols);
  std::vector<cplx> col(static_cast<size_t>(L) + 1);
  for (int j = 0; j <= nmax; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    for (int k = 0; k + j <= L; ++k) col[static_cast<size_t>(k + j)] = fc[static_cast<size_t>(k)];
    auto g = toeplitz_coanalytic_apply(bc, col, top);
    auto sol = toeplitz_coanalytic_solve(ac, g, D, 1e-8);
    for (int k = 0; k <= D; ++k) {
      V(k, j) = col[static_cast<size_t>(k)];
      V(D + 1 + k, j) = sol.x[static_cast<size_t>(k)];
    }
  }
  Eigen::VectorXcd t = Eigen::VectorXcd::Zero(rows);
  {
    std::vector<cplx> one(static_cast<size_t>(L) + 1, 0.0);
    one[0] = 1.0;
    auto g = toeplitz_coanalytic_apply(bc, one, top);
    auto sol = toeplitz_coanalytic_solve(ac, g, D, 1e-8);
    t(0) = 1.0;
    for (int k = 0; k <= D; ++k) t(D + 1 + k) = sol.x[static_cast<size_t>(k)];
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(V);
  Eigen::VectorXcd y = qr.householderQ().adjoint() * t;
  const Eigen::MatrixXcd R = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();

  Certificate c;
  c.kind = CertKind::Direct;
  c.degrees = degrees;
  for (int n : degrees) {
    const Eigen::Index s = n + 1;
    Eigen::VectorXcd p = R.topLeftCorner(s, s).triangularView<Eigen::Upper>().solve(y.head(s));
    for (Eigen::Index k = 0; k < s; ++k)
      if (!std::isfinite(std::abs(p(k)))) fail(Errc::IllConditioned, "triangular solve overflowed");
    double res = (V.leftCols(s) * p - t).norm();
    c.residuals.push_back(res);
    if (n == nmax) {
      std::vector<cplx> pc(static_cast<size_t>(s));
      for (Eigen::Index k = 0; k < s; ++k) pc[static_cast<size_t>(k)] = p(k);
      c.q_last = Poly(pc);
    }
  }
  c.verdict = classify(c.degrees, c.residuals, o.verdict);
  c.note = "canonical norm minimised over p_n";
  return c;
}

/// p_n = a1 q_n + r with r from Hermite interpolation of 1/p and
/// r p - 1 = a1 q; residual(n) = ||q_n f + r ftilde + q||_2.
inline Certificate certify_rational(const FnExpr& f, const BSpec& spec, const std::vector<int>& degrees,
                                    const CertifyOptions& o = {}) {
  detail::check_degrees(degrees);
  if (spec.kind != BKind::RationalNonInner) fail(Errc::InvalidArgument, "certify_rational needs a rational non-inner b");
  Certificate c;
  c.kind = CertKind::Rational;
  c.degrees = degrees;
  const int nmax = degrees.back();
  QuadOptions qo = detail::ls_quad(nmax);
  std::vector<LSResult> ls;
  if (spec.N == 0) {
    // H^2 up to a constant factor: approximate 1 by q_n f
    auto rule = rule_for({f}, qo);
    ls = poly_ls_sweep(*rule, sample_values(f, rule), std::vector<cplx>(rule->size(), 1.0), degrees, o.ridge);
    c.note = "constant b: Beurling case";
  } else {
    RationalDecomp dec = decompose_rational(f, spec);
    c.r = hermite_r(spec.nodes, dec.p);
    Poly rp1 = c.r * dec.p - Poly::constant(1.0);
    auto [qq, rem] = rp1.divmod(spec.a1);
    if (rem.max_abs_coeff() > 1e-8 * std::max(rp1.max_abs_coeff(), 1.0))
      fail(Errc::DivisionRemainder, "r p - 1 is not divisible by a1");
    c.q = qq;
    auto rule = rule_for({f, dec.ftilde}, qo);
    auto fv = sample_values(f, rule), ftv = sample_values(dec.ftilde, rule);
    std::vector<cplx> target(rule->size());
    for (size_t m = 0; m < rule->size(); ++m) {
      cplx z = rule->nodes[m];
      target[m] = -(c.r(z) * ftv[m] + c.q(z));
    }
    ls = poly_ls_sweep(*rule, fv, target, degrees, o.ridge);
  }
  for (const auto& l : ls) c.residuals.push_back(l.residual);
  c.q_last = ls.back().q;
  c.verdict = classify(c.degrees, c.residuals, o.verdict);
  return c;
}

/// psi_n = (1-I) q_n + r with r = sum (1/f(zeta_n)) w_n k_{zeta_n}^I and
/// r g2 - 1 = (1-I) g3; residual(n) = 2 ||q_n f + r g1 + g3||_2.
inline Certificate certify_clark(const FnExpr& f, const ClarkData& data, const std::vector<int>& degrees,
                                 const CertifyOptions& o = {}) {
  detail::check_degrees(degrees);
  const int nmax = degrees.back();
  ClarkOptions co = o.clark;
  co.bandwidth = std::max(co.bandwidth, 2 * nmax + 16);
  while (co.M < static_cast<size_t>(8 * (nmax + 16))) co.M *= 2;
  ClarkDecomp dec = decompose_clark(f, data, co);

  Certificate c;
  c.kind = CertKind::Clark;
  c.degrees = degrees;
  std::vector<cplx> inv;
  for (cplx v : dec.f_at_atoms) {
    if (std::abs(v) < kZeroTol) fail(Errc::NodeZero, "f vanishes at a Clark atom");
    inv.push_back(1.0 / v);
  }
  c.r_extrapolated = detail::clark_limit_value(data, inv);
  c.r_tail_estimate = detail::clark_tail(data, inv, c.r_extrapolated);
  if (c.r_tail_estimate > co.tail_tol) fail(Errc::TailTooLarge, "tail of the r-series exceeds tolerance");
  ClarkSeries rs = ClarkSeries::make(data, inv, c.r_extrapolated);
  for (size_t n = 0; n < inv.size(); ++n) c.r_coeffs.push_back(inv[n] * data.atoms[n].weight);
  c.tail_estimate = dec.tail_after_extrapolation;
  c.omitted_measure = dec.rule->omitted_measure;

  const auto& rule = dec.rule;
  auto rv = rs.values(data, rule->nodes, dec.I_vals);
  std::vector<cplx> g3(rule->size()), target(rule->size());
  double scale = 1.0;
  for (size_t m = 0; m < rule->size(); ++m) scale = std::max(scale, std::abs(rv[m] * dec.g2_vals[m]));
  for (size_t m = 0; m < rule->size(); ++m) {
    g3[m] = (rv[m] * dec.g2_vals[m] - 1.0) / (1.0 - dec.I_vals[m]);
    if (!std::isfinite(std::abs(g3[m])) || (std::abs(1.0 - dec.I_vals[m]) > 1e-6 && std::abs(g3[m]) > 1e10 * scale))
      fail(Errc::DivisionUnstable, "(r g2 - 1)/(1 - I) blows up away from the atoms");
    target[m] = -(rv[m] * dec.g1.values[m] + g3[m]);
  }
  c.g3 = CircleGrid{rule, std::move(g3), "(r g2 - 1)/(1 - I)"};
  auto ls = poly_ls_sweep(*rule, dec.f_vals, target, degrees, o.ridge);
  for (const auto& l : ls) c.residuals.push_back(2.0 * l.residual);
  c.q_last = ls.back().q;
  c.verdict = classify(c.degrees, c.residuals, o.verdict);
  return c;
}

/// Conditions (a) g1, g2 bounded, (b) f outer, (c) sum w_n/|f(zeta_n)|^2
/// finite.  Together they are sufficient for cyclicity when b = (1+I)/2.
inline ConditionsReport thm5_conditions(const FnExpr& f, const ClarkData& data0, int N = kClarkDefaultN) {
  ClarkData data = data0.N_trunc == N ? data0 : clark_atoms(data0.I, data0.alpha, N);
  ConditionsReport r;
  ClarkDecomp dec;
  try {
    dec = decompose_clark(f, data);
    r.cond_a = multiplier_sufficient(dec) ? Check::Pass : Check::Inconclusive;
  } catch (const Error& e) {
    if (e.code() != Errc::TailTooLarge) throw;
    r.cond_a = Check::Inconclusive;
    r.detail += "decomposition tail too large; ";
  }
  try {
    OuterReport o = is_outer(f);
    r.cond_b = o.outer ? Check::Pass : Check::Fail;
    r.outer = r.cond_b;
    r.log_gap = o.gap;
  } catch (const Error& e) {
    if (e.code() != Errc::Inconclusive) throw;
    r.cond_b = Check::Inconclusive;
  }

  for (size_t n = 0; n < data.atoms.size(); ++n) {
    PointValue pv = detail::boundary_point(f, data.atoms[n].zeta);
    detail::add_point(r, pv);
    if (!dec.f_at_atoms.empty())
      r.g2_mismatch = std::max(r.g2_mismatch, std::abs(pv.value - detail::eval(dec.g2, data.atoms[n].zeta)));
  }
  r.nonvanishing = r.min_abs > kZeroTol ? Check::Pass : Check::Fail;
  if (r.nonvanishing == Check::Fail) {
    r.cond_c = Check::Fail;
    r.c_partial_sum = std::numeric_limits<double>::infinity();
    r.detail += "f vanishes at a Clark atom; ";
    return r;
  }
  for (size_t n = 0; n < data.atoms.size(); ++n) r.c_partial_sum += data.atoms[n].weight / std::norm(r.points[n].value);

  // closed-form lower bounds on |f(zeta_n)|
  const double rest = data.tail_mass();
  auto unit_at_atoms = [&](const FnExpr& g, cplx v) {
    for (size_t n = 0; n < std::min<size_t>(3, data.atoms.size()); ++n)
      if (std::abs(detail::eval(g, data.atoms[n].zeta) - v) > 1e-8) return false;
    return true;
  };
  double lb = 0.0;
  if (const auto* k = f.as<fn::KernelFn>(); k && !k->boundary && unit_at_atoms(*k->g, 1.0)) {
    // |k_lambda(zeta)| = |1 - conj(g(lambda))|/|1 - conj(lambda) zeta| when g(zeta) = 1
    lb = std::abs(1.0 - std::conj(k->g_at_point)) / (1.0 + std::abs(k->point));
  } else if (const auto* p = f.as<fn::ProductFn>(); p && p->factors.size() == 2) {
    for (int i = 0; i < 2; ++i) {
      const auto* k = p->factors[static_cast<size_t>(i)].as<fn::KernelFn>();
      const FnExpr& other = p->factors[static_cast<size_t>(1 - i)];
      if (k && !k->boundary && k->kind == fn::KernelKind::KI && unit_at_atoms(*k->g, 1.0) && unit_at_atoms(other, 2.0))
        lb = std::abs(1.0 - k->g_at_point);
    }
  }
  if (lb == 0.0) {
    // polynomial f: grid minimum of |f| on the circle less the Lipschitz slack
    auto fr = as_rational(f);
    if (fr && fr->second.degree() == 0) {
      const Poly p = fr->first * (1.0 / fr->second[0]);
      double lip = 0.0;
      for (int k = 1; k <= p.degree(); ++k) lip += k * std::abs(p[k]);
      const int M = 4096;
      double m = std::numeric_limits<double>::infinity();
      for (int j = 0; j < M; ++j) m = std::min(m, std::abs(p(std::polar(1.0, 2.0 * kPi * j / M))));
      lb = std::max(0.0, m - lip * kPi / M);
    }
  }
  if (rest <= 0.0) {
    r.c_tail_bound = 0.0;
    r.c_bound_rigorous = true;
  } else if (lb > 0.0) {
    r.c_lower_bound = lb;
    r.c_tail_bound = rest / (lb * lb);
    r.c_bound_rigorous = true;
  } else {
    // extrapolate from the lightest quarter of the retained atoms
    double m = std::numeric_limits<double>::infinity();
    const size_t n = r.points.size();
    for (size_t i = n - std::max<size_t>(1, n / 4); i < n; ++i) m = std::min(m, std::abs(r.points[i].value));
    r.c_tail_bound = rest / (m * m);
  }
  r.cond_c = r.c_bound_rigorous && std::isfinite(r.c_partial_sum + r.c_tail_bound) ? Check::Pass : Check::Inconclusive;
  return r;
}

/// Lower bound 1/||k_zeta^b||_b for inf_p ||p f - 1||_b when f(zeta) = 0 at
/// a point of E0(b).
inline double noncyclicity_witness(const FnExpr& f, const BSpec& spec, cplx zeta) {
  if (std::abs(boundary_value(f, zeta)) > kZeroTol) fail(Errc::NotAZero, "f does not vanish at the point");
  FnExpr k = kernel_kb(spec, zeta);
  return 1.0 / hb_norm(k, spec);
}

/// Route selection: rational b uses the Hermite construction (falling back to
/// the direct minimisation when p vanishes at a node), b = (1+I)/2 the Clark
/// construction, factored b the direct minimisation.
inline Certificate certify(const FnExpr& f, const BSpec& spec, const std::vector<int>& degrees,
                           const CertifyOptions& o = {}, int clark_n = kClarkDefaultN) {
  switch (spec.kind) {
    case BKind::RationalNonInner:
      try {
        return certify_rational(f, spec, degrees, o);
      } catch (const Error& e) {
        if (e.code() != Errc::NodeZero) throw;
        Certificate c = certify_direct(f, spec, degrees, o);
        c.note = "p vanishes at a node; canonical norm minimised over p_n";
        return c;
      }
    case BKind::HalfInner:
      return certify_clark(f, clark_atoms(spec.I, 1.0, clark_n), degrees, o);
    case BKind::Factored:
      return certify_direct(f, spec, degrees, o);
  }
  fail(Errc::InvalidArgument, "unknown symbol kind");
}

}  // namespace hb
