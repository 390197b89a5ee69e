#pragma once
// b = (1+I)/2: Clark atoms of I, model-space kernels and the orthogonal
// splitting f = (1-I) g1 + g2 with g2 in K_I.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hb/error.hpp"
#include "hb/fnexpr.hpp"
#include "hb/hardy.hpp"
#include "hb/poly.hpp"
#include "hb/quadrature.hpp"

namespace hb {

inline constexpr int kClarkDefaultN = 64;

struct ClarkAtom {
  cplx zeta;
  double weight;  // 1/|I'(zeta)|
  cplx dI;        // I'(zeta)
};

enum class ClarkForm { Power, SingleAtom, Herglotz, Rational, Numeric };

struct ClarkData {
  FnExpr I;
  cplx alpha = 1.0;
  std::vector<ClarkAtom> atoms;
  int N_trunc = kClarkDefaultN;
  double total_mass_target = 0.0;
  ClarkForm form = ClarkForm::Numeric;
  /// the atom of I when form == SingleAtom
  Atom singular{1.0, 0.0};

  double retained_mass() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight;
    return s;
  }
  double tail_mass() const { return std::max(0.0, total_mass_target - retained_mass()); }
};

namespace detail {

inline double arg_2pi(cplx z) {
  double t = std::arg(z);
  return t < 0.0 ? t + 2.0 * kPi : t;
}

inline void sort_atoms(std::vector<ClarkAtom>& atoms) {
  std::sort(atoms.begin(), atoms.end(), [](const ClarkAtom& a, const ClarkAtom& b) {
    if (std::abs(a.weight - b.weight) > 1e-14 * std::max(a.weight, b.weight)) return a.weight > b.weight;
    return arg_2pi(a.zeta) < arg_2pi(b.zeta);
  });
}

inline ClarkAtom atom_from_derivative(const FnExpr& dI, cplx zeta) {
  cplx d = eval(dI, zeta);
  return {zeta, 1.0 / std::abs(d), d};
}

/// k with I = z^k, or 0.
inline int monomial_degree(const FnExpr& I) {
  const auto* p = I.as<fn::PolyFn>();
  if (!p || p->p.degree() < 1) return 0;
  const int k = p->p.degree();
  for (int j = 0; j < k; ++j)
    if (std::abs(p->p[j]) > 1e-14) return 0;
  return std::abs(p->p[k] - 1.0) < 1e-14 ? k : 0;
}

inline std::vector<ClarkAtom> phase_scan(const FnExpr& I, cplx alpha) {
  constexpr size_t M = size_t{1} << 20;
  const FnExpr dI = derivative(I);
  auto phase = [&](double t) -> double {
    try {
      return std::arg(eval(I, std::polar(1.0, t)) * std::conj(alpha));
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  std::vector<ClarkAtom> out;
  double t0 = 0.0, p0 = phase(t0);
  for (size_t m = 1; m <= M; ++m) {
    double t1 = 2.0 * kPi * static_cast<double>(m) / static_cast<double>(M);
    double p1 = phase(t1);
    if (std::isfinite(p0) && std::isfinite(p1) && (p0 == 0.0 || (p0 < 0.0) != (p1 < 0.0)) &&
        std::abs(p1 - p0) < kPi) {
      double a = t0, b = t1, pa = p0;
      for (int it = 0; it < 60; ++it) {
        double c = 0.5 * (a + b), pc = phase(c);
        if (!std::isfinite(pc)) break;
        if ((pa < 0.0) == (pc < 0.0)) {
          a = c;
          pa = pc;
        } else {
          b = c;
        }
      }
      cplx z = std::polar(1.0, 0.5 * (a + b));
      try {
        ClarkAtom at = atom_from_derivative(dI, z);
        if (std::isfinite(at.weight) && at.weight > 0.0) out.push_back(at);
      } catch (const Error&) {
      }
    }
    t0 = t1;
    p0 = p1;
  }
  // a root sitting exactly on a scan point is seen from both sides
  std::vector<ClarkAtom> uniq;
  for (const auto& a : out) {
    bool dup = false;
    for (const auto& b : uniq)
      if (std::abs(a.zeta - b.zeta) < 1e-9) dup = true;
    if (!dup) uniq.push_back(a);
  }
  return uniq;
}

}  // namespace detail

/// Atoms of the Clark measure sigma_alpha of I, heaviest first, keeping the
/// 2N+1 heaviest.  For I = S_{w delta_xi} this is |n| <= N.
inline ClarkData clark_atoms(const FnExpr& I, cplx alpha = 1.0, int N = kClarkDefaultN) {
  if (std::abs(std::abs(alpha) - 1.0) > 1e-12) fail(Errc::InvalidArgument, "alpha must be unimodular");
  if (N < 0) fail(Errc::InvalidArgument, "truncation must be nonnegative");
  ClarkData d;
  d.I = I;
  d.alpha = alpha;
  d.N_trunc = N;
  const cplx I0 = detail::eval(I, 0.0);
  if (std::abs(alpha - I0) < 1e-14) fail(Errc::InvalidArgument, "I(0) = alpha");
  d.total_mass_target = (1.0 - std::norm(I0)) / std::norm(alpha - I0);
  const size_t keep = 2 * static_cast<size_t>(N) + 1;

  std::vector<ClarkAtom> atoms;
  const auto* s = I.as<fn::SingularInnerFn>();
  const auto* h = I.as<fn::HerglotzInnerFn>();
  if (int k = detail::monomial_degree(I); k > 0) {
    d.form = ClarkForm::Power;
    const double phi = std::arg(alpha);
    for (int j = 0; j < k; ++j) {
      cplx z = std::polar(1.0, (phi + 2.0 * kPi * j) / k);
      atoms.push_back({z, 1.0 / k, static_cast<double>(k) * std::pow(z, k - 1)});
    }
  } else if (s && s->atoms.size() == 1) {
    // I = exp(-w(xi+z)/(xi-z)); on the circle (xi+z)/(xi-z) = iu with u the
    // Cayley coordinate, so I = alpha at u_n = (2 pi n - phi)/w
    d.form = ClarkForm::SingleAtom;
    d.singular = s->atoms[0];
    const cplx xi = d.singular.xi;
    const double w = d.singular.mass, phi = std::arg(alpha);
    const long n0 = std::lround(phi / (2.0 * kPi));
    for (long n = n0 - N - 1; n <= n0 + N + 1; ++n) {
      cplx c(0.0, (2.0 * kPi * static_cast<double>(n) - phi) / w);
      cplx z = xi * (c - 1.0) / (c + 1.0);
      cplx dI = -alpha * 2.0 * w * xi / ((xi - z) * (xi - z));
      atoms.push_back({z, 2.0 / (w * std::norm(1.0 + c)), dI});
    }
  } else if (h && std::abs(alpha - 1.0) < 1e-14) {
    // the Herglotz construction has Clark measure sigma at alpha = 1
    d.form = ClarkForm::Herglotz;
    const FnExpr dI = derivative(I);
    for (const auto& a : h->atoms) atoms.push_back({a.xi, a.mass, detail::eval(dI, a.xi)});
  } else if (auto r = as_rational(I)) {
    d.form = ClarkForm::Rational;
    const FnExpr dI = derivative(I);
    Poly eq = r->first - r->second * alpha;
    for (cplx z : eq.roots()) {
      if (std::abs(std::abs(z) - 1.0) > 1e-6) continue;
      z /= std::abs(z);
      atoms.push_back(detail::atom_from_derivative(dI, z));
    }
  } else {
    d.form = ClarkForm::Numeric;
    atoms = detail::phase_scan(I, alpha);
    double s_all = 0.0;
    for (const auto& a : atoms) s_all += a.weight;
    if (atoms.empty() || s_all > d.total_mass_target * (1.0 + 1e-3) + 1e-8)
      fail(Errc::NotDiscrete, "phase solve did not produce a summable set of atoms");
  }
  detail::sort_atoms(atoms);
  if (atoms.size() > keep) atoms.resize(keep);
  d.atoms = std::move(atoms);
  return d;
}

/// k_lambda^I for interior lambda, or the boundary kernel at zeta in E0(I).
inline FnExpr ki_kernel(const FnExpr& I, cplx point) {
  if (std::abs(point) > 1.0 + 1e-12) fail(Errc::DomainError, "kernel point outside the closed disc");
  if (std::abs(point) < 1.0 - 1e-12) return hb_kernel_expr(I, point, detail::eval(I, point), fn::KernelKind::KI);
  cplx v, dv;
  try {
    v = boundary_value(I, point);
    dv = boundary_value(derivative(I), point);
  } catch (const Error& e) {
    fail(Errc::NotInE0, std::string("no angular derivative: ") + e.what());
  }
  if (std::abs(std::abs(v) - 1.0) > 1e-6 || !std::isfinite(std::abs(dv)))
    fail(Errc::NotInE0, "I has no unimodular boundary value with finite derivative here");
  return hb_kernel_expr(I, point, v, fn::KernelKind::KI);
}

/// sum_n c_n k_{zeta_n}^I as an expression.
inline FnExpr clark_series_expr(const ClarkData& d, const std::vector<cplx>& coeffs) {
  std::vector<FnExpr> terms;
  for (size_t n = 0; n < d.atoms.size(); ++n)
    if (coeffs[n] != 0.0) terms.push_back(scale(coeffs[n], hb_kernel_expr(d.I, d.atoms[n].zeta, d.alpha, fn::KernelKind::KI)));
  if (terms.empty()) return constant(0.0);
  return sum(std::move(terms));
}

/// Values of sum_n c_n k_{zeta_n}^I at the nodes, given I at the nodes.
inline std::vector<cplx> clark_series_values(const ClarkData& d, const std::vector<cplx>& coeffs,
                                             const std::vector<cplx>& nodes, const std::vector<cplx>& Ivals) {
  std::vector<cplx> out(nodes.size());
  const cplx ca = std::conj(d.alpha);
  for (size_t m = 0; m < nodes.size(); ++m) {
    const cplx z = nodes[m];
    const cplx num = 1.0 - ca * Ivals[m];
    cplx s = 0.0;
    for (size_t n = 0; n < d.atoms.size(); ++n) {
      const auto& a = d.atoms[n];
      if (std::abs(z - a.zeta) < 1e-8)
        s += coeffs[n] * ca * a.dI * a.zeta;
      else
        s += coeffs[n] * num / (1.0 - std::conj(a.zeta) * z);
    }
    out[m] = s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// decomposition

struct ClarkOptions {
  /// largest tolerated estimate of sum over dropped atoms of |f - L|^2 w,
  /// L the extrapolated boundary value
  double tail_tol = 1e-2;
  size_t M = 4096;
  int bandwidth = 64;
  double density = 1.0;
};

/// Quadrature for the splitting.  With I = S_{w delta_xi} the explicit
/// panels stop halfway between the last retained atom and the next one, and
/// the arc beyond is left out of the rule (omitted_measure).
inline RulePtr clark_rule(const ClarkData& d, const std::vector<FnExpr>& fs, const ClarkOptions& o = {}) {
  std::vector<Atom> atoms = singular_atoms(d.I);
  for (const auto& f : fs)
    for (const auto& a : singular_atoms(f)) {
      bool dup = false;
      for (auto& b : atoms)
        if (std::abs(a.xi - b.xi) < 1e-12) {
          b.mass = std::max(b.mass, a.mass);
          dup = true;
        }
      if (!dup) atoms.push_back(a);
    }
  if (atoms.empty()) {
    size_t M = o.M;
    while (o.density > 1.0 && static_cast<double>(M) < o.density * static_cast<double>(o.M)) M *= 2;
    return uniform_rule(M, true);
  }
  AdaptedRuleOptions opt;
  opt.bandwidth = o.bandwidth;
  opt.density = o.density;
  if (d.form == ClarkForm::SingleAtom) {
    opt.tail = TailMode::Omit;
    const double w = d.singular.mass;
    double umax = 0.0;
    for (const auto& a : d.atoms) {
      cplx z = a.zeta / d.singular.xi;
      // Cayley coordinate of z relative to xi
      double u = std::abs((z + 1.0) / (z - 1.0));
      umax = std::max(umax, u);
    }
    const double uend = umax + kPi / w;
    opt.u_end.assign(atoms.size(), opt.u_max);
    for (size_t j = 0; j < atoms.size(); ++j)
      if (std::abs(atoms[j].xi - d.singular.xi) < 1e-12) opt.u_end[j] = uend;
  }
  return adapted_rule(atoms, {}, opt);
}

struct ClarkDecomp {
  FnExpr f;
  ClarkData data;
  ClarkOptions options;
  RulePtr rule;
  std::vector<cplx> f_vals, I_vals;
  CircleGrid g1;
  std::vector<cplx> g2_vals;
  /// f(zeta_n) per atom
  std::vector<cplx> f_at_atoms;
  /// g2 = sum c_n k_{zeta_n}^I + extrapolated * (dropped atoms), c_n = f(zeta_n) w_n
  std::vector<cplx> g2_coeffs;
  cplx extrapolated = 0.0;
  FnExpr g2;
  double g1_norm2 = 0.0;
  double g2_norm2 = 0.0;
  /// part of |g1|^2 assigned to the arc left out of the rule
  double g1_omitted = 0.0;
  /// estimate of sum over dropped atoms of |f(zeta)|^2 w
  double tail_estimate = 0.0;
  /// the same with f(zeta) replaced by f(zeta) - extrapolated
  double tail_after_extrapolation = 0.0;
  /// nodes moved off a Clark point before dividing by 1 - I
  std::vector<size_t> perturbed;
};

namespace detail {

/// Dropped-atom mass times the largest |v - L|^2 among the lightest quarter
/// of the retained atoms.
inline double clark_tail(const ClarkData& d, const std::vector<cplx>& vals, cplx L = 0.0) {
  const double rest = d.tail_mass();
  if (rest <= 0.0 || vals.empty()) return 0.0;
  const size_t n = vals.size(), from = n - std::max<size_t>(1, n / 4);
  double m = 0.0;
  for (size_t i = from; i < n; ++i) m = std::max(m, std::norm(vals[i] - L));
  return rest * m;
}

/// Limit of v along the dropped atoms: the mean over the two lightest retained
/// atoms, accepted when it agrees with the mean over the next two (pairing
/// cancels the odd first-order term for conjugate-symmetric atoms).  0 when
/// the means disagree or nothing was dropped.
inline cplx clark_limit_value(const ClarkData& d, const std::vector<cplx>& v) {
  const size_t n = v.size();
  if (n < 2 || d.tail_mass() <= 1e-15) return 0.0;
  cplx a = 0.5 * (v[n - 1] + v[n - 2]);
  cplx b = n >= 4 ? 0.5 * (v[n - 3] + v[n - 4]) : v[n - 2];
  if (n < 4) a = v[n - 1];
  if (std::abs(a - b) > 1e-3 * std::max(std::abs(a), std::abs(b))) return 0.0;
  return n >= 4 ? a : 0.5 * (a + b);
}

}  // namespace detail

/// sum over all atoms of v_n w_n k_{zeta_n}^I where v_n is given on the
/// retained atoms and equals L on the dropped ones.  Uses
/// sum_n w_n k_{zeta_n}^I = (1 - conj(I(0)) I)/(1 - conj(I(0))).
struct ClarkSeries {
  std::vector<cplx> coeffs;  // (v_n - L) w_n
  cplx L = 0.0;
  cplx I0 = 0.0;

  static ClarkSeries make(const ClarkData& d, const std::vector<cplx>& v, cplx L) {
    ClarkSeries s;
    s.L = L;
    s.I0 = detail::eval(d.I, 0.0);
    for (size_t n = 0; n < d.atoms.size(); ++n) s.coeffs.push_back((v[n] - L) * d.atoms[n].weight);
    return s;
  }
  std::vector<cplx> values(const ClarkData& d, const std::vector<cplx>& nodes, const std::vector<cplx>& Ivals) const {
    auto out = clark_series_values(d, coeffs, nodes, Ivals);
    if (L != 0.0) {
      const cplx c = L / (1.0 - std::conj(I0));
      for (size_t m = 0; m < out.size(); ++m) out[m] += c * (1.0 - std::conj(I0) * Ivals[m]);
    }
    return out;
  }
  FnExpr expr(const ClarkData& d) const {
    FnExpr e = clark_series_expr(d, coeffs);
    if (L == 0.0) return e;
    return e + scale(L / (1.0 - std::conj(I0)), ki_kernel(d.I, 0.0));
  }
  /// |sum|_2^2 = sum |v_n|^2 w_n
  double norm2(const ClarkData& d) const {
    double s = std::norm(L) * d.tail_mass();
    for (size_t n = 0; n < coeffs.size(); ++n) {
      const double w = d.atoms[n].weight;
      s += std::norm(coeffs[n] / w + L) * w;
    }
    return s;
  }
};

namespace detail {

/// Weighted mean of |v|^2 over the nodes in the outer half (in Cayley
/// coordinate) of the panels around the singular atom, times the omitted
/// measure.
inline double omitted_part(const ClarkData& d, const CircleRule& rule, const std::vector<cplx>& v) {
  if (rule.omitted_measure <= 0.0 || d.form != ClarkForm::SingleAtom) return 0.0;
  std::vector<double> u(rule.size());
  double umax = 0.0;
  for (size_t m = 0; m < rule.size(); ++m) {
    cplx z = rule.nodes[m] / d.singular.xi;
    u[m] = std::abs((z + 1.0) / (z - 1.0));
    umax = std::max(umax, u[m]);
  }
  double sw = 0.0, s = 0.0;
  for (size_t m = 0; m < rule.size(); ++m)
    if (u[m] >= 0.5 * umax) {
      sw += rule.weights[m];
      s += rule.weights[m] * std::norm(v[m]);
    }
  return sw > 0.0 ? rule.omitted_measure * s / sw : 0.0;
}

}  // namespace detail

/// Rule for I with nodes moved off the points where I = 1, and I on it.
inline std::pair<RulePtr, std::vector<cplx>> clark_grid(const ClarkData& d, const std::vector<FnExpr>& fs,
                                                        const ClarkOptions& o) {
  RulePtr rule = clark_rule(d, fs, o);
  std::vector<cplx> Ivals(rule->size());
  std::shared_ptr<CircleRule> moved;
  for (size_t m = 0; m < rule->size(); ++m) {
    Ivals[m] = detail::eval(d.I, rule->nodes[m]);
    if (std::abs(1.0 - Ivals[m]) < 1e-9) {
      if (!moved) moved = std::make_shared<CircleRule>(*rule);
      moved->nodes[m] *= std::polar(1.0, 1e-6);
      moved->perturbed.push_back(m);
      Ivals[m] = detail::eval(d.I, moved->nodes[m]);
    }
  }
  if (moved) rule = moved;
  return {rule, std::move(Ivals)};
}

inline ClarkDecomp decompose_clark(const FnExpr& f, const ClarkData& d, const ClarkOptions& o = {}) {
  if (std::abs(d.alpha - 1.0) > 1e-14)
    fail(Errc::InvalidArgument, "the splitting is normalised to alpha = 1; rebase I to conj(alpha) I first");
  ClarkDecomp r;
  r.f = f;
  r.data = d;
  r.options = o;
  for (const auto& a : d.atoms) r.f_at_atoms.push_back(boundary_value(f, a.zeta));
  r.tail_estimate = detail::clark_tail(d, r.f_at_atoms);
  r.extrapolated = detail::clark_limit_value(d, r.f_at_atoms);
  r.tail_after_extrapolation = detail::clark_tail(d, r.f_at_atoms, r.extrapolated);
  if (r.tail_after_extrapolation > o.tail_tol) fail(Errc::TailTooLarge, "Clark series tail estimate exceeds tolerance");
  ClarkSeries g2 = ClarkSeries::make(d, r.f_at_atoms, r.extrapolated);
  for (size_t n = 0; n < d.atoms.size(); ++n) r.g2_coeffs.push_back(r.f_at_atoms[n] * d.atoms[n].weight);
  r.g2 = g2.expr(d);
  r.g2_norm2 = g2.norm2(d);

  auto [rule, Ivals] = clark_grid(d, {f}, o);
  r.rule = rule;
  r.perturbed = rule->perturbed;
  r.I_vals = std::move(Ivals);
  r.f_vals = sample(f, rule).values;
  r.g2_vals = g2.values(d, rule->nodes, r.I_vals);
  std::vector<cplx> g1(rule->size());
  for (size_t m = 0; m < rule->size(); ++m) g1[m] = (r.f_vals[m] - r.g2_vals[m]) / (1.0 - r.I_vals[m]);
  r.g1_omitted = detail::omitted_part(d, *rule, g1);
  r.g1_norm2 = std::pow(rule_norm(*rule, g1), 2) + r.g1_omitted;
  r.g1 = CircleGrid{rule, std::move(g1), "(f - g2)/(1 - I)"};
  return r;
}

struct ClarkNorms {
  double triple_bar;
  double exact;
};

/// |||f|||^2 = |g1|^2 + |g2|^2 and |f|_b^2 = 4|g1|^2 + 2|g2|^2.
inline ClarkNorms hb_norm_clark(const ClarkDecomp& d) {
  return {std::sqrt(d.g1_norm2 + d.g2_norm2), std::sqrt(4.0 * d.g1_norm2 + 2.0 * d.g2_norm2)};
}

namespace detail {

inline std::pair<double, double> sup_g1_g2(const ClarkDecomp& d) {
  double s1 = 0.0, s2 = 0.0;
  for (size_t m = 0; m < d.rule->size(); ++m) {
    if (std::abs(1.0 - d.I_vals[m]) < 1e-6) continue;
    s1 = std::max(s1, std::abs(d.g1.values[m]));
    s2 = std::max(s2, std::abs(d.g2_vals[m]));
  }
  return {s1, s2};
}

}  // namespace detail

/// One-sided test that f is a multiplier: the sup estimates of g1 and g2
/// agree within 1% between the decomposition grid and a refined one.
inline bool multiplier_sufficient(const ClarkDecomp& d) {
  ClarkOptions o = d.options;
  o.density *= 4.0;
  o.tail_tol = std::numeric_limits<double>::infinity();
  ClarkDecomp fine = decompose_clark(d.f, d.data, o);
  auto [a1, a2] = detail::sup_g1_g2(d);
  auto [b1, b2] = detail::sup_g1_g2(fine);
  const double floor = 1e-6 * std::max({1.0, a1, a2});
  auto close = [&](double a, double b) { return std::isfinite(a) && std::isfinite(b) && b <= 1.01 * a + floor; };
  return close(a1, b1) && close(a2, b2);
}

}  // namespace hb
