#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "hb/error.hpp"
#include "hb/fnexpr.hpp"
#include "hb/poly.hpp"
#include "hb/quadrature.hpp"

namespace hb {

// ---------------------------------------------------------------------------
// quadrature plumbing

struct QuadOptions {
  /// Uniform grid size for expressions without singular inner factors.
  size_t M = 4096;
  /// Frequency content expected from the integrand (adapted rules).
  int bandwidth = 64;
  double density = 1.0;
  /// Cayley coordinate where explicit panels around atoms stop.
  double u_max = 1e4;
};

/// Uniform half-step grid when the expressions are smooth on the circle,
/// otherwise a rule adapted to the atoms of their singular inner factors.
inline RulePtr rule_for(const std::vector<FnExpr>& fs, const QuadOptions& q = {}) {
  std::vector<Atom> atoms;
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
  if (atoms.empty()) return uniform_rule(q.M, true);
  AdaptedRuleOptions opt;
  opt.bandwidth = q.bandwidth;
  opt.density = q.density;
  opt.u_max = q.u_max;
  return adapted_rule(atoms, {}, opt);
}

inline std::vector<cplx> sample_values(const FnExpr& f, const RulePtr& rule) { return sample(f, rule).values; }

/// sum_m w_m u_m conj(v_m)
inline cplx rule_inner(const CircleRule& r, const std::vector<cplx>& u, const std::vector<cplx>& v) {
  cplx s = 0.0;
  for (size_t m = 0; m < r.size(); ++m) s += r.weights[m] * u[m] * std::conj(v[m]);
  return s;
}

inline double rule_norm(const CircleRule& r, const std::vector<cplx>& u) {
  double s = 0.0;
  for (size_t m = 0; m < r.size(); ++m) s += r.weights[m] * std::norm(u[m]);
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// inner products

inline cplx h2_inner(const CircleGrid& f, const CircleGrid& g) {
  if (f.size() != g.size() || f.rule->size() != g.rule->size())
    fail(Errc::GridMismatch, "grids differ in size");
  if (f.rule != g.rule && f.rule->nodes != g.rule->nodes) fail(Errc::GridMismatch, "grids use different nodes");
  return rule_inner(*f.rule, f.values, g.values);
}

inline cplx h2_inner(const FnExpr& f, const FnExpr& g, const QuadOptions& q = {}) {
  auto rule = rule_for({f, g}, q);
  return rule_inner(*rule, sample_values(f, rule), sample_values(g, rule));
}

inline cplx h2_inner(const FnExpr& f, const CircleGrid& g) { return rule_inner(*g.rule, sample_values(f, g.rule), g.values); }
inline cplx h2_inner(const CircleGrid& f, const FnExpr& g) { return rule_inner(*f.rule, f.values, sample_values(g, f.rule)); }

inline double h2_norm(const FnExpr& f, const QuadOptions& q = {}) { return std::sqrt(std::max(0.0, h2_inner(f, f, q).real())); }

// ---------------------------------------------------------------------------
// boundary zeros

/// Zeros of a closed-form function on the unit circle: local minima of |f|
/// on a 2^14-point scan, refined by golden section on the angle.
inline std::vector<cplx> boundary_zeros(const std::function<double(double)>& absf, double scale, size_t scan = 16384,
                                        double zero_tol = 1e-9) {
  std::vector<double> v(scan);
  const double h = 2.0 * kPi / static_cast<double>(scan);
  for (size_t m = 0; m < scan; ++m) v[m] = absf(h * static_cast<double>(m) + 0.37 * h);
  std::vector<cplx> out;
  for (size_t m = 0; m < scan; ++m) {
    double l = v[(m + scan - 1) % scan], c = v[m], r = v[(m + 1) % scan];
    if (!(c <= l && c < r)) continue;
    if (c > 1e-2 * scale) continue;
    double a = h * (static_cast<double>(m) - 1.0 + 0.37), b = h * (static_cast<double>(m) + 1.0 + 0.37);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = absf(x1), f2 = absf(x2);
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - g * (b - a);
        f1 = absf(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + g * (b - a);
        f2 = absf(x2);
      }
    }
    double t = 0.5 * (a + b);
    if (absf(t) <= zero_tol * std::max(1.0, scale)) out.push_back(std::polar(1.0, t));
  }
  return out;
}

inline std::vector<cplx> boundary_zeros(const FnExpr& f) {
  auto absf = [&](double t) {
    try {
      return std::abs(detail::eval(f, std::polar(1.0, t)));
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  double scale = 0.0;
  for (int m = 0; m < 64; ++m) {
    double v = absf(2.0 * kPi * (m + 0.5) / 64.0);
    if (std::isfinite(v)) scale = std::max(scale, v);
  }
  // roots of a linear factor give |f| ~ |theta - theta0|; the golden search
  // reaches that to ~1e-15 relative, well under the acceptance threshold
  return boundary_zeros(absf, scale);
}

// ---------------------------------------------------------------------------
// outerness

struct OuterReport {
  bool outer = false;
  /// integral of log|f| dm minus log|f(0)| (nonnegative up to rounding).
  double gap = std::numeric_limits<double>::infinity();
  double log_f0 = -std::numeric_limits<double>::infinity();
  double log_integral = 0.0;
  double error_estimate = 0.0;
  std::vector<cplx> boundary_zeros;
};

inline double log_modulus_integral(const FnExpr& f, const std::vector<cplx>& zeros, double density, int levels,
                                   int bandwidth) {
  AdaptedRuleOptions opt;
  opt.density = density;
  opt.grading_levels = levels;
  opt.bandwidth = bandwidth;
  auto rule = adapted_rule(singular_atoms(f), zeros, opt);
  double s = 0.0;
  for (size_t m = 0; m < rule->size(); ++m) {
    double a = std::abs(detail::eval(f, rule->nodes[m]));
    if (a > 0.0) s += rule->weights[m] * std::log(a);
  }
  return s;
}

/// Compares log|f(0)| with the mean of log|f| on the circle.  Two rule
/// resolutions give the error estimate.
namespace detail {

/// Upper bound for sup |f| on the disc when one follows from the expression.
inline std::optional<double> sup_bound(const FnExpr& f) {
  if (const auto* p = f.as<fn::PolyFn>()) {
    double s = 0.0;
    for (int k = 0; k <= p->p.degree(); ++k) s += std::abs(p->p[k]);
    return s;
  }
  if (const auto* b = f.as<fn::BlaschkeFn>()) return std::abs(b->gamma);
  if (f.as<fn::SingularInnerFn>() || f.as<fn::HerglotzInnerFn>()) return 1.0;
  if (const auto* c = f.as<fn::ScaleFn>()) {
    auto s = sup_bound(*c->f);
    if (s) return std::abs(c->c) * *s;
    return std::nullopt;
  }
  if (const auto* c = f.as<fn::ComposePowerFn>()) return sup_bound(*c->f);
  auto fold = [](const std::vector<FnExpr>& xs, bool mul) -> std::optional<double> {
    double acc = mul ? 1.0 : 0.0;
    for (const auto& x : xs) {
      auto s = sup_bound(x);
      if (!s) return std::nullopt;
      acc = mul ? acc * *s : acc + *s;
    }
    return acc;
  };
  if (const auto* s = f.as<fn::SumFn>()) return fold(s->terms, false);
  if (const auto* p = f.as<fn::ProductFn>()) return fold(p->factors, true);
  return std::nullopt;
}

/// True when f is a product of factors each of which is c + h with
/// sup|h| <= |c| (a function with positive real part up to rotation), or a
/// kernel of that shape.
inline bool structurally_outer(const FnExpr& f) {
  if (f.as<fn::H2KernelFn>()) return true;
  if (const auto* k = f.as<fn::KernelFn>()) {
    if (k->boundary || std::abs(k->g_at_point) >= 1.0) return false;
    auto s = sup_bound(*k->g);
    return s && *s <= 1.0 + 1e-12;
  }
  if (const auto* c = f.as<fn::ScaleFn>()) return c->c != 0.0 && structurally_outer(*c->f);
  if (const auto* c = f.as<fn::ComposePowerFn>()) return structurally_outer(*c->f);
  if (const auto* p = f.as<fn::ProductFn>()) {
    for (const auto& x : p->factors)
      if (!structurally_outer(x)) return false;
    return !p->factors.empty();
  }
  if (const auto* s = f.as<fn::SumFn>()) {
    cplx c = 0.0;
    double rest = 0.0;
    for (const auto& t : s->terms) {
      const auto* p = t.as<fn::PolyFn>();
      if (p && p->p.degree() <= 0) {
        c += p->p[0];
        continue;
      }
      auto b = sup_bound(t);
      if (!b) return false;
      rest += *b;
    }
    return std::abs(c) > 0.0 && rest <= std::abs(c) * (1.0 + 1e-12);
  }
  return false;
}

}  // namespace detail

inline OuterReport is_outer(const FnExpr& f, double tol = 1e-5) {
  OuterReport rep;
  cplx f0 = detail::eval(f, 0.0);
  if (std::abs(f0) == 0.0) {
    rep.outer = false;
    return rep;
  }
  rep.log_f0 = std::log(std::abs(f0));
  rep.boundary_zeros = boundary_zeros(f);
  if (detail::structurally_outer(f)) {
    rep.outer = true;
    rep.gap = 0.0;
    rep.log_integral = rep.log_f0;
    return rep;
  }
  double i1 = log_modulus_integral(f, rep.boundary_zeros, 1.0, 40, 64);
  double i2 = log_modulus_integral(f, rep.boundary_zeros, 2.0, 50, 128);
  rep.log_integral = i2;
  rep.error_estimate = std::abs(i1 - i2);
  rep.gap = i2 - rep.log_f0;
  if (rep.error_estimate > tol) fail(Errc::Inconclusive, "log-modulus quadrature did not settle");
  rep.outer = std::abs(rep.gap) <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// outer functions from boundary modulus

namespace detail {

inline Poly outer_from_log_coeffs(const std::vector<cplx>& lc, int D) {
  // log O = c_0 + 2 sum_{k>=1} c_k z^k where c_k = int log w conj(xi)^k dm
  std::vector<cplx> g(static_cast<size_t>(D) + 1, 0.0);
  g[0] = lc[0].real();
  for (int k = 1; k <= D && k < static_cast<int>(lc.size()); ++k) g[static_cast<size_t>(k)] = 2.0 * lc[static_cast<size_t>(k)];
  return Poly(series::exp(g, static_cast<size_t>(D) + 1));
}

}  // namespace detail

/// Truncated Taylor series of the outer function with modulus w, from grid
/// samples of w.  Trapezoidal Fourier coefficients of log w; points whose
/// value is nonpositive must be listed as perturbed in the grid's rule.
inline Poly outer_from_modulus(const CircleGrid& w, int D = -1) {
  const auto& r = *w.rule;
  if (!r.uniform) fail(Errc::InvalidArgument, "outer_from_modulus expects a uniform grid");
  const size_t M = r.M;
  if (D < 0) D = static_cast<int>(M / 2) - 1;
  std::vector<double> lw(M);
  size_t bad = 0;
  for (size_t m = 0; m < M; ++m) {
    double v = w.values[m].real();
    if (!(v > 0.0)) {
      if (std::find(r.perturbed.begin(), r.perturbed.end(), m) == r.perturbed.end())
        fail(Errc::NotLogIntegrable, "modulus vanishes at an unperturbed grid point");
      ++bad;
      lw[m] = 0.0;
      continue;
    }
    lw[m] = std::log(v);
  }
  if (bad * 10 > M) fail(Errc::NotLogIntegrable, "modulus vanishes on a large part of the grid");
  std::vector<cplx> lc(static_cast<size_t>(D) + 1);
  for (int k = 0; k <= D; ++k) {
    cplx acc = 0.0;
    for (size_t m = 0; m < M; ++m) acc += lw[m] * std::conj(std::pow(r.nodes[m], k));
    lc[static_cast<size_t>(k)] = acc / static_cast<double>(M);
  }
  return detail::outer_from_log_coeffs(lc, D);
}

/// Same construction for a modulus given as a function of the angle; zeros
/// of w are located and handled by graded quadrature.
inline Poly outer_from_modulus(const std::function<double(double)>& w, int D = 64, double tol = 1e-8) {
  double scale = 0.0;
  size_t zero_count = 0;
  for (int m = 0; m < 4096; ++m) {
    double v = w(2.0 * kPi * (m + 0.31) / 4096.0);
    if (!(v >= 0.0) || !std::isfinite(v)) fail(Errc::NotLogIntegrable, "modulus must be finite and nonnegative");
    scale = std::max(scale, v);
    if (v == 0.0) ++zero_count;
  }
  if (scale == 0.0 || zero_count > 40) fail(Errc::NotLogIntegrable, "modulus vanishes on a set of positive measure");
  auto zeros = boundary_zeros(w, scale);
  auto coeffs = [&](double density, int levels) {
    AdaptedRuleOptions opt;
    opt.density = density;
    opt.grading_levels = levels;
    opt.bandwidth = D + 32;
    auto rule = adapted_rule({}, zeros, opt);
    std::vector<cplx> lc(static_cast<size_t>(D) + 1, 0.0);
    for (size_t m = 0; m < rule->size(); ++m) {
      double v = w(std::arg(rule->nodes[m]));
      if (!(v > 0.0)) continue;
      double l = std::log(v);
      cplx conj_xi = std::conj(rule->nodes[m]), pw = 1.0;
      for (int k = 0; k <= D; ++k, pw *= conj_xi) lc[static_cast<size_t>(k)] += rule->weights[m] * l * pw;
    }
    return lc;
  };
  auto c1 = coeffs(1.0, 40), c2 = coeffs(2.0, 50);
  double diff = 0.0;
  for (size_t k = 0; k < c1.size(); ++k) diff = std::max(diff, std::abs(c1[k] - c2[k]));
  if (diff > tol) fail(Errc::NotLogIntegrable, "log-modulus Fourier coefficients do not settle under refinement");
  return detail::outer_from_log_coeffs(c2, D);
}

// ---------------------------------------------------------------------------
// co-analytic Toeplitz operators

inline constexpr int kToeplitzBuffer = 32;

/// (T_conj(phi) f)_j = sum_{k>=j} conj(phi_{k-j}) f_k for j = 0..D.
inline std::vector<cplx> toeplitz_coanalytic_apply(const std::vector<cplx>& phi, const std::vector<cplx>& f, int D) {
  std::vector<cplx> out(static_cast<size_t>(D) + 1, 0.0);
  for (int j = 0; j <= D; ++j) {
    cplx acc = 0.0;
    for (size_t k = static_cast<size_t>(j); k < f.size(); ++k) {
      size_t d = k - static_cast<size_t>(j);
      if (d >= phi.size()) break;
      acc += std::conj(phi[d]) * f[k];
    }
    out[static_cast<size_t>(j)] = acc;
  }
  return out;
}

inline Poly toeplitz_coanalytic_apply(const FnExpr& phi, const Poly& f, int D) {
  int n = std::max(D, f.degree());
  return Poly(toeplitz_coanalytic_apply(taylor_coeffs(phi, n), f.coeffs(), D));
}

struct ToeplitzSolveResult {
  std::vector<cplx> x;  // degrees 0..D
  double tail = 0.0;    // max |x_k| over the buffer, relative to max |x|
};

/// Solves T_conj(phi) x = g on degrees 0..D+buffer by back-substitution from
/// the top with x_k = 0 beyond; the buffer entries must have decayed.
/// `g` should carry coefficients up to D + buffer.
inline ToeplitzSolveResult toeplitz_coanalytic_solve(const std::vector<cplx>& phi, const std::vector<cplx>& g, int D,
                                                     double tail_tol = 1e-8, int buffer = kToeplitzBuffer) {
  if (phi.empty() || std::abs(phi[0]) < 1e-10) fail(Errc::IllConditioned, "symbol vanishes at the origin");
  const int top = D + buffer;
  std::vector<cplx> x(static_cast<size_t>(top) + 1, 0.0);
  const cplx d0 = std::conj(phi[0]);
  for (int j = top; j >= 0; --j) {
    cplx acc = j < static_cast<int>(g.size()) ? g[static_cast<size_t>(j)] : cplx(0.0);
    for (int k = j + 1; k <= top; ++k) {
      size_t d = static_cast<size_t>(k - j);
      if (d >= phi.size()) break;
      acc -= std::conj(phi[d]) * x[static_cast<size_t>(k)];
    }
    x[static_cast<size_t>(j)] = acc / d0;
  }
  double xmax = 0.0, tail = 0.0;
  for (int k = 0; k <= top; ++k) {
    double a = std::abs(x[static_cast<size_t>(k)]);
    if (k <= D)
      xmax = std::max(xmax, a);
    else
      tail = std::max(tail, a);
  }
  ToeplitzSolveResult res;
  res.tail = tail / std::max(xmax, 1e-300);
  if (tail > tail_tol * std::max(1.0, xmax)) fail(Errc::TailNotDecayed, "Toeplitz solution does not decay in the buffer");
  x.resize(static_cast<size_t>(D) + 1);
  res.x = std::move(x);
  return res;
}

inline Poly toeplitz_coanalytic_solve(const FnExpr& phi, const Poly& g, int D) {
  auto pc = taylor_coeffs(phi, D + kToeplitzBuffer);
  return Poly(toeplitz_coanalytic_solve(pc, g.coeffs(), D).x);
}

// ---------------------------------------------------------------------------
// polynomial least squares

struct LSResult {
  Poly q;
  double residual = 0.0;
  int degree = 0;
  /// Ratio of extreme squared Cholesky pivots of the Gram matrix.
  double condition = 1.0;
};

/// Nested least-squares solves min ||q f - g||_2 over deg q <= n for every n
/// in `degrees`, from one Cholesky factorisation of the Gram matrix of
/// z^k f.  f and g are given by their values on the nodes of `rule`.
inline std::vector<LSResult> poly_ls_sweep(const CircleRule& rule, const std::vector<cplx>& f,
                                           const std::vector<cplx>& g, const std::vector<int>& degrees,
                                           double ridge = 1e-12) {
  if (degrees.empty()) return {};
  for (size_t i = 1; i < degrees.size(); ++i)
    if (degrees[i] <= degrees[i - 1]) fail(Errc::InvalidArgument, "degrees must be strictly increasing");
  if (degrees.front() < 0) fail(Errc::InvalidArgument, "negative degree");
  const int nmax = degrees.back();
  const size_t K = static_cast<size_t>(nmax) + 1;
  const size_t M = rule.size();

  // mu_l = int |f|^2 conj(xi)^l dm, h_j = int g conj(f) conj(xi)^j dm
  std::vector<cplx> mu(K, 0.0), h(K, 0.0);
  for (size_t m = 0; m < M; ++m) {
    const double wf2 = rule.weights[m] * std::norm(f[m]);
    const cplx wgf = rule.weights[m] * g[m] * std::conj(f[m]);
    const cplx cx = std::conj(rule.nodes[m]);
    cplx pw = 1.0;
    for (size_t l = 0; l < K; ++l) {
      mu[l] += wf2 * pw;
      h[l] += wgf * pw;
      pw *= cx;
    }
  }
  // G_{jk} = <z^k f, z^j f> = mu_{j-k}
  Eigen::MatrixXcd G(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
  for (size_t j = 0; j < K; ++j)
    for (size_t k = 0; k < K; ++k) G(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = j >= k ? mu[j - k] : std::conj(mu[k - j]);
  const double scale = std::max(mu[0].real(), 1e-300);
  G.diagonal().array() += ridge * scale;
  Eigen::LLT<Eigen::MatrixXcd> llt(G);
  if (llt.info() != Eigen::Success) fail(Errc::IllConditioned, "Gram matrix is not positive definite");
  const Eigen::MatrixXcd L = llt.matrixL();

  std::vector<LSResult> out;
  Eigen::VectorXcd hv(static_cast<Eigen::Index>(K));
  for (size_t j = 0; j < K; ++j) hv(static_cast<Eigen::Index>(j)) = h[j];
  for (int n : degrees) {
    const Eigen::Index s = n + 1;
    auto Ls = L.topLeftCorner(s, s);
    Eigen::VectorXcd y = Ls.triangularView<Eigen::Lower>().solve(hv.head(s));
    Eigen::VectorXcd c = Ls.adjoint().triangularView<Eigen::Upper>().solve(y);
    LSResult r;
    r.degree = n;
    std::vector<cplx> qc(static_cast<size_t>(s));
    for (Eigen::Index k = 0; k < s; ++k) qc[static_cast<size_t>(k)] = c(k);
    r.q = Poly(qc);
    double res2 = 0.0;
    for (size_t m = 0; m < M; ++m) {
      cplx qv = 0.0;
      for (Eigen::Index k = s - 1; k >= 0; --k) qv = qv * rule.nodes[m] + c(k);
      res2 += rule.weights[m] * std::norm(qv * f[m] - g[m]);
    }
    r.residual = std::sqrt(res2);
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (Eigen::Index k = 0; k < s; ++k) {
      double d = std::norm(Ls(k, k));
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    r.condition = dmax / dmin;
    out.push_back(std::move(r));
  }
  return out;
}

inline LSResult poly_ls_approx(const FnExpr& f, const FnExpr& g, int n, const QuadOptions& q = {}) {
  QuadOptions qq = q;
  while (qq.M < static_cast<size_t>(8 * (n + 16))) qq.M *= 2;
  qq.bandwidth = std::max(qq.bandwidth, 2 * n + 16);
  auto rule = rule_for({f, g}, qq);
  return poly_ls_sweep(*rule, sample_values(f, rule), sample_values(g, rule), {n}).front();
}

// ---------------------------------------------------------------------------
// Fejer-Riesz

/// Real trigonometric polynomial sum_{|k|<=d} c_k e^{ik theta}, stored by its
/// coefficients c_0..c_d (c_{-k} = conj(c_k)).
struct TrigPoly {
  std::vector<cplx> c;

  int degree() const { return static_cast<int>(c.size()) - 1; }
  double operator()(double theta) const {
    double s = c.empty() ? 0.0 : c[0].real();
    for (size_t k = 1; k < c.size(); ++k) s += 2.0 * (c[k] * std::polar(1.0, static_cast<double>(k) * theta)).real();
    return s;
  }
  /// |p(e^{i theta})|^2
  static TrigPoly abs2(const Poly& p) {
    TrigPoly t;
    const int d = std::max(p.degree(), 0);
    t.c.assign(static_cast<size_t>(d) + 1, 0.0);
    for (int k = 0; k <= d; ++k)
      for (int j = 0; j + k <= p.degree(); ++j) t.c[static_cast<size_t>(k)] += std::conj(p[j + k]) * p[j];
    t.c[0] = t.c[0].real();
    return t;
  }
  friend TrigPoly operator-(TrigPoly a, const TrigPoly& b) {
    if (b.c.size() > a.c.size()) a.c.resize(b.c.size(), 0.0);
    for (size_t k = 0; k < b.c.size(); ++k) a.c[k] -= b.c[k];
    while (a.c.size() > 1 && std::abs(a.c.back()) == 0.0) a.c.pop_back();
    return a;
  }
  double min_on_grid(size_t M = 8192) const {
    double m = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < M; ++i) m = std::min(m, (*this)(2.0 * kPi * static_cast<double>(i) / static_cast<double>(M)));
    return m;
  }
  double max_on_grid(size_t M = 8192) const {
    double m = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < M; ++i) m = std::max(m, (*this)(2.0 * kPi * static_cast<double>(i) / static_cast<double>(M)));
    return m;
  }
};

/// Polynomial a of degree d with |a|^2 = t on the circle, a(0) > 0 and no
/// roots inside the disc.
inline Poly fejer_riesz(TrigPoly t, double cluster_tol = 1e-6) {
  const double tmax = t.max_on_grid();
  if (t.min_on_grid() < -1e-10 * std::max(1.0, tmax)) fail(Errc::NegativeSymbol, "trigonometric polynomial is negative");
  if (!(tmax > 0.0)) fail(Errc::NegativeSymbol, "trigonometric polynomial vanishes identically");
  // drop negligible top coefficients
  while (t.c.size() > 1 && std::abs(t.c.back()) < 1e-15 * tmax) t.c.pop_back();
  const int d = t.degree();
  if (d == 0) return Poly::constant(std::sqrt(t.c[0].real()));

  // Laurent lift z^d t(z): coefficient of z^{j} is c_{j-d}
  std::vector<cplx> lift(static_cast<size_t>(2 * d) + 1);
  for (int j = 0; j <= 2 * d; ++j) {
    int k = j - d;
    lift[static_cast<size_t>(j)] = k >= 0 ? t.c[static_cast<size_t>(k)] : std::conj(t.c[static_cast<size_t>(-k)]);
  }
  const Poly lifted(lift);
  auto roots = lifted.roots();

  std::vector<cplx> chosen, circle;
  for (cplx r : roots) {
    double m = std::abs(r);
    if (std::abs(m - 1.0) < cluster_tol)
      circle.push_back(r);
    else if (m > 1.0)
      chosen.push_back(r);
  }
  // circle roots come with even multiplicity; keep half of each cluster
  std::vector<bool> used(circle.size(), false);
  for (size_t i = 0; i < circle.size(); ++i) {
    if (used[i]) continue;
    std::vector<size_t> cl{i};
    used[i] = true;
    for (size_t j = i + 1; j < circle.size(); ++j)
      if (!used[j] && std::abs(circle[j] - circle[i]) < std::sqrt(cluster_tol)) {
        cl.push_back(j);
        used[j] = true;
      }
    if (cl.size() % 2 != 0) fail(Errc::NegativeSymbol, "boundary root of odd multiplicity");
    cplx mean = 0.0;
    for (size_t j : cl) mean += circle[j];
    mean /= static_cast<double>(cl.size());
    // a root of multiplicity c is a simple root of the (c-1)-th derivative
    const Poly dk = lifted.derivative(static_cast<int>(cl.size()) - 1), dk1 = dk.derivative();
    for (int it = 0; it < 5; ++it) {
      cplx den = dk1(mean);
      if (std::abs(den) < 1e-300) break;
      cplx step = dk(mean) / den;
      if (!(std::abs(step) < 1e-4)) break;
      mean -= step;
    }
    mean /= std::abs(mean);
    for (size_t j = 0; j < cl.size() / 2; ++j) chosen.push_back(mean);
  }
  if (static_cast<int>(chosen.size()) != d) fail(Errc::NegativeSymbol, "root pairing failed");

  Poly a = Poly::from_roots(chosen);
  // fix |C| at the grid maximum of t, then the phase so that a(0) > 0
  double best = 0.0, bt = 0.0;
  for (int i = 0; i < 256; ++i) {
    double th = 2.0 * kPi * i / 256.0, v = t(th);
    if (v > best) {
      best = v;
      bt = th;
    }
  }
  double mag = std::sqrt(best) / std::abs(a(std::polar(1.0, bt)));
  cplx a0 = a[0];
  a *= mag * std::conj(a0) / std::abs(a0);
  return a;
}

}  // namespace hb
