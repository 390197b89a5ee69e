#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hb/error.hpp"
#include "hb/poly.hpp"
#include "hb/quadrature.hpp"

namespace hb {

class FnExpr;

namespace fn {

struct PolyFn {
  Poly p;
};
/// num/den with den nonvanishing on the closed disc.
struct RationalFn {
  Poly num, den;
};
/// gamma * prod |a|/a (a - z)/(1 - conj(a) z)
struct BlaschkeFn {
  std::vector<cplx> zeros;
  cplx gamma = 1.0;
};
/// exp(-sum w_j (xi_j + z)/(xi_j - z))
struct SingularInnerFn {
  std::vector<Atom> atoms;
};
/// (H sigma - 1)/(H sigma + 1) for a finite atomic sigma; stored alongside its
/// rational form.
struct HerglotzInnerFn {
  std::vector<Atom> atoms;
  Poly num, den;
};
/// 1/(1 - conj(lambda) z)
struct H2KernelFn {
  cplx lambda;
};
enum class KernelKind { Hb, KI };
/// (1 - conj(g(p)) g(z)) / (1 - conj(p) z); p interior or on the circle.
struct KernelFn {
  KernelKind kind;
  std::shared_ptr<const FnExpr> g;
  cplx point;
  cplx g_at_point;
  bool boundary;
};
struct SumFn {
  std::vector<FnExpr> terms;
};
struct ProductFn {
  std::vector<FnExpr> factors;
};
struct ScaleFn {
  cplx c;
  std::shared_ptr<const FnExpr> f;
};
/// f(z^k)
struct ComposePowerFn {
  std::shared_ptr<const FnExpr> f;
  int k;
};

using Node = std::variant<PolyFn, RationalFn, BlaschkeFn, SingularInnerFn, HerglotzInnerFn, H2KernelFn, KernelFn, SumFn,
                          ProductFn, ScaleFn, ComposePowerFn>;

}  // namespace fn

/// Immutable closed-form analytic function on the disc.  Cheap to copy.
class FnExpr {
 public:
  FnExpr() : node_(std::make_shared<const fn::Node>(fn::PolyFn{})) {}
  explicit FnExpr(fn::Node n) : node_(std::make_shared<const fn::Node>(std::move(n))) {}

  const fn::Node& node() const { return *node_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(node_.get());
  }

  cplx operator()(cplx z) const;

 private:
  std::shared_ptr<const fn::Node> node_;
};

// ---------------------------------------------------------------------------
// constructors

inline FnExpr poly(Poly p) { return FnExpr(fn::PolyFn{std::move(p)}); }
inline FnExpr constant(cplx c) { return poly(Poly::constant(c)); }
inline FnExpr identity() { return poly(Poly{0.0, 1.0}); }
inline FnExpr rational(Poly num, Poly den) {
  if (den.is_zero()) fail(Errc::ValidationError, "rational function with zero denominator");
  return FnExpr(fn::RationalFn{std::move(num), std::move(den)});
}
inline FnExpr blaschke(std::vector<cplx> zeros, cplx gamma = 1.0) {
  for (cplx a : zeros)
    if (std::abs(a) >= 1.0) fail(Errc::ValidationError, "Blaschke zero outside the open disc");
  if (std::abs(std::abs(gamma) - 1.0) > 1e-12) fail(Errc::ValidationError, "Blaschke constant must be unimodular");
  return FnExpr(fn::BlaschkeFn{std::move(zeros), gamma});
}
inline void validate_atoms(const std::vector<Atom>& atoms) {
  for (size_t i = 0; i < atoms.size(); ++i) {
    if (!(atoms[i].mass > 0.0)) fail(Errc::ValidationError, "atom mass must be strictly positive");
    if (std::abs(std::abs(atoms[i].xi) - 1.0) > 1e-12) fail(Errc::ValidationError, "atom is not unimodular");
    for (size_t j = 0; j < i; ++j)
      if (std::abs(atoms[i].xi - atoms[j].xi) < 1e-12) fail(Errc::ValidationError, "atoms must be distinct");
  }
}
inline FnExpr singular_inner(std::vector<Atom> atoms) {
  validate_atoms(atoms);
  return FnExpr(fn::SingularInnerFn{std::move(atoms)});
}
/// S_{delta_1}(z) = exp(-(1+z)/(1-z))
inline FnExpr singular_delta1() { return singular_inner({{1.0, 1.0}}); }

/// Inner function (H sigma - 1)/(H sigma + 1) whose Clark measure at 1 is sigma.
inline FnExpr herglotz_inner(std::vector<Atom> atoms);

inline FnExpr h2_kernel(cplx lambda) {
  if (std::abs(lambda) >= 1.0) fail(Errc::DomainError, "H2 kernel point must lie in the open disc");
  return FnExpr(fn::H2KernelFn{lambda});
}
inline FnExpr sum(std::vector<FnExpr> terms) { return FnExpr(fn::SumFn{std::move(terms)}); }
inline FnExpr product(std::vector<FnExpr> factors) { return FnExpr(fn::ProductFn{std::move(factors)}); }
inline FnExpr scale(cplx c, FnExpr f) { return FnExpr(fn::ScaleFn{c, std::make_shared<const FnExpr>(std::move(f))}); }
inline FnExpr compose_power(FnExpr f, int k) {
  if (k < 1) fail(Errc::ValidationError, "compose_power exponent must be >= 1");
  return FnExpr(fn::ComposePowerFn{std::make_shared<const FnExpr>(std::move(f)), k});
}
inline FnExpr operator+(FnExpr a, FnExpr b) { return sum({std::move(a), std::move(b)}); }
inline FnExpr operator*(FnExpr a, FnExpr b) { return product({std::move(a), std::move(b)}); }
inline FnExpr operator*(cplx c, FnExpr f) { return scale(c, std::move(f)); }
inline FnExpr operator-(FnExpr a, FnExpr b) { return sum({std::move(a), scale(-1.0, std::move(b))}); }

// ---------------------------------------------------------------------------
// evaluation

namespace detail {

inline constexpr double kDiscSlack = 1e-12;

inline void check_domain(cplx z) {
  if (std::abs(z) > 1.0 + kDiscSlack) fail(Errc::DomainError, "evaluation point outside the closed disc");
}

inline cplx blaschke_factor(cplx a, cplx z) {
  if (a == cplx(0.0)) return z;
  return (std::abs(a) / a) * (a - z) / (1.0 - std::conj(a) * z);
}

inline cplx singular_exponent(const std::vector<Atom>& atoms, cplx z) {
  cplx e = 0.0;
  for (const auto& at : atoms) {
    cplx d = at.xi - z;
    if (std::abs(d) < 1e-14) fail(Errc::EvalAtSingularity, "evaluation at an atom of a singular inner factor");
    e -= at.mass * (at.xi + z) / d;
  }
  return e;
}

inline cplx singular_value(const std::vector<Atom>& atoms, cplx z) {
  cplx e = singular_exponent(atoms, z);
  // exp of a huge negative real part underflows to the correct limit 0
  return std::exp(e);
}

inline std::pair<Poly, Poly> herglotz_rational(const std::vector<Atom>& atoms) {
  // H = P/Q with Q = prod (xi_j - z), P = sum w_j (xi_j + z) prod_{i != j} (xi_i - z)
  Poly Q = Poly::constant(1.0);
  for (const auto& a : atoms) Q = Q * Poly{a.xi, -1.0};
  Poly P;
  for (size_t j = 0; j < atoms.size(); ++j) {
    Poly t = Poly{atoms[j].xi, 1.0} * cplx(atoms[j].mass);
    for (size_t i = 0; i < atoms.size(); ++i)
      if (i != j) t = t * Poly{atoms[i].xi, -1.0};
    P += t;
  }
  return {P - Q, P + Q};
}

cplx eval(const FnExpr& e, cplx z);
cplx eval_derivative_at(const FnExpr& e, cplx z);

inline cplx eval_rational(const Poly& num, const Poly& den, cplx z) {
  cplx d = den(z);
  if (std::abs(d) < 1e-300 || std::abs(d) < 1e-14 * std::max(1.0, den.max_abs_coeff()))
    fail(Errc::EvalAtSingularity, "denominator vanishes at evaluation point");
  return num(z) / d;
}

struct Evaluator {
  cplx z;
  cplx operator()(const fn::PolyFn& f) const { return f.p(z); }
  cplx operator()(const fn::RationalFn& f) const { return eval_rational(f.num, f.den, z); }
  cplx operator()(const fn::BlaschkeFn& f) const {
    cplx v = f.gamma;
    for (cplx a : f.zeros) v *= blaschke_factor(a, z);
    return v;
  }
  cplx operator()(const fn::SingularInnerFn& f) const { return singular_value(f.atoms, z); }
  cplx operator()(const fn::HerglotzInnerFn& f) const { return eval_rational(f.num, f.den, z); }
  cplx operator()(const fn::H2KernelFn& f) const { return 1.0 / (1.0 - std::conj(f.lambda) * z); }
  cplx operator()(const fn::KernelFn& f) const {
    const cplx c = std::conj(f.g_at_point);
    const cplx den = 1.0 - std::conj(f.point) * z;
    if (f.boundary && std::abs(z - f.point) < 1e-8) {
      // removable singularity: limit of (1 - c g(z))/(1 - conj(p) z) at z = p
      return c * eval_derivative_at(*f.g, f.point) * f.point;
    }
    return (1.0 - c * eval(*f.g, z)) / den;
  }
  cplx operator()(const fn::SumFn& f) const {
    cplx s = 0.0;
    for (const auto& t : f.terms) s += eval(t, z);
    return s;
  }
  cplx operator()(const fn::ProductFn& f) const {
    cplx s = 1.0;
    for (const auto& t : f.factors) s *= eval(t, z);
    return s;
  }
  cplx operator()(const fn::ScaleFn& f) const { return f.c * eval(*f.f, z); }
  cplx operator()(const fn::ComposePowerFn& f) const {
    cplx w = std::pow(z, f.k);
    if (std::abs(z) >= 1.0 - 1e-15) w = std::polar(std::pow(std::abs(z), f.k), f.k * std::arg(z));
    return eval(*f.f, w);
  }
};

inline cplx eval(const FnExpr& e, cplx z) { return std::visit(Evaluator{z}, e.node()); }

}  // namespace detail

inline FnExpr herglotz_inner(std::vector<Atom> atoms) {
  validate_atoms(atoms);
  if (atoms.empty()) fail(Errc::ValidationError, "Herglotz construction needs at least one atom");
  auto [num, den] = detail::herglotz_rational(atoms);
  // normalise so that the denominator has unit constant term
  cplx d0 = den[0];
  return FnExpr(fn::HerglotzInnerFn{std::move(atoms), num * (1.0 / d0), den * (1.0 / d0)});
}

/// Closed-form value at |z| <= 1.
inline cplx evaluate(const FnExpr& e, cplx z) {
  detail::check_domain(z);
  return detail::eval(e, z);
}

inline cplx FnExpr::operator()(cplx z) const { return evaluate(*this, z); }

inline FnExpr hb_kernel_expr(const FnExpr& g, cplx point, cplx g_at_point, fn::KernelKind kind) {
  const bool boundary = std::abs(std::abs(point) - 1.0) < 1e-12;
  if (std::abs(point) > 1.0 + 1e-12) fail(Errc::DomainError, "kernel point outside the closed disc");
  return FnExpr(fn::KernelFn{kind, std::make_shared<const FnExpr>(g), point, g_at_point, boundary});
}

// ---------------------------------------------------------------------------
// structural queries

/// Rational form num/den when the expression is a rational function.
inline std::optional<std::pair<Poly, Poly>> as_rational(const FnExpr& e) {
  using R = std::optional<std::pair<Poly, Poly>>;
  struct V {
    R operator()(const fn::PolyFn& f) const { return std::pair{f.p, Poly::constant(1.0)}; }
    R operator()(const fn::RationalFn& f) const { return std::pair{f.num, f.den}; }
    R operator()(const fn::BlaschkeFn& f) const {
      Poly n = Poly::constant(f.gamma), d = Poly::constant(1.0);
      for (cplx a : f.zeros) {
        if (a == cplx(0.0)) {
          n = n * Poly{0.0, 1.0};
          continue;
        }
        n = n * (Poly{a, -1.0} * (std::abs(a) / a));
        d = d * Poly{1.0, -std::conj(a)};
      }
      return std::pair{n, d};
    }
    R operator()(const fn::SingularInnerFn&) const { return std::nullopt; }
    R operator()(const fn::HerglotzInnerFn& f) const { return std::pair{f.num, f.den}; }
    R operator()(const fn::H2KernelFn& f) const {
      return std::pair{Poly::constant(1.0), Poly{1.0, -std::conj(f.lambda)}};
    }
    R operator()(const fn::KernelFn& f) const {
      auto g = as_rational(*f.g);
      if (!g) return std::nullopt;
      Poly num = g->second - g->first * std::conj(f.g_at_point);
      Poly lin{1.0, -std::conj(f.point)};
      if (f.boundary) {
        auto [q, rem] = num.divmod(lin);
        return std::pair{q, g->second};
      }
      return std::pair{num, g->second * lin};
    }
    R operator()(const fn::SumFn& f) const {
      Poly n, d = Poly::constant(1.0);
      for (const auto& t : f.terms) {
        auto r = as_rational(t);
        if (!r) return std::nullopt;
        if (r->second.degree() == 0 && d.degree() == 0) {
          n = n * (1.0 / d[0]) + r->first * (1.0 / r->second[0]);
          d = Poly::constant(1.0);
        } else {
          n = n * r->second + r->first * d;
          d = d * r->second;
        }
      }
      return std::pair{n, d};
    }
    R operator()(const fn::ProductFn& f) const {
      Poly n = Poly::constant(1.0), d = Poly::constant(1.0);
      for (const auto& t : f.factors) {
        auto r = as_rational(t);
        if (!r) return std::nullopt;
        n = n * r->first;
        d = d * r->second;
      }
      return std::pair{n, d};
    }
    R operator()(const fn::ScaleFn& f) const {
      auto r = as_rational(*f.f);
      if (!r) return std::nullopt;
      return std::pair{r->first * f.c, r->second};
    }
    R operator()(const fn::ComposePowerFn& f) const {
      auto r = as_rational(*f.f);
      if (!r) return std::nullopt;
      return std::pair{r->first.compose_power(f.k), r->second.compose_power(f.k)};
    }
  };
  return std::visit(V{}, e.node());
}

/// Atoms of every singular inner factor, with compose_power pulled back to
/// the k-th roots (effective mass w/k for rule construction).
inline std::vector<Atom> singular_atoms(const FnExpr& e) {
  std::vector<Atom> out;
  auto add = [&](const Atom& a) {
    for (auto& o : out)
      if (std::abs(o.xi - a.xi) < 1e-12) {
        o.mass = std::max(o.mass, a.mass);
        return;
      }
    out.push_back(a);
  };
  std::function<void(const FnExpr&)> walk = [&](const FnExpr& x) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, fn::SingularInnerFn>) {
            for (const auto& a : n.atoms) add(a);
          } else if constexpr (std::is_same_v<T, fn::KernelFn>) {
            walk(*n.g);
          } else if constexpr (std::is_same_v<T, fn::SumFn>) {
            for (const auto& t : n.terms) walk(t);
          } else if constexpr (std::is_same_v<T, fn::ProductFn>) {
            for (const auto& t : n.factors) walk(t);
          } else if constexpr (std::is_same_v<T, fn::ScaleFn>) {
            walk(*n.f);
          } else if constexpr (std::is_same_v<T, fn::ComposePowerFn>) {
            for (const auto& a : singular_atoms(*n.f)) {
              double base = std::arg(a.xi);
              for (int j = 0; j < n.k; ++j) add({std::polar(1.0, (base + 2.0 * kPi * j) / n.k), a.mass / n.k});
            }
          }
        },
        x.node());
  };
  walk(e);
  return out;
}

// ---------------------------------------------------------------------------
// differentiation

namespace detail {

inline FnExpr rational_derivative(const Poly& n, const Poly& d) {
  if (d.degree() <= 0) return poly(n.derivative() * (1.0 / d[0]));
  return rational(n.derivative() * d - n * d.derivative(), d * d);
}

inline FnExpr derivative1(const FnExpr& e) {
  struct V {
    const FnExpr& self;
    FnExpr operator()(const fn::PolyFn& f) const { return poly(f.p.derivative()); }
    FnExpr operator()(const fn::RationalFn& f) const { return rational_derivative(f.num, f.den); }
    FnExpr operator()(const fn::BlaschkeFn&) const {
      auto r = as_rational(self);
      return rational_derivative(r->first, r->second);
    }
    FnExpr operator()(const fn::SingularInnerFn& f) const {
      // I' = I * (-sum 2 w xi / (xi - z)^2)
      Poly num, den = Poly::constant(1.0);
      for (const auto& a : f.atoms) {
        Poly sq = Poly{a.xi, -1.0} * Poly{a.xi, -1.0};
        num = num * sq + den * Poly::constant(-2.0 * a.mass * a.xi);
        den = den * sq;
      }
      return product({self, rational(num, den)});
    }
    FnExpr operator()(const fn::HerglotzInnerFn& f) const { return rational_derivative(f.num, f.den); }
    FnExpr operator()(const fn::H2KernelFn& f) const {
      Poly lin{1.0, -std::conj(f.lambda)};
      return rational(Poly::constant(std::conj(f.lambda)), lin * lin);
    }
    FnExpr operator()(const fn::KernelFn& f) const {
      // (N/D)' = N'/D + conj(p) N/D^2 = (N' + conj(p) * self) / D
      const cplx c = std::conj(f.g_at_point);
      Poly lin{1.0, -std::conj(f.point)};
      FnExpr inv = rational(Poly::constant(1.0), lin);
      return product({sum({scale(-c, derivative1(*f.g)), scale(std::conj(f.point), self)}), inv});
    }
    FnExpr operator()(const fn::SumFn& f) const {
      std::vector<FnExpr> t;
      for (const auto& x : f.terms) t.push_back(derivative1(x));
      return sum(std::move(t));
    }
    FnExpr operator()(const fn::ProductFn& f) const {
      std::vector<FnExpr> t;
      for (size_t i = 0; i < f.factors.size(); ++i) {
        std::vector<FnExpr> p = f.factors;
        p[i] = derivative1(f.factors[i]);
        t.push_back(product(std::move(p)));
      }
      return sum(std::move(t));
    }
    FnExpr operator()(const fn::ScaleFn& f) const { return scale(f.c, derivative1(*f.f)); }
    FnExpr operator()(const fn::ComposePowerFn& f) const {
      return product({poly(Poly::monomial(f.k - 1, static_cast<double>(f.k))), compose_power(derivative1(*f.f), f.k)});
    }
  };
  return std::visit(V{e}, e.node());
}

inline cplx eval_derivative_at(const FnExpr& e, cplx z) { return eval(derivative1(e), z); }

}  // namespace detail

/// Closed-form derivative of the given order.
inline FnExpr derivative(const FnExpr& e, int order = 1) {
  if (order < 1) fail(Errc::InvalidArgument, "derivative order must be >= 1");
  FnExpr d = e;
  for (int k = 0; k < order; ++k) d = detail::derivative1(d);
  return d;
}

// ---------------------------------------------------------------------------
// circle samples

/// Samples of an expression on the nodes of a quadrature rule.
struct CircleGrid {
  RulePtr rule;
  std::vector<cplx> values;
  std::string provenance;

  size_t size() const { return values.size(); }
};

/// Samples on any rule; nodes hitting a singularity are nudged by `nudge`
/// radians and recorded.
inline CircleGrid sample(const FnExpr& e, const RulePtr& rule, std::vector<size_t>* perturbed = nullptr,
                         double nudge = 0.0) {
  CircleGrid g;
  g.rule = rule;
  g.values.resize(rule->size());
  for (size_t m = 0; m < rule->size(); ++m) {
    try {
      g.values[m] = detail::eval(e, rule->nodes[m]);
    } catch (const Error& err) {
      if (err.code() != Errc::EvalAtSingularity || nudge == 0.0) throw;
      g.values[m] = detail::eval(e, rule->nodes[m] * std::polar(1.0, nudge));
      if (perturbed) perturbed->push_back(m);
    }
  }
  return g;
}

/// Values at the M-th roots of unity.  Points that hit a singularity are
/// rotated by pi/M; the rotation is recorded in the grid's rule.
inline CircleGrid circle_samples(const FnExpr& e, size_t M) {
  if (!is_power_of_two(M) || M < 4) fail(Errc::InvalidArgument, "grid size must be a power of two >= 4");
  auto base = uniform_rule(M);
  std::vector<size_t> perturbed;
  CircleGrid g = sample(e, base, &perturbed, kPi / static_cast<double>(M));
  if (!perturbed.empty()) {
    auto r = std::make_shared<CircleRule>(*base);
    r->perturbed = perturbed;
    for (size_t m : perturbed) r->nodes[m] *= std::polar(1.0, kPi / static_cast<double>(M));
    g.rule = r;
  }
  for (const auto& v : g.values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) fail(Errc::EvalAtSingularity, "non-finite grid sample");
  g.provenance = "circle_samples M=" + std::to_string(M) + " perturbed=" + std::to_string(perturbed.size());
  return g;
}

// ---------------------------------------------------------------------------
// Taylor coefficients

namespace detail {

inline std::vector<cplx> taylor_series(const FnExpr& e, size_t n);

struct SeriesBuilder {
  size_t n;
  std::vector<cplx> operator()(const fn::PolyFn& f) const { return series::of(f.p, n); }
  std::vector<cplx> operator()(const fn::RationalFn& f) const {
    return series::div(series::of(f.num, n), series::of(f.den, n), n);
  }
  std::vector<cplx> operator()(const fn::BlaschkeFn& f) const {
    std::vector<cplx> out(n, 0.0);
    if (n) out[0] = f.gamma;
    for (cplx a : f.zeros) {
      std::vector<cplx> fac;
      if (a == cplx(0.0))
        fac = {0.0, 1.0};
      else
        fac = series::div({std::abs(a), -std::abs(a) / a}, {1.0, -std::conj(a)}, n);
      out = series::mul(out, fac, n);
    }
    return out;
  }
  std::vector<cplx> operator()(const fn::SingularInnerFn& f) const {
    // exponent -sum w (xi+z)/(xi-z) = -sum w (1 + 2 sum_k conj(xi)^k z^k)
    std::vector<cplx> g(n, 0.0);
    for (const auto& a : f.atoms) {
      if (n) g[0] -= a.mass;
      cplx pw = 1.0;
      for (size_t k = 1; k < n; ++k) {
        pw *= std::conj(a.xi);
        g[k] -= 2.0 * a.mass * pw;
      }
    }
    return series::exp(g, n);
  }
  std::vector<cplx> operator()(const fn::HerglotzInnerFn& f) const {
    return series::div(series::of(f.num, n), series::of(f.den, n), n);
  }
  std::vector<cplx> operator()(const fn::H2KernelFn& f) const {
    std::vector<cplx> out(n);
    cplx pw = 1.0;
    for (size_t k = 0; k < n; ++k, pw *= std::conj(f.lambda)) out[k] = pw;
    return out;
  }
  std::vector<cplx> operator()(const fn::KernelFn& f) const {
    std::vector<cplx> num = taylor_series(*f.g, n);
    for (auto& v : num) v *= -std::conj(f.g_at_point);
    if (n) num[0] += 1.0;
    return series::div(num, {1.0, -std::conj(f.point)}, n);
  }
  std::vector<cplx> operator()(const fn::SumFn& f) const {
    std::vector<cplx> out(n, 0.0);
    for (const auto& t : f.terms) {
      auto s = taylor_series(t, n);
      for (size_t k = 0; k < n; ++k) out[k] += s[k];
    }
    return out;
  }
  std::vector<cplx> operator()(const fn::ProductFn& f) const {
    std::vector<cplx> out(n, 0.0);
    if (n) out[0] = 1.0;
    for (const auto& t : f.factors) out = series::mul(out, taylor_series(t, n), n);
    return out;
  }
  std::vector<cplx> operator()(const fn::ScaleFn& f) const {
    auto s = taylor_series(*f.f, n);
    for (auto& v : s) v *= f.c;
    return s;
  }
  std::vector<cplx> operator()(const fn::ComposePowerFn& f) const {
    const size_t k = static_cast<size_t>(f.k);
    auto s = taylor_series(*f.f, (n + k - 1) / k + 1);
    std::vector<cplx> out(n, 0.0);
    for (size_t j = 0; j * k < n; ++j) out[j * k] = s[j];
    return out;
  }
};

inline std::vector<cplx> taylor_series(const FnExpr& e, size_t n) { return std::visit(SeriesBuilder{n}, e.node()); }

}  // namespace detail

/// First D+1 Taylor coefficients at 0, by exact power-series arithmetic on
/// the expression tree.
inline std::vector<cplx> taylor_coeffs(const FnExpr& e, int D) {
  if (D < 0) fail(Errc::InvalidArgument, "negative Taylor degree");
  auto c = detail::taylor_series(e, static_cast<size_t>(D) + 1);
  for (const auto& v : c)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      fail(Errc::PrecisionLoss, "non-finite Taylor coefficient");
  return c;
}

/// Taylor coefficients from the trapezoidal rule on |z| = radius, rescaled by
/// radius^-k.  Independent of the series route; the rescaling limits it to
/// moderate D.
inline std::vector<cplx> taylor_coeffs_contour(const FnExpr& e, int D, double radius = 0.5, size_t M = 256,
                                               double tol = 1e-10) {
  std::vector<cplx> vals(M);
  double fmax = 0.0;
  for (size_t m = 0; m < M; ++m) {
    vals[m] = detail::eval(e, std::polar(radius, 2.0 * kPi * static_cast<double>(m) / static_cast<double>(M)));
    fmax = std::max(fmax, std::abs(vals[m]));
  }
  if (1e-16 * fmax * std::pow(radius, -D) > tol)
    fail(Errc::PrecisionLoss, "contour rescaling amplifies rounding beyond tolerance");
  std::vector<cplx> c(static_cast<size_t>(D) + 1);
  for (int k = 0; k <= D; ++k) {
    cplx acc = 0.0;
    for (size_t m = 0; m < M; ++m)
      acc += vals[m] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k) * static_cast<double>(m) / static_cast<double>(M));
    c[static_cast<size_t>(k)] = acc / static_cast<double>(M) * std::pow(radius, -k);
  }
  return c;
}

// ---------------------------------------------------------------------------
// boundary limits

enum class LimitStatus { Converged, Divergent };

struct LimitResult {
  cplx value = 0.0;
  double error = 0.0;
  LimitStatus status = LimitStatus::Converged;
};

/// Radial limit at a unimodular point along r_k = 1 - 2^-k, k = 4..26, with
/// one Richardson pass.
inline LimitResult nontangential_limit(const FnExpr& e, cplx zeta, double tol = 1e-6) {
  if (std::abs(std::abs(zeta) - 1.0) > 1e-10) fail(Errc::DomainError, "limit point must be unimodular");
  std::vector<cplx> v;
  for (int k = 4; k <= 26; ++k) {
    double r = 1.0 - std::ldexp(1.0, -k);
    v.push_back(detail::eval(e, r * zeta));
  }
  const size_t n = v.size();
  // unbounded growth along the radius
  bool growing = true;
  for (size_t i = n - 6; i < n; ++i)
    if (!(std::abs(v[i]) > 1.3 * std::abs(v[i - 1]))) growing = false;
  if (growing || !std::isfinite(std::abs(v.back()))) return {v.back(), INFINITY, LimitStatus::Divergent};

  std::vector<cplx> rich(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) rich[i] = 2.0 * v[i + 1] - v[i];
  cplx best = rich.back();
  double err = std::abs(rich.back() - rich[rich.size() - 2]);
  // smooth limits are already exact to rounding on the raw sequence
  double raw_err = std::abs(v.back() - v[n - 2]);
  if (raw_err < err) {
    best = v.back();
    err = raw_err;
  }
  if (err > tol * std::max(1.0, std::abs(best))) fail(Errc::NoLimit, "radial values do not settle");
  return {best, err, LimitStatus::Converged};
}

/// Value at a boundary point: direct evaluation where the expression is
/// analytic there, otherwise the radial limit.
inline cplx boundary_value(const FnExpr& e, cplx zeta) {
  try {
    return detail::eval(e, zeta);
  } catch (const Error& err) {
    if (err.code() != Errc::EvalAtSingularity) throw;
  }
  auto lim = nontangential_limit(e, zeta);
  if (lim.status != LimitStatus::Converged) fail(Errc::EvalAtSingularity, "no finite boundary value");
  return lim.value;
}

}  // namespace hb
