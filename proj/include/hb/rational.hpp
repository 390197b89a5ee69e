#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hb/error.hpp"
#include "hb/fnexpr.hpp"
#include "hb/hardy.hpp"
#include "hb/poly.hpp"

namespace hb {

/// A boundary root of the mate with its multiplicity.
struct Node {
  cplx zeta;
  int mult = 1;
};

enum class BKind { RationalNonInner, HalfInner, Factored };

/// The symbol b with the structure needed by the H(b) computations.
///
/// RationalNonInner: b = b_num/den, mate a = a_num/den.
/// HalfInner: b = (1+I)/2, mate a = (1-I)/2.
/// Factored: b = (rational outer part) * (finite Blaschke product) * (atomic
/// singular inner factor); its mate is the mate of the rational part, since
/// the inner factors are unimodular on the circle.
struct BSpec {
  BKind kind = BKind::RationalNonInner;
  FnExpr b;
  FnExpr a;
  Poly b_num, a_num, den;
  Poly a1 = Poly::constant(1.0);
  std::vector<Node> nodes;
  int N = 0;
  /// max over a 4096-grid of ||a|^2 + |b|^2 - 1|
  double mate_error = 0.0;

  FnExpr I;  // HalfInner

  FnExpr outer_part;  // Factored
  std::vector<cplx> blaschke_zeros;
  std::vector<Atom> atoms;
};

// ---------------------------------------------------------------------------

/// Distinct roots of p on the circle (|r| within tol of 1) with multiplicity.
inline std::vector<Node> circle_root_clusters(const Poly& p, double tol = 1e-6) {
  std::vector<cplx> circle;
  for (cplx r : p.roots())
    if (std::abs(std::abs(r) - 1.0) < tol) circle.push_back(r);
  std::vector<Node> out;
  std::vector<bool> used(circle.size(), false);
  for (size_t i = 0; i < circle.size(); ++i) {
    if (used[i]) continue;
    cplx mean = circle[i];
    int n = 1;
    used[i] = true;
    for (size_t j = i + 1; j < circle.size(); ++j)
      if (!used[j] && std::abs(circle[j] - circle[i]) < std::sqrt(tol)) {
        mean += circle[j];
        ++n;
        used[j] = true;
      }
    out.push_back({mean / std::abs(mean), n});
  }
  std::sort(out.begin(), out.end(), [](const Node& a, const Node& b) {
    double ta = std::arg(a.zeta), tb = std::arg(b.zeta);
    if (ta < 0) ta += 2.0 * kPi;
    if (tb < 0) tb += 2.0 * kPi;
    return ta < tb;
  });
  return out;
}

inline double mate_identity_error(const FnExpr& a, const FnExpr& b, size_t M = 4096) {
  double err = 0.0;
  for (size_t m = 0; m < M; ++m) {
    cplx z = std::polar(1.0, 2.0 * kPi * (static_cast<double>(m) + 0.5) / static_cast<double>(M));
    err = std::max(err, std::abs(std::norm(detail::eval(a, z)) + std::norm(detail::eval(b, z)) - 1.0));
  }
  return err;
}

/// Pythagorean mate of a rational contraction b = p/q via Fejer-Riesz of
/// |q|^2 - |p|^2; nodes are the boundary roots of the mate.
inline BSpec mate(const FnExpr& b) {
  auto r = as_rational(b);
  if (!r) fail(Errc::InvalidArgument, "mate expects a rational symbol");
  Poly p = r->first, q = r->second;
  double bmax = 0.0;
  for (int m = 0; m < 4096; ++m) bmax = std::max(bmax, std::abs(detail::eval(b, std::polar(1.0, 2.0 * kPi * m / 4096.0))));
  if (bmax > 1.0 + 1e-10) fail(Errc::NotContractive, "symbol exceeds 1 in modulus on the circle");
  for (cplx z : q.roots())
    if (std::abs(z) <= 1.0 + 1e-12) fail(Errc::InvalidArgument, "symbol has a pole in the closed disc");
  TrigPoly t = TrigPoly::abs2(q) - TrigPoly::abs2(p);
  double scale = TrigPoly::abs2(q).max_on_grid();
  if (t.max_on_grid() <= 1e-12 * scale) fail(Errc::IsInner, "1 - |b|^2 vanishes identically");
  Poly an = fejer_riesz(t);
  cplx q0 = q[0];
  an *= std::conj(q0) / std::abs(q0);

  BSpec s;
  s.kind = BKind::RationalNonInner;
  s.b = b;
  s.b_num = p;
  s.den = q;
  s.a_num = an;
  s.a = q.degree() == 0 ? poly(an * (1.0 / q0)) : rational(an, q);
  s.nodes = circle_root_clusters(an);
  s.a1 = Poly::constant(1.0);
  for (const auto& n : s.nodes)
    for (int k = 0; k < n.mult; ++k) s.a1 = s.a1 * Poly{-n.zeta, 1.0};
  s.N = s.a1.degree();
  s.mate_error = mate_identity_error(s.a, s.b);
  return s;
}

/// b = (1+I)/2 with mate (1-I)/2.  Nodes are left empty; the boundary
/// structure lives in the Clark data of I.
inline BSpec half_inner(const FnExpr& I) {
  BSpec s;
  s.kind = BKind::HalfInner;
  s.I = I;
  s.b = scale(0.5, constant(1.0) + I);
  s.a = scale(0.5, constant(1.0) - I);
  if (auto r = as_rational(I)) {
    s.den = r->second;
    s.b_num = (r->second + r->first) * 0.5;
    s.a_num = (r->second - r->first) * 0.5;
    s.mate_error = mate_identity_error(s.a, s.b);
  }
  return s;
}

/// b = outer * B * S with outer rational; used for E0 and canonical norms.
inline BSpec factored(const FnExpr& outer, std::vector<cplx> zeros, std::vector<Atom> atoms) {
  FnExpr rat = zeros.empty() ? outer : product({outer, blaschke(zeros)});
  BSpec s = mate(rat);
  s.kind = BKind::Factored;
  s.outer_part = outer;
  s.blaschke_zeros = std::move(zeros);
  s.atoms = std::move(atoms);
  if (!s.atoms.empty()) s.b = product({rat, singular_inner(s.atoms)});
  return s;
}

// ---------------------------------------------------------------------------
// Hermite interpolation

/// Polynomial of degree < sum m_k with prescribed derivatives
/// values[k][j] = p^{(j)}(zeta_k), j < m_k.
inline Poly hermite_interpolate(const std::vector<Node>& nodes, const std::vector<std::vector<cplx>>& values) {
  int N = 0;
  for (const auto& n : nodes) N += n.mult;
  if (N == 0) return Poly{};
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(N, N);
  Eigen::VectorXcd rhs(N);
  int row = 0;
  for (size_t k = 0; k < nodes.size(); ++k)
    for (int j = 0; j < nodes[k].mult; ++j, ++row) {
      rhs(row) = values[k][static_cast<size_t>(j)];
      for (int i = j; i < N; ++i) {
        double fall = 1.0;
        for (int t = 0; t < j; ++t) fall *= static_cast<double>(i - t);
        A(row, i) = fall * std::pow(nodes[k].zeta, i - j);
      }
    }
  Eigen::VectorXcd c = A.fullPivLu().solve(rhs);
  std::vector<cplx> out(static_cast<size_t>(N));
  for (int i = 0; i < N; ++i) out[static_cast<size_t>(i)] = c(i);
  return Poly(out);
}

/// Non-tangential jets f^{(j)}(zeta_k), j < m_k.
inline std::vector<std::vector<cplx>> node_jets(const FnExpr& f, const std::vector<Node>& nodes) {
  std::vector<std::vector<cplx>> v;
  for (const auto& n : nodes) {
    std::vector<cplx> jet;
    FnExpr d = f;
    for (int j = 0; j < n.mult; ++j) {
      if (j) d = derivative(d);
      jet.push_back(boundary_value(d, n.zeta));
    }
    v.push_back(std::move(jet));
  }
  return v;
}

// ---------------------------------------------------------------------------
// f = a1 ftilde + p

struct RationalDecomp {
  FnExpr ftilde;
  bool ftilde_exact = false;  // ftilde is a closed rational form
  Poly p;
  double ftilde_norm = 0.0;
  double p_norm = 0.0;
  double equiv_norm = 0.0;
  /// max relative error of a1 ftilde + p - f on the check grid
  double reconstruction_error = 0.0;
};

inline RationalDecomp decompose_rational(const FnExpr& f, const BSpec& spec, size_t M = 4096) {
  if (spec.kind == BKind::HalfInner) fail(Errc::InvalidArgument, "decompose_rational needs a rational symbol");
  RationalDecomp d;
  if (spec.N == 0) {
    d.ftilde = f;
    d.ftilde_exact = as_rational(f).has_value();
  } else {
    d.p = hermite_interpolate(spec.nodes, node_jets(f, spec.nodes));
    if (auto r = as_rational(f)) {
      Poly num = r->first - d.p * r->second;
      auto [qq, rem] = num.divmod(spec.a1);
      double scale = std::max(1.0, num.max_abs_coeff());
      if (rem.max_abs_coeff() > 1e-8 * scale) fail(Errc::NotInSpace, "f - p is not divisible by a1");
      d.ftilde = r->second.degree() == 0 ? poly(qq * (1.0 / r->second[0])) : rational(qq, r->second);
      d.ftilde_exact = true;
    } else {
      d.ftilde = product({sum({f, poly(d.p * -1.0)}), rational(Poly::constant(1.0), spec.a1)});
    }
  }
  // ||ftilde||_2, checked for stability under grid refinement
  QuadOptions q;
  q.M = M;
  double n1 = h2_norm(d.ftilde, q);
  if (!d.ftilde_exact) {
    q.M = 4 * M;
    q.density = 2.0;
    q.u_max *= 16.0;
    double n2 = h2_norm(d.ftilde, q);
    if (!std::isfinite(n2) || n2 > 1.05 * n1 + 1e-6)
      fail(Errc::NotInSpace, "norm of (f - p)/a1 grows under refinement: n1=" + std::to_string(n1) + " n2=" + std::to_string(n2));
    n1 = n2;
  }
  d.ftilde_norm = n1;
  d.p_norm = d.p.h2_norm();
  d.equiv_norm = std::sqrt(d.ftilde_norm * d.ftilde_norm + d.p_norm * d.p_norm);
  double err = 0.0;
  for (int m = 0; m < 64; ++m) {
    cplx z = std::polar(0.97, 2.0 * kPi * (m + 0.25) / 64.0);
    cplx fv = detail::eval(f, z);
    cplx rv = spec.a1(z) * detail::eval(d.ftilde, z) + d.p(z);
    err = std::max(err, std::abs(fv - rv) / std::max(1.0, std::abs(fv)));
  }
  d.reconstruction_error = err;
  return d;
}

inline double hb_norm_equiv(const FnExpr& f, const BSpec& spec) { return decompose_rational(f, spec).equiv_norm; }

// ---------------------------------------------------------------------------
// f+ and the canonical norm

inline constexpr int kFplusDegree = 256;

struct FplusResult {
  std::vector<cplx> fplus;  // Taylor coefficients 0..D
  double f_norm = 0.0;      // ||f||_2
  double fplus_norm = 0.0;  // ||f+||_2
  double norm = 0.0;        // ||f||_b
  double tail = 0.0;
  Poly poly() const { return Poly(fplus); }
};

/// Taylor coefficients of the symbol pair (b, a) to order n.
inline std::pair<std::vector<cplx>, std::vector<cplx>> symbol_coeffs(const BSpec& spec, int n) {
  return {taylor_coeffs(spec.b, n), taylor_coeffs(spec.a, n)};
}

/// f+ from f's Taylor coefficients (at least D + buffer + 1 of them).
inline FplusResult fplus_coeffs(const std::vector<cplx>& fc, const BSpec& spec, int D = kFplusDegree,
                                double tail_tol = 1e-8) {
  const int top = D + kToeplitzBuffer;
  const int L = static_cast<int>(fc.size()) - 1;
  auto [bc, ac] = symbol_coeffs(spec, std::max(L, top));
  auto g = toeplitz_coanalytic_apply(bc, fc, top);
  auto sol = toeplitz_coanalytic_solve(ac, g, D, tail_tol);
  FplusResult r;
  r.fplus = std::move(sol.x);
  r.tail = sol.tail;
  double s = 0.0;
  for (cplx v : fc) s += std::norm(v);
  r.f_norm = std::sqrt(s);
  s = 0.0;
  for (cplx v : r.fplus) s += std::norm(v);
  r.fplus_norm = std::sqrt(s);
  r.norm = std::sqrt(r.f_norm * r.f_norm + r.fplus_norm * r.fplus_norm);
  return r;
}

/// f+ with T_conj(b) f = T_conj(a) f+ and ||f||_b^2 = ||f||_2^2 + ||f+||_2^2.
/// ||f||_2 is taken by quadrature so slowly decaying coefficient tails of f
/// do not bias it.
inline FplusResult fplus(const FnExpr& f, const BSpec& spec, int D = kFplusDegree, double tail_tol = 1e-8) {
  const int L = 2 * (D + kToeplitzBuffer) + 64;
  auto fc = taylor_coeffs(f, L);
  FplusResult r = fplus_coeffs(fc, spec, D, tail_tol);
  r.f_norm = h2_norm(f);
  r.norm = std::sqrt(r.f_norm * r.f_norm + r.fplus_norm * r.fplus_norm);
  return r;
}

inline double hb_norm(const FnExpr& f, const BSpec& spec, int D = kFplusDegree) { return fplus(f, spec, D).norm; }

/// <f, g>_b = <f, g>_2 + <f+, g+>_2
inline cplx hb_inner(const FnExpr& f, const FnExpr& g, const BSpec& spec, int D = kFplusDegree) {
  auto fp = fplus(f, spec, D), gp = fplus(g, spec, D);
  cplx s = h2_inner(f, g);
  for (size_t k = 0; k < fp.fplus.size(); ++k) s += fp.fplus[k] * std::conj(gp.fplus[k]);
  return s;
}

// ---------------------------------------------------------------------------
// E0(b)

struct E0Report {
  bool contains = false;
  double blaschke_term = 0.0;
  double atomic_term = 0.0;
  double log_term = 0.0;
  bool atomic_diverges = false;
  bool log_diverges = false;
  std::string detail;
};

namespace detail {

/// Integral of |log|h|| / |zeta - xi|^2 dm with an excluded arc of shrinking
/// radius around zeta: +1 diverges, 0 converges, -1 undecided.
inline int log_term_behaviour(const FnExpr& h, cplx zeta, double& value) {
  std::vector<cplx> zeros = boundary_zeros(h);
  zeros.push_back(zeta);
  std::vector<double> vals;
  for (int L : {12, 16, 20, 24, 28}) {
    AdaptedRuleOptions opt;
    opt.grading_levels = L;
    auto rule = adapted_rule({}, zeros, opt);
    double s = 0.0;
    for (size_t m = 0; m < rule->size(); ++m) {
      cplx xi = rule->nodes[m];
      double a = std::abs(eval(h, xi));
      double lg = a > 0.0 ? std::abs(std::log(a)) : 0.0;
      s += rule->weights[m] * lg / std::norm(zeta - xi);
    }
    vals.push_back(s);
  }
  value = vals.back();
  const size_t n = vals.size();
  double d1 = vals[n - 1] - vals[n - 2], d0 = vals[n - 2] - vals[n - 3];
  if (!std::isfinite(value)) return 1;
  if (d1 > 1.0 && d1 >= 0.9 * d0) return 1;
  if (std::abs(d1) <= 1e-6 * std::max(1.0, std::abs(value))) return 0;
  return -1;
}

}  // namespace detail

inline E0Report e0_contains(const BSpec& spec, cplx zeta) {
  if (std::abs(std::abs(zeta) - 1.0) > 1e-10) fail(Errc::DomainError, "E0 test point must be unimodular");
  E0Report r;
  switch (spec.kind) {
    case BKind::RationalNonInner: {
      for (const auto& n : spec.nodes)
        if (std::abs(n.zeta - zeta) < 1e-8) r.contains = true;
      r.detail = r.contains ? "boundary root of the mate" : "not a boundary root of the mate";
      return r;
    }
    case BKind::HalfInner: {
      // b = (1+I)/2 has an angular derivative at zeta iff I(zeta) = 1 and I
      // has one there
      try {
        auto lim = nontangential_limit(spec.I, zeta);
        cplx d = boundary_value(derivative(spec.I), zeta);
        r.contains = lim.status == LimitStatus::Converged && std::abs(lim.value - 1.0) < 1e-6 && std::isfinite(std::abs(d));
        r.detail = "I(zeta) = " + std::to_string(lim.value.real()) + "+" + std::to_string(lim.value.imag()) + "i";
      } catch (const Error& e) {
        r.contains = false;
        r.detail = e.what();
      }
      return r;
    }
    case BKind::Factored: {
      for (cplx a : spec.blaschke_zeros) r.blaschke_term += (1.0 - std::norm(a)) / std::norm(zeta - a);
      for (const auto& at : spec.atoms) {
        double d = std::norm(zeta - at.xi);
        if (d < 1e-24) {
          r.atomic_diverges = true;
          r.atomic_term = std::numeric_limits<double>::infinity();
        } else if (!r.atomic_diverges) {
          r.atomic_term += at.mass / d;
        }
      }
      int beh = detail::log_term_behaviour(spec.outer_part, zeta, r.log_term);
      if (beh < 0) fail(Errc::Inconclusive, "log term neither converges nor diverges within the refinement budget");
      r.log_diverges = beh > 0;
      if (r.log_diverges) r.log_term = std::numeric_limits<double>::infinity();
      r.contains = !r.atomic_diverges && !r.log_diverges;
      r.detail = r.atomic_diverges ? "atomic term diverges" : (r.log_diverges ? "log term diverges" : "all terms finite");
      return r;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// reproducing kernels

/// k_lambda^b for |lambda| < 1, or the boundary kernel at zeta in E0(b).
inline FnExpr kernel_kb(const BSpec& spec, cplx point) {
  if (std::abs(point) > 1.0 + 1e-12) fail(Errc::DomainError, "kernel point outside the closed disc");
  if (std::abs(point) < 1.0 - 1e-12) return hb_kernel_expr(spec.b, point, detail::eval(spec.b, point), fn::KernelKind::Hb);
  if (!e0_contains(spec, point).contains) fail(Errc::NotInE0, "boundary point is not in E0(b)");
  return hb_kernel_expr(spec.b, point, boundary_value(spec.b, point), fn::KernelKind::Hb);
}

}  // namespace hb
