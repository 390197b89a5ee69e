#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hb/error.hpp"

namespace hb {

/// Polynomial with complex coefficients, c[0] + c[1] z + ... .  Coefficients
/// are kept exactly as given; only trailing exact zeros are dropped.
class Poly {
 public:
  Poly() = default;
  Poly(std::initializer_list<cplx> c) : c_(c) { trim(); }
  explicit Poly(std::vector<cplx> c) : c_(std::move(c)) { trim(); }

  static Poly constant(cplx v) { return Poly(std::vector<cplx>{v}); }
  static Poly monomial(int k, cplx v = 1.0) {
    std::vector<cplx> c(static_cast<size_t>(k) + 1, 0.0);
    c.back() = v;
    return Poly(std::move(c));
  }
  /// Monic polynomial with the given roots.
  static Poly from_roots(std::span<const cplx> roots) {
    Poly p = constant(1.0);
    for (cplx r : roots) p = p * Poly{-r, 1.0};
    return p;
  }

  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<cplx>& coeffs() const { return c_; }
  cplx operator[](int k) const {
    return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[static_cast<size_t>(k)] : cplx(0.0);
  }

  cplx operator()(cplx z) const {
    cplx acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  Poly derivative(int order = 1) const {
    Poly p = *this;
    for (int o = 0; o < order; ++o) {
      if (p.c_.size() <= 1) return Poly{};
      std::vector<cplx> d(p.c_.size() - 1);
      for (size_t k = 1; k < p.c_.size(); ++k) d[k - 1] = p.c_[k] * static_cast<double>(k);
      p = Poly(std::move(d));
    }
    return p;
  }

  /// p(z^k)
  Poly compose_power(int k) const {
    if (k == 1 || c_.empty()) return *this;
    std::vector<cplx> out(static_cast<size_t>(degree() * k) + 1, 0.0);
    for (size_t j = 0; j < c_.size(); ++j) out[j * static_cast<size_t>(k)] = c_[j];
    return Poly(std::move(out));
  }

  /// Coefficient-wise conjugate reversal z^d conj(p(1/conj z)).
  Poly reflected(int d) const {
    std::vector<cplx> out(static_cast<size_t>(d) + 1, 0.0);
    for (int k = 0; k <= std::min(d, degree()); ++k) out[static_cast<size_t>(d - k)] = std::conj((*this)[k]);
    return Poly(std::move(out));
  }

  /// H^2 norm, i.e. the l^2 norm of the coefficients.
  double h2_norm() const {
    double s = 0.0;
    for (cplx v : c_) s += std::norm(v);
    return std::sqrt(s);
  }
  double max_abs_coeff() const {
    double m = 0.0;
    for (cplx v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  Poly& operator+=(const Poly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
    for (size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
    trim();
    return *this;
  }
  Poly& operator-=(const Poly& o) { return *this += o * cplx(-1.0); }
  Poly& operator*=(cplx s) {
    for (auto& v : c_) v *= s;
    trim();
    return *this;
  }

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, cplx s) { return a *= s; }
  friend Poly operator*(cplx s, Poly a) { return a *= s; }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly{};
    std::vector<cplx> out(a.c_.size() + b.c_.size() - 1, 0.0);
    for (size_t i = 0; i < a.c_.size(); ++i)
      for (size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
    return Poly(std::move(out));
  }

  /// Euclidean division: *this = q * d + r with deg r < deg d.
  std::pair<Poly, Poly> divmod(const Poly& d) const {
    if (d.is_zero()) fail(Errc::InvalidArgument, "polynomial division by zero");
    std::vector<cplx> r = c_;
    const int dd = d.degree();
    if (degree() < dd) return {Poly{}, *this};
    std::vector<cplx> q(static_cast<size_t>(degree() - dd) + 1, 0.0);
    const cplx lead = d.c_.back();
    for (int k = degree() - dd; k >= 0; --k) {
      cplx t = r[static_cast<size_t>(k + dd)] / lead;
      q[static_cast<size_t>(k)] = t;
      for (int j = 0; j <= dd; ++j) r[static_cast<size_t>(k + j)] -= t * d.c_[static_cast<size_t>(j)];
    }
    r.resize(static_cast<size_t>(dd));
    return {Poly(std::move(q)), Poly(std::move(r))};
  }

  /// Roots from the companion matrix, each polished by a few Newton steps.
  std::vector<cplx> roots() const {
    const int d = degree();
    if (d < 1) return {};
    if (d == 1) return {-c_[0] / c_[1]};
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) comp(i, d - 1) = -c_[static_cast<size_t>(i)] / c_.back();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    std::vector<cplx> out(static_cast<size_t>(d));
    const Poly dp = derivative();
    for (int i = 0; i < d; ++i) {
      cplx z = es.eigenvalues()(i);
      for (int it = 0; it < 3; ++it) {
        cplx fz = (*this)(z), dz = dp(z);
        if (std::abs(dz) < 1e-300) break;
        cplx step = fz / dz;
        if (!(std::abs(step) < 1e-3 * (1.0 + std::abs(z)))) break;
        z -= step;
      }
      out[static_cast<size_t>(i)] = z;
    }
    return out;
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == cplx(0.0)) c_.pop_back();
  }
  std::vector<cplx> c_;
};

/// Truncated power-series helpers on coefficient vectors of fixed length.
namespace series {

inline std::vector<cplx> mul(const std::vector<cplx>& a, const std::vector<cplx>& b, size_t n) {
  std::vector<cplx> out(n, 0.0);
  for (size_t i = 0; i < std::min(n, a.size()); ++i) {
    if (a[i] == cplx(0.0)) continue;
    for (size_t j = 0; j < b.size() && i + j < n; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

/// Series of num/den; den[0] must be nonzero.
inline std::vector<cplx> div(const std::vector<cplx>& num, const std::vector<cplx>& den, size_t n) {
  if (den.empty() || den[0] == cplx(0.0)) fail(Errc::EvalAtSingularity, "series division by a function vanishing at 0");
  std::vector<cplx> out(n, 0.0);
  for (size_t k = 0; k < n; ++k) {
    cplx acc = k < num.size() ? num[k] : cplx(0.0);
    const size_t jmax = std::min(k, den.size() - 1);
    for (size_t j = 1; j <= jmax; ++j) acc -= den[j] * out[k - j];
    out[k] = acc / den[0];
  }
  return out;
}

/// exp of a series via k F_k = sum_j j G_j F_{k-j}.
inline std::vector<cplx> exp(const std::vector<cplx>& g, size_t n) {
  std::vector<cplx> out(n, 0.0);
  if (n == 0) return out;
  out[0] = std::exp(g.empty() ? cplx(0.0) : g[0]);
  for (size_t k = 1; k < n; ++k) {
    cplx acc = 0.0;
    for (size_t j = 1; j <= k && j < g.size(); ++j) acc += static_cast<double>(j) * g[j] * out[k - j];
    out[k] = acc / static_cast<double>(k);
  }
  return out;
}

inline std::vector<cplx> of(const Poly& p, size_t n) {
  std::vector<cplx> out(n, 0.0);
  for (size_t k = 0; k < n && static_cast<int>(k) <= p.degree(); ++k) out[k] = p[static_cast<int>(k)];
  return out;
}

}  // namespace series

}  // namespace hb
