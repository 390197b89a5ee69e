#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <vector>

#include "hb/error.hpp"

namespace hb {

inline constexpr double kPi = std::numbers::pi;

/// Gauss-Legendre nodes/weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> x, w;

  explicit GaussLegendre(int n) : x(static_cast<size_t>(n)), w(static_cast<size_t>(n)) {
    for (int i = 0; i < n; ++i) {
      double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[static_cast<size_t>(i)] = z;
      w[static_cast<size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }

  static const GaussLegendre& g16() {
    static const GaussLegendre rule(16);
    return rule;
  }
};

/// Quadrature rule for the normalised Lebesgue measure dm on the circle.
/// Uniform rules are the M-th roots of unity (optionally rotated by half a
/// step); adapted rules concentrate nodes near essential singularities and
/// boundary zeros.
struct CircleRule {
  std::vector<cplx> nodes;
  std::vector<double> weights;
  bool uniform = false;
  size_t M = 0;
  double rotation = 0.0;
  /// Measure of the part of the circle not covered by the nodes.
  double omitted_measure = 0.0;
  std::vector<size_t> perturbed;

  size_t size() const { return nodes.size(); }
  double total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

using RulePtr = std::shared_ptr<const CircleRule>;

inline bool is_power_of_two(size_t m) { return m != 0 && (m & (m - 1)) == 0; }

/// M equispaced points, rotated by `half_step ? pi/M : 0`.
inline RulePtr uniform_rule(size_t M, bool half_step = false) {
  if (!is_power_of_two(M)) fail(Errc::InvalidArgument, "grid size must be a power of two");
  auto r = std::make_shared<CircleRule>();
  r->uniform = true;
  r->M = M;
  r->rotation = half_step ? kPi / static_cast<double>(M) : 0.0;
  r->nodes.resize(M);
  r->weights.assign(M, 1.0 / static_cast<double>(M));
  for (size_t m = 0; m < M; ++m)
    r->nodes[m] = std::polar(1.0, 2.0 * kPi * static_cast<double>(m) / static_cast<double>(M) + r->rotation);
  return r;
}

/// A point mass of a singular measure on the circle.
struct Atom {
  cplx xi;
  double mass;
};

enum class TailMode { Average, Omit };

struct AdaptedRuleOptions {
  /// Largest Fourier frequency the integrands are expected to carry.
  int bandwidth = 64;
  /// Cayley coordinate where each atom neighbourhood starts.
  double u_start = 8.0;
  /// Cayley coordinate where explicit panels stop (per atom; empty = u_max).
  std::vector<double> u_end;
  double u_max = 1e4;
  TailMode tail = TailMode::Average;
  int tail_nodes = 32;
  /// Dyadic grading levels next to boundary zeros.
  int grading_levels = 40;
  /// Scale factor on the number of panels (refinement studies).
  double density = 1.0;
};

namespace detail {

inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0) a += 2.0 * kPi;
  return a;
}

inline void push_panel(CircleRule& r, double a, double b, auto&& map) {
  const auto& gl = GaussLegendre::g16();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (size_t i = 0; i < gl.x.size(); ++i) {
    double t = mid + half * gl.x[i];
    auto [z, jac] = map(t);
    r.nodes.push_back(z);
    r.weights.push_back(half * gl.w[i] * jac);
  }
}

}  // namespace detail

/// Composite rule: Cayley-mapped panels around every atom (where the inner
/// factor exp(-w(xi+z)/(xi-z)) oscillates without bound), dyadically graded
/// panels around each boundary zero, and oscillation-adapted angular panels
/// elsewhere.
inline RulePtr adapted_rule(const std::vector<Atom>& atoms, const std::vector<cplx>& zeros,
                            const AdaptedRuleOptions& opt) {
  using detail::wrap_angle;
  auto rule = std::make_shared<CircleRule>();
  CircleRule& r = *rule;

  struct Special {
    double theta;
    double radius;
    int atom = -1;
  };
  std::vector<Special> sp;
  for (size_t j = 0; j < atoms.size(); ++j) sp.push_back({wrap_angle(std::arg(atoms[j].xi)), 0.0, static_cast<int>(j)});
  for (cplx z : zeros) sp.push_back({wrap_angle(std::arg(z)), 0.0, -1});
  std::sort(sp.begin(), sp.end(), [](const Special& a, const Special& b) { return a.theta < b.theta; });
  // merge coincident special points (an atom wins over a zero)
  std::vector<Special> merged;
  for (const auto& s : sp) {
    if (!merged.empty() && std::abs(s.theta - merged.back().theta) < 1e-12) {
      if (s.atom >= 0) merged.back().atom = s.atom;
      continue;
    }
    merged.push_back(s);
  }
  if (merged.size() > 1 && 2.0 * kPi - merged.back().theta + merged.front().theta < 1e-12) merged.pop_back();
  sp = merged;

  const double delta_atom = 2.0 * std::atan(1.0 / opt.u_start);
  for (size_t i = 0; i < sp.size(); ++i) {
    double gap = 2.0 * kPi;
    if (sp.size() > 1) {
      double prev = sp[(i + sp.size() - 1) % sp.size()].theta, next = sp[(i + 1) % sp.size()].theta;
      gap = std::min(wrap_angle(sp[i].theta - prev), wrap_angle(next - sp[i].theta));
    }
    double cap = sp[i].atom >= 0 ? delta_atom : 0.1;
    sp[i].radius = std::min(cap, 0.4 * gap);
  }

  auto oscillation_rate = [&](double theta) {
    double rate = opt.bandwidth + 1.0;
    for (const auto& a : atoms) {
      double s = std::sin(0.5 * (theta - std::arg(a.xi)));
      rate += a.mass / (2.0 * std::max(s * s, 1e-300));
    }
    return rate;
  };
  auto circle_map = [](double t) { return std::pair<cplx, double>{std::polar(1.0, t), 1.0 / (2.0 * kPi)}; };

  auto arc = [&](double a, double b) {
    double t = a;
    while (t < b - 1e-15) {
      double rate = std::max(oscillation_rate(t), oscillation_rate(std::min(b, t + 0.05)));
      double w = std::min({0.2, 6.0 / (rate * opt.density), b - t});
      // look ahead so a panel never straddles a fast region
      double rate2 = oscillation_rate(std::min(b, t + w));
      if (rate2 > rate) w = std::min(w, 6.0 / (rate2 * opt.density));
      detail::push_panel(r, t, t + w, circle_map);
      t += w;
    }
  };

  if (sp.empty()) {
    arc(0.0, 2.0 * kPi);
    return rule;
  }

  for (size_t i = 0; i < sp.size(); ++i) {
    const Special& s = sp[i];
    const Special& nx = sp[(i + 1) % sp.size()];
    if (s.atom >= 0) {
      const Atom& at = atoms[static_cast<size_t>(s.atom)];
      const double w = std::max(at.mass, 1e-3);
      const double u0 = 1.0 / std::tan(0.5 * s.radius);
      double u1 = opt.u_max;
      if (static_cast<size_t>(s.atom) < opt.u_end.size()) u1 = opt.u_end[static_cast<size_t>(s.atom)];
      u1 = std::max(u1, u0);
      const cplx xi = at.xi / std::abs(at.xi);
      for (int side : {+1, -1}) {
        auto umap = [&](double u) {
          double su = side * u;
          cplx z = xi * cplx(su, 1.0) / cplx(su, -1.0);
          return std::pair<cplx, double>{z, 1.0 / (kPi * (1.0 + u * u))};
        };
        double u = u0;
        while (u < u1 - 1e-12) {
          double rate = w + 2.0 * opt.bandwidth / (1.0 + u * u) + 1.0;
          double h = std::min({4.0, 6.0 / (rate * opt.density), u1 - u});
          detail::push_panel(r, u, u + h, umap);
          u += h;
        }
        const double tail_mass = (0.5 * kPi - std::atan(u1)) / kPi;
        if (opt.tail == TailMode::Average && opt.tail_nodes > 0) {
          const double period = 2.0 * kPi / w;
          for (int k = 0; k < opt.tail_nodes; ++k) {
            double uu = u1 + (k + 0.5) / opt.tail_nodes * period;
            r.nodes.push_back(umap(uu).first);
            r.weights.push_back(tail_mass / opt.tail_nodes);
          }
        } else {
          r.omitted_measure += tail_mass;
        }
      }
    } else {
      for (int side : {+1, -1}) {
        double outer = s.radius;
        for (int l = 0; l < opt.grading_levels; ++l) {
          double inner = outer * 0.5;
          if (side > 0)
            detail::push_panel(r, s.theta + inner, s.theta + outer, circle_map);
          else
            detail::push_panel(r, s.theta - outer, s.theta - inner, circle_map);
          outer = inner;
        }
        r.omitted_measure += outer / (2.0 * kPi);
      }
    }
    double a = s.theta + s.radius;
    double b = nx.theta - nx.radius;
    if (sp.size() == 1 || b <= a) b += 2.0 * kPi;
    if (b > a) arc(a, b);
  }
  return rule;
}

}  // namespace hb
