#include <gtest/gtest.h>

#include <cmath>

#include "hb/cyclicity.hpp"

using namespace hb;

namespace {
const cplx I1(0.0, 1.0);
const double kE1 = std::exp(-1.0);

std::vector<int> step_degrees(int hi, int step) {
  std::vector<int> d;
  for (int n = 0; n <= hi; n += step) d.push_back(n);
  return d;
}

FnExpr half_one_plus_zk(int k) {
  std::vector<cplx> c(static_cast<size_t>(k) + 1, 0.0);
  c[0] = 0.5;
  c[static_cast<size_t>(k)] = 0.5;
  return poly(Poly(c));
}

void expect_poly_near(const Poly& p, const Poly& q, double tol) {
  const int d = std::max(p.degree(), q.degree());
  for (int i = 0; i <= d; ++i) {
    cplx a = i <= p.degree() ? p[i] : 0.0;
    cplx b = i <= q.degree() ? q[i] : 0.0;
    EXPECT_NEAR(std::abs(a - b), 0.0, tol) << "coefficient " << i;
  }
}

void expect_nonincreasing(const std::vector<double>& r) {
  for (size_t i = 1; i < r.size(); ++i) EXPECT_LE(r[i], r[i - 1] * (1.0 + 1e-9) + 1e-11) << "index " << i;
}

struct Case {
  const char* name;
  FnExpr b;
  FnExpr f;
};

std::vector<Case> corpus() {
  std::vector<std::pair<const char*, FnExpr>> bs = {
      {"(1+z)/2", half_one_plus_zk(1)},
      {"(1-z^2)/2", poly(Poly{0.5, 0.0, -0.5})},
      {"(1+z^3)/2", half_one_plus_zk(3)},
      {"mobius", rational(Poly{0.25, 0.25}, Poly{1.0, -0.3})},
      {"(1+z)^2/4", poly(Poly{0.25, 0.5, 0.25})},
  };
  std::vector<std::pair<const char*, FnExpr>> fs = {
      {"2+z", poly(Poly{2.0, 1.0})},          {"1+z", poly(Poly{1.0, 1.0})},
      {"z-1", poly(Poly{-1.0, 1.0})},         {"z-0.5", poly(Poly{-0.5, 1.0})},
      {"z-i", poly(Poly{-I1, 1.0})},          {"k", h2_kernel(cplx(0.3, 0.4))},
  };
  std::vector<Case> out;
  for (const auto& [bn, b] : bs)
    for (const auto& [fname, f] : fs) out.push_back({fname, b, f});
  return out;
}
}  // namespace

TEST(HermiteR, Examples) {
  expect_poly_near(hermite_r({{1.0, 1}}, Poly::constant(2.0)), Poly::constant(0.5), 1e-14);
  Poly r = hermite_r({{I1, 1}, {-I1, 1}}, Poly{0.0, 1.0});
  expect_poly_near(r, Poly{0.0, -1.0}, 1e-14);
  auto [q, rem] = (r * Poly{0.0, 1.0} - Poly::constant(1.0)).divmod(Poly{1.0, 0.0, 1.0});
  expect_poly_near(q, Poly::constant(-1.0), 1e-14);
  EXPECT_LT(rem.max_abs_coeff(), 1e-14);
  // r = 1/3 - (z-1)/9
  expect_poly_near(hermite_r({{1.0, 2}}, Poly{2.0, 1.0}), Poly{4.0 / 9.0, -1.0 / 9.0}, 1e-14);
}

TEST(HermiteR, NodeZero) {
  try {
    hermite_r({{1.0, 1}}, Poly{-1.0, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NodeZero);
  }
}

TEST(NecessaryConditions, RationalExamples) {
  BSpec s = mate(half_one_plus_zk(1));
  auto r1 = necessary_conditions(poly(Poly{1.0, 1.0}), s);
  EXPECT_EQ(r1.outer, Check::Pass);
  EXPECT_EQ(r1.nonvanishing, Check::Pass);
  ASSERT_EQ(r1.points.size(), 1u);
  EXPECT_NEAR(std::abs(r1.points[0].value - 2.0), 0.0, 1e-12);
  EXPECT_TRUE(r1.necessary_hold());

  auto r2 = necessary_conditions(poly(Poly{-1.0, 1.0}), s);
  EXPECT_EQ(r2.outer, Check::Pass);
  EXPECT_EQ(r2.nonvanishing, Check::Fail);
  EXPECT_FALSE(r2.necessary_hold());

  auto r3 = necessary_conditions(identity(), s);
  EXPECT_EQ(r3.outer, Check::Fail);
  EXPECT_FALSE(r3.necessary_hold());
}

TEST(NecessaryConditions, HalfInnerAndFactored) {
  auto h = necessary_conditions(poly(Poly{2.0, 1.0}), half_inner(singular_delta1()));
  EXPECT_EQ(h.outer, Check::Pass);
  EXPECT_EQ(h.nonvanishing, Check::Inconclusive);
  auto z = necessary_conditions(poly(Poly{2.0, 1.0}), half_inner(poly(Poly::monomial(2))));
  EXPECT_EQ(z.nonvanishing, Check::Pass);
  EXPECT_EQ(z.points.size(), 2u);
  auto zf = necessary_conditions(poly(Poly{1.0, 0.0, -1.0}), half_inner(poly(Poly::monomial(2))));
  EXPECT_EQ(zf.nonvanishing, Check::Fail);

  // b(-1) = 0 keeps -1 out of E0(b)
  BSpec fs = factored(half_one_plus_zk(1), {}, {{1.0, 1.0}});
  EXPECT_EQ(necessary_conditions(poly(Poly{-1.0, 1.0}), fs).nonvanishing, Check::Pass);
  EXPECT_EQ(necessary_conditions(poly(Poly{1.0, 1.0}), fs).nonvanishing, Check::Pass);
  BSpec gs = factored(poly(Poly{0.5, 0.0, -0.5}), {0.5}, {});
  auto gi = necessary_conditions(poly(Poly{-I1, 1.0}), gs);
  EXPECT_EQ(gi.nonvanishing, Check::Fail);
  ASSERT_EQ(gi.points.size(), 1u);
  EXPECT_NEAR(std::abs(gi.points[0].zeta - I1), 0.0, 1e-8);
}

TEST(Oracles, RationalExamples) {
  BSpec a = mate(half_one_plus_zk(1));
  EXPECT_EQ(is_cyclic_rational(poly(Poly{1.0, 1.0}), a), Cyclicity::Cyclic);
  EXPECT_EQ(is_cyclic_rational(poly(Poly{-1.0, 1.0}), a), Cyclicity::NotCyclic);
  EXPECT_EQ(is_cyclic_rational(poly(Poly{-0.5, 1.0}), a), Cyclicity::NotCyclic);
  EXPECT_EQ(is_cyclic_rational(constant(1.0), a), Cyclicity::Cyclic);
  BSpec b = mate(poly(Poly{0.5, 0.0, -0.5}));
  EXPECT_EQ(is_cyclic_rational(poly(Poly{-1.0, 1.0}), b), Cyclicity::Cyclic);
  EXPECT_EQ(is_cyclic_rational(poly(Poly{-I1, 1.0}), b), Cyclicity::NotCyclic);
  EXPECT_EQ(is_cyclic_rational(poly(Poly{1.0, 0.0, 1.0}), b), Cyclicity::NotCyclic);
  try {
    is_cyclic_rational(constant(1.0), half_inner(singular_delta1()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidArgument);
  }
}

TEST(Oracles, HolomorphicClosure) {
  BSpec fs = factored(half_one_plus_zk(1), {}, {{1.0, 1.0}});
  EXPECT_EQ(is_cyclic_hol_closure(poly(Poly{-1.0, 1.0}), fs), Cyclicity::Cyclic);
  EXPECT_EQ(is_cyclic_hol_closure(poly(Poly{1.0, 1.0}), fs), Cyclicity::Cyclic);
  BSpec gs = factored(poly(Poly{0.5, 0.0, -0.5}), {0.5}, {});
  EXPECT_EQ(is_cyclic_hol_closure(poly(Poly{-I1, 1.0}), gs), Cyclicity::NotCyclic);
  EXPECT_EQ(is_cyclic_hol_closure(poly(Poly{-1.0, 1.0}), gs), Cyclicity::Cyclic);
  EXPECT_EQ(is_cyclic_hol_closure(poly(Poly{-0.5, 1.0}), fs), Cyclicity::NotCyclic);
  BSpec r = mate(poly(Poly{0.5, 0.0, -0.5}));
  for (auto f : {poly(Poly{-1.0, 1.0}), poly(Poly{-I1, 1.0}), poly(Poly{2.0, 1.0}), poly(Poly{1.0, 0.0, 1.0})})
    EXPECT_EQ(is_cyclic_hol_closure(f, r), is_cyclic_rational(f, r));
}

TEST(Classify, Examples) {
  auto deg = step_degrees(256, 8);
  std::vector<double> slow, flat, geo, log_decay;
  for (int n : deg) {
    slow.push_back(1.0 / std::sqrt(n + 2.0));
    flat.push_back(0.7 + 0.3 * std::exp(-n / 4.0));
    geo.push_back(std::pow(0.5, n));
    log_decay.push_back(1.0 / std::log(n + 3.0));
  }
  auto v1 = classify(deg, slow);
  EXPECT_EQ(v1.kind, VerdictKind::Converging);
  EXPECT_NEAR(v1.beta, 0.5, 0.05);
  auto v2 = classify(deg, flat);
  EXPECT_EQ(v2.kind, VerdictKind::Stalled);
  EXPECT_NEAR(v2.floor, 0.7, 1e-9);
  EXPECT_EQ(classify(deg, geo).kind, VerdictKind::Converging);
  EXPECT_EQ(classify(deg, log_decay).kind, VerdictKind::Inconclusive);
}

TEST(CertifyRational, ClosedFormResidual) {
  // b = (1+z)/2, f = 1+z: r = 1/2, residual 1/(2 sqrt(n+2))
  auto deg = step_degrees(64, 1);
  Certificate c = certify_rational(poly(Poly{1.0, 1.0}), mate(half_one_plus_zk(1)), deg);
  EXPECT_EQ(c.kind, CertKind::Rational);
  expect_poly_near(c.r, Poly::constant(0.5), 1e-14);
  ASSERT_EQ(c.residuals.size(), deg.size());
  for (size_t i = 0; i < deg.size(); ++i) EXPECT_NEAR(c.residuals[i], 0.5 / std::sqrt(deg[i] + 2.0), 1e-8) << deg[i];
  EXPECT_EQ(c.verdict.kind, VerdictKind::Converging);
}

TEST(CertifyRational, ConstantAndStalled) {
  Certificate one = certify_rational(constant(1.0), mate(half_one_plus_zk(1)), {0, 4, 8});
  for (double r : one.residuals) EXPECT_LT(r, 1e-12);
  // z vanishes nowhere on the nodes +-i but is not outer
  Certificate s = certify_rational(identity(), mate(poly(Poly{0.5, 0.0, -0.5})), step_degrees(128, 8));
  for (double r : s.residuals) EXPECT_NEAR(r, 1.0, 1e-10);
  EXPECT_EQ(s.verdict.kind, VerdictKind::Stalled);
  EXPECT_NEAR(s.verdict.floor, 1.0, 1e-10);
}

TEST(CertifyRational, MatchesDirectLeastSquares) {
  BSpec s = mate(poly(Poly{0.5, 0.0, -0.5}));
  FnExpr f = poly(Poly{2.0, 1.0, 0.0, 0.3});
  std::vector<int> deg = {0, 1, 2, 5, 10, 20};
  Certificate c = certify_rational(f, s, deg);
  RationalDecomp dec = decompose_rational(f, s);
  FnExpr target = scale(-1.0, poly(c.r) * dec.ftilde + poly(c.q));
  for (size_t i = 0; i < deg.size(); ++i)
    EXPECT_NEAR(c.residuals[i], poly_ls_approx(f, target, deg[i]).residual, 1e-10) << deg[i];
  Certificate d = certify_direct(f, s, deg);
  expect_nonincreasing(d.residuals);
  EXPECT_LT(d.residuals.back(), 1e-2);
}

TEST(CertifyRational, NodeZeroFallsBackToDirect) {
  BSpec s = mate(half_one_plus_zk(1));
  FnExpr f = poly(Poly{-1.0, 1.0});
  Certificate c = certify(f, s, step_degrees(64, 8));
  EXPECT_EQ(c.kind, CertKind::Direct);
  double w = noncyclicity_witness(f, s, 1.0);
  EXPECT_NEAR(w, std::sqrt(2.0), 1e-10);
  for (double r : c.residuals) EXPECT_NEAR(r, w, 1e-8);
  EXPECT_EQ(c.verdict.kind, VerdictKind::Stalled);
}

TEST(CertifyClark, PowerInner) {
  // b = (1+z)/2 seen as (1+I)/2 with I = z
  ClarkData d = clark_atoms(identity());
  auto deg = step_degrees(32, 1);
  Certificate c = certify_clark(poly(Poly{1.0, 1.0}), d, deg);
  EXPECT_EQ(c.kind, CertKind::Clark);
  for (size_t i = 0; i < deg.size(); ++i) EXPECT_NEAR(c.residuals[i], 1.0 / std::sqrt(deg[i] + 2.0), 1e-8) << deg[i];
  Certificate one = certify_clark(constant(1.0), d, {0, 3});
  for (double r : one.residuals) EXPECT_LT(r, 1e-10);
  try {
    certify_clark(poly(Poly{-1.0, 1.0}), d, {0, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NodeZero);
  }
}

TEST(CertifyClark, KernelOfB) {
  FnExpr S = singular_delta1();
  FnExpr b = scale(0.5, constant(1.0) + S);
  FnExpr k = hb_kernel_expr(b, 0.0, 0.5 * (1.0 + kE1), fn::KernelKind::Hb);
  Certificate c = certify(k, half_inner(S), step_degrees(64, 8));
  EXPECT_EQ(c.kind, CertKind::Clark);
  expect_nonincreasing(c.residuals);
  EXPECT_LT(c.residuals.back(), c.residuals.front());
  EXPECT_LT(c.r_tail_estimate, 1e-2);
}

TEST(CertifyDirect, FactoredSymbol) {
  BSpec fs = factored(half_one_plus_zk(1), {}, {{1.0, 1.0}});
  Certificate c = certify(poly(Poly{1.0, 1.0}), fs, step_degrees(32, 8));
  EXPECT_EQ(c.kind, CertKind::Direct);
  expect_nonincreasing(c.residuals);
  EXPECT_LT(c.residuals.back(), 0.5 * c.residuals.front());
  BSpec gs = factored(poly(Poly{0.5, 0.0, -0.5}), {0.5}, {});
  FnExpr f = poly(Poly{-I1, 1.0});
  Certificate n = certify(f, gs, step_degrees(32, 8));
  double w = noncyclicity_witness(f, gs, I1);
  EXPECT_GT(w, 0.0);
  for (double r : n.residuals) EXPECT_GE(r, w - 1e-8);
}

TEST(SufficientConditions, KernelOfB) {
  FnExpr S = singular_delta1();
  FnExpr b = scale(0.5, constant(1.0) + S);
  FnExpr k = hb_kernel_expr(b, 0.0, 0.5 * (1.0 + kE1), fn::KernelKind::Hb);
  auto r = thm5_conditions(k, clark_atoms(S));
  EXPECT_EQ(r.cond_a, Check::Pass);
  EXPECT_EQ(r.cond_b, Check::Pass);
  EXPECT_EQ(r.cond_c, Check::Pass);
  EXPECT_TRUE(r.c_bound_rigorous);
  EXPECT_NEAR(r.c_lower_bound, 0.5 * (1.0 - kE1), 1e-12);
  EXPECT_TRUE(r.thm5_hold());
  EXPECT_LT(r.g2_mismatch, 1e-6);
}

TEST(SufficientConditions, ProductWithModelKernel) {
  FnExpr S = singular_delta1();
  FnExpr f = (constant(1.0) + S) * ki_kernel(S, 0.0);
  auto r = thm5_conditions(f, clark_atoms(S));
  EXPECT_EQ(r.cond_a, Check::Pass);
  EXPECT_EQ(r.cond_b, Check::Pass);
  EXPECT_EQ(r.cond_c, Check::Pass);
  EXPECT_NEAR(r.c_lower_bound, 1.0 - kE1, 1e-12);
  for (const auto& p : r.points) EXPECT_GE(std::abs(p.value), 1.0 - kE1 - 1e-8);
}

TEST(SufficientConditions, VanishingAtAtoms) {
  FnExpr S = singular_delta1();
  auto r = thm5_conditions(constant(1.0) - S, clark_atoms(S));
  EXPECT_EQ(r.cond_c, Check::Fail);
  EXPECT_EQ(r.nonvanishing, Check::Fail);
  EXPECT_FALSE(r.thm5_hold());
}

TEST(Witness, Examples) {
  BSpec s = mate(poly(Poly{0.5, 0.0, -0.5}));
  double w = noncyclicity_witness(poly(Poly{-I1, 1.0}), s, I1);
  EXPECT_GT(w, 0.0);
  EXPECT_NEAR(w, 1.0, 1e-8);
  try {
    noncyclicity_witness(poly(Poly{2.0, 1.0}), s, I1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotAZero);
  }
}

TEST(Corpus, OracleAgreesWithCertificate) {
  auto deg = step_degrees(256, 8);
  int n = 0;
  for (const auto& c : corpus()) {
    BSpec s = mate(c.b);
    Cyclicity o = is_cyclic_rational(c.f, s);
    Certificate cert = certify(c.f, s, deg);
    ++n;
    expect_nonincreasing(cert.residuals);
    if (o == Cyclicity::Cyclic) {
      EXPECT_EQ(cert.verdict.kind, VerdictKind::Converging) << c.name << " #" << n;
    } else {
      EXPECT_EQ(cert.verdict.kind, VerdictKind::Stalled) << c.name << " #" << n;
      for (const auto& node : s.nodes) {
        if (std::abs(boundary_value(c.f, node.zeta)) > kZeroTol) continue;
        double w = noncyclicity_witness(c.f, s, node.zeta);
        for (double r : cert.residuals) EXPECT_GE(r, w - 1e-8) << c.name << " #" << n;
      }
    }
  }
  EXPECT_EQ(n, 30);
}

TEST(Corpus, ProductOfCyclicIsCyclic) {
  BSpec s = mate(poly(Poly{0.5, 0.0, -0.5}));
  std::vector<FnExpr> cyc = {poly(Poly{2.0, 1.0}), poly(Poly{-1.0, 1.0}), poly(Poly{1.0, 1.0}), h2_kernel(0.5)};
  for (const auto& f : cyc) ASSERT_EQ(is_cyclic_rational(f, s), Cyclicity::Cyclic);
  for (size_t i = 0; i < cyc.size(); ++i)
    for (size_t j = i; j < cyc.size(); ++j) EXPECT_EQ(is_cyclic_rational(cyc[i] * cyc[j], s), Cyclicity::Cyclic);
}

TEST(Corpus, RationalAndClarkPipelinesAgree) {
  std::vector<FnExpr> fs = {poly(Poly{2.0, 1.0}), poly(Poly{1.0, 0.5, 0.25}), poly(Poly{3.0, 0.0, 0.0, 1.0})};
  for (int k = 1; k <= 3; ++k) {
    BSpec r = mate(half_one_plus_zk(k));
    ClarkData d = clark_atoms(poly(Poly::monomial(k)));
    for (const auto& f : fs) {
      Cyclicity o = is_cyclic_rational(f, r);
      auto t = thm5_conditions(f, d);
      EXPECT_EQ(o == Cyclicity::Cyclic, t.thm5_hold()) << k;
      Certificate cr = certify(f, r, {0, 16, 32, 64});
      Certificate cc = certify_clark(f, d, {0, 16, 32, 64});
      EXPECT_LT(cr.residuals.back(), 1e-8);
      EXPECT_LT(cc.residuals.back(), 1e-8);
      EXPECT_EQ(cr.verdict.kind, VerdictKind::Converging);
      EXPECT_EQ(cc.verdict.kind, VerdictKind::Converging);
    }
  }
}

TEST(SufficientConditions, PolynomialLowerBound) {
  FnExpr S = singular_delta1();
  auto r = thm5_conditions(poly(Poly{2.0, 1.0}), clark_atoms(S));
  EXPECT_EQ(r.cond_a, Check::Pass);
  EXPECT_EQ(r.cond_c, Check::Pass);
  EXPECT_TRUE(r.c_bound_rigorous);
  EXPECT_LE(r.c_lower_bound, 1.0);
  EXPECT_GT(r.c_lower_bound, 0.999);
  EXPECT_TRUE(r.thm5_hold());
}
