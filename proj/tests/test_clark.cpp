#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hb/clark.hpp"
#include "hb/rational.hpp"

using namespace hb;

namespace {
const cplx I1(0.0, 1.0);
const double kE1 = std::exp(-1.0);

cplx zeta_n(int n) { return cplx(-1.0, 2.0 * kPi * n) / cplx(1.0, 2.0 * kPi * n); }
double weight_n(int n) { return 2.0 / (4.0 * kPi * kPi * n * n + 1.0); }

bool has_atom(const ClarkData& d, cplx z, double w, double tol = 1e-10) {
  for (const auto& a : d.atoms)
    if (std::abs(a.zeta - z) < tol && std::abs(a.weight - w) <= 1e-8 * w) return true;
  return false;
}

FnExpr k0b_delta1() {
  FnExpr S = singular_delta1();
  FnExpr b = scale(0.5, constant(1.0) + S);
  return hb_kernel_expr(b, 0.0, 0.5 * (1.0 + kE1), fn::KernelKind::Hb);
}

double grid_dev(const ClarkDecomp& d, const std::vector<cplx>& v, const std::function<cplx(cplx)>& ref) {
  std::vector<cplx> diff(v.size());
  for (size_t m = 0; m < v.size(); ++m) diff[m] = v[m] - ref(d.rule->nodes[m]);
  return rule_norm(*d.rule, diff);
}
}  // namespace

TEST(ClarkAtoms, PowerOfZ) {
  auto d = clark_atoms(poly(Poly::monomial(3)), 1.0, 10);
  ASSERT_EQ(d.atoms.size(), 3u);
  for (int j = 0; j < 3; ++j) EXPECT_TRUE(has_atom(d, std::polar(1.0, 2.0 * kPi * j / 3.0), 1.0 / 3.0));
  EXPECT_NEAR(d.total_mass_target, 1.0, 1e-15);
  EXPECT_NEAR(d.retained_mass(), 1.0, 1e-12);
  // tiebreak by argument
  EXPECT_NEAR(std::abs(d.atoms[0].zeta - 1.0), 0.0, 1e-14);
}

TEST(ClarkAtoms, SingularDeltaOne) {
  auto d = clark_atoms(singular_delta1(), 1.0, 50);
  ASSERT_EQ(d.atoms.size(), 101u);
  EXPECT_EQ(d.form, ClarkForm::SingleAtom);
  for (int n = -50; n <= 50; ++n) EXPECT_TRUE(has_atom(d, zeta_n(n), weight_n(n))) << n;
  EXPECT_NEAR(std::abs(d.atoms[0].zeta + 1.0), 0.0, 1e-15);
  EXPECT_NEAR(d.atoms[0].weight, 2.0, 1e-15);
  EXPECT_NEAR(d.total_mass_target, (1.0 + kE1) / (1.0 - kE1), 1e-12);
  for (size_t i = 1; i < d.atoms.size(); ++i) EXPECT_GE(d.atoms[i - 1].weight, d.atoms[i].weight);
}

TEST(ClarkAtoms, InvariantsOnSingularDeltaOne) {
  FnExpr S = singular_delta1();
  auto d = clark_atoms(S, 1.0, 30);
  FnExpr dS = derivative(S);
  for (const auto& a : d.atoms) {
    EXPECT_NEAR(std::abs(boundary_value(S, a.zeta) - 1.0), 0.0, 1e-6);
    EXPECT_NEAR(1.0 / std::abs(evaluate(dS, a.zeta)), a.weight, 1e-6 * a.weight);
  }
  EXPECT_LE(d.retained_mass(), d.total_mass_target + 1e-8);
}

TEST(ClarkAtoms, MobiusAndHerglotz) {
  // (3z+1)/(z+3) both as a bare rational and from the Herglotz construction
  auto r = clark_atoms(rational(Poly{1.0, 3.0}, Poly{3.0, 1.0}));
  EXPECT_EQ(r.form, ClarkForm::Rational);
  ASSERT_EQ(r.atoms.size(), 1u);
  EXPECT_TRUE(has_atom(r, 1.0, 2.0, 1e-9));
  auto h = clark_atoms(herglotz_inner({{1.0, 2.0}}));
  ASSERT_EQ(h.atoms.size(), 1u);
  EXPECT_TRUE(has_atom(h, 1.0, 2.0));
  EXPECT_NEAR(h.total_mass_target, 2.0, 1e-12);
}

TEST(ClarkAtoms, HerglotzWeightsFromDerivative) {
  std::vector<Atom> sigma = {{1.0, 0.5}, {I1, 0.25}, {std::polar(1.0, 2.5), 1.0}};
  FnExpr I = herglotz_inner(sigma);
  auto d = clark_atoms(I);
  FnExpr dI = derivative(I);
  double s = 0.0;
  for (const auto& a : d.atoms) {
    EXPECT_NEAR(std::abs(evaluate(I, a.zeta) - 1.0), 0.0, 1e-10);
    EXPECT_NEAR(1.0 / std::abs(evaluate(dI, a.zeta)), a.weight, 1e-6 * a.weight);
    s += a.weight;
  }
  EXPECT_NEAR(s, d.total_mass_target, 1e-10);
  EXPECT_NEAR(d.atoms[0].weight, 1.0, 1e-15);
}

TEST(ClarkAtoms, PhaseScanAndNotDiscrete) {
  // z S_delta1 is neither rational nor a single singular factor
  FnExpr I = identity() * singular_delta1();
  auto d = clark_atoms(I, 1.0, 5);
  EXPECT_EQ(d.form, ClarkForm::Numeric);
  ASSERT_EQ(d.atoms.size(), 11u);
  FnExpr dI = derivative(I);
  for (const auto& a : d.atoms) {
    EXPECT_NEAR(std::abs(evaluate(I, a.zeta) - 1.0), 0.0, 1e-9);
    EXPECT_NEAR(1.0 / std::abs(evaluate(dI, a.zeta)), a.weight, 1e-9);
  }
  EXPECT_LE(d.retained_mass(), d.total_mass_target + 1e-8);
  // a non-inner input has too much mass on its level set
  try {
    clark_atoms(scale(0.5, singular_delta1()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotDiscrete);
  }
}

TEST(ClarkAtoms, MassPartialSums) {
  const double target = (1.0 + kE1) / (1.0 - kE1);
  EXPECT_NEAR(target, 2.1639534, 1e-7);
  for (int N : {10, 100, 1000}) {
    auto d = clark_atoms(singular_delta1(), 1.0, N);
    double s = d.retained_mass();
    EXPECT_LE(s, target);
    EXPECT_LE(target - s, 1.0 / (kPi * kPi * N));
  }
}

TEST(KiKernel, Examples) {
  FnExpr I = poly(Poly::monomial(2));
  FnExpr k = ki_kernel(I, 1.0);
  for (cplx z : {cplx(0.3, 0.2), cplx(-0.5, 0.1), cplx(0.0, 0.9)}) EXPECT_NEAR(std::abs(k(z) - (1.0 + z)), 0.0, 1e-14);
  EXPECT_NEAR(std::pow(h2_norm(k), 2), 2.0, 1e-12);

  FnExpr S = singular_delta1();
  FnExpr k0 = ki_kernel(S, 0.0);
  for (cplx z : {cplx(0.3, 0.2), cplx(-0.5, 0.1)}) EXPECT_NEAR(std::abs(k0(z) - (1.0 - kE1 * S(z))), 0.0, 1e-14);

  try {
    ki_kernel(S, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotInE0);
  }
  // at an atom the kernel is (1 - I)/(1 - conj(zeta) z)
  FnExpr k1 = ki_kernel(S, zeta_n(1));
  cplx z(0.2, -0.4);
  EXPECT_NEAR(std::abs(k1(z) - (1.0 - S(z)) / (1.0 - std::conj(zeta_n(1)) * z)), 0.0, 1e-12);
}

TEST(ClarkProperties, Orthogonality) {
  FnExpr S = singular_delta1();
  auto d = clark_atoms(S, 1.0, 9);
  ASSERT_EQ(d.atoms.size(), 19u);
  std::vector<FnExpr> ks;
  for (const auto& a : d.atoms) ks.push_back(ki_kernel(S, a.zeta));
  // one rule for every pair
  RulePtr rule = rule_for({S});
  std::vector<std::vector<cplx>> vals;
  for (const auto& k : ks) vals.push_back(sample_values(k, rule));
  for (size_t m = 0; m < ks.size(); ++m) {
    double nm = 1.0 / d.atoms[m].weight;
    EXPECT_NEAR(std::pow(rule_norm(*rule, vals[m]), 2), nm, 1e-4 * nm) << m;
    for (size_t n = m + 1; n < ks.size(); ++n) {
      double nn = 1.0 / d.atoms[n].weight;
      EXPECT_LE(std::abs(rule_inner(*rule, vals[m], vals[n])), 1e-6 * std::sqrt(nm * nn)) << m << "," << n;
    }
  }
}

TEST(ClarkProperties, ProductLemma) {
  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  auto check = [&](const FnExpr& I) {
    auto d = clark_atoms(I, 1.0, 2);
    ASSERT_GE(d.atoms.size(), 3u);
    std::vector<FnExpr> fs(2);
    for (auto& f : fs) {
      std::vector<FnExpr> terms;
      for (size_t n = 0; n < std::min<size_t>(5, d.atoms.size()); ++n)
        terms.push_back(scale(cplx(g(rng), g(rng)), ki_kernel(I, d.atoms[n].zeta)));
      f = sum(terms);
    }
    FnExpr h = fs[0] * fs[1];
    FnExpr I2 = I * I;
    RulePtr rule = rule_for({h, I2}, {.M = 8192, .bandwidth = 128});
    auto hv = sample_values(h, rule), iv = sample_values(I2, rule);
    // coefficients of P+(conj(I^2) h)
    double s = 0.0, hn = rule_norm(*rule, hv);
    for (int k = 0; k <= 64; ++k) {
      cplx c = 0.0;
      for (size_t m = 0; m < rule->size(); ++m)
        c += rule->weights[m] * std::conj(iv[m]) * hv[m] * std::pow(std::conj(rule->nodes[m]), k);
      s += std::norm(c);
    }
    EXPECT_LE(std::sqrt(s), 1e-6 * std::max(1.0, hn));
  };
  check(herglotz_inner({{1.0, 0.5}, {I1, 0.25}, {-1.0, 1.0}, {std::polar(1.0, 4.0), 0.7}, {std::polar(1.0, 5.5), 2.0}}));
  check(singular_delta1());
}

TEST(ClarkProperties, FplusIdentities) {
  FnExpr I = herglotz_inner({{1.0, 0.5}, {std::polar(1.0, 2.0), 1.5}});
  BSpec spec = half_inner(I);
  const int D = 128;
  // g in K_I
  FnExpr g = scale(cplx(0.7, -0.2), ki_kernel(I, cplx(0.3, 0.4))) + scale(2.0, ki_kernel(I, 1.0));
  auto gp = fplus(g, spec, D);
  auto gc = taylor_coeffs(g, D);
  double err = 0.0;
  for (int k = 0; k <= D; ++k) err = std::max(err, std::abs(gp.fplus[k] - gc[k]));
  EXPECT_LE(err, 1e-6);
  // ((1-I)h)+ = -(1+I)h
  FnExpr h = poly(Poly{1.0, cplx(0.5, 0.5), -0.25});
  auto fp = fplus((constant(1.0) - I) * h, spec, D);
  auto ref = taylor_coeffs(scale(-1.0, (constant(1.0) + I) * h), D);
  err = 0.0;
  for (int k = 0; k <= D; ++k) err = std::max(err, std::abs(fp.fplus[k] - ref[k]));
  EXPECT_LE(err, 1e-6);
}

TEST(DecomposeClark, IdentityInner) {
  auto d = clark_atoms(identity());
  auto dec = decompose_clark(poly(Poly{1.0, 1.0}), d);
  ASSERT_EQ(dec.g2_coeffs.size(), 1u);
  EXPECT_NEAR(std::abs(dec.g2_coeffs[0] - 2.0), 0.0, 1e-14);
  for (cplx z : {cplx(0.3, 0.2), cplx(-0.7, 0.1)}) EXPECT_NEAR(std::abs(dec.g2(z) - 2.0), 0.0, 1e-14);
  double dev = 0.0;
  for (cplx v : dec.g1.values) dev = std::max(dev, std::abs(v + 1.0));
  EXPECT_LE(dev, 1e-10);
  auto n = hb_norm_clark(dec);
  EXPECT_NEAR(n.exact * n.exact, 12.0, 1e-8);
  EXPECT_NEAR(n.triple_bar * n.triple_bar, 5.0, 1e-8);
  EXPECT_EQ(dec.tail_estimate, 0.0);
}

TEST(DecomposeClark, KernelAlreadyInModelSpace) {
  FnExpr S = singular_delta1();
  auto d = clark_atoms(S);
  FnExpr k = ki_kernel(S, zeta_n(1));
  auto dec = decompose_clark(k, d);
  EXPECT_LE(rule_norm(*dec.rule, dec.g1.values), 1e-8);
  EXPECT_LE(grid_dev(dec, dec.g2_vals, [&](cplx z) { return k(z); }), 1e-10);
  auto n = hb_norm_clark(dec);
  EXPECT_NEAR(n.exact * n.exact, 2.0 / weight_n(1), 1e-8 / weight_n(1));
}

TEST(DecomposeClark, ReproducingKernelOfB) {
  FnExpr S = singular_delta1();
  auto d = clark_atoms(S);
  FnExpr f = k0b_delta1();
  auto dec = decompose_clark(f, d);
  for (cplx v : dec.f_at_atoms) EXPECT_NEAR(std::abs(v - 0.5 * (1.0 - kE1)), 0.0, 1e-10);
  const double c1 = 0.25 * (1.0 - kE1);
  EXPECT_LE(grid_dev(dec, dec.g1.values, [&](cplx) { return c1; }), 1e-8);
  EXPECT_LE(grid_dev(dec, dec.g2_vals, [&](cplx z) { return 0.5 * (1.0 - kE1 * S(z)); }), 1e-8);
  EXPECT_GT(dec.tail_estimate, 0.0);
  EXPECT_LE(dec.tail_estimate, 1e-3);
  // exact norm against the closed form 4|g1|^2 + 2|g2|^2
  const double g2n = 0.25 * (1.0 - kE1 * kE1);
  auto n = hb_norm_clark(dec);
  EXPECT_NEAR(n.exact * n.exact, 4.0 * c1 * c1 + 2.0 * g2n, 1e-8);
  // g2 interpolates f at the atoms
  for (size_t i = 0; i < 10; ++i) EXPECT_NEAR(std::abs(dec.g2(d.atoms[i].zeta) - dec.f_at_atoms[i]), 0.0, 1e-5);
}

TEST(DecomposeClark, NormExamples) {
  for (FnExpr I : {poly(Poly::monomial(2)), singular_delta1()}) {
    auto d = clark_atoms(I);
    auto dec = decompose_clark(constant(1.0) - I, d);
    EXPECT_NEAR(std::pow(hb_norm_clark(dec).exact, 2), 4.0, 1e-8);
  }
  // f = g2 in K_I
  FnExpr I = poly(Poly::monomial(3));
  auto d = clark_atoms(I);
  FnExpr g = scale(cplx(1.0, 2.0), ki_kernel(I, d.atoms[1].zeta)) + ki_kernel(I, cplx(0.2, -0.5));
  auto dec = decompose_clark(g, d);
  EXPECT_NEAR(std::pow(hb_norm_clark(dec).exact, 2), 2.0 * std::pow(h2_norm(g), 2), 1e-8);
}

TEST(DecomposeClark, TailTooLarge) {
  auto d = clark_atoms(singular_delta1(), 1.0, 2);
  try {
    decompose_clark(poly(Poly{3.0, cplx(0.0, 30.0)}), d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TailTooLarge);
  }
}

TEST(DecomposeClark, AlphaMustBeOne) {
  auto d = clark_atoms(poly(Poly::monomial(2)), I1);
  EXPECT_THROW(decompose_clark(constant(1.0), d), Error);
}

TEST(Multiplier, Examples) {
  FnExpr S = singular_delta1();
  auto d = clark_atoms(S);
  EXPECT_TRUE(multiplier_sufficient(decompose_clark(k0b_delta1(), d)));
  FnExpr f = (constant(1.0) + S) * ki_kernel(S, 0.0);
  EXPECT_TRUE(multiplier_sufficient(decompose_clark(f, d)));
  // g1 = 1/(1 - 0.999 z) grows under refinement
  auto d2 = clark_atoms(poly(Poly::monomial(2)));
  FnExpr h = rational(Poly{1.0, 0.0, -1.0}, Poly{1.0, -0.999});
  EXPECT_FALSE(multiplier_sufficient(decompose_clark(h, d2)));
}

TEST(ClarkVsRational, NormCorpus) {
  std::mt19937 rng(11);
  std::normal_distribution<double> g;
  for (int k = 1; k <= 3; ++k) {
    FnExpr b = poly(Poly::monomial(k) * 0.5 + Poly::constant(0.5));
    BSpec spec = mate(b);
    auto d = clark_atoms(poly(Poly::monomial(k)));
    for (int t = 0; t < 20; ++t) {
      std::vector<cplx> c(6);
      for (auto& x : c) x = cplx(g(rng), g(rng));
      FnExpr f = poly(Poly(c));
      double nr = hb_norm(f, spec);
      double nc = hb_norm_clark(decompose_clark(f, d)).exact;
      EXPECT_NEAR(nc, nr, 1e-6 * std::max(1.0, nr)) << k << " " << t;
    }
  }
}

TEST(ClarkVsRational, SingularInnerAgainstFplus) {
  // a = (1 - S)/2 is the mate of (1 + S)/2, so the f+ route applies too
  FnExpr S = singular_delta1();
  BSpec s = half_inner(S);
  ClarkData d = clark_atoms(S);
  for (const auto& f : {poly(Poly{2.0, 1.0}), poly(Poly{1.0, 0.0, cplx(0.0, 0.5)}), h2_kernel(cplx(0.2, -0.3))}) {
    double clark = hb_norm_clark(decompose_clark(f, d)).exact;
    EXPECT_NEAR(clark, hb_norm(f, s), 1e-6 * clark);
  }
}
