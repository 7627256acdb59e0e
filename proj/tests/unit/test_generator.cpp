#include "oracles.hpp"

#include "ifv/error.hpp"
#include "ifv/generator.hpp"
#include "ifv/kernels.hpp"

#include <gtest/gtest.h>

using namespace ifv;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}); }

}  // namespace

TEST(Generator, RoutesAgreeOnRandomInstances) {
  oracle::Sampler rng(101);
  for (int i = 0; i < 200; ++i) {
    const int K = rng.integer(1, 4), L = rng.integer(1, 3), deg = rng.integer(1, 4);
    const auto m = rng.spec(K, L);
    const auto x = rng.configuration(L, K);
    const auto F = rng.monomial(L, K, deg);
    const double g = generator_apply(m, F, x, GeneratorForm::gradient);
    const double e = generator_apply(m, F, x, GeneratorForm::expanded);
    EXPECT_LT(rel(g, e), 1e-12) << "instance " << i;
  }
}

TEST(Generator, MatchesFiniteDifferenceOracle) {
  oracle::Sampler rng(202);
  for (int i = 0; i < 60; ++i) {
    const int K = rng.integer(2, 4), L = rng.integer(1, 3), deg = rng.integer(1, 4);
    const auto m = rng.spec(K, L);
    const auto x = rng.configuration(L, K);
    const auto F = rng.monomial(L, K, deg);
    EXPECT_LT(rel(generator_apply(m, F, x), oracle::generator_fd(m, F, x)), 1e-6) << "instance " << i;
  }
}

TEST(Generator, LinearFunctionalSeesOnlyTheDrift) {
  oracle::Sampler rng(9);
  const auto m = rng.spec(3, 2);
  const auto x = rng.configuration(2, 3);
  const Vec f = rng.vector(3, -1, 1);
  const double lf = generator_apply(m, Monomial::linear(1, f), x);
  EXPECT_NEAR(lf, drift(m, x, 1).dot(f), 1e-14);
}

TEST(Generator, ConstantFunctionalIsAnnihilated) {
  oracle::Sampler rng(10);
  const auto m = rng.spec(3, 2);
  const auto x = rng.configuration(2, 3);
  // <X, 1>^3 = 1 identically.
  Monomial F;
  for (int i = 0; i < 3; ++i) F.factors.push_back({i % 2, Vec::Ones(3)});
  EXPECT_NEAR(generator_apply(m, F, x), 0.0, 1e-13);
  EXPECT_NEAR(generator_apply(m, F, x, GeneratorForm::expanded), 0.0, 1e-13);
}

TEST(Generator, NeutralSingleColonyPairTerm) {
  // L <X,f><X,g> = <X, fg> - <X,f><X,g> without drift.
  const auto m = neutral_spec(3, make_kernel(CompleteUniform{1}), 0.0);
  const Configuration x{{(Vec(3) << 0.2, 0.3, 0.5).finished()}};
  const Vec f = (Vec(3) << 1.0, -2.0, 0.5).finished();
  const Vec g = (Vec(3) << 0.0, 1.0, 3.0).finished();
  Monomial F{{{0, f}, {0, g}}};
  const double expected = x[0].dot(f.cwiseProduct(g)) - x[0].dot(f) * x[0].dot(g);
  EXPECT_NEAR(generator_apply(m, F, x), expected, 1e-15);
}

TEST(Calculus, DerivativesMatchFiniteDifferences) {
  oracle::Sampler rng(33);
  const auto x = rng.configuration(2, 3);
  const auto F = rng.monomial(2, 3, 4);
  const auto d = monomial_calculus(F, x);
  EXPECT_NEAR(d.value, F.evaluate(x), 1e-15);
  const double h = 1e-5;
  for (int xi = 0; xi < 2; ++xi)
    for (int u = 0; u < 3; ++u) {
      Configuration p = x, q = x;
      p[xi](u) += h;
      q[xi](u) -= h;
      EXPECT_NEAR(d.first[xi](u), (F.evaluate(p) - F.evaluate(q)) / (2 * h), 1e-8);
    }
  for (int xi = 0; xi < 2; ++xi) EXPECT_LT((d.second[xi] - d.second[xi].transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(CarreDuChamp, ClosedFormEqualsDefinition) {
  oracle::Sampler rng(404);
  for (int i = 0; i < 100; ++i) {
    const int K = rng.integer(1, 4), L = rng.integer(1, 3);
    const auto m = rng.spec(K, L);
    const auto x = rng.configuration(L, K);
    const auto phi = rng.monomial(L, K, rng.integer(1, 3));
    const auto psi = rng.monomial(L, K, rng.integer(1, 3));
    const double closed = carre_du_champ(m, phi, psi, x);
    EXPECT_LT(rel(closed, carre_du_champ_by_definition(m, phi, psi, x)), 1e-10) << i;
    EXPECT_LT(rel(closed, carre_du_champ_by_definition(m, phi, psi, x, GeneratorForm::expanded)), 1e-10) << i;
    EXPECT_LT(rel(closed, carre_du_champ(m, psi, phi, x)), 1e-14);
  }
}

TEST(CarreDuChamp, LeibnizIdentity) {
  // Gamma(Phi Psi1, Psi2) + Gamma(Phi Psi2, Psi1) - Gamma(Phi, Psi1 Psi2) = 2 Phi Gamma(Psi1, Psi2)
  oracle::Sampler rng(505);
  for (int i = 0; i < 100; ++i) {
    const int K = rng.integer(1, 4), L = rng.integer(1, 3);
    const auto m = rng.spec(K, L);
    const auto x = rng.configuration(L, K);
    const auto phi = rng.monomial(L, K, rng.integer(1, 2));
    const auto p1 = rng.monomial(L, K, rng.integer(1, 2));
    const auto p2 = rng.monomial(L, K, rng.integer(1, 2));
    const double lhs = carre_du_champ(m, phi * p1, p2, x) + carre_du_champ(m, phi * p2, p1, x) -
                       carre_du_champ(m, phi, p1 * p2, x);
    const double rhs = 2.0 * phi.evaluate(x) * carre_du_champ(m, p1, p2, x);
    EXPECT_LT(rel(lhs, rhs), 1e-10) << i;
  }
}

TEST(CarreDuChamp, VanishesAtPointMasses) {
  oracle::Sampler rng(6);
  const auto m = rng.spec(3, 2);
  const auto x = Configuration::point_masses({0, 2}, 3);
  EXPECT_EQ(carre_du_champ(m, rng.monomial(2, 3, 2), rng.monomial(2, 3, 3), x), 0.0);
}

TEST(Basis, CountsMultisets) {
  // Multisets of size d from n items: C(n + d - 1, d).
  const auto b = indicator_monomial_basis(2, 2, 3);
  EXPECT_EQ(b.size(), 4u + 10u + 20u);
  EXPECT_EQ(indicator_monomial_basis(1, 3, 2).size(), 3u + 6u);
  for (const auto& F : b) EXPECT_LE(F.degree(), 3);
}

TEST(Generator, RejectsBadMonomials) {
  const auto m = neutral_spec(2, make_kernel(CompleteUniform{2}), 1.0);
  const auto x = Configuration::uniform(2, 2);
  EXPECT_THROW(generator_apply(m, Monomial{}, x), InvalidInput);
  EXPECT_THROW(generator_apply(m, Monomial::linear(2, Vec::Ones(2)), x), InvalidInput);
  EXPECT_THROW(generator_apply(m, Monomial::linear(0, Vec::Ones(3)), x), InvalidInput);
}
