#include "oracles.hpp"

#include "ifv/error.hpp"
#include "ifv/io.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace ifv;

TEST(ModelJson, RoundTripsRandomSpecs) {
  oracle::Sampler rng(61);
  for (int i = 0; i < 20; ++i) {
    const auto m = rng.spec(1 + i % 3, 1 + i % 3);
    const json doc = model_to_json(m);
    const auto back = model_from_json(json::parse(doc.dump()));
    EXPECT_EQ(model_to_json(back).dump(), doc.dump()) << i;
    EXPECT_EQ(spec_hash(back), spec_hash(m));
    EXPECT_EQ(back.kernel.a, m.kernel.a);
    EXPECT_EQ(back.mutation.rates, m.mutation.rates);
  }
}

TEST(ModelJson, ReadsFamiliesAndMutationKinds) {
  const auto m = model_from_json(json::parse(R"({
    "types": 2,
    "kernel": {"family": "torus-nearest-neighbor", "params": {"dimension": 2, "side": 3}},
    "mutation": {"kind": "two-type", "u": 0.1, "v": 0.3},
    "fitness": [[1, 0], [0, 0]],
    "recombination": {"kind": "first-parent"},
    "s": 0.5, "r": 0.25, "rho": 2
  })"));
  EXPECT_EQ(m.colony_count(), 9);
  EXPECT_DOUBLE_EQ(m.mutation.rates(0, 1), 0.1);
  EXPECT_DOUBLE_EQ(m.recombination(1, 0, 1), 1.0);
  EXPECT_DOUBLE_EQ(m.rho, 2.0);
  EXPECT_TRUE(validate_spec(m).ok());

  const auto p = model_from_json(json::parse(R"({
    "types": 3, "kernel": {"family": "hierarchical", "params": {"levels": 2, "base": 2, "weights": [0.5, 0.5]}},
    "mutation": {"kind": "pim", "theta": 2, "mu": [0.2, 0.3, 0.5]}
  })"));
  EXPECT_EQ(p.colony_count(), 4);
  EXPECT_NEAR(p.mutation.rates(0, 2), 0.5, 1e-15);
  EXPECT_EQ(p.s, 0.0);
  EXPECT_TRUE(validate_spec(p).ok());
}

TEST(ModelJson, HashIsStableAndSensitive) {
  const auto doc = json::parse(R"({"types": 2, "kernel": {"family": "complete-uniform", "params": {"colonies": 2}},
                                   "mutation": {"kind": "zero"}, "rho": 1})");
  const auto a = spec_hash(model_from_json(doc));
  EXPECT_EQ(a.size(), 16u);
  EXPECT_EQ(a, spec_hash(model_from_json(doc)));
  auto other = doc;
  other["rho"] = 1.5;
  EXPECT_NE(a, spec_hash(model_from_json(other)));
}

TEST(ModelJson, BadDocumentsAreInvalidInput) {
  EXPECT_THROW(model_from_json(json::parse(R"({"kernel": {}})")), InvalidInput);
  EXPECT_THROW(model_from_json(json::parse(R"({"types": 2, "kernel": {"family": "moebius"}})")), InvalidInput);
  EXPECT_THROW(model_from_json(json::parse(R"({"types": 2, "kernel": {"family": "complete-uniform", "params": {"colonies": 2}},
                                               "mutation": {"kind": "telepathy"}})")),
               InvalidInput);
  EXPECT_THROW(configuration_from_json(json::parse(R"("nope")")), InvalidInput);
}

TEST(Json, ConfigurationsAndMonomials) {
  const Configuration x{{(Vec(2) << 0.25, 0.75).finished(), (Vec(2) << 1.0, 0.0).finished()}};
  const auto back = configuration_from_json(configuration_to_json(x));
  EXPECT_EQ(back[0], x[0]);
  EXPECT_EQ(back[1], x[1]);
  const Monomial F{{{1, (Vec(2) << 1.0, -2.0).finished()}, {0, (Vec(2) << 0.5, 0.5).finished()}}};
  const auto G = monomial_from_json(monomial_to_json(F));
  ASSERT_EQ(G.degree(), 2);
  EXPECT_EQ(G.factors[0].colony, 1);
  EXPECT_DOUBLE_EQ(G.evaluate(x), F.evaluate(x));
}

TEST(Json, DualityReportFields) {
  DualityReport r;
  r.z = std::numeric_limits<double>::infinity();
  const auto j = to_json(r);
  EXPECT_TRUE(j.at("z").is_null());
  for (const char* k : {"forward_mean", "forward_se", "dual_mean", "dual_se", "truncated_fraction", "pass", "N", "reps", "seed"})
    EXPECT_TRUE(j.contains(k)) << k;
}

TEST(Csv, TrajectoryAndMatrix) {
  TrajectorySample t;
  t.times = {0.0, 0.125};
  t.states = {ParticleState::from_counts({{1, 1}}), ParticleState::from_counts({{2, 0}})};
  std::ostringstream os;
  write_trajectory_csv(os, t);
  EXPECT_EQ(os.str(), "time,colony,type,count\n0,0,0,1\n0,0,1,1\n0.125,0,0,2\n0.125,0,1,0\n");
  std::ostringstream ms;
  write_matrix_csv(ms, (Mat(2, 2) << 0.5, 0.1, 1e-20, -3).finished());
  EXPECT_EQ(ms.str(), "0.5,0.1\n1e-20,-3\n");
  EXPECT_EQ(format_double(0.1 + 0.2), "0.30000000000000004");
}
