#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "mfgs/core.hpp"
#include "mfgs/cost_models.hpp"
#include "mfgs/rng.hpp"

using namespace mfgs;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("distribution validation", "[core]") {
  SECTION("valid input is normalized") {
    Distribution d({0.3, 0.7});
    REQUIRE(d.size() == 2);
    REQUIRE_THAT(d[0] + d[1], WithinAbs(1.0, 1e-15));
  }
  SECTION("tiny deviation is renormalized") {
    Distribution d({0.5 + 4e-13, 0.5});
    REQUIRE_THAT(d[0] + d[1], WithinAbs(1.0, 1e-15));
  }
  SECTION("larger violations are rejected") {
    REQUIRE_THROWS_AS(Distribution({0.5, 0.4}), InvalidInputError);
    REQUIRE_THROWS_AS(Distribution({1.1, -0.1}), InvalidInputError);
    REQUIRE_THROWS_AS(Distribution({0.5, std::nan("")}), InvalidInputError);
  }
  SECTION("single-state game is rejected") {
    REQUIRE_THROWS_AS(Distribution({1.0}), InvalidInputError);
  }
}

TEST_CASE("strategy matrix validation", "[core]") {
  Matrix ok(2, 2);
  ok(0, 0) = 0.2; ok(0, 1) = 0.8;
  ok(1, 0) = 1.0; ok(1, 1) = 0.0;
  REQUIRE_NOTHROW(StrategyMatrix(ok));

  Matrix bad = ok;
  bad(1, 1) = 0.2;
  REQUIRE_THROWS_AS(StrategyMatrix(bad), InvalidInputError);
  REQUIRE_THROWS_AS(StrategyMatrix(Matrix(1, 1, 1.0)), InvalidInputError);
}

TEST_CASE("cost vector requires finite entries", "[core]") {
  REQUIRE_NOTHROW(CostVector({-3.0, 12.0}));
  REQUIRE_THROWS_AS(CostVector({1.0, std::numeric_limits<double>::infinity()}),
                    InvalidInputError);
}

TEST_CASE("problem instance validation", "[core]") {
  auto model = make_zero_cost();
  REQUIRE_NOTHROW(
      ProblemInstance(2, 1, Distribution::uniform(2), CostVector::zeros(2), model));
  // degenerate horizon is rejected at construction
  REQUIRE_THROWS_AS(
      ProblemInstance(2, 0, Distribution::uniform(2), CostVector::zeros(2), model),
      InvalidInputError);
  REQUIRE_THROWS_AS(
      ProblemInstance(3, 1, Distribution::uniform(2), CostVector::zeros(3), model),
      InvalidInputError);
  REQUIRE_THROWS_AS(
      ProblemInstance(2, 1, Distribution::uniform(2), CostVector::zeros(2), nullptr),
      InvalidInputError);
}

TEST_CASE("push_forward examples", "[core]") {
  SECTION("permutation matrix") {
    Matrix P(2, 2);
    P(0, 1) = 1.0;
    P(1, 0) = 1.0;
    Distribution out = push_forward(Distribution({1.0, 0.0}), StrategyMatrix(P));
    REQUIRE_THAT(out[0], WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(out[1], WithinAbs(1.0, 1e-15));
  }
  SECTION("identity") {
    Distribution out =
        push_forward(Distribution({0.5, 0.5}), StrategyMatrix::identity(2));
    REQUIRE_THAT(out[0], WithinAbs(0.5, 1e-15));
  }
  SECTION("hand matrix-vector product, cross-checked by a summation loop") {
    Matrix P(2, 2);
    P(0, 0) = 0.2; P(0, 1) = 0.8;
    P(1, 0) = 0.6; P(1, 1) = 0.4;
    const Vec m = {0.3, 0.7};
    Vec expected(2, 0.0);
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) expected[j] += m[i] * P(i, j);
    REQUIRE_THAT(expected[0], WithinAbs(0.48, 1e-15));
    REQUIRE_THAT(expected[1], WithinAbs(0.52, 1e-15));
    Distribution out = push_forward(Distribution(m), StrategyMatrix(P));
    REQUIRE_THAT(out[0], WithinAbs(expected[0], 1e-15));
    REQUIRE_THAT(out[1], WithinAbs(expected[1], 1e-15));
  }
  SECTION("dimension mismatch") {
    REQUIRE_THROWS_AS(
        push_forward(Distribution::uniform(3).values(), Matrix(2, 2, 0.5)),
        InvalidInputError);
  }
}

TEST_CASE("push_forward preserves the simplex", "[core][property]") {
  Rng rng(2024);
  for (int k = 0; k < 100; ++k) {
    const int s = 2 + static_cast<int>(rng() % 4);
    const Distribution m = random_distribution(rng, s);
    const StrategyMatrix P = random_strategy(rng, s);
    const Distribution out = push_forward(m, P);
    double sum = 0.0;
    for (int j = 0; j < s; ++j) {
      REQUIRE(out[j] >= 0.0);
      sum += out[j];
    }
    REQUIRE_THAT(sum, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("social_cost examples", "[core]") {
  const Distribution m({0.5, 0.5});
  const CostVector u({1.0, 2.0});
  SECTION("zero-cost model reduces to expected next-step cost") {
    REQUIRE_THAT(
        social_cost(m, StrategyMatrix::identity(2), u, *make_zero_cost()),
        WithinAbs(1.5, 1e-15));
  }
  SECTION("constant cost adds kappa") {
    REQUIRE_THAT(
        social_cost(m, StrategyMatrix::identity(2), u, *make_constant_cost(1.0)),
        WithinAbs(2.5, 1e-15));
  }
  SECTION("crowding-entropy model matches a term-by-term evaluation") {
    const StrategyMatrix P = StrategyMatrix::uniform(2);
    const CostVector zero = CostVector::zeros(2);
    const double a1 = 1.0, a2 = 1.0, a3 = 1.0;
    double expected = 0.0;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        double arrivals = 0.0;
        for (int p = 0; p < 2; ++p) arrivals += m[p] * P(p, j);
        const double c =
            a1 * m[i] + a2 * arrivals - a3 * P(i, j) / std::log(P(i, j));
        expected += (c + zero[j]) * m[i] * P(i, j);
      }
    }
    REQUIRE_THAT(social_cost(m, P, zero, *make_example1()),
                 WithinRel(expected, 1e-14));
    // scalar value: every c_ij equals 1 + 0.5/ln 2 at this symmetric point
    REQUIRE_THAT(expected, WithinRel(1.0 + 0.5 / std::numbers::ln2, 1e-14));
  }
  SECTION("singular evaluation names the offending entry") {
    REQUIRE_THROWS_WITH(
        social_cost(m, StrategyMatrix::identity(2), u, *make_example1()),
        Catch::Matchers::ContainsSubstring("(0,0)"));
  }
}

TEST_CASE("individual_costs examples", "[core]") {
  const Distribution m({0.5, 0.5});
  SECTION("zero-cost model with identity strategy returns the next costs") {
    const CostVector out = individual_costs(m, StrategyMatrix::identity(2),
                                            CostVector({1.0, 2.0}),
                                            *make_zero_cost());
    REQUIRE_THAT(out[0], WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(out[1], WithinAbs(2.0, 1e-15));
  }
  SECTION("constant cost adds kappa to the averaged next costs") {
    const CostVector out = individual_costs(m, StrategyMatrix::uniform(2),
                                            CostVector({1.0, 2.0}),
                                            *make_constant_cost(3.0));
    REQUIRE_THAT(out[0], WithinAbs(3.0 + 1.5, 1e-14));
    REQUIRE_THAT(out[1], WithinAbs(3.0 + 1.5, 1e-14));
  }
  SECTION("cross-arrival model is symmetric at symmetric inputs") {
    const StrategyMatrix P = StrategyMatrix::uniform(2);
    const CostVector out =
        individual_costs(m, P, CostVector::zeros(2), *make_example2());
    double expected = 0.0;
    for (int j = 0; j < 2; ++j) {
      double cross = m[1] * P(1, j);  // row 0 of a 2-state chain
      expected += (m[0] + cross + 2.0 * std::log(P(0, j))) * P(0, j);
    }
    REQUIRE_THAT(out[0], WithinRel(expected, 1e-14));
    REQUIRE_THAT(out[1], WithinRel(expected, 1e-14));
  }
}

TEST_CASE("aggregate duality and shift identities", "[core][property]") {
  Rng rng(515);
  std::vector<std::shared_ptr<const CostModel>> models = {
      make_zero_cost(), make_constant_cost(0.7), make_example1(),
      make_example1_variant(), make_example2(), make_example2_variant()};
  for (const auto& model : models) {
    for (int k = 0; k < 25; ++k) {
      const int s = 2 + static_cast<int>(rng() % 2);
      const Distribution m = random_distribution(rng, s);
      const StrategyMatrix P = random_interior_strategy(rng, s, 0.02);
      const CostVector u = random_cost_vector(rng, s, -3.0, 3.0);
      const double social = social_cost(m, P, u, *model);
      const CostVector per_state = individual_costs(m, P, u, *model);
      // social cost equals the population-weighted per-state costs
      REQUIRE_THAT(dot(m.values(), per_state.values()),
                   WithinRel(social, 1e-12));
      // adding a constant to the continuation cost shifts the total by it
      const double a = next_in(rng, -4.0, 4.0);
      Vec shifted = u.values();
      for (double& x : shifted) x += a;
      REQUIRE_THAT(social_cost(m, P, CostVector(shifted), *model),
                   WithinRel(social + a, 1e-12));
    }
  }
}
