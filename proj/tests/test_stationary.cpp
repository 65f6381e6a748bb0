#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mfgs/cost_models.hpp"
#include "mfgs/rng.hpp"
#include "mfgs/stationary.hpp"

using namespace mfgs;
using Catch::Matchers::WithinAbs;

TEST_CASE("quotient norm", "[stationary]") {
  REQUIRE_THAT(quotient_norm(Vec{3.0, 3.0, 3.0}), WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(quotient_norm(Vec{1.0, 2.0}), WithinAbs(std::sqrt(0.5), 1e-15));
  Rng rng(5);
  for (int k = 0; k < 50; ++k) {
    Vec u(4);
    for (double& x : u) x = next_in(rng, -10.0, 10.0);
    Vec shifted = u;
    for (double& x : shifted) x += 42.0;
    REQUIRE_THAT(quotient_norm(shifted), WithinAbs(quotient_norm(u), 1e-12));
  }
}

TEST_CASE("critical value closed cases", "[stationary]") {
  Rng rng(6);
  const Distribution m = random_distribution(rng, 3);
  const StrategyMatrix P = random_strategy(rng, 3);
  REQUIRE_THAT(critical_value(m, P, *make_constant_cost(2.5)),
               WithinAbs(2.5, 1e-12));
  REQUIRE_THAT(critical_value(m, P, *make_zero_cost()), WithinAbs(0.0, 1e-15));
}

TEST_CASE("relative value iteration", "[stationary]") {
  SECTION("constant costs give u = 0 and lambda = kappa") {
    const RviResult r = relative_value_iteration(
        Distribution({0.4, 0.6}), CostVector::zeros(2), *make_constant_cost(1.75));
    REQUIRE_THAT(r.lambda, WithinAbs(1.75, 1e-10));
    REQUIRE_THAT(r.u[0], WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(r.u[1], WithinAbs(0.0, 1e-10));
  }
  SECTION("row-decoupled log model produces identical strategy rows") {
    const RviResult r = relative_value_iteration(
        Distribution({0.3, 0.7}), CostVector::zeros(2), *make_example2_variant());
    for (int j = 0; j < 2; ++j)
      REQUIRE_THAT(r.strategy(0, j), WithinAbs(r.strategy(1, j), 1e-8));
    REQUIRE(r.residual <= 1e-10);
  }
  SECTION("the normalized output ignores constant shifts of the start") {
    const Distribution m({0.45, 0.55});
    const RviResult a = relative_value_iteration(m, CostVector({0.2, -0.4}),
                                                 *make_example2());
    const RviResult b = relative_value_iteration(
        m, CostVector({0.2 + 7.0, -0.4 + 7.0}), *make_example2());
    REQUIRE_THAT(a.lambda, WithinAbs(b.lambda, 1e-10));
    for (int i = 0; i < 2; ++i) REQUIRE_THAT(a.u[i], WithinAbs(b.u[i], 1e-10));
  }
  SECTION("requires a strictly positive distribution") {
    REQUIRE_THROWS_AS(
        relative_value_iteration(Distribution({1.0, 0.0}), CostVector::zeros(2),
                                 *make_example2_variant()),
        InvalidInputError);
  }
}

TEST_CASE("stationary solution of the cross-arrival model", "[stationary]") {
  StationaryConfig cfg;
  cfg.outer_tol = 1e-9;
  cfg.rvi_tol = 1e-11;
  StationaryRunInfo info;
  const StationarySolution sol = solve_stationary(
      *make_example2(), cfg, Distribution::uniform(2), &info);

  REQUIRE(sol.residuals.first <= 1e-8);
  REQUIRE(sol.residuals.second <= 1e-8);
  REQUIRE_THAT(sol.u_bar[0], WithinAbs(0.0, 1e-15));
  // the symmetric stationary point: lambda = 3/4 + 2 ln(1/2)
  REQUIRE_THAT(sol.lambda_bar, WithinAbs(0.75 + 2.0 * std::log(0.5), 1e-8));
  // the critical value identity
  const double cv = critical_value(sol.m_bar, sol.strategy, *make_example2());
  REQUIRE_THAT(cv, WithinAbs(sol.lambda_bar, 1e-8));
  REQUIRE(info.outer_iterations >= 1);
}

TEST_CASE("stationary solution of the row-decoupled log model is rank-one",
          "[stationary]") {
  StationaryConfig cfg;
  cfg.outer_tol = 1e-10;
  cfg.rvi_tol = 1e-12;
  const StationarySolution sol = solve_stationary(
      *make_example2_variant(), cfg, Distribution({0.8, 0.2}));
  // all strategy rows coincide, so the stationary distribution is that row
  for (int j = 0; j < 2; ++j) {
    REQUIRE_THAT(sol.strategy(0, j), WithinAbs(sol.strategy(1, j), 1e-8));
    REQUIRE_THAT(sol.m_bar[j], WithinAbs(sol.strategy(0, j), 1e-8));
  }
  const double cv =
      critical_value(sol.m_bar, sol.strategy, *make_example2_variant());
  REQUIRE_THAT(cv, WithinAbs(sol.lambda_bar, 1e-8));
}

TEST_CASE("stationary multistart agreement", "[stationary]") {
  Rng rng(7);
  StationaryConfig cfg;
  cfg.outer_tol = 1e-10;
  cfg.rvi_tol = 1e-12;
  const MultistartStationaryReport report =
      solve_stationary_multistart(*make_example2_variant(), cfg, 2, 5, rng);
  REQUIRE(report.solutions.size() == 5);
  REQUIRE(report.max_m_gap <= 1e-6);
  REQUIRE(report.max_lambda_gap <= 1e-8);
  REQUIRE(report.max_u_quotient_gap <= 1e-6);
}

TEST_CASE("stationary solver rejects boundary guesses", "[stationary]") {
  REQUIRE_THROWS_AS(solve_stationary(*make_example2(), {}, Distribution({1.0, 0.0})),
                    InvalidInputError);
}

TEST_CASE("stationary config validation", "[stationary]") {
  StationaryConfig cfg;
  cfg.damping_m = 0.0;
  REQUIRE_THROWS_AS(cfg.validate(), InvalidInputError);
  cfg = {};
  cfg.max_rvi = -1;
  REQUIRE_THROWS_AS(cfg.validate(), InvalidInputError);
  cfg = {};
  REQUIRE_NOTHROW(cfg.validate());
}

TEST_CASE("outer cap raises a failure with the residual history",
          "[stationary]") {
  StationaryConfig cfg;
  cfg.max_outer = 1;
  cfg.outer_tol = 1e-15;
  try {
    solve_stationary(*make_example2(), cfg, Distribution({0.9, 0.1}));
    FAIL("expected ConvergenceFailure");
  } catch (const ConvergenceFailure& e) {
    REQUIRE(e.residual_history().size() == 1);
  }
}

TEST_CASE("cost recursion spread stays bounded on interior distributions",
          "[stationary][property]") {
  Rng rng(8);
  auto model = make_example2();
  double observed = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Distribution m = random_interior_distribution(rng, 2, 0.05);
    const CostVector u = random_cost_vector(rng, 2, -5.0, 5.0);
    const StageResult r = solve_stage(m, u, *model);
    const Vec gamma =
        individual_costs(m.values(), r.strategy.values(), u.values(), *model);
    const double spread = std::abs(gamma[0] - gamma[1]);
    REQUIRE(std::isfinite(spread));
    observed = std::max(observed, spread);
  }
  INFO("largest observed recursion spread: " << observed);
  REQUIRE(std::isfinite(observed));
}

TEST_CASE("row-swap cost quantity is bounded by 2 for the cross-arrival model",
          "[stationary][property]") {
  Rng rng(9);
  auto model = make_example2();
  for (int k = 0; k < 100; ++k) {
    const Distribution m = random_interior_distribution(rng, 2, 0.05);
    const CostVector u = random_cost_vector(rng, 2, -2.0, 2.0);
    const StageResult solved = solve_stage(m, u, *model);
    for (int p = 0; p < 2; ++p) {
      const int pp = 1 - p;
      Matrix swapped = solved.strategy.values();
      for (int j = 0; j < 2; ++j) swapped(pp, j) = solved.strategy(p, j);
      double quantity = 0.0;
      for (int j = 0; j < 2; ++j)
        quantity +=
            std::abs(model->eval(m.values(), solved.strategy.values(), p, j) -
                     model->eval(m.values(), swapped, pp, j)) *
            solved.strategy(p, j);
      REQUIRE(quantity <= 2.0 + 1e-9);
    }
  }
}
