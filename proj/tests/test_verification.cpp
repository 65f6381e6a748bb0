#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mfgs/cost_models.hpp"
#include "mfgs/rng.hpp"
#include "mfgs/verification.hpp"

using namespace mfgs;
using namespace mfgs::verification;
using Catch::Matchers::WithinAbs;

TEST_CASE("grid oracle basics", "[verification]") {
  SECTION("zero costs: the oracle finds the routing optimum") {
    const GridOracleResult r =
        grid_oracle_min(Distribution({0.5, 0.5}), CostVector({0.0, 1.0}),
                        *make_zero_cost(), {1e-2, 1e-9});
    REQUIRE_THAT(r.min_value, WithinAbs(0.0, 1e-9));
    REQUIRE_THAT(r.minimizer(0, 0), WithinAbs(1.0, 1e-9));
    REQUIRE_THAT(r.minimizer(1, 0), WithinAbs(1.0, 1e-9));
  }
  SECTION("constant costs with a flat continuation are flat") {
    const GridOracleResult r =
        grid_oracle_min(Distribution({0.5, 0.5}), CostVector({0.7, 0.7}),
                        *make_constant_cost(0.3), {5e-2, 1e-9});
    REQUIRE_THAT(r.min_value, WithinAbs(1.0, 1e-12));
  }
  SECTION("unsupported sizes and resolutions are rejected") {
    REQUIRE_THROWS_AS(
        grid_oracle_min(Distribution::uniform(4), CostVector::zeros(4),
                        *make_zero_cost(), {1e-1, 1e-9}),
        UnsupportedSizeError);
    REQUIRE_THROWS_AS(
        grid_oracle_min(Distribution::uniform(2), CostVector::zeros(2),
                        *make_zero_cost(), {1e-4, 1e-9}),
        InvalidInputError);
    REQUIRE_THROWS_AS(
        grid_oracle_min(Distribution::uniform(3), CostVector::zeros(3),
                        *make_zero_cost(), {1e-2, 1e-9}),
        InvalidInputError);
  }
}

TEST_CASE("oracle sandwich around the stage solver", "[verification]") {
  Rng rng(12);
  const GridOracleConfig gcfg{1e-3, 1e-9};
  for (const auto& model : {make_example1(), make_example2()}) {
    for (int k = 0; k < 3; ++k) {
      const Distribution m({0.5, 0.5});
      const CostVector u = random_cost_vector(rng, 2, -2.0, 2.0);
      const GridOracleResult grid = grid_oracle_min(m, u, *model, gcfg);
      const StageResult stage = solve_stage(m, u, *model);
      // solver is at least as good as any grid point
      REQUIRE(stage.objective <= grid.min_value + 1e-12);
      // and the grid cannot undercut it by more than a mesh-sized amount:
      // numeric Lipschitz bound from the largest gradient entry seen
      double lipschitz = 0.0;
      for (const StrategyMatrix* probe :
           {&grid.minimizer, &stage.strategy}) {
        const Matrix g =
            stage_gradient(m.values(), probe->values(), u.values(), *model);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            lipschitz = std::max(lipschitz, std::abs(g(i, j)));
      }
      const double gap_bound = lipschitz * 4.0 * gcfg.resolution;
      REQUIRE(stage.objective >= grid.min_value - gap_bound - 1e-9);
    }
  }
}

TEST_CASE("cost monotonicity gap", "[verification]") {
  Rng rng(13);
  const Distribution m = random_interior_distribution(rng, 2, 0.05);
  const StrategyMatrix P = random_interior_strategy(rng, 2, 0.05);
  SECTION("identical strategies give zero") {
    REQUIRE_THAT(cost_monotonicity_gap(*make_example1(), m, P, P),
                 WithinAbs(0.0, 1e-15));
  }
  SECTION("zero costs give zero for any pair") {
    const StrategyMatrix Q = random_interior_strategy(rng, 2, 0.05);
    REQUIRE_THAT(cost_monotonicity_gap(*make_zero_cost(), m, P, Q),
                 WithinAbs(0.0, 1e-15));
  }
  SECTION("strictly positive for the crowding-entropy family") {
    for (int k = 0; k < 100; ++k) {
      const Distribution mm = random_interior_distribution(rng, 3, 0.01);
      const StrategyMatrix p1 = random_interior_strategy(rng, 3, 0.01);
      const StrategyMatrix p2 = random_interior_strategy(rng, 3, 0.01);
      REQUIRE(cost_monotonicity_gap(*make_example1(), mm, p1, p2) > 0.0);
    }
  }
}

TEST_CASE("competitive equivalence of row-decoupled models", "[verification]") {
  Rng rng(14);
  SECTION("both row-decoupled variants match per-row optimization") {
    for (const auto& model :
         {make_example1_variant(1.0, 1.0), make_example2_variant()}) {
      for (int k = 0; k < 5; ++k) {
        const Distribution m = random_interior_distribution(rng, 2, 0.05);
        const CostVector u = random_cost_vector(rng, 2, -2.0, 2.0);
        REQUIRE(competitive_equivalence_gap(*model, m, u) <= 1e-6);
      }
    }
  }
  SECTION("zero costs route identically in both formulations") {
    const Distribution m({0.6, 0.4});
    const CostVector u({0.0, 1.0});
    REQUIRE(competitive_equivalence_gap(*make_zero_cost(), m, u) <= 1e-6);
  }
  SECTION("coupled models are rejected") {
    REQUIRE_THROWS_AS(
        competitive_equivalence_gap(*make_example2(), Distribution({0.5, 0.5}),
                                    CostVector::zeros(2)),
        InvalidInputError);
  }
}

TEST_CASE("standard probe suite passes on every example model",
          "[verification]") {
  const InnerSolverConfig inner;
  for (const auto& model :
       {make_example1(), make_example1_variant(), make_example2(),
        make_example2_variant()}) {
    const auto reports = run_standard_probes(*model, 2, inner, 20240601);
    for (const ProbeReport& probe : reports) {
      INFO(model->name() << " / " << probe.name
                         << " observed=" << probe.observed);
      CHECK(probe.pass);
      REQUIRE(probe.samples > 0);
    }
  }
}

TEST_CASE("probe reports are deterministic for a fixed seed", "[verification]") {
  const InnerSolverConfig inner;
  const auto a = run_standard_probes(*make_example1_variant(), 2, inner, 99);
  const auto b = run_standard_probes(*make_example1_variant(), 2, inner, 99);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].name == b[i].name);
    REQUIRE(a[i].seed == b[i].seed);
    REQUIRE(a[i].observed == b[i].observed);
    REQUIRE(a[i].pass == b[i].pass);
  }
}
