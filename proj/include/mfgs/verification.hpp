#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mfgs/core.hpp"
#include "mfgs/cost_models.hpp"
#include "mfgs/rng.hpp"
#include "mfgs/simplex.hpp"
#include "mfgs/stage_solver.hpp"
#include "mfgs/types.hpp"

namespace mfgs::verification {

struct GridOracleConfig {
  double resolution = 1e-3;
  double interior_eps = 1e-9;

  void validate() const {
    if (!(resolution > 0.0 && resolution < 1.0))
      throw InvalidInputError("GridOracleConfig: resolution must be in (0,1)");
  }
};

struct GridOracleResult {
  StrategyMatrix minimizer;
  double min_value;
  long points_evaluated;
};

namespace detail {

inline void enumerate_compositions(int s, int k, int level, int remaining,
                                   std::vector<int>& c, bool interior,
                                   double eps, std::vector<Vec>& out) {
  if (level == s - 1) {
    c[level] = remaining;
    Vec row(s);
    for (int j = 0; j < s; ++j)
      row[j] = static_cast<double>(c[j]) / static_cast<double>(k);
    if (interior) clamp_row_interior(row, eps);
    out.push_back(std::move(row));
    return;
  }
  for (int v = 0; v <= remaining; ++v) {
    c[level] = v;
    enumerate_compositions(s, k, level + 1, remaining - v, c, interior, eps,
                           out);
  }
}

// All nonnegative integer s-tuples summing to k, scaled to simplex rows.
inline std::vector<Vec> simplex_grid_rows(int s, int k, bool interior,
                                          double eps) {
  std::vector<Vec> rows;
  std::vector<int> c(s, 0);
  enumerate_compositions(s, k, 0, k, c, interior, eps, rows);
  return rows;
}

}  // namespace detail

/// Exhaustive minimization of the stage objective over a per-row simplex
/// grid (the product over rows). Supports s <= 3; independent of the
/// gradient-based solver path.
inline GridOracleResult grid_oracle_min(const Distribution& m,
                                        const CostVector& u_next,
                                        const CostModel& model,
                                        const GridOracleConfig& cfg) {
  cfg.validate();
  const int s = m.size();
  if (s > 3)
    throw UnsupportedSizeError(
        "grid_oracle_min: grids are only tractable for s <= 3, got s = " +
        std::to_string(s));
  const double min_resolution = s == 2 ? 1e-3 : 2e-2;
  if (cfg.resolution < min_resolution)
    throw InvalidInputError("grid_oracle_min: resolution too fine for s = " +
                            std::to_string(s));
  const int k = static_cast<int>(std::lround(1.0 / cfg.resolution));
  const std::vector<Vec> rows = detail::simplex_grid_rows(
      s, k, model.interior_only(), cfg.interior_eps);

  Matrix P(s, s);
  std::vector<std::size_t> idx(s, 0);
  for (int i = 0; i < s; ++i)
    std::copy(rows[0].begin(), rows[0].end(), P.row(i).begin());

  double best = std::numeric_limits<double>::infinity();
  Matrix best_P = P;
  long points = 0;
  while (true) {
    const double value = social_cost(m.values(), P, u_next.values(), model);
    ++points;
    if (value < best) {
      best = value;
      best_P = P;
    }
    int level = s - 1;
    while (level >= 0 && idx[level] + 1 == rows.size()) {
      idx[level] = 0;
      std::copy(rows[0].begin(), rows[0].end(), P.row(level).begin());
      --level;
    }
    if (level < 0) break;
    ++idx[level];
    std::copy(rows[idx[level]].begin(), rows[idx[level]].end(),
              P.row(level).begin());
  }
  return GridOracleResult{StrategyMatrix(std::move(best_P)), best, points};
}

/// Monotonicity quantity sum_{i,j} (c_ij(m,P1) - c_ij(m,P2))(P1 - P2)_ij m_i.
/// Nonnegative for convex cost families; strictly positive for the strictly
/// monotone ones when m is strictly positive and P1 != P2.
inline double cost_monotonicity_gap(const CostModel& model,
                                    const Distribution& m,
                                    const StrategyMatrix& P1,
                                    const StrategyMatrix& P2) {
  double total = 0.0;
  for (int i = 0; i < m.size(); ++i)
    for (int j = 0; j < m.size(); ++j)
      total += (model.eval(m.values(), P1.values(), i, j) -
                model.eval(m.values(), P2.values(), i, j)) *
               (P1(i, j) - P2(i, j)) * m[i];
  return total;
}

/// Envelope inequality of the optimal stage cost: returns
///   Phi_m(U2) - Phi_m(U1) - (U2 - U1) . Theta_{U1}(m),
/// which is nonpositive up to solver tolerance (Phi is a min of functions
/// linear in U, and Theta is the corresponding slope).
inline double optimal_cost_envelope_gap(const CostModel& model,
                                        const Distribution& m,
                                        const CostVector& u1,
                                        const CostVector& u2,
                                        const InnerSolverConfig& inner = {}) {
  const StageResult r1 = solve_stage(m, u1, model, inner);
  const StageResult r2 = solve_stage(m, u2, model, inner);
  const Vec theta = push_forward(m.values(), r1.strategy.values());
  double slope = 0.0;
  for (int j = 0; j < m.size(); ++j) slope += (u2[j] - u1[j]) * theta[j];
  return r2.objective - r1.objective - slope;
}

/// Sampled distribution-monotonicity gap: the bilinear quantity
///   m1.(G_{m1}(U2) - G_{m2}(U2)) + m2.(G_{m2}(U1) - G_{m1}(U1))
/// minus gamma * ||m1 - m2||^2, where G is the individual-cost recursion at
/// the stage optimum. Nonnegative (up to solver slack) when the model
/// guarantees modulus gamma.
inline double distribution_monotonicity_gap(
    const CostModel& model, const Distribution& m1, const Distribution& m2,
    const CostVector& u1, const CostVector& u2,
    const InnerSolverConfig& inner, double gamma) {
  auto gamma_op = [&](const Distribution& m, const CostVector& u) {
    const StageResult r = solve_stage(m, u, model, inner);
    return individual_costs(m.values(), r.strategy.values(), u.values(),
                            model);
  };
  const Vec g11 = gamma_op(m1, u1);
  const Vec g21 = gamma_op(m2, u1);
  const Vec g12 = gamma_op(m1, u2);
  const Vec g22 = gamma_op(m2, u2);
  double lhs = 0.0;
  double dist_sq = 0.0;
  for (int i = 0; i < m1.size(); ++i) {
    lhs += m1[i] * (g12[i] - g22[i]) + m2[i] * (g21[i] - g11[i]);
    dist_sq += (m1[i] - m2[i]) * (m1[i] - m2[i]);
  }
  return lhs - gamma * dist_sq;
}

namespace detail {

// Minimizes sum_j (c_ij(m, P[row i := q]) + U_j) q_j over the row simplex
// with finite-difference gradients: an independent per-row reference solver
// for row-decoupled models.
inline Vec solve_row_independent(const CostModel& model, const Vec& m,
                                 int row, const Vec& u_next, bool interior,
                                 double eps) {
  const int s = static_cast<int>(m.size());
  Matrix base(s, s, 1.0 / static_cast<double>(s));
  auto objective = [&](const Vec& q) {
    for (int j = 0; j < s; ++j) base(row, j) = q[j];
    double total = 0.0;
    for (int j = 0; j < s; ++j)
      total += (model.eval(m, base, row, j) + u_next[j]) * q[j];
    return total;
  };
  auto fd_gradient = [&](const Vec& q) {
    const double h = 1e-6;
    Vec g(s);
    Vec probe = q;
    for (int j = 0; j < s; ++j) {
      probe[j] = q[j] + h;
      const double up = objective(probe);
      probe[j] = q[j] - h;
      const double down = objective(probe);
      probe[j] = q[j];
      g[j] = (up - down) / (2.0 * h);
    }
    return g;
  };
  auto feasible = [&](Vec q) {
    q = project_row_to_simplex(std::move(q));
    if (interior) clamp_row_interior(q, eps);
    return q;
  };

  Vec q(s, 1.0 / static_cast<double>(s));
  double f = objective(q);
  for (int it = 0; it < 20000; ++it) {
    const Vec g = fd_gradient(q);
    Vec stepped = q;
    for (int j = 0; j < s; ++j) stepped[j] -= g[j];
    if (linf_diff(q, feasible(std::move(stepped))) <= 1e-9) break;
    double t = 1.0;
    bool accepted = false;
    while (t >= 1e-18) {
      Vec cand = q;
      for (int j = 0; j < s; ++j) cand[j] -= t * g[j];
      cand = feasible(std::move(cand));
      const double fc = objective(cand);
      double decrease = 0.0;
      for (int j = 0; j < s; ++j) decrease += g[j] * (cand[j] - q[j]);
      if (fc <= f + 1e-4 * decrease) {
        q = std::move(cand);
        f = fc;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  return q;
}

}  // namespace detail

/// For row-decoupled costs the social optimum coincides with independent
/// per-row optimization. Returns the max-entry distance between the joint
/// stage solution and the row-by-row reference solution.
inline double competitive_equivalence_gap(const CostModel& model,
                                          const Distribution& m,
                                          const CostVector& u_next,
                                          const InnerSolverConfig& inner = {}) {
  if (!model.row_decoupled())
    throw InvalidInputError(
        "competitive_equivalence_gap: model is not row-decoupled");
  const StageResult joint = solve_stage(m, u_next, model, inner);
  const int s = m.size();
  double gap = 0.0;
  for (int i = 0; i < s; ++i) {
    const Vec q = detail::solve_row_independent(
        model, m.values(), i, u_next.values(), model.interior_only(),
        inner.interior_eps);
    for (int j = 0; j < s; ++j)
      gap = std::max(gap, std::abs(q[j] - joint.strategy(i, j)));
  }
  return gap;
}

/// Deviation probe for stage optimality: replaces single rows of the solved
/// strategy with random simplex rows and returns the largest objective
/// improvement found (positive values would contradict optimality).
inline double max_single_row_improvement(const CostModel& model,
                                         const Distribution& m,
                                         const CostVector& u_next,
                                         const StageResult& solved, Rng& rng,
                                         int samples) {
  const int s = m.size();
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    const int i = static_cast<int>(rng() % static_cast<std::uint64_t>(s));
    Vec q = random_simplex_point(rng, s);
    if (model.interior_only()) clamp_row_interior(q, 1e-9);
    Matrix replaced = solved.strategy.values();
    std::copy(q.begin(), q.end(), replaced.row(i).begin());
    const double value =
        social_cost(m.values(), replaced, u_next.values(), model);
    worst = std::max(worst, solved.objective - value);
  }
  return worst;
}

struct ProbeReport {
  std::string name;
  bool pass = false;
  double observed = 0.0;
  double threshold = 0.0;  // +inf when the probe only logs the observation
  int samples = 0;
  std::uint64_t seed = 0;
  std::string note;
};

/// Runs the standard sampled-probe suite against a model. All draws are
/// seeded; each report records its own seed, observation, and pass bound.
inline std::vector<ProbeReport> run_standard_probes(
    const CostModel& model, int s, const InnerSolverConfig& inner,
    std::uint64_t seed) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<ProbeReport> reports;
  const double min_mass = 0.02;

  {  // convexity-type monotonicity of the cost family
    ProbeReport r{"cost_monotonicity", false, kInf, 0.0, 200, seed + 1, ""};
    Rng rng(r.seed);
    const bool strict = model.interior_only();
    for (int k = 0; k < r.samples; ++k) {
      const Distribution m = random_interior_distribution(rng, s, min_mass);
      const StrategyMatrix p1 = random_interior_strategy(rng, s, min_mass);
      const StrategyMatrix p2 = random_interior_strategy(rng, s, min_mass);
      r.observed = std::min(r.observed,
                            cost_monotonicity_gap(model, m, p1, p2));
    }
    r.pass = strict ? r.observed > 0.0 : r.observed >= -1e-10;
    r.note = strict ? "strict positivity required" : "nonnegativity required";
    reports.push_back(std::move(r));
  }

  {  // analytic gradient vs central finite differences
    ProbeReport r{"gradient_finite_difference", false, 0.0, 1e-5, 100,
                  seed + 2, "relative mismatch"};
    Rng rng(r.seed);
    const double h = 1e-6;
    for (int k = 0; k < r.samples; ++k) {
      const Distribution m = random_interior_distribution(rng, s, min_mass);
      const StrategyMatrix P = random_interior_strategy(rng, s, 0.05);
      const CostVector u = random_cost_vector(rng, s, -2.0, 2.0);
      const Matrix g = stage_gradient(m.values(), P.values(), u.values(), model);
      Matrix probe = P.values();
      for (int i = 0; i < s; ++i) {
        for (int j = 0; j < s; ++j) {
          probe(i, j) = P(i, j) + h;
          const double up = social_cost(m.values(), probe, u.values(), model);
          probe(i, j) = P(i, j) - h;
          const double down = social_cost(m.values(), probe, u.values(), model);
          probe(i, j) = P(i, j);
          const double fd = (up - down) / (2.0 * h);
          const double rel = std::abs(g(i, j) - fd) /
                             std::max({1.0, std::abs(fd), std::abs(g(i, j))});
          r.observed = std::max(r.observed, rel);
        }
      }
    }
    r.pass = r.observed <= r.threshold;
    reports.push_back(std::move(r));
  }

  {  // envelope inequality of the optimal stage cost
    ProbeReport r{"optimal_cost_envelope", false,
                  -std::numeric_limits<double>::infinity(), 1e-8, 200,
                  seed + 3, "max gap; must stay below solver slack"};
    Rng rng(r.seed);
    for (int k = 0; k < r.samples; ++k) {
      const Distribution m = random_interior_distribution(rng, s, min_mass);
      const CostVector u1 = random_cost_vector(rng, s, -2.0, 2.0);
      const CostVector u2 = random_cost_vector(rng, s, -2.0, 2.0);
      r.observed = std::max(
          r.observed, optimal_cost_envelope_gap(model, m, u1, u2, inner));
    }
    r.pass = r.observed <= r.threshold;
    reports.push_back(std::move(r));
  }

  {  // constant shifts move the optimal cost and recursion by the shift
    ProbeReport rphi{"optimal_cost_shift", false, 0.0, 1e-8, 100, seed + 4, ""};
    ProbeReport rgam{"cost_recursion_shift", false, 0.0, 1e-8, 100, seed + 4,
                     ""};
    Rng rng(rphi.seed);
    for (int k = 0; k < rphi.samples; ++k) {
      const Distribution m = random_interior_distribution(rng, s, min_mass);
      const CostVector u = random_cost_vector(rng, s, -2.0, 2.0);
      const double a = next_in(rng, -5.0, 5.0);
      Vec shifted = u.values();
      for (double& x : shifted) x += a;
      const StageResult base = solve_stage(m, u, model, inner);
      const StageResult moved =
          solve_stage(m, CostVector(shifted), model, inner);
      rphi.observed = std::max(
          rphi.observed, std::abs(moved.objective - base.objective - a));
      const Vec gb = individual_costs(m.values(), base.strategy.values(),
                                      u.values(), model);
      const Vec gm = individual_costs(m.values(), moved.strategy.values(),
                                      shifted, model);
      for (int i = 0; i < s; ++i)
        rgam.observed = std::max(rgam.observed, std::abs(gm[i] - gb[i] - a));
    }
    rphi.pass = rphi.observed <= rphi.threshold;
    rgam.pass = rgam.observed <= rgam.threshold;
    reports.push_back(std::move(rphi));
    reports.push_back(std::move(rgam));
  }

  {  // no sampled single-row replacement beats the solved strategy
    ProbeReport r{"row_deviation_optimality", false,
                  -std::numeric_limits<double>::infinity(), 1e-8, 100,
                  seed + 5, "max improvement over solved strategy"};
    Rng rng(r.seed);
    for (int k = 0; k < 10; ++k) {
      const Distribution m = random_interior_distribution(rng, s, min_mass);
      const CostVector u = random_cost_vector(rng, s, -2.0, 2.0);
      const StageResult solved = solve_stage(m, u, model, inner);
      r.observed = std::max(
          r.observed,
          max_single_row_improvement(model, m, u, solved, rng, 10));
    }
    r.pass = r.observed <= r.threshold;
    reports.push_back(std::move(r));
  }

  if (model.row_decoupled()) {
    ProbeReport r{"competitive_equivalence", false, 0.0, 1e-6, 20, seed + 6,
                  "joint vs per-row solution distance"};
    Rng rng(r.seed);
    for (int k = 0; k < r.samples; ++k) {
      const Distribution m = random_interior_distribution(rng, s, 0.05);
      const CostVector u = random_cost_vector(rng, s, -2.0, 2.0);
      r.observed =
          std::max(r.observed, competitive_equivalence_gap(model, m, u, inner));
    }
    r.pass = r.observed <= r.threshold;
    reports.push_back(std::move(r));
  }

  if (model.monotonicity_modulus() > 0.0) {
    ProbeReport r{"distribution_monotonicity", false, kInf, -1e-8, 200,
                  seed + 7, "min gap at the model's guaranteed modulus"};
    Rng rng(r.seed);
    const double gamma = model.monotonicity_modulus();
    for (int k = 0; k < r.samples; ++k) {
      const Distribution m1 = random_interior_distribution(rng, s, min_mass);
      const Distribution m2 = random_interior_distribution(rng, s, min_mass);
      const CostVector u1 = random_cost_vector(rng, s, -2.0, 2.0);
      const CostVector u2 = random_cost_vector(rng, s, -2.0, 2.0);
      r.observed = std::min(
          r.observed, distribution_monotonicity_gap(model, m1, m2, u1, u2,
                                                    inner, gamma));
    }
    r.pass = r.observed >= r.threshold;
    reports.push_back(std::move(r));
  }

  {  // row-swap cost comparison (bounded by 2 for the cross-arrival model)
    ProbeReport r{"row_swap_cost_bound", false, 0.0,
                  model.name() == "example2" ? 2.0 + 1e-9 : kInf, 200,
                  seed + 8, "max row-swap quantity"};
    Rng rng(r.seed);
    for (int k = 0; k < r.samples; ++k) {
      const Distribution m = random_interior_distribution(rng, s, 0.05);
      const CostVector u = random_cost_vector(rng, s, -2.0, 2.0);
      const StageResult solved = solve_stage(m, u, model, inner);
      const int p = static_cast<int>(rng() % static_cast<std::uint64_t>(s));
      int pp = static_cast<int>(rng() % static_cast<std::uint64_t>(s - 1));
      if (pp >= p) ++pp;
      Matrix swapped = solved.strategy.values();
      std::copy(solved.strategy.values().row(p).begin(),
                solved.strategy.values().row(p).end(),
                swapped.row(pp).begin());
      double quantity = 0.0;
      for (int j = 0; j < s; ++j)
        quantity += std::abs(model.eval(m.values(), solved.strategy.values(),
                                        p, j) -
                             model.eval(m.values(), swapped, pp, j)) *
                    solved.strategy(p, j);
      r.observed = std::max(r.observed, quantity);
    }
    r.pass = std::isfinite(r.observed) && r.observed <= r.threshold;
    reports.push_back(std::move(r));
  }

  {  // spread of the cost recursion stays bounded on interior distributions
    ProbeReport r{"cost_recursion_spread", false, 0.0, kInf, 200, seed + 9,
                  "max spread; finiteness is the assertion, value is logged"};
    Rng rng(r.seed);
    for (int k = 0; k < r.samples; ++k) {
      const Distribution m = random_interior_distribution(rng, s, 0.05);
      const CostVector u = random_cost_vector(rng, s, -5.0, 5.0);
      const StageResult solved = solve_stage(m, u, model, inner);
      const Vec gamma = individual_costs(m.values(), solved.strategy.values(),
                                         u.values(), model);
      const auto [lo, hi] = std::minmax_element(gamma.begin(), gamma.end());
      r.observed = std::max(r.observed, *hi - *lo);
    }
    r.pass = std::isfinite(r.observed);
    reports.push_back(std::move(r));
  }

  return reports;
}

}  // namespace mfgs::verification
