#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "mfgs/core.hpp"
#include "mfgs/errors.hpp"
#include "mfgs/rng.hpp"
#include "mfgs/stage_solver.hpp"
#include "mfgs/types.hpp"

namespace mfgs {

struct StationaryConfig {
  double damping_m = 0.5;  // in (0,1]
  double rvi_tol = 1e-10;
  double outer_tol = 1e-8;
  int max_outer = 2000;
  int max_rvi = 10000;
  InnerSolverConfig inner;

  void validate() const {
    inner.validate();
    if (!(damping_m > 0.0 && damping_m <= 1.0))
      throw InvalidInputError("StationaryConfig: damping_m must be in (0,1]");
    if (!(rvi_tol > 0.0) || !(outer_tol > 0.0) || max_outer <= 0 || max_rvi <= 0)
      throw InvalidInputError("StationaryConfig: parameters must be positive");
  }
};

// Entries below this are floored (and the row renormalized) during the outer
// distribution update; the cost recursion needs an interior distribution.
inline constexpr double kStationaryFloor = 1e-6;

/// Norm on cost vectors modulo constant shifts: the Euclidean norm of the
/// mean-centered vector (the minimizing shift is the mean).
inline double quotient_norm(const Vec& u) {
  const double mean =
      std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(u.size());
  double sq = 0.0;
  for (double x : u) sq += (x - mean) * (x - mean);
  return std::sqrt(sq);
}

inline double quotient_norm(const CostVector& u) {
  return quotient_norm(u.values());
}

/// Running cost aggregate sum_{i,j} c_ij(m,P) m_i P_ij. At a stationary
/// solution this equals the per-step cost increment lambda.
inline double critical_value(const Distribution& m, const StrategyMatrix& P,
                             const CostModel& model) {
  double total = 0.0;
  for (int i = 0; i < m.size(); ++i)
    for (int j = 0; j < m.size(); ++j)
      total += model.eval(m.values(), P.values(), i, j) * m[i] * P(i, j);
  return total;
}

struct RviResult {
  CostVector u;  // normalized: u[0] == 0
  double lambda;
  StrategyMatrix strategy;  // stage optimum at (m, u)
  int iterations;
  double residual;
};

/// Solves the stationary cost equation at fixed distribution m in the
/// quotient space of constant shifts: iterates the cost recursion and
/// renormalizes by the first entry until U + lambda matches its own
/// recursion within rvi_tol.
inline RviResult relative_value_iteration(const Distribution& m,
                                          const CostVector& u0,
                                          const CostModel& model,
                                          const StationaryConfig& cfg = {},
                                          const StrategyMatrix* warm = nullptr) {
  cfg.validate();
  if (u0.size() != m.size())
    throw InvalidInputError("relative_value_iteration: dimension mismatch");
  if (!(m.min_entry() > 0.0))
    throw InvalidInputError(
        "relative_value_iteration: m must be strictly positive");
  const int s = m.size();

  Vec u = u0.values();
  const double shift = u[0];
  for (double& x : u) x -= shift;

  StrategyMatrix strategy = warm ? *warm : StrategyMatrix::uniform(s);
  bool have_strategy = warm != nullptr;
  double residual = 0.0;
  for (int it = 0; it < cfg.max_rvi; ++it) {
    StageResult stage =
        solve_stage(m, CostVector(u), model, cfg.inner,
                    have_strategy ? &strategy : nullptr);
    strategy = std::move(stage.strategy);
    have_strategy = true;
    const Vec v =
        individual_costs(m.values(), strategy.values(), u, model);
    const double lambda = v[0];
    residual = 0.0;
    for (int i = 0; i < s; ++i)
      residual = std::max(residual, std::abs(v[i] - u[i] - lambda));
    if (residual <= cfg.rvi_tol)
      return RviResult{CostVector(std::move(u)), lambda, std::move(strategy),
                       it + 1, residual};
    for (int i = 0; i < s; ++i) u[i] = v[i] - lambda;
  }
  throw ConvergenceFailure(
      "relative_value_iteration: residual " + std::to_string(residual) +
          " > rvi_tol after " + std::to_string(cfg.max_rvi) + " iterations",
      residual);
}

struct StationaryRunInfo {
  int outer_iterations = 0;
  int rvi_iterations_total = 0;
  int floor_events = 0;
  std::vector<double> m_residual_history;
  std::vector<double> cost_residual_history;
};

/// Checks the structural invariants of a stationary solution; throws on
/// violation.
inline void validate(const StationarySolution& sol, const CostModel& model) {
  const Vec pushed = push_forward(sol.m_bar.values(), sol.strategy.values());
  if (linf_diff(pushed, sol.m_bar.values()) > 1e-8)
    throw InvalidInputError("StationarySolution: m_bar is not stationary");
  const Vec gamma = individual_costs(sol.m_bar.values(), sol.strategy.values(),
                                     sol.u_bar.values(), model);
  for (int i = 0; i < sol.m_bar.size(); ++i)
    if (std::abs(gamma[i] - sol.u_bar[i] - sol.lambda_bar) > 1e-8)
      throw InvalidInputError("StationarySolution: cost equation violated");
}

/// Finds a stationary solution by alternating the cost equation (relative
/// value iteration at fixed m) with a damped distribution update toward the
/// push-forward under the current optimal strategy.
inline StationarySolution solve_stationary(const CostModel& model,
                                           const StationaryConfig& cfg,
                                           const Distribution& m0_guess,
                                           StationaryRunInfo* info = nullptr) {
  cfg.validate();
  if (!(m0_guess.min_entry() > 0.0))
    throw InvalidInputError("solve_stationary: m0_guess must be interior");
  const int s = m0_guess.size();

  Vec m = m0_guess.values();
  CostVector u = CostVector::zeros(s);
  StrategyMatrix strategy = StrategyMatrix::uniform(s);
  bool have_strategy = false;
  std::vector<double> m_history, cost_history;
  int floor_events = 0;
  int rvi_total = 0;
  double m_residual = 0.0;
  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    const Distribution m_dist = Distribution::unchecked(m);
    RviResult rvi = relative_value_iteration(
        m_dist, u, model, cfg, have_strategy ? &strategy : nullptr);
    u = rvi.u;
    strategy = rvi.strategy;
    have_strategy = true;
    rvi_total += rvi.iterations;

    const Vec pushed = push_forward(m, strategy.values());
    m_residual = linf_diff(pushed, m);
    m_history.push_back(m_residual);
    cost_history.push_back(rvi.residual);
    if (info) {
      info->outer_iterations = outer + 1;
      info->rvi_iterations_total = rvi_total;
      info->floor_events = floor_events;
      info->m_residual_history = m_history;
      info->cost_residual_history = cost_history;
    }
    if (m_residual <= cfg.outer_tol) {
      StationarySolution sol{Distribution(m), std::move(u), rvi.lambda,
                             std::move(strategy),
                             {rvi.residual, m_residual}};
      validate(sol, model);
      return sol;
    }

    double sum = 0.0;
    bool floored = false;
    for (int i = 0; i < s; ++i) {
      m[i] = (1.0 - cfg.damping_m) * m[i] + cfg.damping_m * pushed[i];
      if (m[i] < kStationaryFloor) {
        m[i] = kStationaryFloor;
        floored = true;
      }
      sum += m[i];
    }
    for (int i = 0; i < s; ++i) m[i] /= sum;
    if (floored) ++floor_events;
  }
  throw ConvergenceFailure(
      "solve_stationary: distribution residual " + std::to_string(m_residual) +
          " > outer_tol after " + std::to_string(cfg.max_outer) +
          " outer iterations",
      m_residual, m_history);
}

struct MultistartStationaryReport {
  std::vector<StationarySolution> solutions;
  double max_m_gap = 0.0;
  double max_lambda_gap = 0.0;
  double max_u_quotient_gap = 0.0;
};

/// Runs solve_stationary from `starts` random interior guesses and reports
/// the largest pairwise disagreement (distribution, critical value, and cost
/// vector up to constant shifts): the uniqueness diagnostic.
inline MultistartStationaryReport solve_stationary_multistart(
    const CostModel& model, const StationaryConfig& cfg, int s, int starts,
    Rng& rng) {
  MultistartStationaryReport report;
  for (int run = 0; run < starts; ++run) {
    const Distribution guess = random_interior_distribution(rng, s, 0.05);
    report.solutions.push_back(solve_stationary(model, cfg, guess));
  }
  for (std::size_t a = 0; a < report.solutions.size(); ++a) {
    for (std::size_t b = a + 1; b < report.solutions.size(); ++b) {
      const StationarySolution& x = report.solutions[a];
      const StationarySolution& y = report.solutions[b];
      report.max_m_gap = std::max(
          report.max_m_gap, linf_diff(x.m_bar.values(), y.m_bar.values()));
      report.max_lambda_gap = std::max(
          report.max_lambda_gap, std::abs(x.lambda_bar - y.lambda_bar));
      Vec du(x.u_bar.size());
      for (int i = 0; i < x.u_bar.size(); ++i)
        du[i] = x.u_bar[i] - y.u_bar[i];
      report.max_u_quotient_gap =
          std::max(report.max_u_quotient_gap, quotient_norm(du));
    }
  }
  return report;
}

}  // namespace mfgs
