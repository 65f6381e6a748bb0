#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfgs/core.hpp"
#include "mfgs/errors.hpp"
#include "mfgs/rng.hpp"
#include "mfgs/stage_solver.hpp"
#include "mfgs/types.hpp"

namespace mfgs {

struct HorizonSolverConfig {
  double damping = 0.5;  // in (0,1]
  int max_outer_iters = 1000;
  double fp_tol = 1e-8;
  InnerSolverConfig inner;
  int multistart_count = 5;

  void validate() const {
    inner.validate();
    if (!(damping > 0.0 && damping <= 1.0))
      throw InvalidInputError("HorizonSolverConfig: damping must be in (0,1]");
    if (max_outer_iters <= 0 || !(fp_tol > 0.0) || multistart_count <= 0)
      throw InvalidInputError("HorizonSolverConfig: parameters must be positive");
  }
};

struct BackwardPassResult {
  std::vector<CostVector> costs;          // length N+1, costs[N] = terminal
  std::vector<StrategyMatrix> strategies;  // length N
};

/// Given a distribution sequence, computes optimal strategies and individual
/// costs backward from the terminal cost. Optional warm starts (e.g. the
/// strategies of the previous outer iteration) speed up the stage solves.
inline BackwardPassResult backward_pass(
    const std::vector<Distribution>& m_seq, const ProblemInstance& instance,
    const InnerSolverConfig& inner,
    const std::vector<StrategyMatrix>* warm = nullptr) {
  const int N = instance.horizon;
  if (static_cast<int>(m_seq.size()) != N + 1)
    throw InvalidInputError("backward_pass: m_seq must have N+1 entries");
  if (linf_diff(m_seq[0].values(), instance.m0.values()) > kSimplexTol)
    throw InvalidInputError("backward_pass: m_seq[0] must equal m0");

  BackwardPassResult out;
  out.costs.assign(N + 1, instance.terminal_cost);
  out.strategies.reserve(N);
  std::vector<StrategyMatrix> strategies(
      N, StrategyMatrix::uniform(instance.s));
  for (int n = N - 1; n >= 0; --n) {
    const StrategyMatrix* start = warm ? &(*warm)[n] : nullptr;
    try {
      StageResult stage =
          solve_stage(m_seq[n], out.costs[n + 1], *instance.model, inner, start);
      strategies[n] = std::move(stage.strategy);
    } catch (const StageConvergenceFailure& e) {
      throw ConvergenceFailure("backward_pass: stage solve failed at step " +
                                   std::to_string(n) + ": " + e.what(),
                               e.residual());
    }
    out.costs[n] =
        individual_costs(m_seq[n], strategies[n], out.costs[n + 1],
                         *instance.model);
  }
  out.strategies = std::move(strategies);
  return out;
}

/// Rolls the initial distribution forward through a strategy sequence.
inline std::vector<Distribution> forward_pass(
    const std::vector<StrategyMatrix>& strategies,
    const ProblemInstance& instance) {
  std::vector<Distribution> out;
  out.reserve(strategies.size() + 1);
  out.push_back(instance.m0);
  for (const StrategyMatrix& P : strategies)
    out.push_back(push_forward(out.back(), P));
  return out;
}

/// Independent re-check of a claimed solution: max violation of the cost
/// recursion (including the terminal anchor) and of the distribution
/// evolution (including the initial anchor).
inline std::pair<double, double> residual_p1(const HorizonSolution& sol,
                                             const ProblemInstance& instance) {
  const int N = instance.horizon;
  double cost_violation =
      linf_diff(sol.costs[N].values(), instance.terminal_cost.values());
  double evolution_violation =
      linf_diff(sol.distributions[0].values(), instance.m0.values());
  for (int n = 0; n < N; ++n) {
    const Vec expected = individual_costs(
        sol.distributions[n].values(), sol.strategies[n].values(),
        sol.costs[n + 1].values(), *instance.model);
    cost_violation =
        std::max(cost_violation, linf_diff(sol.costs[n].values(), expected));
    const Vec pushed = push_forward(sol.distributions[n].values(),
                                    sol.strategies[n].values());
    evolution_violation = std::max(
        evolution_violation, linf_diff(sol.distributions[n + 1].values(), pushed));
  }
  return {cost_violation, evolution_violation};
}

/// Checks the structural invariants of a horizon solution against its
/// instance; throws InvalidInputError on violation.
inline void validate(const HorizonSolution& sol,
                     const ProblemInstance& instance) {
  const int N = instance.horizon;
  if (static_cast<int>(sol.distributions.size()) != N + 1 ||
      static_cast<int>(sol.costs.size()) != N + 1 ||
      static_cast<int>(sol.strategies.size()) != N)
    throw InvalidInputError("HorizonSolution: wrong sequence lengths");
  if (linf_diff(sol.costs[N].values(), instance.terminal_cost.values()) != 0.0)
    throw InvalidInputError("HorizonSolution: terminal cost mismatch");
  for (int n = 0; n < N; ++n) {
    const Vec pushed = push_forward(sol.distributions[n].values(),
                                    sol.strategies[n].values());
    if (linf_diff(sol.distributions[n + 1].values(), pushed) > 1e-10)
      throw InvalidInputError(
          "HorizonSolution: distribution evolution violated at step " +
          std::to_string(n));
  }
}

struct HorizonRunInfo {
  int outer_iterations = 0;
  std::vector<double> residual_history;
};

/// Solves the initial-terminal problem by damped fixed-point iteration on
/// the distribution sequence: each round runs the backward cost/strategy
/// pass and the forward evolution, then blends the sequences.
///
/// The returned solution stores the forward-consistent distributions and
/// re-derives the cost sequence along them, so the recursion and evolution
/// equations hold exactly; fixed_point_residual reports the remaining gap of
/// the outer iteration. Failure to converge raises ConvergenceFailure with
/// the residual history (existence of the fixed point does not guarantee
/// convergence of this iteration).
inline HorizonSolution solve_p1(const ProblemInstance& instance,
                                const HorizonSolverConfig& cfg = {},
                                HorizonRunInfo* info = nullptr,
                                const std::vector<Distribution>* initial = nullptr) {
  cfg.validate();
  const int N = instance.horizon;
  std::vector<Distribution> m_seq;
  if (initial) {
    if (static_cast<int>(initial->size()) != N + 1)
      throw InvalidInputError("solve_p1: initial sequence must have N+1 entries");
    m_seq = *initial;
    if (linf_diff(m_seq[0].values(), instance.m0.values()) > kSimplexTol)
      throw InvalidInputError("solve_p1: initial sequence must start at m0");
  } else {
    m_seq.assign(N + 1, instance.m0);
  }

  std::vector<double> history;
  std::vector<StrategyMatrix> warm;
  double residual = 0.0;
  for (int outer = 0; outer < cfg.max_outer_iters; ++outer) {
    BackwardPassResult bp = backward_pass(
        m_seq, instance, cfg.inner, warm.empty() ? nullptr : &warm);
    std::vector<Distribution> m_new = forward_pass(bp.strategies, instance);
    residual = 0.0;
    for (int n = 0; n <= N; ++n)
      residual = std::max(
          residual, linf_diff(m_new[n].values(), m_seq[n].values()));
    history.push_back(residual);
    if (info) {
      info->outer_iterations = outer + 1;
      info->residual_history = history;
    }
    if (residual <= cfg.fp_tol) {
      HorizonSolution sol;
      sol.strategies = std::move(bp.strategies);
      sol.distributions = std::move(m_new);
      sol.costs.assign(N + 1, instance.terminal_cost);
      for (int n = N - 1; n >= 0; --n)
        sol.costs[n] = individual_costs(sol.distributions[n], sol.strategies[n],
                                        sol.costs[n + 1], *instance.model);
      sol.fixed_point_residual = residual;
      validate(sol, instance);
      return sol;
    }
    for (int n = 1; n <= N; ++n) {
      Vec blended(instance.s);
      for (int i = 0; i < instance.s; ++i)
        blended[i] = (1.0 - cfg.damping) * m_seq[n][i] +
                     cfg.damping * m_new[n][i];
      m_seq[n] = Distribution(std::move(blended));
    }
    warm = std::move(bp.strategies);
  }
  throw ConvergenceFailure(
      "solve_p1: fixed-point residual " + std::to_string(residual) +
          " > fp_tol after " + std::to_string(cfg.max_outer_iters) +
          " outer iterations",
      residual, history);
}

struct MultistartHorizonReport {
  std::vector<HorizonSolution> solutions;
  double max_distribution_gap = 0.0;
  double max_cost_gap = 0.0;
  double max_strategy_gap = 0.0;
};

/// Runs solve_p1 from multistart_count random initial sequences (plus the
/// default constant start) and reports the largest pairwise disagreement:
/// the uniqueness diagnostic for the initial-terminal problem.
inline MultistartHorizonReport solve_p1_multistart(
    const ProblemInstance& instance, const HorizonSolverConfig& cfg,
    Rng& rng) {
  cfg.validate();
  MultistartHorizonReport report;
  report.solutions.push_back(solve_p1(instance, cfg));
  for (int run = 0; run < cfg.multistart_count; ++run) {
    std::vector<Distribution> start;
    start.push_back(instance.m0);
    for (int n = 1; n <= instance.horizon; ++n)
      start.push_back(random_distribution(rng, instance.s));
    report.solutions.push_back(solve_p1(instance, cfg, nullptr, &start));
  }
  const HorizonSolution& ref = report.solutions.front();
  for (std::size_t k = 1; k < report.solutions.size(); ++k) {
    const HorizonSolution& other = report.solutions[k];
    for (int n = 0; n <= instance.horizon; ++n) {
      report.max_distribution_gap = std::max(
          report.max_distribution_gap,
          linf_diff(ref.distributions[n].values(),
                    other.distributions[n].values()));
      report.max_cost_gap =
          std::max(report.max_cost_gap,
                   linf_diff(ref.costs[n].values(), other.costs[n].values()));
      if (n < instance.horizon)
        report.max_strategy_gap = std::max(
            report.max_strategy_gap, linf_diff(ref.strategies[n].values(),
                                               other.strategies[n].values()));
    }
  }
  return report;
}

}  // namespace mfgs
