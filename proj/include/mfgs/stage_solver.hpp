#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "mfgs/core.hpp"
#include "mfgs/cost_model.hpp"
#include "mfgs/errors.hpp"
#include "mfgs/simplex.hpp"
#include "mfgs/types.hpp"

namespace mfgs {

struct InnerSolverConfig {
  int max_iters = 5000;
  double grad_tol = 1e-8;
  double step_init = 1.0;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  double interior_eps = 1e-9;

  void validate() const {
    if (max_iters <= 0 || !(grad_tol > 0.0) || !(step_init > 0.0) ||
        !(interior_eps > 0.0))
      throw InvalidInputError("InnerSolverConfig: parameters must be positive");
    if (!(armijo_c > 0.0 && armijo_c < 1.0) ||
        !(armijo_shrink > 0.0 && armijo_shrink < 1.0))
      throw InvalidInputError("InnerSolverConfig: armijo parameters in (0,1)");
  }
};

/// First-order optimality certificate for the stage problem: multipliers for
/// the row-sum equalities (lambda) and the nonnegativity bounds (mu), plus
/// the max-norm violations of stationarity and complementary slackness.
struct KKTReport {
  Vec lambda;
  Matrix mu;
  double stationarity_residual = 0.0;
  double complementarity_residual = 0.0;
};

struct StageResult {
  StrategyMatrix strategy;
  double objective;
  KKTReport kkt;
  int iterations;
  double residual;
};

/// Stage-solver iteration budget exhausted; carries the best iterate.
class StageConvergenceFailure : public ConvergenceFailure {
 public:
  StageConvergenceFailure(const std::string& what, double residual,
                          Matrix best)
      : ConvergenceFailure(what, residual), best_(std::move(best)) {}
  const Matrix& best_iterate() const noexcept { return best_; }

 private:
  Matrix best_;
};

/// Full gradient of the stage objective with respect to P:
/// entry (i,j) = d(running cost aggregate)/dP_ij + U_next_j m_i.
inline Matrix stage_gradient(const Vec& m, const Matrix& P, const Vec& u_next,
                             const CostModel& model) {
  detail::check_dims(m.size(), P, u_next.size(), "stage_gradient");
  Matrix g = model.running_cost_gradient(m, P);
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j) g(i, j) += u_next[j] * m[i];
  return g;
}

inline Matrix stage_gradient(const Distribution& m, const StrategyMatrix& P,
                             const CostVector& u_next,
                             const CostModel& model) {
  return stage_gradient(m.values(), P.values(), u_next.values(), model);
}

/// Recovers multipliers from stationarity by least squares: lambda_i is the
/// mean gradient over the interior coordinates of row i (where mu must
/// vanish), and mu absorbs the remaining slack on boundary coordinates.
inline KKTReport kkt_residuals(const Distribution& m, const StrategyMatrix& P,
                               const CostVector& u_next,
                               const CostModel& model,
                               double boundary_tol = 1e-6) {
  const int s = m.size();
  const Matrix g = stage_gradient(m, P, u_next, model);
  KKTReport report;
  report.lambda.assign(s, 0.0);
  report.mu = Matrix(s, s, 0.0);
  for (int i = 0; i < s; ++i) {
    double sum = 0.0;
    int interior = 0;
    for (int j = 0; j < s; ++j) {
      if (P(i, j) > boundary_tol) {
        sum += g(i, j);
        ++interior;
      }
    }
    report.lambda[i] = interior > 0 ? sum / interior : 0.0;
    for (int j = 0; j < s; ++j) {
      if (P(i, j) <= boundary_tol)
        report.mu(i, j) = std::max(0.0, g(i, j) - report.lambda[i]);
      const double stat = g(i, j) - report.lambda[i] - report.mu(i, j);
      report.stationarity_residual =
          std::max(report.stationarity_residual, std::abs(stat));
      report.complementarity_residual = std::max(
          report.complementarity_residual, std::abs(report.mu(i, j) * P(i, j)));
    }
  }
  return report;
}

namespace detail {

struct MappingResidual {
  double linf = 0.0;
  double scaled_l2 = 0.0;
};

// Projected-gradient mapping displacement P - proj(P - g) with unit step.
// The l2 part is weighted per row when row_scale is given.
inline MappingResidual stage_residual(const Matrix& P, const Matrix& g,
                                      bool interior, double eps,
                                      const Vec* row_scale = nullptr) {
  Matrix stepped = P;
  for (int i = 0; i < P.rows(); ++i)
    for (int j = 0; j < P.cols(); ++j) stepped(i, j) -= g(i, j);
  const Matrix proj = project_to_feasible(std::move(stepped), interior, eps);
  MappingResidual r;
  for (int i = 0; i < P.rows(); ++i) {
    const double w = row_scale ? (*row_scale)[i] : 1.0;
    for (int j = 0; j < P.cols(); ++j) {
      const double d = P(i, j) - proj(i, j);
      r.linf = std::max(r.linf, std::abs(d));
      r.scaled_l2 += w * d * d;
    }
  }
  r.scaled_l2 = std::sqrt(r.scaled_l2);
  return r;
}

}  // namespace detail

/// Minimizes the stage social cost over row-stochastic matrices by projected
/// gradient descent with Armijo backtracking. Steps are rescaled per row by
/// 1/m_i (the objective weights row i by m_i), which keeps the effective
/// conditioning independent of the distribution; descent is still certified
/// against the raw gradient.
inline StageResult solve_stage(const Distribution& m, const CostVector& u_next,
                               const CostModel& model,
                               const InnerSolverConfig& cfg = {},
                               const StrategyMatrix* start = nullptr) {
  cfg.validate();
  if (u_next.size() != m.size())
    throw InvalidInputError("solve_stage: dimension mismatch");
  const int s = m.size();
  const bool interior = model.interior_only();
  const double eps = cfg.interior_eps;

  Matrix P = start ? start->values()
                   : Matrix(s, s, 1.0 / static_cast<double>(s));
  P = project_to_feasible(std::move(P), interior, eps);

  Vec row_scale(s);
  for (int i = 0; i < s; ++i) row_scale[i] = 1.0 / std::max(m[i], 1e-12);

  auto take_step = [&](const Matrix& from, const Matrix& g, double t) {
    Matrix cand = from;
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) cand(i, j) -= t * row_scale[i] * g(i, j);
    return project_to_feasible(std::move(cand), interior, eps);
  };

  double f = social_cost(m.values(), P, u_next.values(), model);
  detail::MappingResidual residual;
  // Armijo backtracking on the row-rescaled direction drives the objective
  // down while decreases are still measurable in double precision. Two
  // failure modes of plain backtracking get dedicated handling:
  //  - knife-edge oscillation: a step at the stability boundary passes the
  //    Armijo test with a decrease far below the predicted one; the step cap
  //    is halved so the next iterations contract instead of cycling;
  //  - machine-noise floor: once decreases are unmeasurable, function
  //    comparisons carry no information, so the tail switches to fixed-step
  //    projected gradient accepted when the scale-weighted l2 mapping
  //    displacement does not grow (the weighting matches the step metric, so
  //    that norm decreases along the rescaled flow).
  bool flat_phase = false;
  double step_cap = cfg.step_init;
  double healthy_step = cfg.step_init;  // last step with real measured progress
  double tail_step = cfg.step_init;
  int iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    const Matrix g = stage_gradient(m.values(), P, u_next.values(), model);
    residual = detail::stage_residual(P, g, interior, eps, &row_scale);
    if (residual.linf <= cfg.grad_tol) break;

    if (!flat_phase) {
      double t = step_cap;
      bool stalled = false;
      Matrix cand;
      double fc = f;
      double predicted = 0.0;
      while (true) {
        cand = take_step(P, g, t);
        fc = social_cost(m.values(), cand, u_next.values(), model);
        const double decrease =
            dot(g.data(), cand.data()) - dot(g.data(), P.data());
        if (fc <= f + cfg.armijo_c * decrease) {
          predicted = -decrease;
          break;
        }
        t *= cfg.armijo_shrink;
        if (t < 1e-18) {
          stalled = true;
          break;
        }
      }
      if (stalled) {
        flat_phase = true;
        tail_step = healthy_step;
        continue;
      }
      const double actual = f - fc;
      P = std::move(cand);
      f = fc;
      if (actual <= 1e-14 * std::max(1.0, std::abs(f))) {
        flat_phase = true;
        tail_step = healthy_step;
      } else if (actual < 0.01 * predicted) {
        step_cap = std::max(t * 0.5, 1e-12);
        healthy_step = t;
      } else {
        step_cap = std::min(cfg.step_init, step_cap * 1.414);
        healthy_step = t;
      }
    } else {
      Matrix cand = take_step(P, g, tail_step);
      const Matrix g2 = stage_gradient(m.values(), cand, u_next.values(), model);
      const detail::MappingResidual r2 =
          detail::stage_residual(cand, g2, interior, eps, &row_scale);
      if (r2.scaled_l2 <= residual.scaled_l2 * (1.0 + 1e-12)) {
        P = std::move(cand);
        tail_step *= 1.3;
      } else {
        tail_step *= 0.5;
      }
    }
  }

  if (residual.linf > cfg.grad_tol)
    throw StageConvergenceFailure(
        "solve_stage: residual " + std::to_string(residual.linf) +
            " > grad_tol after " + std::to_string(iter) + " iterations",
        residual.linf, P);

  f = social_cost(m.values(), P, u_next.values(), model);
  StrategyMatrix strategy(std::move(P));
  KKTReport kkt = kkt_residuals(m, strategy, u_next, model);
  return StageResult{std::move(strategy), f, std::move(kkt), iter,
                     residual.linf};
}

}  // namespace mfgs
