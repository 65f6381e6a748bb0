#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mfgs/errors.hpp"
#include "mfgs/matrix.hpp"

namespace mfgs {

/// Absolute tolerance for probability-simplex validation. Inputs whose
/// deviation stays below it are renormalized; larger violations are rejected.
inline constexpr double kSimplexTol = 1e-12;

class CostModel;

namespace detail {

// Validates v as a probability vector and renormalizes in place.
inline void normalize_probability_vector(Vec& v, const std::string& what) {
  if (v.size() < 2)
    throw InvalidInputError(what + ": needs at least 2 states, got " +
                            std::to_string(v.size()));
  double sum = 0.0;
  for (double& x : v) {
    if (!std::isfinite(x))
      throw InvalidInputError(what + ": non-finite entry");
    if (x < 0.0) {
      if (x < -kSimplexTol)
        throw InvalidInputError(what + ": negative entry " +
                                std::to_string(x));
      x = 0.0;
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > kSimplexTol)
    throw InvalidInputError(what + ": entries must sum to 1, got " +
                            std::to_string(sum));
  for (double& x : v) x /= sum;
}

}  // namespace detail

/// Point on the probability simplex: the population share of each state.
class Distribution {
 public:
  explicit Distribution(Vec probs) : probs_(std::move(probs)) {
    detail::normalize_probability_vector(probs_, "Distribution");
  }

  static Distribution uniform(int s) {
    return unchecked(Vec(s, 1.0 / static_cast<double>(s)));
  }

  static Distribution point_mass(int s, int state) {
    Vec v(s, 0.0);
    v[state] = 1.0;
    return unchecked(std::move(v));
  }

  /// Wraps values without validation; caller is responsible for them.
  static Distribution unchecked(Vec probs) {
    Distribution d;
    d.probs_ = std::move(probs);
    return d;
  }

  int size() const noexcept { return static_cast<int>(probs_.size()); }
  double operator[](int i) const { return probs_[i]; }
  const Vec& values() const noexcept { return probs_; }

  double min_entry() const { return *std::min_element(probs_.begin(), probs_.end()); }

 private:
  Distribution() = default;
  Vec probs_;
};

/// Row-stochastic transition matrix: row i is the strategy of state i.
class StrategyMatrix {
 public:
  explicit StrategyMatrix(Matrix rows) : rows_(std::move(rows)) {
    if (rows_.rows() != rows_.cols())
      throw InvalidInputError("StrategyMatrix: must be square");
    if (rows_.rows() < 2)
      throw InvalidInputError("StrategyMatrix: needs at least 2 states");
    for (int i = 0; i < rows_.rows(); ++i) {
      Vec row(rows_.row(i).begin(), rows_.row(i).end());
      detail::normalize_probability_vector(
          row, "StrategyMatrix row " + std::to_string(i));
      std::copy(row.begin(), row.end(), rows_.row(i).begin());
    }
  }

  static StrategyMatrix uniform(int s) {
    return unchecked(Matrix(s, s, 1.0 / static_cast<double>(s)));
  }

  static StrategyMatrix identity(int s) {
    return unchecked(Matrix::identity(s));
  }

  /// Wraps values without validation; caller is responsible for them.
  static StrategyMatrix unchecked(Matrix rows) {
    StrategyMatrix p;
    p.rows_ = std::move(rows);
    return p;
  }

  int size() const noexcept { return rows_.rows(); }
  double operator()(int i, int j) const { return rows_(i, j); }
  const Matrix& values() const noexcept { return rows_; }

 private:
  StrategyMatrix() = default;
  Matrix rows_;
};

/// Per-state cost vector (finite entries).
class CostVector {
 public:
  explicit CostVector(Vec values) : values_(std::move(values)) {
    for (double x : values_)
      if (!std::isfinite(x))
        throw InvalidInputError("CostVector: non-finite entry");
  }

  static CostVector zeros(int s) { return CostVector(Vec(s, 0.0)); }

  int size() const noexcept { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }
  const Vec& values() const noexcept { return values_; }

 private:
  Vec values_;
};

/// Finite-horizon problem data: state count, horizon length, initial
/// distribution, terminal cost, and the transition-cost model.
struct ProblemInstance {
  int s;
  int horizon;  // number of decision times N
  Distribution m0;
  CostVector terminal_cost;
  std::shared_ptr<const CostModel> model;

  ProblemInstance(int s_, int horizon_, Distribution m0_,
                  CostVector terminal_cost_,
                  std::shared_ptr<const CostModel> model_)
      : s(s_),
        horizon(horizon_),
        m0(std::move(m0_)),
        terminal_cost(std::move(terminal_cost_)),
        model(std::move(model_)) {
    if (s < 2)
      throw InvalidInputError("ProblemInstance: s must be at least 2");
    if (horizon < 1)
      throw InvalidInputError("ProblemInstance: horizon must be at least 1");
    if (m0.size() != s)
      throw InvalidInputError("ProblemInstance: m0 has wrong dimension");
    if (terminal_cost.size() != s)
      throw InvalidInputError(
          "ProblemInstance: terminal_cost has wrong dimension");
    if (!model) throw InvalidInputError("ProblemInstance: missing cost model");
  }
};

/// Equilibrium trajectory over the horizon: distributions and costs for
/// times 0..N, strategies for times 0..N-1, plus the fixed-point residual
/// of the outer iteration that produced it.
struct HorizonSolution {
  std::vector<Distribution> distributions;
  std::vector<CostVector> costs;
  std::vector<StrategyMatrix> strategies;
  double fixed_point_residual = 0.0;
};

/// Stationary triple (m_bar, u_bar, lambda_bar) with its strategy and the
/// residuals of the two stationary equations (cost, distribution).
struct StationarySolution {
  Distribution m_bar;
  CostVector u_bar;  // normalized so u_bar[0] == 0
  double lambda_bar;
  StrategyMatrix strategy;
  std::pair<double, double> residuals;
};

}  // namespace mfgs
