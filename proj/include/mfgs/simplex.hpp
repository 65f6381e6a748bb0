#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>

#include "mfgs/errors.hpp"
#include "mfgs/matrix.hpp"

namespace mfgs {

/// Euclidean projection onto the scaled simplex {x : x_j >= 0, sum x = total}
/// by sort-and-threshold.
inline Vec project_row_to_simplex(Vec v, double total = 1.0) {
  for (double x : v)
    if (!std::isfinite(x))
      throw InvalidInputError("project_row_to_simplex: non-finite entry");
  Vec sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double running = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    running += sorted[k];
    const double t = (running - total) / static_cast<double>(k + 1);
    if (sorted[k] - t > 0.0) theta = t;
  }
  for (double& x : v) x = std::max(x - theta, 0.0);
  return v;
}

/// Exact Euclidean projection onto the eps-floored simplex
/// {q : sum q = 1, q_j >= eps}: shift by eps, project onto the simplex of
/// mass 1 - s*eps, shift back. (The matching upper bound 1-(s-1)*eps is
/// implied by the floors and the row sum.)
inline void clamp_row_interior(std::span<double> row, double eps) {
  const double total = 1.0 - eps * static_cast<double>(row.size());
  Vec w(row.begin(), row.end());
  for (double& x : w) x -= eps;
  w = project_row_to_simplex(std::move(w), total);
  for (std::size_t j = 0; j < row.size(); ++j) row[j] = w[j] + eps;
}

/// Row-wise feasibility map of the stage problem: Euclidean projection per
/// row, followed by the interior clamp when the cost model needs it.
inline Matrix project_to_feasible(Matrix P, bool interior, double eps) {
  for (int i = 0; i < P.rows(); ++i) {
    Vec row(P.row(i).begin(), P.row(i).end());
    row = project_row_to_simplex(std::move(row));
    std::copy(row.begin(), row.end(), P.row(i).begin());
    if (interior) clamp_row_interior(P.row(i), eps);
  }
  return P;
}

}  // namespace mfgs
