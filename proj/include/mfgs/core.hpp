#pragma once

#include <cmath>
#include <string>

#include "mfgs/cost_model.hpp"
#include "mfgs/errors.hpp"
#include "mfgs/types.hpp"

namespace mfgs {

namespace detail {

inline void check_dims(std::size_t m_size, const Matrix& P, std::size_t u_size,
                       const char* what) {
  if (P.rows() != P.cols() || m_size != static_cast<std::size_t>(P.rows()) ||
      (u_size != 0 && u_size != m_size))
    throw InvalidInputError(std::string(what) + ": dimension mismatch");
}

}  // namespace detail

/// One step of the distribution evolution: result_j = sum_i m_i P_ij.
inline Vec push_forward(const Vec& m, const Matrix& P) {
  detail::check_dims(m.size(), P, 0, "push_forward");
  const int s = P.rows();
  Vec out(s, 0.0);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) out[j] += m[i] * P(i, j);
  return out;
}

inline Distribution push_forward(const Distribution& m,
                                 const StrategyMatrix& P) {
  return Distribution(push_forward(m.values(), P.values()));
}

/// Stage social cost: sum_{i,j} (c_ij(m,P) + U_next_j) m_i P_ij.
/// Throws NumericDomainError naming (i,j) when a term is singular or
/// evaluates non-finite.
inline double social_cost(const Vec& m, const Matrix& P, const Vec& u_next,
                          const CostModel& model) {
  detail::check_dims(m.size(), P, u_next.size(), "social_cost");
  const int s = P.rows();
  double total = 0.0;
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      const double c = model.eval(m, P, i, j);
      const double term = (c + u_next[j]) * m[i] * P(i, j);
      if (!std::isfinite(term))
        throw NumericDomainError("social_cost: non-finite term at (" +
                                 std::to_string(i) + "," + std::to_string(j) +
                                 ")");
      total += term;
    }
  }
  return total;
}

inline double social_cost(const Distribution& m, const StrategyMatrix& P,
                          const CostVector& u_next, const CostModel& model) {
  return social_cost(m.values(), P.values(), u_next.values(), model);
}

/// Per-state cost recursion: entry i = sum_j (c_ij(m,P) + U_next_j) P_ij.
/// Weighting by m and summing reproduces social_cost.
inline Vec individual_costs(const Vec& m, const Matrix& P, const Vec& u_next,
                            const CostModel& model) {
  detail::check_dims(m.size(), P, u_next.size(), "individual_costs");
  const int s = P.rows();
  Vec out(s, 0.0);
  for (int i = 0; i < s; ++i) {
    double acc = 0.0;
    for (int j = 0; j < s; ++j) {
      const double c = model.eval(m, P, i, j);
      const double term = (c + u_next[j]) * P(i, j);
      if (!std::isfinite(term))
        throw NumericDomainError("individual_costs: non-finite term at (" +
                                 std::to_string(i) + "," + std::to_string(j) +
                                 ")");
      acc += term;
    }
    out[i] = acc;
  }
  return out;
}

inline CostVector individual_costs(const Distribution& m,
                                   const StrategyMatrix& P,
                                   const CostVector& u_next,
                                   const CostModel& model) {
  return CostVector(
      individual_costs(m.values(), P.values(), u_next.values(), model));
}

}  // namespace mfgs
