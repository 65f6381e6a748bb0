#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "mfgs/cost_model.hpp"
#include "mfgs/errors.hpp"
#include "mfgs/types.hpp"

namespace mfgs {

namespace detail {

inline void require_open_unit(double p, int i, int j, const char* model) {
  if (!(p > 0.0 && p < 1.0))
    throw NumericDomainError(std::string(model) + ": cost undefined at P(" +
                             std::to_string(i) + "," + std::to_string(j) +
                             ") = " + std::to_string(p));
}

// d/dx (-x / ln x) on (0,1).
inline double entropy_term_derivative(double p) {
  const double l = std::log(p);
  return -(l - 1.0) / (l * l);
}

}  // namespace detail

/// All transitions cost zero. Useful as a pure-routing baseline.
class ZeroCost final : public CostModel {
 public:
  std::string name() const override { return "zero"; }
  double eval(const Vec&, const Matrix&, int, int) const override {
    return 0.0;
  }
  Matrix running_cost_gradient(const Vec& m, const Matrix& P) const override {
    return Matrix(P.rows(), P.cols(), 0.0);
  }
  bool row_decoupled() const override { return true; }
  bool interior_only() const override { return false; }
};

/// Every transition costs the same constant kappa.
class ConstantCost final : public CostModel {
 public:
  explicit ConstantCost(double kappa) : kappa_(kappa) {}
  std::string name() const override { return "constant"; }
  double eval(const Vec&, const Matrix&, int, int) const override {
    return kappa_;
  }
  Matrix running_cost_gradient(const Vec& m, const Matrix& P) const override {
    Matrix g(P.rows(), P.cols());
    for (int i = 0; i < P.rows(); ++i)
      for (int j = 0; j < P.cols(); ++j) g(i, j) = kappa_ * m[i];
    return g;
  }
  bool row_decoupled() const override { return true; }
  bool interior_only() const override { return false; }
  double kappa() const { return kappa_; }

 private:
  double kappa_;
};

struct Example1Params {
  double alpha1 = 1.0;  // own-state crowding weight
  double alpha2 = 1.0;  // arrival congestion weight
  double alpha3 = 1.0;  // entropy-term weight

  void validate() const {
    if (!(alpha1 > 0.0 && alpha2 > 0.0 && alpha3 > 0.0))
      throw InvalidInputError("Example1Params: weights must be positive");
  }
};

/// Crowding + arrival congestion + entropy-type cost:
///   c_ij = a1 m_i + a2 (sum_p m_p P_pj) - a3 P_ij / ln P_ij.
/// Singular at P_ij in {0, 1}; couples rows through the arrival term.
class Example1Cost final : public CostModel {
 public:
  explicit Example1Cost(Example1Params params) : p_(params) { p_.validate(); }

  std::string name() const override { return "example1"; }

  double eval(const Vec& m, const Matrix& P, int i, int j) const override {
    detail::require_open_unit(P(i, j), i, j, "example1");
    double arrivals = 0.0;
    for (int p = 0; p < P.rows(); ++p) arrivals += m[p] * P(p, j);
    return p_.alpha1 * m[i] + p_.alpha2 * arrivals -
           p_.alpha3 * P(i, j) / std::log(P(i, j));
  }

  Matrix running_cost_gradient(const Vec& m, const Matrix& P) const override {
    const int s = P.rows();
    Vec arrivals(s, 0.0);
    for (int p = 0; p < s; ++p)
      for (int j = 0; j < s; ++j) arrivals[j] += m[p] * P(p, j);
    Matrix g(s, s);
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < s; ++j) {
        detail::require_open_unit(P(i, j), i, j, "example1");
        const double c = p_.alpha1 * m[i] + p_.alpha2 * arrivals[j] -
                         p_.alpha3 * P(i, j) / std::log(P(i, j));
        g(i, j) = m[i] * (p_.alpha2 * arrivals[j] +
                          p_.alpha3 * P(i, j) *
                              detail::entropy_term_derivative(P(i, j)) +
                          c);
      }
    }
    return g;
  }

  bool row_decoupled() const override { return false; }
  bool interior_only() const override { return true; }
  const Example1Params& params() const { return p_; }

 private:
  Example1Params p_;
};

/// Row-decoupled variant of Example1Cost: c_ij = a1 m_i - a2 P_ij / ln P_ij.
class Example1VariantCost final : public CostModel {
 public:
  Example1VariantCost(double alpha1, double alpha2)
      : a1_(alpha1), a2_(alpha2) {
    if (!(alpha1 > 0.0 && alpha2 > 0.0))
      throw InvalidInputError("example1_variant: weights must be positive");
  }

  std::string name() const override { return "example1_variant"; }

  double eval(const Vec& m, const Matrix& P, int i, int j) const override {
    detail::require_open_unit(P(i, j), i, j, "example1_variant");
    return a1_ * m[i] - a2_ * P(i, j) / std::log(P(i, j));
  }

  Matrix running_cost_gradient(const Vec& m, const Matrix& P) const override {
    const int s = P.rows();
    Matrix g(s, s);
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < s; ++j) {
        detail::require_open_unit(P(i, j), i, j, "example1_variant");
        const double c = a1_ * m[i] - a2_ * P(i, j) / std::log(P(i, j));
        g(i, j) = m[i] * (a2_ * P(i, j) *
                              detail::entropy_term_derivative(P(i, j)) +
                          c);
      }
    }
    return g;
  }

  bool row_decoupled() const override { return true; }
  bool interior_only() const override { return true; }
  double monotonicity_modulus() const override { return a1_; }
  double alpha1() const { return a1_; }
  double alpha2() const { return a2_; }

 private:
  double a1_, a2_;
};

/// Crowding + cross-state arrivals + logarithmic cost:
///   c_ij = m_i + (sum_{p != i} m_p P_pj) + 2 ln P_ij.
/// The log term reads ln((P_ij)^2) = 2 ln P_ij, the interpretation under
/// which the stage optimum has the closed softmax form implemented in
/// example2_closed_form (see the cross-solver tests).
class Example2Cost final : public CostModel {
 public:
  std::string name() const override { return "example2"; }

  double eval(const Vec& m, const Matrix& P, int i, int j) const override {
    detail::require_open_unit(P(i, j), i, j, "example2");
    double cross = 0.0;
    for (int p = 0; p < P.rows(); ++p)
      if (p != i) cross += m[p] * P(p, j);
    return m[i] + cross + 2.0 * std::log(P(i, j));
  }

  Matrix running_cost_gradient(const Vec& m, const Matrix& P) const override {
    const int s = P.rows();
    Matrix g(s, s);
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < s; ++j) {
        detail::require_open_unit(P(i, j), i, j, "example2");
        double cross = 0.0;
        for (int p = 0; p < s; ++p)
          if (p != i) cross += m[p] * P(p, j);
        const double c = m[i] + cross + 2.0 * std::log(P(i, j));
        g(i, j) = m[i] * (cross + 2.0 + c);
      }
    }
    return g;
  }

  bool row_decoupled() const override { return false; }
  bool interior_only() const override { return true; }
};

/// Row-decoupled variant of Example2Cost: c_ij = m_i + 2 ln P_ij.
class Example2VariantCost final : public CostModel {
 public:
  std::string name() const override { return "example2_variant"; }

  double eval(const Vec& m, const Matrix& P, int i, int j) const override {
    detail::require_open_unit(P(i, j), i, j, "example2_variant");
    return m[i] + 2.0 * std::log(P(i, j));
  }

  Matrix running_cost_gradient(const Vec& m, const Matrix& P) const override {
    const int s = P.rows();
    Matrix g(s, s);
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < s; ++j) {
        detail::require_open_unit(P(i, j), i, j, "example2_variant");
        g(i, j) = m[i] * (2.0 + m[i] + 2.0 * std::log(P(i, j)));
      }
    }
    return g;
  }

  bool row_decoupled() const override { return true; }
  bool interior_only() const override { return true; }
  double monotonicity_modulus() const override { return 1.0; }
};

inline std::shared_ptr<const CostModel> make_zero_cost() {
  return std::make_shared<ZeroCost>();
}
inline std::shared_ptr<const CostModel> make_constant_cost(double kappa) {
  return std::make_shared<ConstantCost>(kappa);
}
inline std::shared_ptr<const CostModel> make_example1(
    Example1Params params = {}) {
  return std::make_shared<Example1Cost>(params);
}
inline std::shared_ptr<const CostModel> make_example1_variant(
    double alpha1 = 1.0, double alpha2 = 1.0) {
  return std::make_shared<Example1VariantCost>(alpha1, alpha2);
}
inline std::shared_ptr<const CostModel> make_example2() {
  return std::make_shared<Example2Cost>();
}
inline std::shared_ptr<const CostModel> make_example2_variant() {
  return std::make_shared<Example2VariantCost>();
}

inline const std::vector<std::string>& available_model_names() {
  static const std::vector<std::string> names = {
      "zero",     "constant",         "example1",
      "example1_variant", "example2", "example2_variant"};
  return names;
}

/// Self-consistent solution of the implicit softmax optimality system of
/// Example2Cost,
///   P_ij = exp(-(sum_{p != i} m_p P_pj) - U_j/2) / (row normalizer),
/// found by fixed-point iteration from the uniform matrix.
inline StrategyMatrix example2_closed_form(const Distribution& m,
                                           const CostVector& u_next,
                                           double tol,
                                           int max_iters = 10000) {
  if (!(tol > 0.0))
    throw InvalidInputError("example2_closed_form: tol must be positive");
  if (u_next.size() != m.size())
    throw InvalidInputError("example2_closed_form: dimension mismatch");
  const int s = m.size();
  Matrix P(s, s, 1.0 / static_cast<double>(s));
  double residual = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Matrix next(s, s);
    for (int i = 0; i < s; ++i) {
      Vec expo(s);
      double max_e = -1e300;
      for (int j = 0; j < s; ++j) {
        double cross = 0.0;
        for (int p = 0; p < s; ++p)
          if (p != i) cross += m[p] * P(p, j);
        expo[j] = -cross - 0.5 * u_next[j];
        max_e = std::max(max_e, expo[j]);
      }
      double norm = 0.0;
      for (int j = 0; j < s; ++j) {
        expo[j] = std::exp(expo[j] - max_e);
        norm += expo[j];
      }
      for (int j = 0; j < s; ++j) next(i, j) = expo[j] / norm;
    }
    residual = linf_diff(next, P);
    P = std::move(next);
    if (residual <= tol) return StrategyMatrix(std::move(P));
  }
  throw ConvergenceFailure(
      "example2_closed_form: no fixed point after " +
          std::to_string(max_iters) + " iterations (residual " +
          std::to_string(residual) + ")",
      residual);
}

}  // namespace mfgs
