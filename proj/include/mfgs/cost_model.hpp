#pragma once

#include <string>

#include "mfgs/matrix.hpp"

namespace mfgs {

/// A family of transition costs c_ij(m, P).
///
/// Implementations are immutable and safe to share across threads. The raw
/// Vec/Matrix interface deliberately performs no simplex validation so that
/// numerical probes (finite differences, grid scans) can evaluate slightly
/// off-simplex points.
class CostModel {
 public:
  virtual ~CostModel() = default;

  virtual std::string name() const = 0;

  /// Cost of the i -> j transition under distribution m and strategy P.
  /// Throws NumericDomainError when the formula is singular at P(i,j).
  virtual double eval(const Vec& m, const Matrix& P, int i, int j) const = 0;

  /// Gradient with respect to P of the aggregate running cost
  /// sum_{p,q} c_pq(m,P) m_p P_pq.
  virtual Matrix running_cost_gradient(const Vec& m, const Matrix& P) const = 0;

  /// True when c_ij depends on P only through row i.
  virtual bool row_decoupled() const = 0;

  /// True when evaluation requires every involved entry strictly in (0,1).
  virtual bool interior_only() const = 0;

  /// Modulus gamma for the distribution-monotonicity inequality, when the
  /// model guarantees one (used by sampled probes); 0 means none known.
  virtual double monotonicity_modulus() const { return 0.0; }
};

}  // namespace mfgs
