#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "mfgs/matrix.hpp"
#include "mfgs/types.hpp"

namespace mfgs {

using Rng = std::mt19937_64;

/// Uniform double in [0,1) built directly from engine output, so draws are
/// reproducible independently of the standard-library distribution
/// implementations.
inline double next_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double next_in(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * next_unit(rng);
}

/// Uniform draw from the probability simplex (via exponential spacings).
inline Vec random_simplex_point(Rng& rng, int s) {
  Vec v(s);
  double sum = 0.0;
  for (int i = 0; i < s; ++i) {
    v[i] = -std::log(1.0 - next_unit(rng));
    sum += v[i];
  }
  for (int i = 0; i < s; ++i) v[i] /= sum;
  return v;
}

inline Distribution random_distribution(Rng& rng, int s) {
  return Distribution(random_simplex_point(rng, s));
}

/// Simplex draw mixed toward uniform so every entry is at least min_mass.
inline Distribution random_interior_distribution(Rng& rng, int s,
                                                 double min_mass) {
  Vec v = random_simplex_point(rng, s);
  const double blend = min_mass * static_cast<double>(s);
  for (int i = 0; i < s; ++i)
    v[i] = (1.0 - blend) * v[i] + blend / static_cast<double>(s);
  return Distribution(std::move(v));
}

inline StrategyMatrix random_strategy(Rng& rng, int s) {
  Matrix P(s, s);
  for (int i = 0; i < s; ++i) {
    Vec row = random_simplex_point(rng, s);
    for (int j = 0; j < s; ++j) P(i, j) = row[j];
  }
  return StrategyMatrix(std::move(P));
}

inline StrategyMatrix random_interior_strategy(Rng& rng, int s,
                                               double min_mass) {
  Matrix P(s, s);
  for (int i = 0; i < s; ++i) {
    Vec row = random_interior_distribution(rng, s, min_mass).values();
    for (int j = 0; j < s; ++j) P(i, j) = row[j];
  }
  return StrategyMatrix(std::move(P));
}

inline CostVector random_cost_vector(Rng& rng, int s, double lo, double hi) {
  Vec v(s);
  for (int i = 0; i < s; ++i) v[i] = next_in(rng, lo, hi);
  return CostVector(std::move(v));
}

}  // namespace mfgs
