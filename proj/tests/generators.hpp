#pragma once

// Hand-rolled generators for property tests.

#include <random>

#include <Eigen/Dense>

#include "regldp/measures.hpp"

namespace regldp::testing {

/// Probability vector with iid Exp(1) weights, optionally with zeros.
inline Eigen::VectorXd random_simplex(std::mt19937_64& rng, int q, double zero_chance = 0.0) {
  std::exponential_distribution<double> e(1.0);
  std::bernoulli_distribution zero(zero_chance);
  Eigen::VectorXd v(q);
  for (int i = 0; i < q; ++i) v(i) = zero(rng) ? 0.0 : e(rng);
  if (v.sum() == 0.0) v(0) = 1.0;
  return v / v.sum();
}

/// Random admissible pair: symmetric nu of mass 1, rho its marginal.
inline AdmissiblePair random_admissible(std::mt19937_64& rng, int q) {
  std::exponential_distribution<double> e(1.0);
  Eigen::MatrixXd m(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = i; j < q; ++j) m(i, j) = m(j, i) = e(rng);
  m /= m.sum();
  BondMeasure nu(m);
  return {SpinMeasure(nu.marginal()), nu};
}

inline SpinLaw random_law(std::mt19937_64& rng, int q) {
  Eigen::VectorXd w = random_simplex(rng, q);
  w(q - 1) = 1.0 - w.head(q - 1).sum();
  return SpinLaw(w);
}

}  // namespace regldp::testing
