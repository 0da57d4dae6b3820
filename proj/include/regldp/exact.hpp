#pragma once

#include <cstddef>
#include <map>
#include <optional>

#include "regldp/measures.hpp"
#include "regldp/rational.hpp"

namespace regldp {

enum class ProbabilityMode {
  kFloat,  ///< log-gamma arithmetic
  kExact,  ///< big-integer rationals
  kAuto,   ///< exact when nd <= exact_threshold
};

inline constexpr int kDefaultExactThreshold = 64;

/// Log-probability of a lattice type. `exact` is set in exact mode.
/// `feasible` is false when the type violates the lattice invariants, in
/// which case the probability is 0 by construction rather than by law.
struct LogProb {
  double log_value = 0.0;
  std::optional<Rational> exact;
  bool feasible = true;

  double probability() const { return std::exp(log_value); }
};

/// Exact log(m!!) for odd m >= 1, with log((-1)!!) = 0.
double log_double_factorial(long m);

/// P((L1, L2) = t) under (uniform pairing) x (iid mu spins):
///
///   prod_i mu_i^{c_i} * n! / prod_i c_i!
///     * prod_i (d c_i)! / prod_j m_ij!
///     * prod_{i<j} m_ij! * prod_i (m_ii - 1)!! / (nd - 1)!!
///
/// with c = spin counts and m = bond counts. The cross-class factor m_ij!
/// counts the bijections between the half-edges of class i sent to class j
/// and those of class j sent to class i.
LogProb exact_type_probability(const LatticeType& t, const SpinLaw& mu,
                               ProbabilityMode mode = ProbabilityMode::kAuto,
                               int exact_threshold = kDefaultExactThreshold);

/// Exact probabilities of every type reached by some (pairing, spins).
struct TypeDistribution {
  int n = 0;
  int d = 0;
  int q = 0;
  std::map<LatticeType, Rational> entries;

  Rational total() const;
  /// 0 for types outside the support.
  Rational probability(const LatticeType& t) const;
};

struct OracleLimits {
  int max_points = 14;             ///< nd
  double max_spin_vectors = 1e6;   ///< q^n
};

/// Enumerates every matching of the nd points and every spin vector in
/// [q]^n, tallying exact probabilities per lattice type. `workers` > 1
/// partitions the matchings by the partner of point 0; the result does not
/// depend on it.
TypeDistribution brute_force_type_distribution(int n, int d, int q, const SpinLaw& mu,
                                               unsigned workers = 1,
                                               OracleLimits limits = {});

struct LogBounds {
  double lower = 0.0;
  double upper = 0.0;
  double slack = 0.0;
};

inline constexpr double kStirlingSlackConstant = 3.0;

/// -n I(rho, nu) -/+ kappa q (q + 1) log(nd + 1).
LogBounds stirling_log_bounds(const LatticeType& t, const SpinLaw& mu,
                              double kappa = kStirlingSlackConstant);

}  // namespace regldp
