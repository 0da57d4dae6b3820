#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "regldp/measures.hpp"

namespace regldp {

enum class Target { kRho, kNu };
enum class Sense { kGreaterEqual, kLessEqual };

/// One closed half-space: sum a_i rho_i (or sum a_ij nu_ij) >= or <= bound.
/// Nu coefficients are a q x q matrix applied entrywise to the full nu.
struct Constraint {
  Target target = Target::kRho;
  Eigen::MatrixXd coeffs;  ///< q x 1 for rho, q x q for nu
  double bound = 0.0;
  Sense sense = Sense::kGreaterEqual;

  static Constraint rho_at_least(int q, int i, double bound);
  static Constraint rho_at_most(int q, int i, double bound);
  static Constraint nu_at_least(int q, int i, int j, double bound);
  static Constraint nu_at_most(int q, int i, int j, double bound);

  /// Signed slack: >= 0 iff satisfied.
  double slack(const SpinMeasure& rho, const BondMeasure& nu) const;
};

/// A conjunction of closed constraints. Empty means the whole space.
struct EventSpec {
  std::vector<Constraint> constraints;

  bool rho_only() const;
  bool contains(const SpinMeasure& rho, const BondMeasure& nu, double tol = 1e-12) const;
  /// Throws UsageError on non-finite coefficients or a q mismatch.
  void validate(int q) const;
};

struct McEstimate {
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
  double p_hat = 0.0;
  double log_rate = 0.0;  ///< -(1/n) log p_hat, +inf when p_hat = 0
  double ci_lo = 0.0;     ///< Wilson 95%
  double ci_hi = 0.0;
};

/// Plain Monte Carlo over independent (pairing, spins) draws. Sample k uses
/// stream k of `seed`, so the result is the same for any `workers`.
McEstimate mc_event_probability(const EventSpec& event, int n, int d, const SpinLaw& mu,
                                std::uint64_t samples, std::uint64_t seed, unsigned workers = 1);

/// Wilson score interval at normal quantile z.
std::pair<double, double> wilson_interval(std::uint64_t hits, std::uint64_t samples,
                                          double z = 1.959963984540054);

struct MinimizerResult {
  SpinMeasure rho_star;
  BondMeasure nu_star;
  RateValue value;
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
};

struct MinimizerOptions {
  double kkt_tolerance = 1e-7;
  std::size_t max_newton_steps = 2000;
  /// Extra starts for the general (nu-constrained) problem, which is not
  /// convex for d >= 3.
  int restarts = 8;
  std::uint64_t seed = 0x5eed;
};

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, MinimizerResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const MinimizerResult& best() const { return best_; }

 private:
  MinimizerResult best_;
};

/// inf of I(rho, nu) over admissible pairs in `event`, by a primal log-barrier
/// interior-point method. Rho-only events are reduced analytically to
/// min H(rho | mu) with nu = rho (x) rho. Throws InfeasibleEventError or
/// NonConvergenceError.
MinimizerResult minimize_rate(const EventSpec& event, const SpinLaw& mu, int d,
                              const MinimizerOptions& options = {});

struct ReportRow {
  int n = 0;
  McEstimate mc;
  double lattice_inf = kInfinity;  ///< +inf when no lattice type lies in the event
  bool lattice_enumerated = true;  ///< false: too many types, continuum value used
  double continuum_inf = 0.0;
};

struct ReportOptions {
  unsigned workers = 1;
  std::size_t enumeration_budget = 2'000'000;
};

/// Lattice infimum of I over K_n intersected with the event, by enumeration.
/// Returns nullopt if more than `budget` types would need visiting.
std::optional<double> lattice_infimum(const EventSpec& event, int n, int d, const SpinLaw& mu,
                                      std::size_t budget);

std::vector<ReportRow> convergence_report(const EventSpec& event, int d, const SpinLaw& mu,
                                          const std::vector<int>& n_grid,
                                          std::uint64_t samples_per_n, std::uint64_t seed,
                                          const ReportOptions& options = {});

}  // namespace regldp
