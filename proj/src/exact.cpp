#include "regldp/exact.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <utility>
#include <vector>

namespace regldp {

namespace {

double log_factorial(Count m) { return std::lgamma(static_cast<double>(m) + 1.0); }

Rational power(const Rational& base, Count e) {
  Rational r = 1;
  for (Count k = 0; k < e; ++k) r *= base;
  return r;
}

LogProb exact_mode(const LatticeType& t, const SpinLaw& mu) {
  const int q = t.q();
  const std::vector<Rational> w = mu.exact_weights();
  Rational spin = 1;
  for (int i = 0; i < q; ++i) spin *= power(w[i], t.spin_counts(i));

  BigInt num = factorial(static_cast<unsigned long>(t.n));
  BigInt den = double_factorial(static_cast<long>(t.n) * t.d - 1);
  for (int i = 0; i < q; ++i) {
    den *= factorial(static_cast<unsigned long>(t.spin_counts(i)));
    num *= factorial(static_cast<unsigned long>(t.d * t.spin_counts(i)));
    num *= double_factorial(static_cast<long>(t.bond_counts(i, i)) - 1);
    for (int j = 0; j < q; ++j) {
      const auto m = static_cast<unsigned long>(t.bond_counts(i, j));
      den *= factorial(m);
      if (i < j) num *= factorial(m);
    }
  }
  const Rational p = spin * Rational(num, den);
  return {log_rational(p), p, true};
}

LogProb float_mode(const LatticeType& t, const SpinLaw& mu) {
  const int q = t.q();
  double log_p = log_factorial(t.n) - log_double_factorial(static_cast<long>(t.n) * t.d - 1);
  for (int i = 0; i < q; ++i) {
    const Count c = t.spin_counts(i);
    if (c > 0) {
      if (mu[i] == 0.0) return {-kInfinity, std::nullopt, true};
      log_p += static_cast<double>(c) * std::log(mu[i]);
    }
    log_p += log_factorial(t.d * c) - log_factorial(c);
    log_p += log_double_factorial(static_cast<long>(t.bond_counts(i, i)) - 1);
    for (int j = 0; j < q; ++j) {
      log_p -= log_factorial(t.bond_counts(i, j));
      if (i < j) log_p += log_factorial(t.bond_counts(i, j));
    }
  }
  return {log_p, std::nullopt, true};
}

// Vertex multigraph of a matching as a sorted list of (u <= v) pairs.
using Multigraph = std::vector<std::pair<int, int>>;

class MatchingWalker {
 public:
  MatchingWalker(int n, int d) : d_(n > 0 ? d : 1), used_(static_cast<std::size_t>(n * d), 0) {}

  /// Visits every matching whose pair containing point 0 is (0, first_partner).
  template <typename Visit>
  void run(int first_partner, Visit&& visit) {
    used_[0] = used_[first_partner] = 1;
    pairs_.assign(1, {0, first_partner});
    recurse(visit);
    used_[0] = used_[first_partner] = 0;
  }

 private:
  template <typename Visit>
  void recurse(Visit& visit) {
    const auto it = std::find(used_.begin(), used_.end(), 0);
    if (it == used_.end()) {
      Multigraph g;
      g.reserve(pairs_.size());
      for (const auto& [a, b] : pairs_) {
        const int u = a / d_, v = b / d_;
        g.emplace_back(std::min(u, v), std::max(u, v));
      }
      std::sort(g.begin(), g.end());
      visit(std::move(g));
      return;
    }
    const int p = static_cast<int>(it - used_.begin());
    used_[p] = 1;
    for (int r = p + 1; r < static_cast<int>(used_.size()); ++r) {
      if (used_[r]) continue;
      used_[r] = 1;
      pairs_.emplace_back(p, r);
      recurse(visit);
      pairs_.pop_back();
      used_[r] = 0;
    }
    used_[p] = 0;
  }

  int d_;
  std::vector<char> used_;
  std::vector<std::pair<int, int>> pairs_;
};

using Tally = std::map<LatticeType, unsigned long long>;

void tally_partition(int n, int d, int q, const std::vector<int>& partners, Tally& out) {
  std::map<Multigraph, unsigned long long> graphs;
  MatchingWalker walker(n, d);
  for (int partner : partners)
    walker.run(partner, [&](Multigraph g) { ++graphs[std::move(g)]; });

  std::vector<int> spins(static_cast<std::size_t>(n), 0);
  LatticeType t{n, d, CountVector::Zero(q), CountMatrix::Zero(q, q)};
  while (true) {
    t.spin_counts.setZero();
    for (int s : spins) ++t.spin_counts(s);
    for (const auto& [g, multiplicity] : graphs) {
      t.bond_counts.setZero();
      for (const auto& [u, v] : g) {
        ++t.bond_counts(spins[u], spins[v]);
        ++t.bond_counts(spins[v], spins[u]);
      }
      out[t] += multiplicity;
    }
    int k = 0;
    while (k < n && ++spins[k] == q) spins[k++] = 0;
    if (k == n) break;
  }
}

}  // namespace

double log_double_factorial(long m) {
  if (m == -1) return 0.0;
  if (m < -1 || m % 2 == 0) throw UsageError("log_double_factorial: argument must be odd");
  // (2k - 1)!! = (2k)! / (2^k k!)
  const double k = static_cast<double>((m + 1) / 2);
  return std::lgamma(2.0 * k + 1.0) - k * std::log(2.0) - std::lgamma(k + 1.0);
}

LogProb exact_type_probability(const LatticeType& t, const SpinLaw& mu, ProbabilityMode mode,
                               int exact_threshold) {
  if (t.q() != mu.q()) throw UsageError("exact_type_probability: type and mu have different q");
  if (!is_valid(t)) return {-kInfinity, Rational(0), false};
  if (mode == ProbabilityMode::kAuto)
    mode = static_cast<long>(t.n) * t.d <= exact_threshold ? ProbabilityMode::kExact
                                                           : ProbabilityMode::kFloat;
  return mode == ProbabilityMode::kExact ? exact_mode(t, mu) : float_mode(t, mu);
}

Rational TypeDistribution::total() const {
  Rational s = 0;
  for (const auto& [t, p] : entries) s += p;
  return s;
}

Rational TypeDistribution::probability(const LatticeType& t) const {
  const auto it = entries.find(t);
  return it == entries.end() ? Rational(0) : it->second;
}

TypeDistribution brute_force_type_distribution(int n, int d, int q, const SpinLaw& mu,
                                               unsigned workers, OracleLimits limits) {
  if (n < 1 || d < 1 || q < 1) throw UsageError("oracle: n, d, q must be positive");
  if (mu.q() != q) throw UsageError("oracle: mu must have q weights");
  const int points = n * d;
  if (points % 2 != 0) throw UsageError("oracle: n * d must be even");
  if (points > limits.max_points || std::pow(static_cast<double>(q), n) > limits.max_spin_vectors)
    throw ScaleGuardError("oracle: instance too large for brute force (need nd <= " +
                          std::to_string(limits.max_points) + " and q^n <= " +
                          std::to_string(static_cast<long long>(limits.max_spin_vectors)) +
                          "); shrink n, d or q");

  workers = std::clamp(workers, 1u, static_cast<unsigned>(points - 1));
  std::vector<std::vector<int>> shares(workers);
  for (int partner = 1; partner < points; ++partner)
    shares[static_cast<std::size_t>(partner - 1) % workers].push_back(partner);
  std::vector<Tally> tallies(workers);
  if (workers == 1) {
    tally_partition(n, d, q, shares[0], tallies[0]);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back(tally_partition, n, d, q, std::cref(shares[w]), std::ref(tallies[w]));
    for (auto& th : pool) th.join();
  }

  const std::vector<Rational> weights = mu.exact_weights();
  const Rational matchings(double_factorial(points - 1));
  TypeDistribution out{n, d, q, {}};
  for (const Tally& tally : tallies)
    for (const auto& [t, count] : tally) {
      Rational spin = 1;
      for (int i = 0; i < q; ++i) spin *= power(weights[i], t.spin_counts(i));
      if (spin == 0) continue;
      out.entries[t] += Rational(BigInt(count)) * spin / matchings;
    }
  return out;
}

LogBounds stirling_log_bounds(const LatticeType& t, const SpinLaw& mu, double kappa) {
  const auto [rho, nu] = type_to_measures(t);
  const double rate = rate_function(rho, nu, mu, t.d);
  const int q = t.q();
  const double slack = kappa * q * (q + 1) * std::log(static_cast<double>(t.n) * t.d + 1.0);
  const double center = -static_cast<double>(t.n) * rate;
  return {center - slack, center + slack, slack};
}

}  // namespace regldp
