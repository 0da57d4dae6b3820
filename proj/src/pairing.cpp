#include "regldp/pairing.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace regldp {

namespace {

void check_even(int n, int d, const char* who) {
  if (n < 1 || d < 1) throw UsageError(std::string(who) + ": n and d must be positive");
  if ((static_cast<long>(n) * d) % 2 != 0)
    throw UsageError(std::string(who) + ": n * d must be even");
}

}  // namespace

void validate(const Pairing& p) {
  check_even(p.n, p.d, "Pairing");
  const int points = p.n * p.d;
  if (static_cast<int>(p.pairs.size()) * 2 != points)
    throw UsageError("Pairing: expected nd/2 pairs");
  std::vector<char> seen(static_cast<std::size_t>(points), 0);
  for (const auto& [a, b] : p.pairs) {
    if (a < 0 || b < 0 || a >= points || b >= points || a == b)
      throw UsageError("Pairing: point index out of range");
    if (seen[a]++ || seen[b]++) throw UsageError("Pairing: point matched twice");
  }
}

Pairing sample_pairing(int n, int d, Rng& rng) {
  check_even(n, d, "sample_pairing");
  const int points = n * d;
  // Unmatched points live in pool[0..size); where[p] is p's slot.
  std::vector<int> pool(static_cast<std::size_t>(points));
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> where = pool;
  std::size_t size = pool.size();
  auto remove = [&](int p) {
    const int last = pool[--size];
    pool[where[p]] = last;
    where[last] = where[p];
    where[p] = static_cast<int>(size);
    pool[size] = p;
  };
  auto matched = [&](int p) { return static_cast<std::size_t>(where[p]) >= size; };

  Pairing out{n, d, {}};
  out.pairs.reserve(static_cast<std::size_t>(points / 2));
  for (int p = 0; p < points; ++p) {
    if (matched(p)) continue;
    remove(p);
    std::uniform_int_distribution<std::size_t> pick(0, size - 1);
    const int partner = pool[pick(rng)];
    remove(partner);
    out.pairs.emplace_back(p, partner);
  }
  return out;
}

Pairing sample_pairing(int n, int d, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  return sample_pairing(n, d, rng);
}

SpinConfig assign_spins(int n, const SpinLaw& mu, Rng& rng) {
  if (n < 1) throw UsageError("assign_spins: n must be positive");
  const Eigen::VectorXd& w = mu.weights();
  std::discrete_distribution<int> draw(w.data(), w.data() + w.size());
  SpinConfig out{n, mu.q(), std::vector<int>(static_cast<std::size_t>(n))};
  for (int& s : out.spins) s = draw(rng) + 1;
  return out;
}

SpinConfig assign_spins(int n, const SpinLaw& mu, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  return assign_spins(n, mu, rng);
}

LatticeType empirical_type(const Pairing& pairing, const SpinConfig& spins) {
  if (pairing.n != spins.n || static_cast<int>(spins.spins.size()) != spins.n)
    throw UsageError("empirical_measures: pairing and spins disagree on n");
  const int q = spins.q;
  LatticeType t{pairing.n, pairing.d, CountVector::Zero(q), CountMatrix::Zero(q, q)};
  for (int s : spins.spins) {
    if (s < 1 || s > q) throw UsageError("empirical_measures: spin out of range");
    ++t.spin_counts(s - 1);
  }
  for (const auto& [a, b] : pairing.pairs) {
    const int x = spins.spins[pairing.vertex_of(a)] - 1;
    const int y = spins.spins[pairing.vertex_of(b)] - 1;
    ++t.bond_counts(x, y);
    ++t.bond_counts(y, x);
  }
  return t;
}

EmpiricalMeasures empirical_measures(const Pairing& pairing, const SpinConfig& spins) {
  auto [rho, nu] = type_to_measures(empirical_type(pairing, spins));
  return {std::move(rho), std::move(nu)};
}

bool is_simple(const Pairing& pairing) {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(pairing.pairs.size());
  for (const auto& [a, b] : pairing.pairs) {
    const int u = pairing.vertex_of(a), v = pairing.vertex_of(b);
    if (u == v) return false;
    edges.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(edges.begin(), edges.end());
  return std::adjacent_find(edges.begin(), edges.end()) == edges.end();
}

SimpleGraphSample sample_simple_graph(int n, int d, std::uint64_t seed, std::size_t max_attempts) {
  check_even(n, d, "sample_simple_graph");
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    Rng rng = make_stream(seed, attempt);
    Pairing p = sample_pairing(n, d, rng);
    if (is_simple(p)) return {std::move(p), attempt + 1};
  }
  throw RejectionCapError(max_attempts);
}

SampleRecord draw_sample(int n, int d, const SpinLaw& mu, std::uint64_t seed, std::uint64_t index) {
  Rng rng = make_stream(seed, index);
  SampleRecord r;
  r.pairing = sample_pairing(n, d, rng);
  r.spins = assign_spins(n, mu, rng);
  auto [l1, l2] = empirical_measures(r.pairing, r.spins);
  r.l1 = std::move(l1);
  r.l2 = std::move(l2);
  r.simple = is_simple(r.pairing);
  return r;
}

SimpleSampleRecord draw_simple_sample(int n, int d, const SpinLaw& mu, std::uint64_t seed,
                                      std::uint64_t index, std::size_t max_attempts) {
  const std::uint64_t base = stream_seed(seed, index);
  SimpleGraphSample g = sample_simple_graph(n, d, base, max_attempts);
  Rng rng = make_stream(base, ~std::uint64_t{0});
  SimpleSampleRecord out;
  out.attempts = g.attempts;
  SampleRecord& r = out.record;
  r.pairing = std::move(g.pairing);
  r.spins = assign_spins(n, mu, rng);
  auto [l1, l2] = empirical_measures(r.pairing, r.spins);
  r.l1 = std::move(l1);
  r.l2 = std::move(l2);
  r.simple = true;
  return out;
}

}  // namespace regldp
