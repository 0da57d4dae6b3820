#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "regldp/measures.hpp"
#include "regldp/rng.hpp"

namespace regldp {

/// A perfect matching of the nd half-edge points 0..nd-1; point p belongs to
/// vertex p / d. Pairs are stored with first < second, in the order drawn.
struct Pairing {
  int n = 0;
  int d = 0;
  std::vector<std::pair<int, int>> pairs;

  int vertex_of(int point) const { return point / d; }
  bool operator==(const Pairing&) const = default;
};

/// Spins eta(v) in 1..q for v in 0..n-1.
struct SpinConfig {
  int n = 0;
  int q = 0;
  std::vector<int> spins;

  bool operator==(const SpinConfig&) const = default;
};

struct EmpiricalMeasures {
  SpinMeasure l1;
  BondMeasure l2;
};

struct SampleRecord {
  Pairing pairing;
  SpinConfig spins;
  SpinMeasure l1;
  BondMeasure l2;
  bool simple = false;
};

/// Throws UsageError unless `p` is a perfect matching of 0..nd-1.
void validate(const Pairing& p);

Pairing sample_pairing(int n, int d, Rng& rng);
/// Uniform over the (nd-1)!! matchings; same seed, same pairing.
Pairing sample_pairing(int n, int d, std::uint64_t seed);

SpinConfig assign_spins(int n, const SpinLaw& mu, Rng& rng);
SpinConfig assign_spins(int n, const SpinLaw& mu, std::uint64_t seed);

/// Integer form of (L1, L2): spin counts and bond counts.
LatticeType empirical_type(const Pairing& pairing, const SpinConfig& spins);
EmpiricalMeasures empirical_measures(const Pairing& pairing, const SpinConfig& spins);

/// No loops and no parallel pairs.
bool is_simple(const Pairing& pairing);

struct SimpleGraphSample {
  Pairing pairing;
  std::size_t attempts = 0;
};

/// Rejection sampling on the pairing model; throws RejectionCapError after
/// max_attempts failures.
SimpleGraphSample sample_simple_graph(int n, int d, std::uint64_t seed, std::size_t max_attempts);

/// Draws pairing and spins from stream `index` of `seed`.
SampleRecord draw_sample(int n, int d, const SpinLaw& mu, std::uint64_t seed, std::uint64_t index);

struct SimpleSampleRecord {
  SampleRecord record;
  std::size_t attempts = 0;
};

/// Simple-graph version of draw_sample: the pairing is rejection sampled from
/// seed stream_seed(seed, index); spins use the last stream of that seed.
SimpleSampleRecord draw_simple_sample(int n, int d, const SpinLaw& mu, std::uint64_t seed,
                                      std::uint64_t index, std::size_t max_attempts);

}  // namespace regldp
