#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include <boost/math/distributions/chi_squared.hpp>

#include "generators.hpp"
#include "regldp/exact.hpp"
#include "regldp/io.hpp"
#include "regldp/pairing.hpp"

using namespace regldp;
using Eigen::VectorXd;

namespace {

using Matching = std::vector<std::pair<int, int>>;

Matching canonical(const Pairing& p) {
  Matching m = p.pairs;
  std::sort(m.begin(), m.end());
  return m;
}

SpinLaw law(std::initializer_list<double> w) {
  VectorXd v(static_cast<Eigen::Index>(w.size()));
  Eigen::Index i = 0;
  for (double x : w) v(i++) = x;
  return SpinLaw(v);
}

}  // namespace

TEST_CASE("sample_pairing: forced matchings") {
  for (std::uint64_t seed : {0ull, 1ull, 99ull, ~0ull}) {
    CHECK(canonical(sample_pairing(1, 2, seed)) == Matching{{0, 1}});
    CHECK(canonical(sample_pairing(2, 1, seed)) == Matching{{0, 1}});
  }
  CHECK_THROWS_AS(sample_pairing(3, 1, 0), UsageError);
  CHECK_THROWS_AS(sample_pairing(0, 2, 0), UsageError);
}

TEST_CASE("sample_pairing: the three matchings of four points are equally likely") {
  std::map<Matching, int> freq;
  const int trials = 300000;
  for (int s = 0; s < trials; ++s) ++freq[canonical(sample_pairing(2, 2, static_cast<std::uint64_t>(s)))];
  REQUIRE(freq.size() == 3);
  CHECK(std::abs(freq[{{0, 1}, {2, 3}}] / double(trials) - 1.0 / 3) < 0.01);
  CHECK(std::abs(freq[{{0, 2}, {1, 3}}] / double(trials) - 1.0 / 3) < 0.01);
  CHECK(std::abs(freq[{{0, 3}, {1, 2}}] / double(trials) - 1.0 / 3) < 0.01);
}

TEST_CASE("sample_pairing: chi-square uniformity over all matchings, nd <= 8") {
  const int samples = 1'000'000;
  for (auto [n, d] : {std::pair{2, 3}, std::pair{4, 2}, std::pair{8, 1}}) {
    CAPTURE(n);
    CAPTURE(d);
    const long matchings = static_cast<long>(double_factorial(n * d - 1));
    std::map<Matching, long> freq;
    Rng rng = make_stream(424242, static_cast<std::uint64_t>(n * 10 + d));
    for (int s = 0; s < samples; ++s) ++freq[canonical(sample_pairing(n, d, rng))];
    REQUIRE(static_cast<long>(freq.size()) == matchings);
    const double expected = static_cast<double>(samples) / matchings;
    double chi2 = 0;
    for (const auto& [m, count] : freq) chi2 += (count - expected) * (count - expected) / expected;
    const boost::math::chi_squared dist(static_cast<double>(matchings - 1));
    CHECK(chi2 < boost::math::quantile(dist, 1.0 - 0.001));
  }
}

TEST_CASE("sample_pairing is a perfect matching and deterministic") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 1 + trial % 5;
    const int n = 2 * (1 + trial % 40) + (d % 2 == 0 ? trial % 2 : 0);
    const auto seed = rng();
    const Pairing p = sample_pairing(n, d, seed);
    CHECK_NOTHROW(validate(p));
    CHECK(to_json(p).dump() == to_json(sample_pairing(n, d, seed)).dump());
  }
}

TEST_CASE("assign_spins examples") {
  CHECK(assign_spins(5, SpinLaw::uniform(1), 7).spins == std::vector<int>{1, 1, 1, 1, 1});
  CHECK(assign_spins(3, law({1, 0}), 7).spins == std::vector<int>{1, 1, 1});
  const SpinConfig many = assign_spins(10000, law({0.5, 0.5}), 2026);
  const auto ones = std::count(many.spins.begin(), many.spins.end(), 1);
  CHECK(std::abs(ones / 10000.0 - 0.5) <= 0.02);
  CHECK(assign_spins(50, law({0.2, 0.3, 0.5}), 9) == assign_spins(50, law({0.2, 0.3, 0.5}), 9));
}

TEST_CASE("empirical_measures examples") {
  {
    const auto [l1, l2] = empirical_measures(Pairing{1, 2, {{0, 1}}}, SpinConfig{1, 1, {1}});
    CHECK(l1.mass(0) == 1.0);
    CHECK(l2.mass(0, 0) == 1.0);
  }
  {
    const auto [l1, l2] = empirical_measures(Pairing{2, 1, {{0, 1}}}, SpinConfig{2, 2, {1, 2}});
    CHECK(l1.mass == VectorXd::Constant(2, 0.5));
    Eigen::MatrixXd expect(2, 2);
    expect << 0, 0.5, 0.5, 0;
    CHECK(l2.mass == expect);
  }
  const std::vector<Pairing> all = {Pairing{2, 2, {{0, 1}, {2, 3}}}, Pairing{2, 2, {{0, 2}, {1, 3}}},
                                    Pairing{2, 2, {{0, 3}, {1, 2}}}};
  for (const Pairing& p : all) {
    const auto [l1, l2] = empirical_measures(p, SpinConfig{2, 2, {1, 1}});
    CHECK(l1.mass(0) == 1.0);
    CHECK(l1.mass(1) == 0.0);
    CHECK(l2.mass(0, 0) == 1.0);
    CHECK(l2.mass.sum() == 1.0);
  }
  CHECK_THROWS_AS(empirical_measures(Pairing{2, 1, {{0, 1}}}, SpinConfig{3, 2, {1, 1, 2}}), UsageError);
}

TEST_CASE("empirical measures: marginal identity, symmetry, unit mass") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 1200; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 5);
    int n = 1 + static_cast<int>(rng() % 120);
    if ((n * d) % 2) ++n;
    const int q = 1 + static_cast<int>(rng() % 4);
    const SpinLaw mu = testing::random_law(rng, q);
    const SampleRecord r = draw_sample(n, d, mu, rng(), static_cast<std::uint64_t>(trial));
    CHECK((r.l2.marginal() - r.l1.mass).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(r.l2.mass == r.l2.mass.transpose());
    CHECK(std::abs(r.l2.total() - 1.0) <= 1e-12);
    CHECK(r.simple == is_simple(r.pairing));
  }
}

TEST_CASE("is_simple examples") {
  CHECK(is_simple(Pairing{2, 1, {{0, 1}}}));
  CHECK_FALSE(is_simple(Pairing{1, 2, {{0, 1}}}));
  CHECK_FALSE(is_simple(Pairing{2, 2, {{0, 2}, {1, 3}}}));
  CHECK(is_simple(Pairing{4, 1, {{0, 2}, {1, 3}}}));
}

TEST_CASE("sample_simple_graph") {
  const auto ok = sample_simple_graph(2, 1, 123, 10);
  CHECK(ok.attempts == 1);
  CHECK(canonical(ok.pairing) == Matching{{0, 1}});

  try {
    sample_simple_graph(1, 2, 5, 100);
    FAIL("expected RejectionCapError");
  } catch (const RejectionCapError& e) {
    CHECK(e.attempts() == 100);
  }

  const auto g = sample_simple_graph(20, 3, 77, 10000);
  CHECK(is_simple(g.pairing));
}

TEST_CASE("pairing model acceptance rate approaches exp(-(d^2 - 1) / 4)") {
  const int trials = 10000;
  int simple = 0;
  for (int s = 0; s < trials; ++s) simple += is_simple(sample_pairing(100, 3, static_cast<std::uint64_t>(s)));
  CHECK(std::abs(simple / double(trials) - std::exp(-2.0)) <= 0.02);
}
