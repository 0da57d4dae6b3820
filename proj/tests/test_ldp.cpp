#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "regldp/exact.hpp"
#include "regldp/ldp.hpp"

using namespace regldp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kTilted = 0.130812035941136959;  // H((3/4, 1/4) | (1/2, 1/2))

EventSpec rho1_at_least(double b, int q = 2) { return {{Constraint::rho_at_least(q, 0, b)}}; }

// Grid oracle over rho_1 in [lo, 1] at the given step, nu = rho x rho.
double grid_rho_only(double lo, double step) {
  double best = kInfinity;
  for (double r = lo; r <= 1.0 + 1e-15; r += step) {
    const double a = std::min(r, 1.0), b = 1.0 - a;
    double h = 0;
    if (a > 0) h += a * std::log(2 * a);
    if (b > 0) h += b * std::log(2 * b);
    best = std::min(best, h);
  }
  return best;
}

// Grid oracle for q = 2 over (rho_1, nu_11) with nu_11 >= bound.
struct GridPoint { double value, rho1, nu11; };
GridPoint grid_nu11(const SpinLaw& mu, int d, double bound, double step) {
  GridPoint best{kInfinity, 0, 0};
  for (double r = 0; r <= 1.0 + 1e-12; r += step)
    for (double a = bound; a <= r + 1e-12; a += step) {
      const double off = r - a, b = 1 - 2 * r + a;
      if (off < -1e-12 || b < -1e-12) continue;
      MatrixXd nu(2, 2);
      nu << a, std::max(off, 0.0), std::max(off, 0.0), std::max(b, 0.0);
      const BondMeasure bond(nu / nu.sum());
      const double v = rate_function(SpinMeasure(bond.marginal()), bond, mu, d);
      if (v < best.value) best = {v, r, a};
    }
  return best;
}

}  // namespace

TEST_CASE("events: membership and validation") {
  const EventSpec e = rho1_at_least(0.75);
  CHECK(e.rho_only());
  VectorXd rho(2);
  rho << 0.8, 0.2;
  const BondMeasure nu(product_measure(rho));
  CHECK(e.contains(SpinMeasure(rho), nu));
  rho << 0.7, 0.3;
  CHECK_FALSE(e.contains(SpinMeasure(rho), nu));
  CHECK_THROWS_AS(e.validate(3), UsageError);
  EventSpec mixed{{Constraint::nu_at_most(2, 0, 1, 0.1), Constraint::rho_at_most(2, 1, 0.5)}};
  CHECK_FALSE(mixed.rho_only());
  CHECK_THROWS_AS(Constraint::rho_at_least(2, 2, 0.5), UsageError);
}

TEST_CASE("wilson interval") {
  const auto [lo, hi] = wilson_interval(50, 100);
  CHECK(lo == doctest::Approx(0.40383).epsilon(1e-4));
  CHECK(hi == doctest::Approx(0.59617).epsilon(1e-4));
  const auto [lo0, hi0] = wilson_interval(0, 100);
  CHECK(lo0 == 0.0);
  CHECK(hi0 > 0.0);
}

TEST_CASE("mc_event_probability: trivial events") {
  const SpinLaw mu = SpinLaw::uniform(2);
  const McEstimate all = mc_event_probability(EventSpec{}, 10, 3, mu, 500, 1);
  CHECK(all.p_hat == 1.0);
  CHECK(all.log_rate == 0.0);
  const McEstimate none = mc_event_probability(rho1_at_least(2.0), 10, 3, mu, 500, 1);
  CHECK(none.p_hat == 0.0);
  CHECK(std::isinf(none.log_rate));
  CHECK_THROWS_AS(mc_event_probability(EventSpec{}, 5, 3, mu, 10, 1), UsageError);
  CHECK_THROWS_AS(mc_event_probability(EventSpec{}, 4, 3, mu, 0, 1), UsageError);
}

TEST_CASE("mc_event_probability: identical for any worker count") {
  const SpinLaw mu = SpinLaw::uniform(2);
  const EventSpec e = rho1_at_least(0.6);
  const McEstimate one = mc_event_probability(e, 12, 3, mu, 20000, 99, 1);
  for (unsigned w : {2u, 3u, 8u}) {
    const McEstimate many = mc_event_probability(e, 12, 3, mu, 20000, 99, w);
    CHECK(many.hits == one.hits);
  }
}

TEST_CASE("mc_event_probability: Wilson CI covers the exact probability") {
  // n = 6, d = 2, q = 2, event nu_11 >= 1/3 (mixes spins and bonds)
  const int n = 6, d = 2;
  const SpinLaw mu(std::vector<Rational>{Rational(1, 2), Rational(1, 2)});
  const EventSpec e{{Constraint::nu_at_least(2, 0, 0, 1.0 / 3)}};
  Rational exact = 0;
  for (const LatticeType& t : enumerate_types(n, d, 2)) {
    const auto [rho, nu] = type_to_measures(t);
    if (e.contains(rho, nu)) exact += *exact_type_probability(t, mu, ProbabilityMode::kExact).exact;
  }
  const double p = exact.convert_to<double>();
  REQUIRE(p > 0.05);
  int covered = 0;
  for (std::uint64_t run = 0; run < 100; ++run) {
    const McEstimate m = mc_event_probability(e, n, d, mu, 2000, 1000 + run);
    covered += (m.ci_lo <= p && p <= m.ci_hi);
  }
  MESSAGE("coverage " << covered << "/100 of exact p = " << p);
  CHECK(covered >= 93);
}

TEST_CASE("minimize_rate: always-true event") {
  const SpinLaw mu(VectorXd::Constant(2, 0.5));
  const MinimizerResult r = minimize_rate(EventSpec{}, mu, 3);
  CHECK(r.value.value == 0.0);
  CHECK(r.rho_star.mass == mu.weights());
}

TEST_CASE("minimize_rate: rho_1 >= 0.75 reduces to the tilted product measure") {
  CHECK(grid_rho_only(0.75, 1e-6) == doctest::Approx(kTilted).epsilon(1e-12));
  const SpinLaw mu(VectorXd::Constant(2, 0.5));
  for (int d : {1, 2, 3, 5}) {
    const MinimizerResult r = minimize_rate(rho1_at_least(0.75), mu, d);
    CHECK(r.value.value == doctest::Approx(kTilted).epsilon(1e-9));
    CHECK(r.rho_star[0] == doctest::Approx(0.75).epsilon(1e-8));
    CHECK((r.nu_star.mass - product_measure(r.rho_star.mass)).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(r.kkt_residual <= 1e-7);
  }
}

TEST_CASE("minimize_rate: nu_11 >= 0.5 against a grid oracle") {
  const SpinLaw mu(VectorXd::Constant(2, 0.5));
  const GridPoint grid = grid_nu11(mu, 3, 0.5, 1e-3);
  const MinimizerResult r = minimize_rate(EventSpec{{Constraint::nu_at_least(2, 0, 0, 0.5)}}, mu, 3);
  MESSAGE("grid " << grid.value << " at rho1=" << grid.rho1 << " nu11=" << grid.nu11
                  << "; solver " << r.value.value << " at rho1=" << r.rho_star[0]
                  << " nu11=" << r.nu_star(0, 0));
  CHECK(std::abs(r.value.value - grid.value) <= 1e-3);
  CHECK(r.value.value <= grid.value + 1e-9);
  CHECK(r.nu_star(0, 0) >= 0.5 - 1e-8);
  CHECK(is_admissible(r.rho_star, r.nu_star, 1e-8));
  CHECK(r.kkt_residual <= 1e-7);
}

TEST_CASE("minimize_rate: result invariants on random events") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const int q = 2 + trial % 2;
    const int d = 1 + trial % 4;
    const SpinLaw mu = testing::random_law(rng, q);
    std::uniform_real_distribution<double> u(0.05, 0.6);
    EventSpec e;
    e.constraints.push_back(Constraint::rho_at_least(q, trial % q, u(rng)));
    if (trial % 3) e.constraints.push_back(Constraint::nu_at_most(q, 0, q - 1, 0.5 * u(rng)));
    CAPTURE(trial);
    const MinimizerResult r = minimize_rate(e, mu, d);
    CHECK(is_admissible(r.rho_star, r.nu_star, 1e-8));
    CHECK(e.contains(r.rho_star, r.nu_star, 1e-8));
    CHECK(r.value.value == doctest::Approx(rate_function(r.rho_star, r.nu_star, mu, d).value).epsilon(1e-10));
    CHECK(r.kkt_residual <= 1e-7);
    // the lattice is inside the continuum: no lattice point beats it
    const auto lattice = lattice_infimum(e, 8, d, mu, 1'000'000);
    REQUIRE(lattice.has_value());
    CHECK(*lattice >= r.value.value - 1e-9);
  }
}

TEST_CASE("minimize_rate: lattice infimum never beats the continuum infimum") {
  const SpinLaw mu(VectorXd::Constant(2, 0.5));
  const EventSpec events[] = {rho1_at_least(0.75), EventSpec{{Constraint::nu_at_least(2, 0, 0, 0.5)}},
                              EventSpec{{Constraint::nu_at_most(2, 0, 1, 0.1)}}};
  for (const EventSpec& e : events) {
    const double continuum = minimize_rate(e, mu, 3).value;
    for (int n : {2, 4, 6, 10, 20, 40}) {
      const auto lattice = lattice_infimum(e, n, 3, mu, 1'000'000);
      REQUIRE(lattice.has_value());
      CHECK(*lattice >= continuum - 1e-9);
    }
  }
}

TEST_CASE("minimize_rate: scaling a rho-only event leaves the minimizer unchanged") {
  const SpinLaw mu(std::vector<Rational>{Rational(1, 5), Rational(3, 10), Rational(1, 2)});
  EventSpec e;
  Constraint c;
  c.coeffs = VectorXd(3);
  c.coeffs << 1.0, -0.5, 0.25;
  c.bound = 0.2;
  e.constraints = {c, Constraint::rho_at_most(3, 2, 0.3)};
  const MinimizerResult base = minimize_rate(e, mu, 3);
  for (double s : {0.01, 3.0, 250.0}) {
    EventSpec scaled = e;
    for (auto& k : scaled.constraints) {
      k.coeffs *= s;
      k.bound *= s;
    }
    const MinimizerResult r = minimize_rate(scaled, mu, 3);
    CHECK((r.rho_star.mass - base.rho_star.mass).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("minimize_rate: infeasible and degenerate events") {
  const SpinLaw mu(VectorXd::Constant(2, 0.5));
  CHECK_THROWS_AS(minimize_rate(rho1_at_least(1.5), mu, 3), InfeasibleEventError);
  CHECK_THROWS_AS(minimize_rate(EventSpec{{Constraint::rho_at_least(2, 0, 0.6),
                                           Constraint::rho_at_least(2, 1, 0.6)}},
                                mu, 3),
                  InfeasibleEventError);
  // rho_1 >= 1 has empty interior; the answer is (delta_1, delta_11) at log 2.
  const MinimizerResult corner = minimize_rate(rho1_at_least(1.0), mu, 3);
  CHECK(corner.value.value == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(corner.rho_star[0] >= 1.0 - 1e-8);
  // zero-weight state cannot carry mass
  const SpinLaw lopsided(std::vector<Rational>{1, 0});
  CHECK_THROWS_AS(minimize_rate(EventSpec{{Constraint::rho_at_least(2, 1, 0.1)}}, lopsided, 2),
                  InfeasibleEventError);
  const MinimizerResult pinned = minimize_rate(rho1_at_least(0.5), lopsided, 2);
  CHECK(pinned.value.value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("lattice_infimum respects the budget") {
  const SpinLaw mu = SpinLaw::uniform(3);
  CHECK_FALSE(lattice_infimum(EventSpec{}, 20, 2, mu, 10).has_value());
  // (mu, mu x mu) is not a lattice point at n = 4, q = 3, but it is at n = 4, q = 2.
  CHECK(lattice_infimum(EventSpec{}, 4, 2, mu, 1000).value() > 0.0);
  CHECK(lattice_infimum(EventSpec{}, 4, 2, SpinLaw::uniform(2), 1000).value() ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("convergence_report: always-true event gives zero rates") {
  {
    // d = 2, n = 4k: the product type is a lattice point
    const auto rows = convergence_report(EventSpec{}, 2, SpinLaw::uniform(2), {4, 8, 12}, 200, 5);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
      CHECK(r.mc.log_rate == 0.0);
      CHECK(r.lattice_inf == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(r.continuum_inf == 0.0);
    }
  }
  {
    // d = 3: nd / 4 is not an even integer, so the lattice minimum is positive but small
    const auto rows = convergence_report(EventSpec{}, 3, SpinLaw::uniform(2), {10, 20}, 200, 5);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
      CHECK(r.mc.log_rate == 0.0);
      CHECK(r.lattice_inf >= 0.0);
      CHECK(r.lattice_inf <= 0.01);
      CHECK(r.continuum_inf == 0.0);
    }
  }
  CHECK_THROWS_AS(convergence_report(EventSpec{}, 3, SpinLaw::uniform(2), {10, 11}, 10, 5), UsageError);
}

TEST_CASE("convergence_report: rho_1 >= 0.75, lattice column and MC trend") {
  const SpinLaw mu = SpinLaw::uniform(2);
  const auto rows = convergence_report(rho1_at_least(0.75), 3, mu, {10, 20, 50, 100}, 200000, 17);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.lattice_enumerated);
    CHECK(r.lattice_inf >= r.continuum_inf - 1e-9);
    CHECK(r.continuum_inf == doctest::Approx(kTilted).epsilon(1e-9));
  }
  // n = 20 and 100 hit rho_1 = 3/4 exactly; n = 50 must round up to 0.76.
  CHECK(rows[0].lattice_inf > rows[1].lattice_inf);
  CHECK(rows[2].lattice_inf > rows[1].lattice_inf);
  CHECK(std::abs(rows[3].lattice_inf - kTilted) <= 0.02);
  // MC: the gap to the continuum infimum shrinks where hits are plentiful
  const double g10 = std::abs(rows[0].mc.log_rate - kTilted);
  const double g20 = std::abs(rows[1].mc.log_rate - kTilted);
  const double g50 = std::abs(rows[2].mc.log_rate - kTilted);
  CHECK(g20 < g10);
  CHECK(g50 < g20);
}
