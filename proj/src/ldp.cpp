#include "regldp/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "regldp/pairing.hpp"

namespace regldp {

namespace {

Constraint single_entry(Target target, int q, int i, int j, double bound, Sense sense) {
  if (i < 0 || i >= q || j < 0 || j >= q) throw UsageError("constraint index out of range");
  Constraint c;
  c.target = target;
  c.coeffs = target == Target::kRho ? Eigen::MatrixXd::Zero(q, 1) : Eigen::MatrixXd::Zero(q, q);
  c.coeffs(i, j) = 1.0;
  c.bound = bound;
  c.sense = sense;
  return c;
}

}  // namespace

Constraint Constraint::rho_at_least(int q, int i, double bound) {
  return single_entry(Target::kRho, q, i, 0, bound, Sense::kGreaterEqual);
}
Constraint Constraint::rho_at_most(int q, int i, double bound) {
  return single_entry(Target::kRho, q, i, 0, bound, Sense::kLessEqual);
}
Constraint Constraint::nu_at_least(int q, int i, int j, double bound) {
  return single_entry(Target::kNu, q, i, j, bound, Sense::kGreaterEqual);
}
Constraint Constraint::nu_at_most(int q, int i, int j, double bound) {
  return single_entry(Target::kNu, q, i, j, bound, Sense::kLessEqual);
}

double Constraint::slack(const SpinMeasure& rho, const BondMeasure& nu) const {
  const double lhs = target == Target::kRho ? coeffs.col(0).dot(rho.mass)
                                            : (coeffs.array() * nu.mass.array()).sum();
  return sense == Sense::kGreaterEqual ? lhs - bound : bound - lhs;
}

bool EventSpec::rho_only() const {
  return std::all_of(constraints.begin(), constraints.end(),
                     [](const Constraint& c) { return c.target == Target::kRho; });
}

bool EventSpec::contains(const SpinMeasure& rho, const BondMeasure& nu, double tol) const {
  return std::all_of(constraints.begin(), constraints.end(),
                     [&](const Constraint& c) { return c.slack(rho, nu) >= -tol; });
}

void EventSpec::validate(int q) const {
  for (const Constraint& c : constraints) {
    const bool shape_ok = c.target == Target::kRho ? (c.coeffs.rows() == q && c.coeffs.cols() == 1)
                                                   : (c.coeffs.rows() == q && c.coeffs.cols() == q);
    if (!shape_ok) throw UsageError("event constraint does not match q = " + std::to_string(q));
    if (!c.coeffs.allFinite() || !std::isfinite(c.bound))
      throw UsageError("event constraint has non-finite coefficients");
  }
}

std::pair<double, double> wilson_interval(std::uint64_t hits, std::uint64_t samples, double z) {
  if (samples == 0) return {0.0, 1.0};
  const double n = static_cast<double>(samples);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double center = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  // the interval reaches the boundary exactly when the count does
  const double lo = hits == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = hits == samples ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

McEstimate mc_event_probability(const EventSpec& event, int n, int d, const SpinLaw& mu,
                                std::uint64_t samples, std::uint64_t seed, unsigned workers) {
  if (samples < 1) throw UsageError("mc_event_probability: samples must be positive");
  if (n < 1 || d < 1 || (static_cast<long>(n) * d) % 2 != 0)
    throw UsageError("mc_event_probability: n * d must be even and positive");
  event.validate(mu.q());

  auto count_hits = [&](std::uint64_t begin, std::uint64_t end) {
    std::uint64_t hits = 0;
    for (std::uint64_t k = begin; k < end; ++k) {
      Rng rng = make_stream(seed, k);
      const Pairing pairing = sample_pairing(n, d, rng);
      const SpinConfig spins = assign_spins(n, mu, rng);
      const auto [l1, l2] = empirical_measures(pairing, spins);
      if (event.contains(l1, l2)) ++hits;
    }
    return hits;
  };

  workers = static_cast<unsigned>(std::clamp<std::uint64_t>(workers, 1, samples));
  std::uint64_t hits = 0;
  if (workers == 1) {
    hits = count_hits(0, samples);
  } else {
    std::vector<std::uint64_t> partial(workers, 0);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t begin = samples * w / workers, end = samples * (w + 1) / workers;
      pool.emplace_back([&, w, begin, end] { partial[w] = count_hits(begin, end); });
    }
    for (auto& th : pool) th.join();
    for (std::uint64_t h : partial) hits += h;
  }

  McEstimate out;
  out.hits = hits;
  out.samples = samples;
  out.p_hat = static_cast<double>(hits) / static_cast<double>(samples);
  out.log_rate = hits == 0 ? kInfinity : -std::log(out.p_hat) / n;
  if (hits == samples) out.log_rate = 0.0;
  std::tie(out.ci_lo, out.ci_hi) = wilson_interval(hits, samples);
  return out;
}

std::optional<double> lattice_infimum(const EventSpec& event, int n, int d, const SpinLaw& mu,
                                      std::size_t budget) {
  event.validate(mu.q());
  double best = kInfinity;
  std::size_t visited = 0;
  const bool complete = for_each_type(n, d, mu.q(), [&](const LatticeType& t) {
    if (++visited > budget) return false;
    const auto [rho, nu] = type_to_measures(t);
    if (event.contains(rho, nu)) best = std::min(best, rate_function(rho, nu, mu, d).value);
    return true;
  });
  if (!complete) return std::nullopt;
  return best;
}

std::vector<ReportRow> convergence_report(const EventSpec& event, int d, const SpinLaw& mu,
                                          const std::vector<int>& n_grid,
                                          std::uint64_t samples_per_n, std::uint64_t seed,
                                          const ReportOptions& options) {
  for (int n : n_grid)
    if (n < 1 || (static_cast<long>(n) * d) % 2 != 0)
      throw UsageError("convergence_report: every n in the grid needs n * d even");
  const double continuum = minimize_rate(event, mu, d).value;
  std::vector<ReportRow> rows;
  for (int n : n_grid) {
    ReportRow row;
    row.n = n;
    row.mc = mc_event_probability(event, n, d, mu, samples_per_n,
                                  stream_seed(seed, static_cast<std::uint64_t>(n)), options.workers);
    row.continuum_inf = continuum;
    if (auto lattice = lattice_infimum(event, n, d, mu, options.enumeration_budget)) {
      row.lattice_inf = *lattice;
    } else {
      row.lattice_inf = continuum;
      row.lattice_enumerated = false;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace regldp
