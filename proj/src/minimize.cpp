#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "barrier.hpp"
#include "regldp/ldp.hpp"
#include "regldp/rng.hpp"

namespace regldp {

namespace {

using detail::Polytope;
using detail::SmoothObjective;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kStrictMargin = 1e-11;
constexpr double kInfeasibleMargin = -1e-9;
constexpr double kRelaxation = 1e-9;

// Variables of the reduced problem and how they map back to (rho, nu).
struct Layout {
  int q = 0;
  std::vector<int> active;                   // classes with mu_i > 0
  std::vector<std::pair<int, int>> entries;  // nu entries (i <= j), general case only
  bool rho_only = false;

  Eigen::Index dim() const {
    return static_cast<Eigen::Index>(rho_only ? active.size() : entries.size());
  }

  // rho = R x
  MatrixXd rho_map() const {
    MatrixXd R = MatrixXd::Zero(q, dim());
    if (rho_only) {
      for (std::size_t k = 0; k < active.size(); ++k) R(active[k], static_cast<Eigen::Index>(k)) = 1;
      return R;
    }
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto [i, j] = entries[k];
      R(i, static_cast<Eigen::Index>(k)) = 1;
      if (i != j) R(j, static_cast<Eigen::Index>(k)) = 1;
    }
    return R;
  }

  // Entry multiplicity in the full q x q nu: 1 on the diagonal, 2 off it.
  VectorXd multiplicity() const {
    if (rho_only) return VectorXd::Ones(dim());
    VectorXd w(dim());
    for (std::size_t k = 0; k < entries.size(); ++k)
      w(static_cast<Eigen::Index>(k)) = entries[k].first == entries[k].second ? 1.0 : 2.0;
    return w;
  }

  AdmissiblePair to_pair(VectorXd x) const {
    x /= multiplicity().dot(x);
    if (rho_only) {
      Eigen::VectorXd rho = rho_map() * x;
      return {SpinMeasure(rho), BondMeasure(product_measure(rho))};
    }
    MatrixXd nu = MatrixXd::Zero(q, q);
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto [i, j] = entries[k];
      nu(i, j) = nu(j, i) = x(static_cast<Eigen::Index>(k));
    }
    BondMeasure bond(nu);
    return {SpinMeasure(bond.marginal()), std::move(bond)};
  }
};

// Rows of G x >= h for one event constraint.
std::pair<VectorXd, double> event_row(const Constraint& c, const Layout& L) {
  VectorXd row = VectorXd::Zero(L.dim());
  if (c.target == Target::kRho) {
    row = L.rho_map().transpose() * c.coeffs.col(0);
  } else {
    for (std::size_t k = 0; k < L.entries.size(); ++k) {
      const auto [i, j] = L.entries[k];
      row(static_cast<Eigen::Index>(k)) = i == j ? c.coeffs(i, i) : c.coeffs(i, j) + c.coeffs(j, i);
    }
  }
  if (c.sense == Sense::kGreaterEqual) return {row, c.bound};
  return {-row, -c.bound};
}

Polytope build_polytope(const EventSpec& event, const Layout& L) {
  const Eigen::Index m = L.dim();
  const Eigen::Index rows = m + static_cast<Eigen::Index>(event.constraints.size());
  Polytope P;
  P.G = MatrixXd::Zero(rows, m);
  P.h = VectorXd::Zero(rows);
  P.G.topRows(m).setIdentity();
  for (std::size_t k = 0; k < event.constraints.size(); ++k) {
    auto [row, bound] = event_row(event.constraints[k], L);
    P.G.row(m + static_cast<Eigen::Index>(k)) = row.transpose();
    P.h(m + static_cast<Eigen::Index>(k)) = bound;
  }
  P.a = L.multiplicity();
  return P;
}

SmoothObjective make_objective(const Layout& L, const SpinLaw& mu, int d) {
  const MatrixXd R = L.rho_map();
  const VectorXd w = L.multiplicity();
  const VectorXd log_mu = mu.weights().unaryExpr([](double v) {
    return v > 0 ? std::log(v) : 0.0;  // inactive classes carry no mass
  });
  SmoothObjective f;
  if (L.rho_only) {
    // H(rho | mu); the nu term vanishes at nu = rho (x) rho.
    f.value = [=](const VectorXd& x) {
      const VectorXd rho = R * x;
      double s = 0;
      for (int i = 0; i < L.q; ++i)
        if (rho(i) > 0) s += rho(i) * (std::log(rho(i)) - log_mu(i));
      return s;
    };
    f.gradient = [=](const VectorXd& x) -> VectorXd {
      const VectorXd rho = R * x;
      VectorXd g(x.size());
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        const int i = L.active[static_cast<std::size_t>(k)];
        g(k) = std::log(rho(i)) + 1 - log_mu(i);
      }
      return g;
    };
    f.hessian = [](const VectorXd& x) -> MatrixXd { return x.cwiseInverse().asDiagonal(); };
    return f;
  }
  // (1 - d) <rho, log rho> - <rho, log mu> + (d / 2) <nu, log nu>
  const double dd = d;
  f.value = [=](const VectorXd& x) {
    const VectorXd rho = R * x;
    double s = 0;
    for (int i = 0; i < L.q; ++i)
      if (rho(i) > 0) s += (1 - dd) * rho(i) * std::log(rho(i)) - rho(i) * log_mu(i);
    for (Eigen::Index k = 0; k < x.size(); ++k)
      if (x(k) > 0) s += 0.5 * dd * w(k) * x(k) * std::log(x(k));
    return s;
  };
  f.gradient = [=](const VectorXd& x) -> VectorXd {
    const VectorXd rho = R * x;
    VectorXd per_class = VectorXd::Zero(L.q);
    for (int i = 0; i < L.q; ++i)
      if (rho(i) > 0) per_class(i) = (1 - dd) * (std::log(rho(i)) + 1) - log_mu(i);
    VectorXd g = R.transpose() * per_class;
    for (Eigen::Index k = 0; k < x.size(); ++k) g(k) += 0.5 * dd * w(k) * (std::log(x(k)) + 1);
    return g;
  };
  f.hessian = [=](const VectorXd& x) -> MatrixXd {
    const VectorXd rho = R * x;
    VectorXd curvature = VectorXd::Zero(L.q);
    for (int i = 0; i < L.q; ++i)
      if (rho(i) > 0) curvature(i) = (1 - dd) / rho(i);
    MatrixXd H = R.transpose() * curvature.asDiagonal() * R;
    H.diagonal() += (0.5 * dd * w.array() / x.array()).matrix();
    return H;
  };
  return f;
}

// Interior start part-way from `center` toward the boundary along a random
// direction in the null space of a.
VectorXd random_interior_point(const Polytope& P, const VectorXd& center, Rng& rng) {
  const MatrixXd Z = detail::null_space(P.a);
  std::normal_distribution<double> gauss;
  VectorXd dir(Z.cols());
  for (Eigen::Index k = 0; k < dir.size(); ++k) dir(k) = gauss(rng);
  const VectorXd dx = Z * dir;
  const VectorXd r = P.G * center - P.h;
  const VectorXd rate = P.G * dx;
  double reach = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < r.size(); ++k)
    if (rate(k) < 0) reach = std::min(reach, r(k) / -rate(k));
  if (!std::isfinite(reach)) reach = 1.0;
  std::uniform_real_distribution<double> frac(0.3, 0.9);
  return center + frac(rng) * reach * dx;
}

MinimizerResult package(const Layout& L, const VectorXd& x, const SpinLaw& mu, int d,
                        double kkt, std::size_t steps) {
  auto [rho, nu] = L.to_pair(x);
  MinimizerResult out;
  out.value = rate_function(rho, nu, mu, d);
  out.rho_star = std::move(rho);
  out.nu_star = std::move(nu);
  out.kkt_residual = kkt;
  out.iterations = steps;
  return out;
}

}  // namespace

MinimizerResult minimize_rate(const EventSpec& event, const SpinLaw& mu, int d,
                              const MinimizerOptions& options) {
  const int q = mu.q();
  if (d < 1) throw UsageError("minimize_rate: d must be positive");
  event.validate(q);

  if (event.constraints.empty()) {
    MinimizerResult out;
    out.rho_star = SpinMeasure(mu.weights());
    out.nu_star = BondMeasure(product_measure(mu.weights()));
    out.value = rate_function(out.rho_star, out.nu_star, mu, d);
    return out;
  }

  Layout L;
  L.q = q;
  L.rho_only = event.rho_only();
  for (int i = 0; i < q; ++i)
    if (mu[i] > 0) L.active.push_back(i);
  for (std::size_t a = 0; a < L.active.size(); ++a)
    for (std::size_t b = a; b < L.active.size(); ++b) L.entries.emplace_back(L.active[a], L.active[b]);

  Polytope P = build_polytope(event, L);
  const Eigen::Index m = L.dim();
  const Eigen::Index event_rows = P.G.rows() - m;
  const VectorXd h_original = P.h;

  auto primal_violation = [&](const VectorXd& x) {
    const VectorXd scaled = x / P.a.dot(x);
    return std::max(0.0, -(P.G * scaled - h_original).minCoeff());
  };

  if (m == 1) {
    const VectorXd x = P.a.cwiseInverse();
    if (primal_violation(x) > 1e-9)
      throw InfeasibleEventError("minimize_rate: event excludes the only admissible pair");
    return package(L, x, mu, d, 0.0, 0);
  }

  detail::PhaseOneResult start = detail::max_margin_point(P);
  if (start.margin < kStrictMargin) {
    if (start.margin < kInfeasibleMargin)
      throw InfeasibleEventError("minimize_rate: no admissible pair satisfies the event");
    // Event touches the simplex boundary without interior; relax it slightly.
    P.h.tail(event_rows).array() -= kRelaxation;
    start = detail::max_margin_point(P);
    if (start.margin <= 0)
      throw InfeasibleEventError("minimize_rate: no admissible pair satisfies the event");
  }

  const SmoothObjective f = make_objective(L, mu, d);
  detail::PathOptions path;
  path.max_newton_steps = options.max_newton_steps;

  std::vector<detail::PathResult> runs;
  runs.push_back(detail::follow_path(f, P, start.x, path));
  if (!L.rho_only) {
    Rng rng(options.seed);
    detail::PathOptions late = path;
    late.t0 = 1e3;
    for (int r = 0; r < options.restarts; ++r)
      runs.push_back(detail::follow_path(f, P, random_interior_point(P, start.x, rng), late));
  }

  std::size_t steps = 0;
  const detail::PathResult* best = nullptr;
  double best_value = std::numeric_limits<double>::infinity();
  for (const auto& run : runs) {
    steps += run.newton_steps;
    const double v = f.value(run.x);
    if (v < best_value) {
      best_value = v;
      best = &run;
    }
  }
  const double kkt = std::max({best->stationarity, best->complementarity, primal_violation(best->x)});
  MinimizerResult out = package(L, best->x, mu, d, kkt, steps);
  if (kkt > options.kkt_tolerance || best->hit_step_cap)
    throw NonConvergenceError("minimize_rate: KKT residual " + std::to_string(kkt) +
                                  " above tolerance",
                              out);
  return out;
}

}  // namespace regldp
