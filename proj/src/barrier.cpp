#include "barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace regldp::detail {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Objective in reduced coordinates y, with constraint residuals r = B y + c.
struct Reduced {
  std::function<double(const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&)> gradient;
  std::function<MatrixXd(const VectorXd&)> hessian;
  MatrixXd B;
  VectorXd c;
};

struct CenterResult {
  VectorXd y;
  VectorXd reduced_gradient;  ///< t grad F - B^T (1 / r) at y
  std::size_t steps = 0;
};

double barrier_value(const Reduced& p, const VectorXd& y, double t) {
  const VectorXd r = p.B * y + p.c;
  if ((r.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
  return t * p.value(y) - r.array().log().sum();
}

CenterResult center(const Reduced& p, VectorXd y, double t, std::size_t step_budget) {
  CenterResult out;
  for (;;) {
    const VectorXd r = p.B * y + p.c;
    const VectorXd inv_r = r.cwiseInverse();
    VectorXd g = t * p.gradient(y) - p.B.transpose() * inv_r;
    MatrixXd H = t * p.hessian(y) + p.B.transpose() * inv_r.cwiseAbs2().asDiagonal() * p.B;
    out.reduced_gradient = g;
    if (out.steps >= step_budget) break;

    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (H + H.transpose()));
    VectorXd lambda = eig.eigenvalues().cwiseAbs();
    const double floor = 1e-12 * std::max(1.0, lambda.maxCoeff());
    lambda = lambda.cwiseMax(floor);
    const MatrixXd& V = eig.eigenvectors();
    const VectorXd dy = -V * (V.transpose() * g).cwiseQuotient(lambda);
    const double decrement = -g.dot(dy);
    if (!(decrement > 1e-12)) break;

    const VectorXd rate = p.B * dy;
    double step = 1.0;
    for (Eigen::Index k = 0; k < r.size(); ++k)
      if (rate(k) < 0.0) step = std::min(step, 0.99 * r(k) / -rate(k));
    const double phi = barrier_value(p, y, t);
    const double slope = g.dot(dy);
    // Objective differences below rounding of phi count as no increase.
    const double noise = 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(phi));
    while (step > 1e-18 && !(barrier_value(p, y + step * dy, t) <= phi + 0.25 * step * slope + noise))
      step *= 0.5;
    ++out.steps;
    if (step <= 1e-18) break;
    y += step * dy;
  }
  out.y = std::move(y);
  return out;
}

}  // namespace

MatrixXd null_space(const VectorXd& a) {
  const Eigen::Index m = a.size();
  Eigen::HouseholderQR<MatrixXd> qr(a);
  const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(m, m);
  return Q.rightCols(m - 1);
}

PhaseOneResult max_margin_point(const Polytope& poly) {
  const Eigen::Index m = poly.dim();
  const VectorXd x0 = (poly.a.array() * static_cast<double>(m)).inverse().matrix();
  if (m == 1) return {x0, (poly.G * x0 - poly.h).minCoeff()};

  const MatrixXd Z = null_space(poly.a);
  const Eigen::Index k = Z.cols();
  const Eigen::Index rows = poly.G.rows();
  Reduced p;
  p.B.resize(rows, k + 1);
  p.B << poly.G * Z, -VectorXd::Ones(rows);
  p.c = poly.G * x0 - poly.h;
  p.value = [k](const VectorXd& y) { return -y(k); };
  p.gradient = [k](const VectorXd& y) {
    VectorXd g = VectorXd::Zero(y.size());
    g(k) = -1.0;
    return g;
  };
  p.hessian = [](const VectorXd& y) { return MatrixXd::Zero(y.size(), y.size()); };

  VectorXd y = VectorXd::Zero(k + 1);
  y(k) = p.c.minCoeff() - 1.0;
  for (double t = 1.0; static_cast<double>(rows) / t > 1e-13; t *= 10.0)
    y = center(p, y, t, 200).y;
  return {x0 + Z * y.head(k), (poly.G * (x0 + Z * y.head(k)) - poly.h).minCoeff()};
}

namespace {

constexpr std::size_t kCenteringSteps = 100;

// Lawson-Hanson active set method for min ||A x - b|| subject to x >= 0.
VectorXd nonnegative_least_squares(const MatrixXd& A, const VectorXd& b) {
  const Eigen::Index n = A.cols();
  VectorXd x = VectorXd::Zero(n);
  std::vector<bool> free(static_cast<std::size_t>(n), false);
  const double tol = 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff() * b.cwiseAbs().maxCoeff());

  auto solve_free = [&] {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (free[static_cast<std::size_t>(j)]) idx.push_back(j);
    MatrixXd Af(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) Af.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
    const VectorXd zf = Af.completeOrthogonalDecomposition().solve(b);
    VectorXd z = VectorXd::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zf(static_cast<Eigen::Index>(k));
    return z;
  };

  for (Eigen::Index outer = 0; outer < 3 * n + 3; ++outer) {
    const VectorXd w = A.transpose() * (b - A * x);
    Eigen::Index pick = -1;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!free[static_cast<std::size_t>(j)] && w(j) > tol && (pick < 0 || w(j) > w(pick))) pick = j;
    if (pick < 0) break;
    free[static_cast<std::size_t>(pick)] = true;
    for (Eigen::Index inner = 0; inner <= n; ++inner) {
      const VectorXd z = solve_free();
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (free[static_cast<std::size_t>(j)] && z(j) <= 0.0) alpha = std::min(alpha, x(j) / (x(j) - z(j)));
      x += alpha * (z - x);
      if (alpha >= 1.0) break;
      for (Eigen::Index j = 0; j < n; ++j)
        if (free[static_cast<std::size_t>(j)] && x(j) <= 0.0) {
          free[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
    }
  }
  return x;
}

// KKT residual at x: fits multipliers lambda >= 0 to every row, penalising
// lambda_k s_k so that loose rows cannot absorb the gradient.
double kkt_stationarity(const SmoothObjective& f, const Polytope& poly, const MatrixXd& Z,
                        const VectorXd& x) {
  const VectorXd slack = (poly.G * x - poly.h).cwiseMax(0.0);
  const Eigen::Index k = Z.cols();
  const Eigen::Index rows = poly.G.rows();
  MatrixXd A(k + rows, rows);
  A.topRows(k) = Z.transpose() * poly.G.transpose();
  A.bottomRows(rows) = slack.asDiagonal();
  VectorXd b = VectorXd::Zero(k + rows);
  b.head(k) = Z.transpose() * f.gradient(x);
  return (b - A * nonnegative_least_squares(A, b)).lpNorm<Eigen::Infinity>();
}

}  // namespace

PathResult follow_path(const SmoothObjective& f, const Polytope& poly, VectorXd x0,
                       const PathOptions& options) {
  const MatrixXd Z = null_space(poly.a);
  Reduced p;
  p.B = poly.G * Z;
  p.c = poly.G * x0 - poly.h;
  p.value = [&](const VectorXd& z) { return f.value(x0 + Z * z); };
  p.gradient = [&](const VectorXd& z) -> VectorXd { return Z.transpose() * f.gradient(x0 + Z * z); };
  p.hessian = [&](const VectorXd& z) -> MatrixXd {
    return Z.transpose() * f.hessian(x0 + Z * z) * Z;
  };

  PathResult out;
  VectorXd z = VectorXd::Zero(Z.cols());
  double t = options.t0;
  for (;;) {
    const std::size_t budget =
        options.max_newton_steps > out.newton_steps ? options.max_newton_steps - out.newton_steps : 0;
    CenterResult c = center(p, z, t, std::min<std::size_t>(budget, kCenteringSteps));
    out.newton_steps += c.steps;
    z = c.y;
    out.t = t;
    if (out.newton_steps >= options.max_newton_steps) {
      out.hit_step_cap = true;
      break;
    }
    if (1.0 / t <= options.final_complementarity) break;
    t *= options.t_growth;
  }
  out.x = x0 + Z * z;
  out.complementarity = 1.0 / out.t;
  out.stationarity = kkt_stationarity(f, poly, Z, out.x);
  return out;
}

}  // namespace regldp::detail
