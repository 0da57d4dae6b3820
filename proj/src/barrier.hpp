#pragma once

// Primal log-barrier machinery for
//   minimize f(x)  subject to  G x >= h,  a . x = 1
// on small dense problems. Internal to the library.

#include <cstddef>
#include <functional>
#include <optional>

#include <Eigen/Dense>

namespace regldp::detail {

struct SmoothObjective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;
};

struct Polytope {
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  Eigen::VectorXd a;

  Eigen::Index dim() const { return a.size(); }
};

struct PhaseOneResult {
  Eigen::VectorXd x;
  double margin = 0.0;  ///< max over x of min_k (G x - h)_k
};

/// Max-margin point of the polytope (an LP solved with the same barrier).
PhaseOneResult max_margin_point(const Polytope& poly);

struct PathResult {
  Eigen::VectorXd x;
  double t = 0.0;
  double stationarity = 0.0;     ///< || Z^T (grad f - G^T lambda) ||_inf
  double complementarity = 0.0;  ///< max_k lambda_k (G x - h)_k
  std::size_t newton_steps = 0;
  bool hit_step_cap = false;
};

struct PathOptions {
  double t0 = 1.0;
  double t_growth = 10.0;
  double final_complementarity = 1e-11;
  std::size_t max_newton_steps = 2000;
};

/// Follows the barrier path from a strictly feasible x0. Indefinite reduced
/// Hessians are repaired by flipping and flooring eigenvalues, so on
/// non-convex f the result is a local KKT point.
PathResult follow_path(const SmoothObjective& f, const Polytope& poly, Eigen::VectorXd x0,
                       const PathOptions& options);

/// Orthonormal basis of the null space of a^T (m x (m - 1)).
Eigen::MatrixXd null_space(const Eigen::VectorXd& a);

}  // namespace regldp::detail
