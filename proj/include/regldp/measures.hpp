#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "regldp/errors.hpp"
#include "regldp/rational.hpp"

namespace regldp {

using Count = std::int64_t;
using CountVector = Eigen::Matrix<Count, Eigen::Dynamic, 1>;
using CountMatrix = Eigen::Matrix<Count, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// x * log(x / w) with 0 log(0 / w) = 0 and x log(x / 0) = +inf for x > 0.
template <typename Scalar>
Scalar xlog_ratio(Scalar x, Scalar w) {
  using std::log;
  if (x == Scalar(0)) return Scalar(0);
  if (w == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  return x * log(x / w);
}

/// Relative entropy H(p || w) = sum p log(p / w) of two finite measures on
/// the same index set, natural log. Works on any Eigen vector or matrix
/// expression; matrices are compared entrywise.
template <typename DerivedP, typename DerivedW>
typename DerivedP::Scalar relative_entropy(const Eigen::DenseBase<DerivedP>& p,
                                           const Eigen::DenseBase<DerivedW>& w) {
  using Scalar = typename DerivedP::Scalar;
  if (p.rows() != w.rows() || p.cols() != w.cols())
    throw UsageError("relative_entropy: index sets differ in size");
  if ((p.derived().array() < Scalar(0)).any() || (w.derived().array() < Scalar(0)).any())
    throw UsageError("relative_entropy: negative entry");
  Scalar sum(0);
  for (Eigen::Index j = 0; j < p.cols(); ++j)
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const Scalar term = xlog_ratio<Scalar>(p(i, j), w(i, j));
      if (std::isinf(static_cast<double>(term))) return term;
      sum += term;
    }
  return sum;
}

/// The prior law mu on [q]. Optionally carries exact rational weights, used
/// by exact-mode probability computations.
class SpinLaw {
 public:
  explicit SpinLaw(Eigen::VectorXd weights);
  /// Exact weights; the double weights are their nearest doubles.
  explicit SpinLaw(std::vector<Rational> weights);

  static SpinLaw uniform(int q);

  int q() const { return static_cast<int>(weights_.size()); }
  const Eigen::VectorXd& weights() const { return weights_; }
  double operator[](int i) const { return weights_(i); }

  bool has_exact() const { return !exact_.empty(); }
  /// Exact weights; when the law was built from doubles these are the
  /// doubles' exact dyadic values.
  std::vector<Rational> exact_weights() const;

 private:
  Eigen::VectorXd weights_;
  std::vector<Rational> exact_;
};

/// Probability vector on [q] (rho, or the empirical L1).
struct SpinMeasure {
  Eigen::VectorXd mass;

  SpinMeasure() = default;
  explicit SpinMeasure(Eigen::VectorXd m) : mass(std::move(m)) {}
  int q() const { return static_cast<int>(mass.size()); }
  double operator[](int i) const { return mass(i); }
};

/// Symmetric nonnegative q x q matrix (nu, or the empirical L2).
struct BondMeasure {
  Eigen::MatrixXd mass;

  BondMeasure() = default;
  explicit BondMeasure(Eigen::MatrixXd m) : mass(std::move(m)) {}
  int q() const { return static_cast<int>(mass.rows()); }
  double operator()(int i, int j) const { return mass(i, j); }
  double total() const { return mass.sum(); }
  Eigen::VectorXd marginal() const { return mass.rowwise().sum(); }
};

struct AdmissiblePair {
  SpinMeasure rho;
  BondMeasure nu;
};

/// Extended nonnegative real; +inf outside the admissible set.
struct RateValue {
  double value = 0.0;

  bool finite() const { return std::isfinite(value); }
  operator double() const { return value; }
};

/// One cell of the type lattice: integer spin counts c (sum n) and symmetric
/// bond counts m with row sums d c_i and even diagonal. m_ij (i != j) counts
/// pairs joining classes i and j; m_ii is twice the within-class pair count.
struct LatticeType {
  int n = 0;
  int d = 0;
  CountVector spin_counts;
  CountMatrix bond_counts;

  int q() const { return static_cast<int>(spin_counts.size()); }
};

bool operator==(const LatticeType& a, const LatticeType& b);
inline bool operator!=(const LatticeType& a, const LatticeType& b) { return !(a == b); }
/// Strict weak order (n, d, q, spin counts, bond counts), for use as a map key.
bool operator<(const LatticeType& a, const LatticeType& b);

/// Empty when t satisfies every LatticeType invariant, else the first
/// violated invariant.
std::string lattice_violation(const LatticeType& t);
inline bool is_valid(const LatticeType& t) { return lattice_violation(t).empty(); }

/// rho (x) rho.
inline Eigen::MatrixXd product_measure(const Eigen::VectorXd& rho) {
  return rho * rho.transpose();
}

bool is_admissible(const SpinMeasure& rho, const BondMeasure& nu, double tol = 1e-12);

inline constexpr double kDefaultAdmissibleTol = 1e-9;

/// H(rho | mu) + (d / 2) H(nu | rho (x) rho) on admissible pairs, +inf otherwise.
RateValue rate_function(const SpinMeasure& rho, const BondMeasure& nu, const SpinLaw& mu, int d,
                        double admissible_tol = kDefaultAdmissibleTol);

/// Visits every realizable type of (n, d, q) in lexicographic order of spin
/// counts then upper-triangular bond counts. The visitor returns false to stop
/// early; the function returns false iff it was stopped.
bool for_each_type(int n, int d, int q, const std::function<bool(const LatticeType&)>& visit);

std::vector<LatticeType> enumerate_types(int n, int d, int q);

/// Cardinality bound (n + 1)^(q (q + 1)) as a double (it overflows integers fast).
double type_count_bound(int n, int q);

AdmissiblePair type_to_measures(const LatticeType& t);

}  // namespace regldp
