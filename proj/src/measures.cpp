#include "regldp/measures.hpp"

#include <algorithm>
#include <sstream>

namespace regldp {

namespace {

constexpr double kLawSumTol = 1e-12;

}  // namespace

SpinLaw::SpinLaw(Eigen::VectorXd weights) : weights_(std::move(weights)) {
  if (weights_.size() < 1) throw UsageError("SpinLaw: q must be at least 1");
  if ((weights_.array() < 0.0).any() || !weights_.allFinite())
    throw UsageError("SpinLaw: weights must be finite and nonnegative");
  if (std::abs(weights_.sum() - 1.0) > kLawSumTol)
    throw UsageError("SpinLaw: weights must sum to 1");
}

SpinLaw::SpinLaw(std::vector<Rational> weights) : exact_(std::move(weights)) {
  if (exact_.empty()) throw UsageError("SpinLaw: q must be at least 1");
  Rational sum = 0;
  weights_.resize(static_cast<Eigen::Index>(exact_.size()));
  for (std::size_t i = 0; i < exact_.size(); ++i) {
    if (exact_[i] < 0) throw UsageError("SpinLaw: weights must be nonnegative");
    sum += exact_[i];
    weights_(static_cast<Eigen::Index>(i)) = exact_[i].convert_to<double>();
  }
  if (sum != 1) throw UsageError("SpinLaw: exact weights must sum to exactly 1");
}

SpinLaw SpinLaw::uniform(int q) {
  if (q < 1) throw UsageError("SpinLaw: q must be at least 1");
  return SpinLaw(std::vector<Rational>(static_cast<std::size_t>(q), Rational(1, q)));
}

std::vector<Rational> SpinLaw::exact_weights() const {
  if (has_exact()) return exact_;
  std::vector<Rational> out;
  out.reserve(static_cast<std::size_t>(q()));
  for (int i = 0; i < q(); ++i) out.push_back(exact_rational(weights_(i)));
  return out;
}

bool operator==(const LatticeType& a, const LatticeType& b) {
  return a.n == b.n && a.d == b.d && a.spin_counts.size() == b.spin_counts.size() &&
         a.spin_counts == b.spin_counts && a.bond_counts.rows() == b.bond_counts.rows() &&
         a.bond_counts.cols() == b.bond_counts.cols() && a.bond_counts == b.bond_counts;
}

bool operator<(const LatticeType& a, const LatticeType& b) {
  if (a.n != b.n) return a.n < b.n;
  if (a.d != b.d) return a.d < b.d;
  if (a.q() != b.q()) return a.q() < b.q();
  const auto sa = a.spin_counts.data(), sb = b.spin_counts.data();
  if (!std::equal(sa, sa + a.q(), sb))
    return std::lexicographical_compare(sa, sa + a.q(), sb, sb + b.q());
  const auto ba = a.bond_counts.data(), bb = b.bond_counts.data();
  return std::lexicographical_compare(ba, ba + a.bond_counts.size(), bb,
                                      bb + b.bond_counts.size());
}

std::string lattice_violation(const LatticeType& t) {
  std::ostringstream why;
  const int q = t.q();
  if (t.n < 1 || t.d < 1) return "n and d must be positive";
  if (q < 1) return "q must be positive";
  if (t.bond_counts.rows() != q || t.bond_counts.cols() != q) return "bond_counts must be q x q";
  if ((t.spin_counts.array() < 0).any() || (t.bond_counts.array() < 0).any())
    return "counts must be nonnegative";
  if (t.spin_counts.sum() != t.n) return "spin_counts must sum to n";
  if (t.bond_counts != t.bond_counts.transpose()) return "bond_counts must be symmetric";
  for (int i = 0; i < q; ++i) {
    if (t.bond_counts.row(i).sum() != static_cast<Count>(t.d) * t.spin_counts(i)) {
      why << "row " << i << " of bond_counts must sum to d * spin_counts[" << i << "]";
      return why.str();
    }
    if (t.bond_counts(i, i) % 2 != 0) {
      why << "diagonal entry " << i << " of bond_counts must be even";
      return why.str();
    }
  }
  return {};
}

bool is_admissible(const SpinMeasure& rho, const BondMeasure& nu, double tol) {
  const int q = rho.q();
  if (nu.mass.rows() != q || nu.mass.cols() != q)
    throw UsageError("is_admissible: rho and nu have different q");
  if ((nu.mass.array() < 0.0).any() || (rho.mass.array() < 0.0).any()) return false;
  if (((nu.mass - nu.mass.transpose()).array().abs() > tol).any()) return false;
  if (std::abs(nu.total() - 1.0) > tol) return false;
  return ((nu.marginal() - rho.mass).array().abs() <= tol).all();
}

RateValue rate_function(const SpinMeasure& rho, const BondMeasure& nu, const SpinLaw& mu, int d,
                        double admissible_tol) {
  if (rho.q() != mu.q()) throw UsageError("rate_function: rho and mu have different q");
  if (d < 1) throw UsageError("rate_function: d must be positive");
  if (!is_admissible(rho, nu, admissible_tol)) return {kInfinity};
  const double spin_part = relative_entropy(rho.mass, mu.weights());
  if (!std::isfinite(spin_part)) return {kInfinity};
  const Eigen::MatrixXd independent = product_measure(rho.mass);
  const double bond_part = relative_entropy(nu.mass, independent);
  return {spin_part + 0.5 * d * bond_part};
}

namespace {

class TypeWalker {
 public:
  TypeWalker(int n, int d, int q, const std::function<bool(const LatticeType&)>& visit)
      : visit_(visit), capacity_(q) {
    t_.n = n;
    t_.d = d;
    t_.spin_counts = CountVector::Zero(q);
    t_.bond_counts = CountMatrix::Zero(q, q);
    for (int i = 0; i < q; ++i)
      for (int j = i + 1; j < q; ++j) off_diagonal_.emplace_back(i, j);
  }

  bool run() { return spins(0, t_.n); }

 private:
  bool spins(int i, Count left) {
    const int q = t_.q();
    if (i == q - 1) {
      t_.spin_counts(i) = left;
      for (int k = 0; k < q; ++k) capacity_[k] = t_.d * t_.spin_counts(k);
      return bonds(0);
    }
    for (Count c = 0; c <= left; ++c) {
      t_.spin_counts(i) = c;
      if (!spins(i + 1, left - c)) return false;
    }
    return true;
  }

  // Row i is closed once its last off-diagonal (i, q - 1) is set; the
  // remainder goes to the diagonal and must be even.
  bool row_closes(int i) {
    const Count rest = capacity_[i];
    if (rest % 2 != 0) return false;
    t_.bond_counts(i, i) = rest;
    return true;
  }

  bool bonds(std::size_t k) {
    const int q = t_.q();
    if (k == off_diagonal_.size()) {
      if (q == 1 && !row_closes(0)) return true;
      if (q > 1 && !row_closes(q - 1)) return true;
      return visit_(t_);
    }
    const auto [i, j] = off_diagonal_[k];
    const Count hi = std::min(capacity_[i], capacity_[j]);
    for (Count m = 0; m <= hi; ++m) {
      t_.bond_counts(i, j) = t_.bond_counts(j, i) = m;
      capacity_[i] -= m;
      capacity_[j] -= m;
      bool keep_going = true;
      if (j == q - 1) {
        if (row_closes(i)) keep_going = bonds(k + 1);
      } else {
        keep_going = bonds(k + 1);
      }
      capacity_[i] += m;
      capacity_[j] += m;
      if (!keep_going) return false;
    }
    t_.bond_counts(i, j) = t_.bond_counts(j, i) = 0;
    return true;
  }

  const std::function<bool(const LatticeType&)>& visit_;
  LatticeType t_;
  std::vector<Count> capacity_;
  std::vector<std::pair<int, int>> off_diagonal_;
};

}  // namespace

bool for_each_type(int n, int d, int q, const std::function<bool(const LatticeType&)>& visit) {
  if (n < 1 || d < 1 || q < 1) throw UsageError("for_each_type: n, d, q must be positive");
  if ((static_cast<long>(n) * d) % 2 != 0)
    throw UsageError("for_each_type: n * d must be even (no perfect matching otherwise)");
  return TypeWalker(n, d, q, visit).run();
}

std::vector<LatticeType> enumerate_types(int n, int d, int q) {
  std::vector<LatticeType> out;
  for_each_type(n, d, q, [&](const LatticeType& t) {
    out.push_back(t);
    return true;
  });
  return out;
}

double type_count_bound(int n, int q) {
  return std::pow(static_cast<double>(n) + 1.0, static_cast<double>(q) * (q + 1));
}

AdmissiblePair type_to_measures(const LatticeType& t) {
  if (auto why = lattice_violation(t); !why.empty())
    throw UsageError("type_to_measures: " + why);
  const double nd = static_cast<double>(t.n) * t.d;
  return {SpinMeasure(t.spin_counts.cast<double>() / t.n),
          BondMeasure(t.bond_counts.cast<double>() / nd)};
}

}  // namespace regldp
