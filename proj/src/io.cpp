#include "regldp/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>

namespace regldp {

double round12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

std::string format12(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw UsageError("malformed JSON: " + what);
}

}  // namespace

Json real_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return round12(v);
}

double real_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  require(j.is_string(), "expected a number");
  const auto s = j.get<std::string>();
  if (s == "inf") return kInfinity;
  if (s == "-inf") return -kInfinity;
  if (s == "nan") return std::nan("");
  return parse_rational(s).convert_to<double>();
}

Json to_json(const LatticeType& t) {
  Json bonds = Json::array();
  for (int i = 0; i < t.q(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < t.q(); ++j) row.push_back(t.bond_counts(i, j));
    bonds.push_back(row);
  }
  Json spins = Json::array();
  for (int i = 0; i < t.q(); ++i) spins.push_back(t.spin_counts(i));
  return Json{{"n", t.n}, {"d", t.d}, {"q", t.q()}, {"spin_counts", spins}, {"bond_counts", bonds}};
}

LatticeType lattice_type_from_json(const Json& j) {
  require(j.is_object() && j.contains("n") && j.contains("d") && j.contains("spin_counts") &&
              j.contains("bond_counts"),
          "lattice type needs n, d, spin_counts, bond_counts");
  LatticeType t;
  t.n = j.at("n").get<int>();
  t.d = j.at("d").get<int>();
  const auto spins = j.at("spin_counts").get<std::vector<Count>>();
  const auto bonds = j.at("bond_counts").get<std::vector<std::vector<Count>>>();
  const int q = static_cast<int>(spins.size());
  if (j.contains("q")) require(j.at("q").get<int>() == q, "q disagrees with spin_counts");
  require(static_cast<int>(bonds.size()) == q, "bond_counts must have q rows");
  t.spin_counts = Eigen::Map<const CountVector>(spins.data(), q);
  t.bond_counts.resize(q, q);
  for (int i = 0; i < q; ++i) {
    require(static_cast<int>(bonds[i].size()) == q, "bond_counts must be q x q");
    for (int k = 0; k < q; ++k) t.bond_counts(i, k) = bonds[i][k];
  }
  return t;
}

Json to_json(const SpinMeasure& rho) {
  Json out = Json::array();
  for (int i = 0; i < rho.q(); ++i) out.push_back(round12(rho[i]));
  return out;
}

Json to_json(const BondMeasure& nu) {
  Json out = Json::array();
  for (int i = 0; i < nu.q(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < nu.q(); ++j) row.push_back(round12(nu(i, j)));
    out.push_back(row);
  }
  return out;
}

SpinMeasure spin_measure_from_json(const Json& j) {
  require(j.is_array() && !j.empty(), "spin measure must be a nonempty array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = real_from_json(j[i]);
  return SpinMeasure(v);
}

BondMeasure bond_measure_from_json(const Json& j) {
  require(j.is_array() && !j.empty(), "bond measure must be a nonempty array of rows");
  const auto q = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(q, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    require(row.is_array() && static_cast<Eigen::Index>(row.size()) == q, "bond measure must be square");
    for (Eigen::Index k = 0; k < q; ++k) m(i, k) = real_from_json(row[static_cast<std::size_t>(k)]);
  }
  return BondMeasure(m);
}

Json to_json(const Pairing& p) {
  Json pairs = Json::array();
  for (const auto& [a, b] : p.pairs) pairs.push_back(Json::array({a, b}));
  return Json{{"n", p.n}, {"d", p.d}, {"pairs", pairs}};
}

Pairing pairing_from_json(const Json& j) {
  require(j.is_object() && j.contains("pairs"), "pairing needs n, d, pairs");
  Pairing p{j.at("n").get<int>(), j.at("d").get<int>(), {}};
  for (const auto& pr : j.at("pairs")) {
    require(pr.is_array() && pr.size() == 2, "each pair is [a, b]");
    p.pairs.emplace_back(pr[0].get<int>(), pr[1].get<int>());
  }
  validate(p);
  return p;
}

Json to_json(const SpinConfig& s) { return Json(s.spins); }

Json to_json(const SampleRecord& r, const std::string& graph_view) {
  return Json{{"pairing", to_json(r.pairing)}, {"spins", to_json(r.spins)},
              {"l1", to_json(r.l1)},           {"l2", to_json(r.l2)},
              {"simple", r.simple},            {"graph_view", graph_view}};
}

EventSpec event_from_json(const Json& j) {
  const Json& list = j.is_object() && j.contains("constraints") ? j.at("constraints") : j;
  require(list.is_array(), "event must be an array of constraints");
  EventSpec e;
  for (const Json& c : list) {
    require(c.is_object() && c.contains("target") && c.contains("coeffs") && c.contains("bound"),
            "constraint needs target, coeffs, bound");
    Constraint k;
    const auto target = c.at("target").get<std::string>();
    require(target == "rho" || target == "nu", "target must be \"rho\" or \"nu\"");
    k.target = target == "rho" ? Target::kRho : Target::kNu;
    if (k.target == Target::kRho) {
      k.coeffs = spin_measure_from_json(c.at("coeffs")).mass;
    } else {
      const Json& coeffs = c.at("coeffs");
      require(coeffs.is_array() && !coeffs.empty(), "nu coeffs must be a q x q array");
      if (coeffs[0].is_array()) {
        k.coeffs = bond_measure_from_json(coeffs).mass;
      } else {
        // flattened row-major q*q
        const auto q = static_cast<Eigen::Index>(std::llround(std::sqrt(coeffs.size())));
        require(q * q == static_cast<Eigen::Index>(coeffs.size()), "nu coeffs must have q*q entries");
        k.coeffs.resize(q, q);
        for (Eigen::Index i = 0; i < q * q; ++i)
          k.coeffs(i / q, i % q) = real_from_json(coeffs[static_cast<std::size_t>(i)]);
      }
    }
    k.bound = real_from_json(c.at("bound"));
    const auto sense = c.value("sense", std::string(">="));
    require(sense == ">=" || sense == "<=" || sense == "ge" || sense == "le",
            "sense must be \">=\" or \"<=\"");
    k.sense = (sense == ">=" || sense == "ge") ? Sense::kGreaterEqual : Sense::kLessEqual;
    e.constraints.push_back(std::move(k));
  }
  return e;
}

Json to_json(const EventSpec& e) {
  Json out = Json::array();
  for (const Constraint& c : e.constraints) {
    Json coeffs = c.target == Target::kRho ? to_json(SpinMeasure(c.coeffs.col(0)))
                                           : to_json(BondMeasure(c.coeffs));
    out.push_back(Json{{"target", c.target == Target::kRho ? "rho" : "nu"},
                       {"coeffs", coeffs},
                       {"bound", real_to_json(c.bound)},
                       {"sense", c.sense == Sense::kGreaterEqual ? ">=" : "<="}});
  }
  return out;
}

Json to_json(const TypeDistribution& dist) {
  Json types = Json::array();
  for (const auto& [t, p] : dist.entries) {
    Json entry = to_json(t);
    entry["probability"] = to_string(p);
    types.push_back(entry);
  }
  return Json{{"n", dist.n},
              {"d", dist.d},
              {"q", dist.q},
              {"total", to_string(dist.total())},
              {"types", types}};
}

void write_csv(std::ostream& out, const TypeDistribution& dist) {
  out << "n,d,q,spin_counts,bond_counts,probability\n";
  for (const auto& [t, p] : dist.entries) {
    out << t.n << ',' << t.d << ',' << t.q() << ",\"";
    for (int i = 0; i < t.q(); ++i) out << (i ? " " : "") << t.spin_counts(i);
    out << "\",\"";
    for (int i = 0; i < t.q(); ++i)
      for (int j = 0; j < t.q(); ++j) out << (i || j ? " " : "") << t.bond_counts(i, j);
    out << "\"," << format12(p.convert_to<double>()) << '\n';
  }
}

Json to_json(const McEstimate& m) {
  return Json{{"hits", m.hits},
              {"samples", m.samples},
              {"p_hat", real_to_json(m.p_hat)},
              {"ci95", Json::array({real_to_json(m.ci_lo), real_to_json(m.ci_hi)})},
              {"log_rate", real_to_json(m.log_rate)}};
}

Json to_json(const MinimizerResult& r) {
  return Json{{"rho_star", to_json(r.rho_star)},
              {"nu_star", to_json(r.nu_star)},
              {"value", real_to_json(r.value)},
              {"kkt_residual", real_to_json(r.kkt_residual)},
              {"iterations", r.iterations}};
}

Json to_json(const ReportRow& r) {
  return Json{{"n", r.n},
              {"p_hat", real_to_json(r.mc.p_hat)},
              {"ci_lo", real_to_json(r.mc.ci_lo)},
              {"ci_hi", real_to_json(r.mc.ci_hi)},
              {"mc_rate", real_to_json(r.mc.log_rate)},
              {"lattice_inf", real_to_json(r.lattice_inf)},
              {"lattice_enumerated", r.lattice_enumerated},
              {"continuum_inf", real_to_json(r.continuum_inf)}};
}

void write_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "n,p_hat,ci_lo,ci_hi,mc_rate,lattice_inf,continuum_inf\n";
  for (const ReportRow& r : rows)
    out << r.n << ',' << format12(r.mc.p_hat) << ',' << format12(r.mc.ci_lo) << ','
        << format12(r.mc.ci_hi) << ',' << format12(r.mc.log_rate) << ','
        << format12(r.lattice_inf) << ',' << format12(r.continuum_inf) << '\n';
}

}  // namespace regldp
