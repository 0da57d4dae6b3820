#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "regldp/exact.hpp"
#include "regldp/ldp.hpp"
#include "regldp/measures.hpp"
#include "regldp/pairing.hpp"

namespace regldp {

using Json = nlohmann::ordered_json;

/// %.12g, with "inf" and "-inf" for infinities.
std::string format12(double v);

/// Rounds to 12 significant digits, the precision every artifact is printed at.
double round12(double v);

/// Finite values as numbers, +inf as the string "inf".
Json real_to_json(double v);
double real_from_json(const Json& j);

Json to_json(const LatticeType& t);
LatticeType lattice_type_from_json(const Json& j);

Json to_json(const SpinMeasure& rho);
Json to_json(const BondMeasure& nu);
SpinMeasure spin_measure_from_json(const Json& j);
BondMeasure bond_measure_from_json(const Json& j);

Json to_json(const Pairing& p);
Pairing pairing_from_json(const Json& j);

Json to_json(const SpinConfig& s);

/// One JSON-lines record. `graph_view` states whether the pairs are read as
/// a multigraph or were filtered to a simple graph.
Json to_json(const SampleRecord& r, const std::string& graph_view);

/// Array of {target: "rho"|"nu", coeffs, bound, sense: ">="|"<="}.
EventSpec event_from_json(const Json& j);
Json to_json(const EventSpec& e);

Json to_json(const TypeDistribution& dist);
void write_csv(std::ostream& out, const TypeDistribution& dist);

Json to_json(const McEstimate& m);
Json to_json(const MinimizerResult& r);

Json to_json(const ReportRow& r);

/// Fixed columns n,p_hat,ci_lo,ci_hi,mc_rate,lattice_inf,continuum_inf.
void write_csv(std::ostream& out, const std::vector<ReportRow>& rows);

}  // namespace regldp
