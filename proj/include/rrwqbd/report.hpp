#pragma once

// JSON and CSV rendering of results. Doubles in JSON use the shortest
// representation that round-trips; CSV uses %.17g. Non-finite values become
// null in JSON.

#include <string>

#include "json.hpp"

#include "rrwqbd/bounds.hpp"
#include "rrwqbd/certificate.hpp"
#include "rrwqbd/model.hpp"
#include "rrwqbd/oracle.hpp"
#include "rrwqbd/qbd.hpp"

namespace rrwqbd::report {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

json to_json(const ValidationReport& r);
json to_json(const StabilityVerdict& v);
json to_json(const NegativeDriftCheck& a);
json drifts_json(const RandomWalkSpec& spec);
json to_json(const JacksonParams& p);
json to_json(const DriftCertificate& c);
json to_json(const ThetaSearch& s);
json to_json(const ThetaTildeSearch& s);
json to_json(const TailSum& t);
json solution_json(const QbdSolution& sol, bool include_vectors);
json to_json(const ErrorBoundReport& r);
json to_json(const CertifiedFunctional& f);
json reference_json(const ReferenceDistribution& r);
json to_json(const ObservedError& e);
json to_json(const SimulationResult& s);
json to_json(const DeviationBoundReport& d);

std::string dump(const json& j);

/// %.17g
std::string num(double x);

}  // namespace rrwqbd::report
