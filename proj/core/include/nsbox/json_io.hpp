#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsbox/blind_steering.hpp"
#include "nsbox/boxes.hpp"
#include "nsbox/checks.hpp"
#include "nsbox/ensembles.hpp"
#include "nsbox/simulation.hpp"
#include "nsbox/steering.hpp"

// Rationals are always strings "num/den". Tables are arrays of rows:
// LocalBox rows are indexed by x with A entries; BipartiteBox rows by
// x * Y + y with A * B entries at a * B + b.
//
// Every *_from_json throws ValidationError on malformed input.

namespace nsbox {

using Json = nlohmann::json;

Json to_json(const Rational& value);
Rational rational_from_json(const Json& j);

Json to_json(const LocalBox& box);
LocalBox local_box_from_json(const Json& j);

Json to_json(const BipartiteBox& box);
BipartiteBox bipartite_box_from_json(const Json& j);

/// Flat member list [{"w", "strategy", "A"}]. Members may also be written
/// as {"w", "ij": [i, j]} for S boxes or {"w", "box": LocalBox}.
Json to_json(const Ensemble& ensemble);
Ensemble ensemble_from_json(const Json& j);
std::vector<Ensemble> ensemble_list_from_json(const Json& j);

/// {"products": [{"w", "ij", "kl"}], "prs": [{"w", "abd"}]}
Json to_json(const NonlocalEnsemble& ensemble);
NonlocalEnsemble nonlocal_ensemble_from_json(const Json& j);

Json to_json(const TargetState& target);
TargetState target_from_json(const Json& j);

Json to_json(const VerificationReport& report);
Json to_json(const TriangleDecompositions& decompositions);
Json to_json(const BlindSteeringSolution& solution);
Json to_json(const BlindSteeringPlan& plan);

/// {"p": [[p(0,0), p(0,1)], [p(1,0), p(1,1)]]} indexed [x][y].
InputPolicy input_policy_from_json(const Json& j);
Json to_json(const InputPolicy& policy);

Json to_json(const RoundLog& log);
RoundLog round_log_from_json(const Json& j);
void write_round_logs(std::ostream& out, std::span<const RoundLog> logs);
std::vector<RoundLog> read_round_logs(std::istream& in);

Json to_json(const EmpiricalBox& box);
Json to_json(const AuditVerdict& verdict);
Json to_json(const SimulationReport& report);

}  // namespace nsbox
