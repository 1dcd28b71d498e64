#include "nsbox/json_io.hpp"

#include <string>

#include "nsbox/errors.hpp"

namespace nsbox {
namespace {

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw ValidationError(std::string("missing field \"") + name + "\"");
  }
  return j.at(name);
}

int int_field(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number_integer()) {
    throw ValidationError(std::string("field \"") + name + "\" must be an integer");
  }
  return v.get<int>();
}

std::uint8_t bit(const Json& v) {
  if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1)) {
    throw ValidationError("expected a bit (0 or 1)");
  }
  return static_cast<std::uint8_t>(v.get<int>());
}

std::vector<std::uint8_t> bits(const Json& j, const char* name, std::size_t count) {
  const Json& v = field(j, name);
  if (!v.is_array() || v.size() != count) {
    throw ValidationError(std::string("field \"") + name + "\" must hold " +
                          std::to_string(count) + " bits");
  }
  std::vector<std::uint8_t> out;
  for (const auto& e : v) out.push_back(bit(e));
  return out;
}

std::vector<Prob> rows_from_json(const Json& table, std::size_t rows,
                                 std::size_t width) {
  if (!table.is_array() || table.size() != rows) {
    throw ValidationError("table must have " + std::to_string(rows) + " rows");
  }
  std::vector<Prob> out;
  out.reserve(rows * width);
  for (const auto& row : table) {
    if (!row.is_array() || row.size() != width) {
      throw ValidationError("table rows must have " + std::to_string(width) +
                            " entries");
    }
    for (const auto& e : row) out.push_back(rational_from_json(e));
  }
  return out;
}

Json ensemble_member_to_json(const Ensemble::Member& m) {
  return Json{{"w", to_json(m.weight)}, {"strategy", m.box.strategy()},
              {"A", m.box.num_outputs()}};
}

Ensemble::Member ensemble_member_from_json(const Json& j) {
  Prob w = rational_from_json(field(j, "w"));
  if (j.contains("strategy")) {
    const Json& s = j.at("strategy");
    if (!s.is_array()) throw ValidationError("\"strategy\" must be an array");
    std::vector<int> strategy;
    for (const auto& e : s) {
      if (!e.is_number_integer()) throw ValidationError("strategy entries must be integers");
      strategy.push_back(e.get<int>());
    }
    return {std::move(w), DetLocalBox(std::move(strategy), int_field(j, "A"))};
  }
  if (j.contains("ij")) {
    const auto ij = bits(j, "ij", 2);
    return {std::move(w), SBox{ij[0], ij[1]}.to_det()};
  }
  if (j.contains("box")) {
    return {std::move(w), DetLocalBox::from_local_box(local_box_from_json(j.at("box")))};
  }
  throw ValidationError("ensemble member needs \"strategy\", \"ij\" or \"box\"");
}

Json sbox_to_json(SBox s) { return Json::array({s.alpha, s.beta}); }

SBox sbox_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("S box must be [alpha, beta]");
  return SBox{bit(j[0]), bit(j[1])};
}

}  // namespace

Json to_json(const Rational& value) { return to_string(value); }

Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  throw ValidationError("rationals must be \"num/den\" strings");
}

Json to_json(const LocalBox& box) {
  Json rows = Json::array();
  for (int x = 0; x < box.num_inputs(); ++x) {
    Json row = Json::array();
    for (int a = 0; a < box.num_outputs(); ++a) row.push_back(to_json(box.at(x, a)));
    rows.push_back(std::move(row));
  }
  return Json{{"X", box.num_inputs()}, {"A", box.num_outputs()}, {"table", rows}};
}

LocalBox local_box_from_json(const Json& j) {
  const int nx = int_field(j, "X");
  const int na = int_field(j, "A");
  if (nx < 1 || na < 1) throw ValidationError("X and A must be positive");
  return LocalBox(nx, na,
                  rows_from_json(field(j, "table"), static_cast<std::size_t>(nx),
                                 static_cast<std::size_t>(na)));
}

Json to_json(const BipartiteBox& box) {
  Json rows = Json::array();
  for (int x = 0; x < box.alice_inputs(); ++x) {
    for (int y = 0; y < box.bob_inputs(); ++y) {
      Json row = Json::array();
      for (int a = 0; a < box.alice_outputs(); ++a)
        for (int b = 0; b < box.bob_outputs(); ++b) row.push_back(to_json(box.at(x, y, a, b)));
      rows.push_back(std::move(row));
    }
  }
  return Json{{"X", box.alice_inputs()}, {"Y", box.bob_inputs()},
              {"A", box.alice_outputs()}, {"B", box.bob_outputs()},
              {"table", rows}};
}

BipartiteBox bipartite_box_from_json(const Json& j) {
  const int nx = int_field(j, "X"), ny = int_field(j, "Y");
  const int na = int_field(j, "A"), nb = int_field(j, "B");
  if (nx < 1 || ny < 1 || na < 1 || nb < 1) {
    throw ValidationError("X, Y, A, B must be positive");
  }
  return BipartiteBox(nx, ny, na, nb,
                      rows_from_json(field(j, "table"), static_cast<std::size_t>(nx * ny),
                                     static_cast<std::size_t>(na * nb)));
}

Json to_json(const Ensemble& ensemble) {
  Json out = Json::array();
  for (const auto& m : ensemble.members()) out.push_back(ensemble_member_to_json(m));
  return out;
}

Ensemble ensemble_from_json(const Json& j) {
  const Json& list = j.is_object() ? field(j, "members") : j;
  if (!list.is_array()) throw ValidationError("ensemble must be a list of members");
  std::vector<Ensemble::Member> members;
  for (const auto& m : list) members.push_back(ensemble_member_from_json(m));
  return Ensemble(std::move(members));
}

std::vector<Ensemble> ensemble_list_from_json(const Json& j) {
  const Json& list = j.is_object() ? field(j, "ensembles") : j;
  if (!list.is_array()) throw ValidationError("expected a list of ensembles");
  std::vector<Ensemble> out;
  for (const auto& e : list) out.push_back(ensemble_from_json(e));
  return out;
}

Json to_json(const NonlocalEnsemble& ensemble) {
  Json products = Json::array();
  for (const auto& m : ensemble.products()) {
    products.push_back(Json{{"w", to_json(m.weight)},
                            {"ij", {m.alice.alpha, m.alice.beta}},
                            {"kl", {m.bob.alpha, m.bob.beta}}});
  }
  Json prs = Json::array();
  for (const auto& m : ensemble.prs()) {
    prs.push_back(Json{{"w", to_json(m.weight)},
                       {"abd", {m.box.alpha, m.box.beta, m.box.delta}}});
  }
  return Json{{"products", products}, {"prs", prs}};
}

NonlocalEnsemble nonlocal_ensemble_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("nonlocal ensemble must be an object");
  std::vector<NonlocalEnsemble::ProductMember> products;
  std::vector<NonlocalEnsemble::PRMember> prs;
  if (j.contains("products")) {
    for (const auto& m : j.at("products")) {
      const auto ij = bits(m, "ij", 2);
      const auto kl = bits(m, "kl", 2);
      products.push_back({rational_from_json(field(m, "w")), SBox{ij[0], ij[1]},
                          SBox{kl[0], kl[1]}});
    }
  }
  if (j.contains("prs")) {
    for (const auto& m : j.at("prs")) {
      const auto abd = bits(m, "abd", 3);
      prs.push_back({rational_from_json(field(m, "w")), PRBox{abd[0], abd[1], abd[2]}});
    }
  }
  return NonlocalEnsemble(std::move(products), std::move(prs));
}

Json to_json(const TargetState& target) {
  return Json{{"s", to_json(target.s)}, {"t", to_json(target.t)}};
}

TargetState target_from_json(const Json& j) {
  return TargetState{rational_from_json(field(j, "s")), rational_from_json(field(j, "t"))};
}

Json to_json(const VerificationReport& report) {
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    Json entry{{"name", c.name}, {"pass", c.passed}};
    if (!c.passed) entry["witness"] = c.witness;
    checks.push_back(std::move(entry));
  }
  return Json{{"all_pass", report.all_passed()}, {"checks", checks},
              {"warnings", report.warnings}};
}

Json to_json(const TriangleDecompositions& d) {
  auto weights = [](const std::array<Prob, 4>& w) {
    Json out = Json::object();
    for (int i = 0; i < 4; ++i) {
      out[to_string(SBox::from_index(i))] = to_json(w[static_cast<std::size_t>(i)]);
    }
    return out;
  };
  return Json{{"epsilon", weights(d.epsilon_weights)},
              {"eta", weights(d.eta_weights)},
              {"epsilon_ensemble", to_json(d.epsilon)},
              {"eta_ensemble", to_json(d.eta)},
              {"warnings", d.warnings}};
}

Json to_json(const BlindSteeringSolution& s) {
  auto affine = [](const AffineInP00& e) {
    return Json{{"constant", to_json(e.constant)}, {"p00_coefficient", to_json(e.p00_coefficient)}};
  };
  Json system{{"P00", affine(s.system.product[0])}, {"P01", affine(s.system.product[1])},
              {"P10", affine(s.system.product[2])}, {"P11", affine(s.system.product[3])},
              {"Q0", affine(s.system.pr[0])},       {"Q1", affine(s.system.pr[1])}};
  return Json{{"target", to_json(s.target)},
              {"system", system},
              {"p00_interval", {to_json(s.p00_lower), to_json(s.p00_upper)}},
              {"P", {{"00", to_json(s.product[0])}, {"01", to_json(s.product[1])},
                     {"10", to_json(s.product[2])}, {"11", to_json(s.product[3])}}},
              {"Q", {{"0", to_json(s.pr[0])}, {"1", to_json(s.pr[1])}}}};
}

Json to_json(const BlindSteeringPlan& plan) {
  return Json{{"target", to_json(plan.target)},
              {"relabeling", plan.relabeling.describe()},
              {"canonical_target", to_json(plan.canonical_target)},
              {"solution", to_json(plan.solution)},
              {"decompositions", to_json(plan.decompositions)},
              {"ensemble", to_json(plan.ensemble)},
              {"report", to_json(plan.report)}};
}

InputPolicy input_policy_from_json(const Json& j) {
  const Json& p = field(j, "p");
  if (!p.is_array() || p.size() != 2) throw ValidationError("policy \"p\" must be 2x2");
  InputPolicy policy;
  for (std::size_t x = 0; x < 2; ++x) {
    if (!p[x].is_array() || p[x].size() != 2) throw ValidationError("policy \"p\" must be 2x2");
    for (std::size_t y = 0; y < 2; ++y) policy.weights[2 * x + y] = rational_from_json(p[x][y]);
  }
  policy.validate();
  return policy;
}

Json to_json(const InputPolicy& policy) {
  return Json{{"p", Json::array({Json::array({to_json(policy.weights[0]), to_json(policy.weights[1])}),
                                 Json::array({to_json(policy.weights[2]), to_json(policy.weights[3])})})}};
}

Json to_json(const RoundLog& log) {
  return Json{{"round_id", log.round_id},
              {"member_id", log.member_id},
              {"x", log.x},
              {"y", log.y},
              {"a", log.a},
              {"b", log.b},
              {"referee_inference",
               log.referee_inference ? sbox_to_json(*log.referee_inference) : Json(nullptr)},
              {"alice_actual", sbox_to_json(log.alice_actual)}};
}

RoundLog round_log_from_json(const Json& j) {
  RoundLog log;
  try {
    log.round_id = field(j, "round_id").get<std::uint64_t>();
    log.member_id = field(j, "member_id").get<std::size_t>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("round_id and member_id must be nonnegative integers");
  }
  log.x = int_field(j, "x");
  log.y = int_field(j, "y");
  log.a = int_field(j, "a");
  log.b = int_field(j, "b");
  const Json& inference = field(j, "referee_inference");
  if (!inference.is_null()) log.referee_inference = sbox_from_json(inference);
  log.alice_actual = sbox_from_json(field(j, "alice_actual"));
  return log;
}

void write_round_logs(std::ostream& out, std::span<const RoundLog> logs) {
  for (const auto& log : logs) out << to_json(log).dump() << '\n';
}

std::vector<RoundLog> read_round_logs(std::istream& in) {
  std::vector<RoundLog> logs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      logs.push_back(round_log_from_json(Json::parse(line)));
    } catch (const nlohmann::json::exception& err) {
      throw ValidationError("log line " + std::to_string(line_no) + ": " + err.what());
    } catch (const ValidationError& err) {
      throw ValidationError("log line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  return logs;
}

Json to_json(const EmpiricalBox& box) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < 4; ++r) {
    rows.push_back(Json::array({box.table[4 * r], box.table[4 * r + 1], box.table[4 * r + 2],
                                box.table[4 * r + 3]}));
  }
  return Json{{"X", 2}, {"Y", 2}, {"A", 2}, {"B", 2}, {"table", rows}, {"trials", box.trials}};
}

Json to_json(const AuditVerdict& verdict) {
  Json failures = Json::array();
  for (const auto& f : verdict.round_failures) {
    failures.push_back(Json{{"round_id", f.round_id}, {"reason", f.reason}});
  }
  Json cells = Json::array();
  for (const auto& c : verdict.cells) {
    cells.push_back(Json{{"y", c.y},
                         {"constituent", to_string(c.constituent)},
                         {"count", c.count},
                         {"trials", c.trials},
                         {"expected", c.expected},
                         {"p_value", c.p_value},
                         {"pass", c.passed}});
  }
  Json out{{"pass", verdict.passed()},
           {"rounds_pass", verdict.rounds_passed},
           {"frequencies_pass", verdict.frequencies_passed},
           {"per_cell_alpha", verdict.per_cell_alpha},
           {"round_failures", failures},
           {"frequency_cells", cells}};
  if (!verdict.frequency_error.empty()) out["frequency_error"] = verdict.frequency_error;
  return out;
}

Json to_json(const SimulationReport& report) {
  Json by_outcome = Json::object();
  Json by_input = Json::object();
  for (int y = 0; y < 2; ++y) {
    Json per_y = Json::object();
    for (int s = 0; s < 4; ++s) {
      per_y[to_string(SBox::from_index(s))] = report.alice_by_input[y][s];
    }
    by_input["y" + std::to_string(y)] = per_y;
    for (int b = 0; b < 2; ++b) {
      Json per_yb = Json::object();
      for (int s = 0; s < 4; ++s) {
        per_yb[to_string(SBox::from_index(s))] = report.alice_by_outcome[y][b][s];
      }
      by_outcome["y" + std::to_string(y) + "b" + std::to_string(b)] =
          Json{{"rounds", report.outcome_counts[y][b]}, {"alice", per_yb}};
    }
  }
  return Json{{"rounds", report.rounds},
              {"rng_seed", report.rng_seed},
              {"empirical_joint",
               report.empirical_joint ? to_json(*report.empirical_joint) : Json(nullptr)},
              {"alice_by_input", by_input},
              {"alice_by_outcome", by_outcome},
              {"verdict", to_json(report.verdict)}};
}

}  // namespace nsbox
