#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nsbox/blind_steering.hpp"
#include "nsbox/decomposition.hpp"
#include "nsbox/errors.hpp"
#include "nsbox/json_io.hpp"
#include "nsbox/simulation.hpp"
#include "nsbox/steering.hpp"

using namespace nsbox;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kRegion = 3;
constexpr int kInfeasible = 4;
constexpr int kFailed = 5;

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::filesystem::path out_file(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return std::filesystem::path(dir) / name;
}

void write_json(const std::string& dir, const std::string& name, const Json& j) {
  std::ofstream out(out_file(dir, name));
  if (!out) throw ValidationError("cannot write " + (std::filesystem::path(dir) / name).string());
  out << j.dump(2) << '\n';
}

// With --out, each part goes to its own file; otherwise one document on stdout.
void emit(const std::string& out_dir, const std::vector<std::pair<std::string, Json>>& parts) {
  if (out_dir.empty() && parts.size() == 1) {
    std::cout << parts.front().second.dump(2) << '\n';
    return;
  }
  if (out_dir.empty()) {
    Json doc = Json::object();
    for (const auto& [name, j] : parts) doc[name.substr(0, name.find('.'))] = j;
    std::cout << doc.dump(2) << '\n';
    return;
  }
  for (const auto& [name, j] : parts) write_json(out_dir, name, j);
}

std::optional<TargetState> target_option(const std::string& s, const std::string& t) {
  if (s.empty() && t.empty()) return std::nullopt;
  if (s.empty() || t.empty()) throw ValidationError("-s and -t must be given together");
  return TargetState{parse_rational(s), parse_rational(t)};
}

struct Args {
  std::string input;
  std::string logs;
  std::string out;
  std::string s, t;
  std::string split;
  std::string split_policy = "canonical";
  std::uint64_t rounds = 100000;
  std::uint64_t seed = 0;
  std::string input_policy = "uniform";
  unsigned threads = 1;
  double significance = 1e-3;
};

int run_steer(const Args& a) {
  const auto ensembles = ensemble_list_from_json(read_json(a.input));
  const auto state = construct_steering_state(ensembles);
  const auto report = verify_steering_state(state);
  emit(a.out, {{"box.json", to_json(state.box)}, {"report.json", to_json(report)}});
  return report.all_passed() ? kOk : kFailed;
}

int run_blind(const Args& a) {
  const TargetState target{parse_rational(a.s), parse_rational(a.t)};
  std::optional<NonlocalEnsemble> split;
  if (!a.split.empty()) split = nonlocal_ensemble_from_json(read_json(a.split));
  const SplitPolicy policy =
      a.split_policy == "bob-fixed" ? SplitPolicy::kBobFixedS00 : SplitPolicy::kCanonical;
  const auto plan = plan_blind_steering(target, split, policy);
  const Json full = to_json(plan);
  emit(a.out, {{"ensemble.json", full["ensemble"]},
               {"report.json", Json{{"target", full["target"]},
                                    {"relabeling", full["relabeling"]},
                                    {"canonical_target", full["canonical_target"]},
                                    {"solution", full["solution"]},
                                    {"decompositions", full["decompositions"]},
                                    {"verification", full["report"]}}}});
  return plan.report.all_passed() ? kOk : kFailed;
}

int run_verify(const Args& a) {
  const auto ensemble = nonlocal_ensemble_from_json(read_json(a.input));
  const TargetState target{parse_rational(a.s), parse_rational(a.t)};
  const auto report = verify_blind_steering(ensemble, target);
  emit(a.out, {{"report.json", to_json(report)}});
  return report.all_passed() ? kOk : kFailed;
}

int run_decompose(const Args& a) {
  const auto box = bipartite_box_from_json(read_json(a.input));
  const auto ensemble = decompose(box);
  emit(a.out, {{"ensemble.json", to_json(ensemble)}});
  return kOk;
}

int run_check(const Args& a) {
  const auto box = bipartite_box_from_json(read_json(a.input));
  Json result{{"ns", is_no_signalling(box)}};
  if (auto w = find_signalling(box)) {
    result["local"] = nullptr;
    result["signalling"] = w->describe();
  } else if (box.is_2x2()) {
    result["local"] = is_local(box);
    Json chsh = Json::array();
    for (const auto& v : chsh_values(box)) chsh.push_back(to_json(v));
    result["chsh"] = chsh;
  } else {
    result["local"] = nullptr;
  }
  emit(a.out, {{"check.json", result}});
  return kOk;
}

AuditOptions audit_options(const Args& a) {
  AuditOptions audit;
  audit.significance = a.significance;
  audit.target = target_option(a.s, a.t);
  return audit;
}

int run_simulate(const Args& a) {
  const auto ensemble = nonlocal_ensemble_from_json(read_json(a.input));
  SimulationOptions opts;
  opts.rounds = a.rounds;
  opts.seed = a.seed;
  opts.threads = a.threads;
  if (a.input_policy != "uniform") opts.policy = input_policy_from_json(read_json(a.input_policy));
  const auto result = run_protocol(ensemble, opts, audit_options(a));
  if (a.out.empty()) {
    std::cout << to_json(result.report).dump(2) << '\n';
  } else {
    std::ofstream logs(out_file(a.out, "logs.ndjson"));
    write_round_logs(logs, result.logs);
    write_json(a.out, "report.json", to_json(result.report));
  }
  return result.report.verdict.passed() ? kOk : kFailed;
}

int run_audit(const Args& a) {
  const auto ensemble = nonlocal_ensemble_from_json(read_json(a.input));
  std::ifstream in(a.logs);
  if (!in) throw ValidationError("cannot open " + a.logs);
  const auto logs = read_round_logs(in);
  const auto verdict = referee_audit(logs, ensemble, audit_options(a));
  emit(a.out, {{"audit.json", to_json(verdict)}});
  return verdict.passed() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nsbox: no-signalling boxes, steering and blind steering"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "nsbox 0.1.0 catalog " + catalog_fingerprint_hex());

  Args a;
  auto add_target = [&a](CLI::App* cmd, bool required) {
    auto* s = cmd->add_option("-s", a.s, "p(a=0|x=0) as num/den");
    auto* t = cmd->add_option("-t", a.t, "p(a=0|x=1) as num/den");
    if (required) {
      s->required();
      t->required();
    }
  };
  auto add_out = [&a](CLI::App* cmd) {
    cmd->add_option("--out", a.out, "output directory (default: JSON on stdout)");
  };

  auto* steer = app.add_subcommand("steer", "build the steering state of a list of ensembles");
  steer->add_option("ensembles", a.input, "ensembles.json")->required()->check(CLI::ExistingFile);
  add_out(steer);

  auto* blind = app.add_subcommand("blind", "blind-steering ensemble for a target (s, t)");
  add_target(blind, true);
  blind->add_option("--split", a.split, "split.json in the target's coordinates")
      ->check(CLI::ExistingFile);
  blind->add_option("--split-policy", a.split_policy, "canonical | bob-fixed")
      ->check(CLI::IsMember({"canonical", "bob-fixed"}));
  add_out(blind);

  auto* verify = app.add_subcommand("verify", "verify a nonlocal ensemble against (s, t)");
  verify->add_option("ensemble", a.input, "ensemble.json")->required()->check(CLI::ExistingFile);
  add_target(verify, true);
  add_out(verify);

  auto* decompose_cmd = app.add_subcommand("decompose", "vertex decomposition of a box");
  decompose_cmd->add_option("box", a.input, "box.json")->required()->check(CLI::ExistingFile);
  add_out(decompose_cmd);

  auto* check = app.add_subcommand("check", "no-signalling and locality of a box");
  check->add_option("box", a.input, "box.json")->required()->check(CLI::ExistingFile);
  add_out(check);

  auto* simulate = app.add_subcommand("simulate", "run the protocol");
  simulate->add_option("ensemble", a.input, "ensemble.json")->required()->check(CLI::ExistingFile);
  simulate->add_option("--rounds", a.rounds)->check(CLI::PositiveNumber);
  simulate->add_option("--seed", a.seed);
  simulate->add_option("--policy", a.input_policy, "uniform or a policy.json file");
  simulate->add_option("--threads", a.threads)->check(CLI::Range(1u, 256u));
  simulate->add_option("--significance", a.significance);
  add_target(simulate, false);
  add_out(simulate);

  auto* audit = app.add_subcommand("audit", "audit stored round logs");
  audit->add_option("ensemble", a.input, "ensemble.json")->required()->check(CLI::ExistingFile);
  audit->add_option("logs", a.logs, "logs.ndjson")->required()->check(CLI::ExistingFile);
  audit->add_option("--significance", a.significance);
  add_target(audit, false);
  add_out(audit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*steer) return run_steer(a);
    if (*blind) return run_blind(a);
    if (*verify) return run_verify(a);
    if (*decompose_cmd) return run_decompose(a);
    if (*check) return run_check(a);
    if (*simulate) return run_simulate(a);
    if (*audit) return run_audit(a);
  } catch (const RegionError& e) {
    std::cerr << "region error: " << e.what() << '\n';
    return kRegion;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kValidation;
}
