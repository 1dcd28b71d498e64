#include "nsbox/blind_steering.hpp"

#include <algorithm>
#include <sstream>

#include "nsbox/errors.hpp"

namespace nsbox {
namespace {

std::string describe(const TargetState& target) {
  return "(s=" + to_string(target.s) + ", t=" + to_string(target.t) + ")";
}

std::string describe_weights(const std::array<Prob, 4>& w) {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < 4; ++i) {
    if (i) out << ", ";
    out << to_string(SBox::from_index(static_cast<int>(i))) << ":" << to_string(w[i]);
  }
  out << ")";
  return out.str();
}

void require_bit(int v, const char* name) {
  if (v != 0 && v != 1) {
    throw ValidationError(std::string(name) + " must be 0 or 1");
  }
}

std::array<Prob, 4> relabel_weights(const std::array<Prob, 4>& w, Relabeling r) {
  std::array<Prob, 4> out{};
  for (int i = 0; i < 4; ++i) {
    out[static_cast<std::size_t>(relabel(SBox::from_index(i), r).index())] =
        w[static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace

// ------------------------------------------------------------- TargetState

LocalBox TargetState::to_local_box() const {
  if (!is_probability(s) || !is_probability(t)) {
    throw ValidationError("target " + describe(*this) + " outside [0,1]^2");
  }
  return LocalBox(2, 2, {s, 1 - s, t, 1 - t});
}

TargetState TargetState::from_local_box(const LocalBox& box) {
  if (box.num_inputs() != 2 || box.num_outputs() != 2) {
    throw ValidationError("target state must be a 2-input 2-output box");
  }
  return TargetState{box.at(0, 0), box.at(1, 0)};
}

bool in_canonical_region(const TargetState& target) {
  return is_probability(target.s) && is_probability(target.t) &&
         target.t >= target.s && target.s + target.t < 1;
}

// -------------------------------------------------------------- relabeling

std::string Relabeling::describe() const {
  if (is_identity()) return "identity";
  std::string out;
  if (flip_output) out += "a -> a xor 1";
  if (swap_input) out += std::string(out.empty() ? "" : ", ") + "x -> x xor 1";
  return out;
}

TargetState relabel(const TargetState& target, Relabeling r) {
  TargetState out = target;
  if (r.flip_output) out = TargetState{1 - out.s, 1 - out.t};
  if (r.swap_input) out = TargetState{out.t, out.s};
  return out;
}

SBox relabel(SBox box, Relabeling r) {
  // a = alpha (x ^ g) ^ beta ^ f
  const int g = r.swap_input ? 1 : 0;
  const int f = r.flip_output ? 1 : 0;
  return SBox{box.alpha, static_cast<std::uint8_t>(box.beta ^ (box.alpha & g) ^ f)};
}

PRBox relabel(PRBox box, Relabeling r) {
  return PRBox{static_cast<std::uint8_t>(box.alpha ^ (r.swap_input ? 1 : 0)), box.beta,
               static_cast<std::uint8_t>(box.delta ^ (r.flip_output ? 1 : 0))};
}

NonlocalEnsemble relabel(const NonlocalEnsemble& ensemble, Relabeling r) {
  auto products = ensemble.products();
  auto prs = ensemble.prs();
  for (auto& m : products) m.alice = relabel(m.alice, r);
  for (auto& m : prs) m.box = relabel(m.box, r);
  return NonlocalEnsemble(std::move(products), std::move(prs));
}

Ensemble relabel(const Ensemble& ensemble, Relabeling r) {
  std::vector<Ensemble::Member> members;
  members.reserve(ensemble.size());
  for (const auto& m : ensemble.members()) {
    const SBox s = SBox::from_local_box(m.box.to_local_box());
    members.push_back({m.weight, relabel(s, r).to_det()});
  }
  return Ensemble(std::move(members));
}

Relabeling canonicalizing_relabeling(const TargetState& target) {
  if (!is_probability(target.s) || !is_probability(target.t)) {
    throw ValidationError("target " + describe(target) + " outside [0,1]^2");
  }
  if (target.s == Prob(1, 2) && target.t == Prob(1, 2)) {
    throw RegionError("target " + describe(target) +
                      " is the center of the local square, where both "
                      "diagonals cross; no triangle decomposition applies");
  }
  if (target.s + target.t == 1) {
    throw RegionError("target " + describe(target) +
                      " lies on the diagonal s + t = 1; triangle "
                      "decompositions need a state not on a diagonal");
  }
  for (const Relabeling r : {Relabeling{false, false}, Relabeling{false, true},
                             Relabeling{true, false}, Relabeling{true, true}}) {
    if (in_canonical_region(relabel(target, r))) return r;
  }
  throw RegionError("target " + describe(target) + " cannot be relabeled");
}

// ------------------------------------------------- triangle decompositions

TriangleDecompositions triangle_decompositions(const TargetState& target) {
  if (!in_canonical_region(target)) {
    if (target.s + target.t == 1 && target.t >= target.s) {
      throw RegionError("target " + describe(target) +
                        " lies on the diagonal s + t = 1; triangle "
                        "decompositions need a state not on a diagonal");
    }
    throw RegionError("target " + describe(target) +
                      " is outside the canonical triangle t >= s, s + t < 1; "
                      "relabel it first");
  }
  const Prob& s = target.s;
  const Prob& t = target.t;
  std::array<Prob, 4> epsilon{s, 1 - t, Prob(0), t - s};
  std::array<Prob, 4> eta{Prob(0), 1 - s - t, s, t};

  std::vector<std::string> warnings;
  if (s == 0) {
    warnings.push_back("degenerate: s = 0 puts the target on the triangle "
                       "edge; no nonlocal part is needed and blindness may fail");
  }
  if (t == s) {
    warnings.push_back("degenerate: t = s puts the target on the diagonal "
                       "edge; epsilon has two members and blindness may fail");
  }
  return TriangleDecompositions{epsilon, eta, ensemble_from_sbox_weights(epsilon),
                                ensemble_from_sbox_weights(eta),
                                std::move(warnings)};
}

TriangleDecompositions relabeled_triangle_decompositions(
    const TargetState& target) {
  const Relabeling r = canonicalizing_relabeling(target);
  auto d = triangle_decompositions(relabel(target, r));
  if (r.is_identity()) return d;
  const auto epsilon = relabel_weights(d.epsilon_weights, r);
  const auto eta = relabel_weights(d.eta_weights, r);
  return TriangleDecompositions{epsilon, eta, ensemble_from_sbox_weights(epsilon),
                                ensemble_from_sbox_weights(eta),
                                std::move(d.warnings)};
}

// -------------------------------------------------------- constraint system

BlindSteeringSolution solve_constraints(const TargetState& target) {
  const auto d = triangle_decompositions(target);
  const auto& e = d.epsilon_weights;
  const auto& n = d.eta_weights;

  // Closed forms: y = 0 gives P_ij + Q_i / 2 = e_ij, y = 1 gives
  // P_ij + Q_{i^1} / 2 = n_ij. Using e_00, e_01, n_00, e_10, e_11 to express
  // everything through P00:
  ConstraintSystem sys;
  sys.product[0] = {Rational(0), Rational(1)};
  sys.pr[0] = {2 * e[0], Rational(-2)};                  // from e_00
  sys.product[1] = {e[1] - e[0], Rational(1)};           // from e_01
  sys.pr[1] = {2 * n[0], Rational(-2)};                  // from n_00
  sys.product[2] = {e[2] - n[0], Rational(1)};           // from e_10
  sys.product[3] = {e[3] - n[0], Rational(1)};           // from e_11

  // All eight equations must hold identically in P00.
  for (int y = 0; y < 2; ++y) {
    const auto& rhs = (y == 0) ? e : n;
    for (int i = 0; i < 2; ++i) {
      const auto& q = sys.pr[static_cast<std::size_t>(y == 0 ? i : i ^ 1)];
      for (int j = 0; j < 2; ++j) {
        const auto k = static_cast<std::size_t>(2 * i + j);
        const Rational constant = sys.product[k].constant + q.constant / 2;
        const Rational coefficient =
            sys.product[k].p00_coefficient + q.p00_coefficient / 2;
        if (constant != rhs[k] || coefficient != 0) {
          throw ValidationError("reduction equations inconsistent for target " +
                                describe(target));
        }
      }
    }
  }

  // Positivity of every aggregate bounds P00.
  bool has_upper = false;
  Rational lower = 0;
  Rational upper = 0;
  auto bound = [&](const AffineInP00& expr) {
    if (expr.p00_coefficient > 0) {
      lower = std::max(lower, Rational(-expr.constant / expr.p00_coefficient));
    } else if (expr.p00_coefficient < 0) {
      const Rational cap = expr.constant / -expr.p00_coefficient;
      upper = has_upper ? std::min(upper, cap) : cap;
      has_upper = true;
    } else if (expr.constant < 0) {
      throw InfeasibleError("aggregate is negative for every P00");
    }
  };
  for (const auto& p : sys.product) bound(p);
  for (const auto& q : sys.pr) bound(q);
  if (!has_upper || lower > upper) {
    throw InfeasibleError("no nonnegative aggregates for target " +
                          describe(target));
  }

  BlindSteeringSolution sol;
  sol.target = target;
  sol.system = sys;
  sol.p00_lower = lower;
  sol.p00_upper = upper;
  for (std::size_t k = 0; k < 4; ++k) sol.product[k] = sys.product[k].at(lower);
  for (std::size_t k = 0; k < 2; ++k) sol.pr[k] = sys.pr[k].at(lower);
  sol.warnings = d.warnings;
  return sol;
}

// ------------------------------------------------------- nonlocal ensembles

NonlocalEnsemble build_nonlocal_ensemble(const BlindSteeringSolution& solution,
                                         SplitPolicy policy) {
  const auto& P = solution.product;
  const auto& Q = solution.pr;
  if (P[0] != 0 || P[2] != 0 || Q[1] != 0) {
    throw ValidationError("solution has weight on S00, S10 or beta = 1 PR boxes");
  }
  const SBox s01 = SBox::from_index(1);
  const SBox s11 = SBox::from_index(3);
  const SBox bob_for_s01 =
      policy == SplitPolicy::kCanonical ? SBox::from_index(2) : SBox::from_index(0);
  const SBox bob_for_s11 =
      policy == SplitPolicy::kCanonical ? SBox::from_index(3) : SBox::from_index(0);

  std::vector<NonlocalEnsemble::ProductMember> products;
  std::vector<NonlocalEnsemble::PRMember> prs;
  if (P[1] != 0) products.push_back({P[1], s01, bob_for_s01});
  if (P[3] != 0) products.push_back({P[3], s11, bob_for_s11});
  if (Q[0] != 0) prs.push_back({Q[0], PRBox{0, 0, 0}});
  return NonlocalEnsemble(std::move(products), std::move(prs));
}

NonlocalEnsemble build_nonlocal_ensemble(const BlindSteeringSolution& solution,
                                         const NonlocalEnsemble& split) {
  for (const auto& m : split.products()) {
    const int i = m.alice.index();
    if (m.weight != 0 && i != 1 && i != 3) {
      throw ValidationError("split puts weight on product with Alice box " +
                            to_string(m.alice) + "; only S01 and S11 are allowed");
    }
  }
  for (const auto& m : split.prs()) {
    if (m.weight != 0 && m.box.beta != 0) {
      throw ValidationError("split puts weight on " + to_string(m.box) +
                            "; only beta = 0 PR boxes are allowed");
    }
  }
  if (split.product_aggregates() != solution.product) {
    throw ValidationError("split product aggregates " +
                          describe_weights(split.product_aggregates()) +
                          " differ from the solution " +
                          describe_weights(solution.product));
  }
  if (split.pr_aggregates() != solution.pr) {
    throw ValidationError("split PR aggregates (" +
                          to_string(split.pr_aggregates()[0]) + ", " +
                          to_string(split.pr_aggregates()[1]) +
                          ") differ from the solution (" + to_string(solution.pr[0]) +
                          ", " + to_string(solution.pr[1]) + ")");
  }
  return split;
}

// ------------------------------------------------------------ verification

VerificationReport verify_blind_steering(const NonlocalEnsemble& ensemble,
                                         const TargetState& target) {
  VerificationReport report;
  std::optional<TriangleDecompositions> expected;
  try {
    expected = relabeled_triangle_decompositions(target);
    report.warnings = expected->warnings;
  } catch (const Error& err) {
    report.checks.push_back({"target_region", false, err.what()});
  }

  if (expected) {
    for (int y = 0; y < 2; ++y) {
      const auto& want = (y == 0) ? expected->epsilon : expected->eta;
      const auto& want_weights = (y == 0) ? expected->epsilon_weights
                                          : expected->eta_weights;
      const auto posterior = posterior_alice_ensemble(ensemble, y);
      CheckResult c{y == 0 ? "y0_reduces_to_epsilon" : "y1_reduces_to_eta", true, {}};
      if (!ensembles_equal(posterior.ensemble, want)) {
        c.passed = false;
        c.witness = "reduction " + describe_weights(sbox_weights(posterior.ensemble)) +
                    " != expected " + describe_weights(want_weights);
      }
      report.checks.push_back(std::move(c));
    }
  }

  CheckResult marginal{"marginal_matches_target", true, {}};
  try {
    const LocalBox got = alice_marginal(mix_nonlocal(ensemble));
    const LocalBox want = target.to_local_box();
    if (got != want) {
      marginal.passed = false;
      marginal.witness = "Alice marginal (s=" + to_string(got.at(0, 0)) +
                         ", t=" + to_string(got.at(1, 0)) + ") != target " +
                         describe(target);
    }
  } catch (const Error& err) {
    marginal.passed = false;
    marginal.witness = err.what();
  }
  report.checks.push_back(std::move(marginal));
  return report;
}

SBox referee_infer(const NonlocalEnsemble::MemberRef& member, int y, int b) {
  require_bit(y, "y");
  require_bit(b, "b");
  if (const auto* product = std::get_if<NonlocalEnsemble::ProductMember>(&member)) {
    return product->alice;
  }
  const auto& pr = std::get<NonlocalEnsemble::PRMember>(member).box;
  if (pr.beta != 0) {
    throw ValidationError(to_string(pr) +
                          " has beta = 1 and is not part of a blind-steering "
                          "ensemble");
  }
  return SBox{static_cast<std::uint8_t>(y),
              static_cast<std::uint8_t>((pr.alpha * y) ^ pr.delta ^ b)};
}

int SBoxDistribution::support_size() const {
  return static_cast<int>(
      std::count_if(weights.begin(), weights.end(), [](const Prob& w) { return w != 0; }));
}

SBoxDistribution bob_posterior(const NonlocalEnsemble& ensemble, int y, int b) {
  require_bit(y, "y");
  require_bit(b, "b");
  const auto posterior = posterior_alice_ensemble(ensemble, y);
  SBoxDistribution dist{};
  Prob total = 0;
  for (const auto& term : posterior.terms) {
    if (term.b != b) continue;
    dist.weights[static_cast<std::size_t>(term.alice.index())] += term.weight;
    total += term.weight;
  }
  if (total == 0) {
    throw ZeroProbabilityError("p(b=" + std::to_string(b) + "|y=" +
                               std::to_string(y) + ") = 0 under this ensemble");
  }
  for (auto& w : dist.weights) w /= total;
  return dist;
}

BlindSteeringPlan plan_blind_steering(const TargetState& target,
                                      const std::optional<NonlocalEnsemble>& split,
                                      SplitPolicy policy) {
  const Relabeling r = canonicalizing_relabeling(target);
  const TargetState canonical = relabel(target, r);
  auto solution = solve_constraints(canonical);
  const NonlocalEnsemble canonical_ensemble =
      split ? build_nonlocal_ensemble(solution, relabel(*split, r))
            : build_nonlocal_ensemble(solution, policy);
  NonlocalEnsemble ensemble = relabel(canonical_ensemble, r);
  auto decompositions = relabeled_triangle_decompositions(target);
  auto report = verify_blind_steering(ensemble, target);
  return BlindSteeringPlan{target,
                           r,
                           canonical,
                           std::move(solution),
                           std::move(decompositions),
                           std::move(ensemble),
                           std::move(report)};
}

}  // namespace nsbox
