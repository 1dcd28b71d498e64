#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nsbox/boxes.hpp"
#include "nsbox/checks.hpp"
#include "nsbox/ensembles.hpp"
#include "nsbox/rational.hpp"

namespace nsbox {

/// Alice's 2x2 local state, s = p(a=0|x=0), t = p(a=0|x=1).
struct TargetState {
  Prob s;
  Prob t;

  /// Throws ValidationError unless both coordinates lie in [0,1].
  LocalBox to_local_box() const;
  static TargetState from_local_box(const LocalBox& box);

  friend bool operator==(const TargetState&, const TargetState&) = default;
};

/// True for t >= s and s + t < 1 (the canonical triangle, boundary
/// included except for the anti-diagonal).
bool in_canonical_region(const TargetState& target);

/// Relabeling of Alice's side: `flip_output` maps a -> a XOR 1,
/// `swap_input` maps x -> x XOR 1. Both are involutions and commute, so a
/// relabeling is its own inverse.
struct Relabeling {
  bool flip_output = false;
  bool swap_input = false;

  bool is_identity() const { return !flip_output && !swap_input; }
  std::string describe() const;

  friend bool operator==(const Relabeling&, const Relabeling&) = default;
};

TargetState relabel(const TargetState& target, Relabeling r);
SBox relabel(SBox box, Relabeling r);
PRBox relabel(PRBox box, Relabeling r);
/// Relabels Alice's factor of every member; Bob's side is untouched.
NonlocalEnsemble relabel(const NonlocalEnsemble& ensemble, Relabeling r);
/// 2x2 ensembles only.
Ensemble relabel(const Ensemble& ensemble, Relabeling r);

/// Relabeling that maps `target` into the canonical region. Throws
/// RegionError for the center s = t = 1/2 and for the anti-diagonal
/// s + t = 1, which no relabeling moves off.
Relabeling canonicalizing_relabeling(const TargetState& target);

/// The two three-vertex ensembles of a canonical target: epsilon puts the
/// largest weight on S00, eta the smallest.
struct TriangleDecompositions {
  std::array<Prob, 4> epsilon_weights;  // indexed by SBox::index()
  std::array<Prob, 4> eta_weights;
  Ensemble epsilon;
  Ensemble eta;
  std::vector<std::string> warnings;  // boundary (degenerate) points
};

/// Requires the canonical region; throws RegionError otherwise.
TriangleDecompositions triangle_decompositions(const TargetState& target);

/// Canonical decompositions mapped back to an arbitrary non-diagonal target.
TriangleDecompositions relabeled_triangle_decompositions(
    const TargetState& target);

/// value = constant + p00_coefficient * P00.
struct AffineInP00 {
  Rational constant;
  Rational p00_coefficient;

  Rational at(const Rational& p00) const {
    return constant + p00_coefficient * p00;
  }
};

/// Aggregates P_ij, Q_beta expressed through the single free parameter
/// P00, from imposing epsilon at y = 0 and eta at y = 1 on the closed-form
/// reductions.
struct ConstraintSystem {
  std::array<AffineInP00, 4> product;  // P_ij by SBox::index()
  std::array<AffineInP00, 2> pr;       // Q_beta
};

struct BlindSteeringSolution {
  TargetState target;
  ConstraintSystem system;
  /// Interval of P00 values keeping every aggregate nonnegative.
  Rational p00_lower;
  Rational p00_upper;
  std::array<Prob, 4> product;  // P_ij at the pinned P00
  std::array<Prob, 2> pr;       // Q_beta
  std::vector<std::string> warnings;
};

/// Solves for the aggregates of a canonical target. Positivity pins P00 to a
/// single value (zero); the full interval is reported for inspection.
BlindSteeringSolution solve_constraints(const TargetState& target);

enum class SplitPolicy {
  /// p_{01,10} = P01, p_{11,11} = P11, q_{000} = Q0. Every (y, b) then has
  /// at least two possible constituents for interior targets.
  kCanonical,
  /// p_{01,00} = P01, p_{11,00} = P11, q_{000} = Q0. Bob's product factor is
  /// S00 so b = 1 always comes from the PR box and reveals Alice's box.
  kBobFixedS00,
};

NonlocalEnsemble build_nonlocal_ensemble(const BlindSteeringSolution& solution,
                                         SplitPolicy policy =
                                             SplitPolicy::kCanonical);

/// Accepts a user split (in canonical coordinates) if it uses only
/// S01/S11 products and beta = 0 PR boxes with aggregates matching the
/// solution. Throws ValidationError otherwise.
NonlocalEnsemble build_nonlocal_ensemble(const BlindSteeringSolution& solution,
                                         const NonlocalEnsemble& split);

/// Checks that Bob's y = 0 reduction equals epsilon, y = 1 equals eta, and
/// the mixed box has Alice marginal equal to the target. Non-canonical
/// targets are compared against the relabeled decompositions. Never throws
/// on bad input; failures show up as failed checks.
VerificationReport verify_blind_steering(const NonlocalEnsemble& ensemble,
                                         const TargetState& target);

/// The Referee's rule: a product member leaves Alice in its Alice factor;
/// PR_{alpha 0 delta} leaves her in S_{y, alpha y XOR delta XOR b}. Throws
/// ValidationError for PR boxes with beta = 1.
SBox referee_infer(const NonlocalEnsemble::MemberRef& member, int y, int b);

struct SBoxDistribution {
  std::array<Prob, 4> weights;  // indexed by SBox::index()

  int support_size() const;
};

/// Bob's posterior over Alice's constituent given (y, b) and the ensemble.
/// Throws ZeroProbabilityError if p(b|y) = 0.
SBoxDistribution bob_posterior(const NonlocalEnsemble& ensemble, int y, int b);

/// End-to-end construction for any non-diagonal target: relabel into the
/// canonical region, solve, build, map back, verify.
struct BlindSteeringPlan {
  TargetState target;
  Relabeling relabeling;
  TargetState canonical_target;
  BlindSteeringSolution solution;       // canonical coordinates
  TriangleDecompositions decompositions;  // original coordinates
  NonlocalEnsemble ensemble;            // original coordinates
  VerificationReport report;
};

/// `split`, if given, is in the target's own coordinates.
BlindSteeringPlan plan_blind_steering(
    const TargetState& target,
    const std::optional<NonlocalEnsemble>& split = std::nullopt,
    SplitPolicy policy = SplitPolicy::kCanonical);

}  // namespace nsbox
