#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nsbox/boxes.hpp"
#include "nsbox/checks.hpp"
#include "nsbox/ensembles.hpp"

namespace nsbox {

/// Bipartite box that lets Bob prepare any of several ensembles of the same
/// local box: input y selects ensemble y, outcome b names its b-th member.
struct SteeringState {
  BipartiteBox box;
  /// Source ensembles, padded to a common cardinality B = box.bob_outputs().
  std::vector<Ensemble> source_ensembles;
};

/// p(ab|xy) = w_b^y p_b^y(a|x).
///
/// Needs at least two ensembles of equal shape that mix to the same local
/// box; shorter ensembles are padded with zero-weight members, and the
/// corresponding (y, b) cells are all-zero. Throws IncompatibleEnsemblesError
/// when the mixtures differ, ValidationError on shape problems.
SteeringState construct_steering_state(std::span<const Ensemble> ensembles);

// Proof obligations, each independently callable.

/// Every source ensemble mixes to the same p(a|x).
CheckResult check_common_marginal(const SteeringState& state);
/// Entries nonnegative, each (x, y) row sums to one.
CheckResult check_probability_distribution(const SteeringState& state);
CheckResult check_no_signalling(const SteeringState& state);
/// p(b|y) = w_b^y, and conditioning on (y, b) recovers the b-th constituent
/// whenever w_b^y > 0.
CheckResult check_conditioning(const SteeringState& state);

/// All four obligations in order.
VerificationReport verify_steering_state(const SteeringState& state);

/// {(p(b|y), condition_on_bob(box, y, b))}, zero-weight outcomes dropped.
Ensemble steered_ensemble(const SteeringState& state, int y);

struct IdentifiedConstituent {
  std::size_t index;
  DetLocalBox box;
};

/// Outcome b of input y names constituent b of ensemble y. Throws
/// ZeroProbabilityError if w_b^y = 0.
IdentifiedConstituent bob_identifies_constituent(const SteeringState& state,
                                                 int y, int b);

}  // namespace nsbox
