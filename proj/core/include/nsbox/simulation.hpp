#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsbox/blind_steering.hpp"
#include "nsbox/boxes.hpp"
#include "nsbox/ensembles.hpp"

namespace nsbox {

/// Distribution over (x, y); weight of (x, y) at index 2 * x + y.
struct InputPolicy {
  std::array<Prob, 4> weights;

  /// Throws ValidationError unless weights are nonnegative and sum to one.
  void validate() const;
  static InputPolicy uniform();
};

struct RoundLog {
  std::uint64_t round_id = 0;
  std::size_t member_id = 0;
  int x = 0;
  int y = 0;
  int a = 0;
  int b = 0;
  /// Empty when the Referee rule does not apply to the member (beta = 1 PR).
  std::optional<SBox> referee_inference;
  /// Alice's constituent after Bob's (y, b), from conditioning the member.
  SBox alice_actual;

  friend bool operator==(const RoundLog&, const RoundLog&) = default;
};

/// Relative frequencies p(ab|xy) with per-(x,y) trial counts.
struct EmpiricalBox {
  std::array<double, 16> table{};           // ((x*2 + y)*2 + a)*2 + b
  std::array<std::uint64_t, 4> trials{};    // by 2x + y

  double at(int x, int y, int a, int b) const {
    return table[static_cast<std::size_t>(((x * 2 + y) * 2 + a) * 2 + b)];
  }
  /// max |estimate - exact| over all entries.
  double sup_distance(const BipartiteBox& exact) const;
};

/// Throws ValidationError naming every (x, y) cell without a sample.
EmpiricalBox estimate_box(std::span<const RoundLog> logs);

struct AuditOptions {
  /// Family-wise significance of the frequency tests (Bonferroni over
  /// cells).
  double significance = 1e-3;
  /// When set, expected constituent weights are the target's triangle
  /// decompositions; otherwise the ensemble's own exact reductions.
  std::optional<TargetState> target;
};

struct FrequencyCell {
  int y = 0;
  SBox constituent;
  std::uint64_t count = 0;
  std::uint64_t trials = 0;
  double expected = 0.0;
  double p_value = 1.0;
  bool passed = true;
};

struct RoundFailure {
  std::uint64_t round_id = 0;
  std::string reason;
};

struct AuditVerdict {
  bool rounds_passed = true;
  bool frequencies_passed = true;
  std::vector<RoundFailure> round_failures;
  std::vector<FrequencyCell> cells;
  double per_cell_alpha = 0.0;
  /// Set when expected weights could not be formed (e.g. diagonal target).
  std::string frequency_error;

  bool passed() const { return rounds_passed && frequencies_passed; }
};

/// Per round: the outcome must be possible for the recorded member and the
/// Referee's inference must equal the logged constituent. Per input y: the
/// constituent frequencies must pass a two-sided exact binomial test.
AuditVerdict referee_audit(std::span<const RoundLog> logs,
                           const NonlocalEnsemble& ensemble,
                           const AuditOptions& options = {});

struct SimulationOptions {
  std::uint64_t rounds = 100000;
  std::uint64_t seed = 0;
  InputPolicy policy = InputPolicy::uniform();
  /// Worker threads; logs do not depend on this.
  unsigned threads = 1;
};

struct SimulationReport {
  std::uint64_t rounds = 0;
  std::uint64_t rng_seed = 0;
  /// Empty if some (x, y) cell was never sampled.
  std::optional<EmpiricalBox> empirical_joint;
  /// Frequencies of Alice's constituent given (y, b), indexed [y][b][S].
  std::array<std::array<std::array<double, 4>, 2>, 2> alice_by_outcome{};
  std::array<std::array<std::uint64_t, 2>, 2> outcome_counts{};
  /// Frequencies of Alice's constituent given y, indexed [y][S].
  std::array<std::array<double, 4>, 2> alice_by_input{};
  AuditVerdict verdict;
};

struct SimulationResult {
  std::vector<RoundLog> logs;
  SimulationReport report;
};

/// Seed of the independent random stream for one round (splitmix64 mix of
/// the run seed and the round id).
std::uint64_t round_stream_seed(std::uint64_t seed, std::uint64_t round_id);

/// Runs the Referee/Alice/Bob protocol. Deterministic given the ensemble
/// and options, independent of the thread count.
SimulationResult run_protocol(const NonlocalEnsemble& ensemble,
                              const SimulationOptions& options,
                              const AuditOptions& audit = {});

/// Report statistics recomputed from logs (used by run_protocol and when
/// auditing stored logs).
SimulationReport summarize(std::span<const RoundLog> logs,
                           const NonlocalEnsemble& ensemble,
                           std::uint64_t seed, const AuditOptions& audit);

}  // namespace nsbox
