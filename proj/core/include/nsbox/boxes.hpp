#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nsbox/rational.hpp"

namespace nsbox {

/// Single-party box p(a|x) with X inputs and A outputs.
///
/// Immutable once constructed. Every row sums to exactly one and every entry
/// lies in [0,1]; the constructor throws ValidationError otherwise.
class LocalBox {
 public:
  /// `table` is row-major: entry (x, a) lives at x * A + a.
  LocalBox(int num_inputs, int num_outputs, std::vector<Prob> table);

  int num_inputs() const { return num_inputs_; }
  int num_outputs() const { return num_outputs_; }
  const Prob& at(int x, int a) const;
  const std::vector<Prob>& table() const { return table_; }

  /// True when every entry is 0 or 1.
  bool is_deterministic() const;

  friend bool operator==(const LocalBox&, const LocalBox&) = default;

 private:
  int num_inputs_;
  int num_outputs_;
  std::vector<Prob> table_;
};

/// Deterministic local box p(a|x) = [a == f(x)]: a vertex of the local
/// polytope.
class DetLocalBox {
 public:
  DetLocalBox(std::vector<int> strategy, int num_outputs);

  /// Throws ValidationError if `box` is not 0/1 valued.
  static DetLocalBox from_local_box(const LocalBox& box);

  int num_inputs() const { return static_cast<int>(strategy_.size()); }
  int num_outputs() const { return num_outputs_; }
  int output(int x) const { return strategy_.at(static_cast<std::size_t>(x)); }
  const std::vector<int>& strategy() const { return strategy_; }

  LocalBox to_local_box() const;

  // Shape first, then lexicographic in (f(0), f(1), ...).
  friend auto operator<=>(const DetLocalBox& lhs, const DetLocalBox& rhs) {
    if (auto c = lhs.num_outputs_ <=> rhs.num_outputs_; c != 0) return c;
    return lhs.strategy_ <=> rhs.strategy_;
  }
  friend bool operator==(const DetLocalBox&, const DetLocalBox&) = default;

 private:
  std::vector<int> strategy_;
  int num_outputs_;
};

/// All A^X deterministic boxes, lexicographic in (f(0), f(1), ...).
std::vector<DetLocalBox> enumerate_det_boxes(int num_inputs, int num_outputs);

/// Binary-input, binary-output deterministic box S_{alpha beta}:
/// a = alpha * x XOR beta.
struct SBox {
  std::uint8_t alpha = 0;
  std::uint8_t beta = 0;

  constexpr int output(int x) const { return (alpha * x) ^ beta; }
  /// Canonical index 2 * alpha + beta.
  constexpr int index() const { return 2 * alpha + beta; }
  static constexpr SBox from_index(int index) {
    return SBox{static_cast<std::uint8_t>((index >> 1) & 1),
                static_cast<std::uint8_t>(index & 1)};
  }

  DetLocalBox to_det() const;
  LocalBox to_local_box() const;

  /// Throws ValidationError unless `box` is 2x2 deterministic.
  static SBox from_local_box(const LocalBox& box);

  friend constexpr auto operator<=>(const SBox&, const SBox&) = default;
};

std::string to_string(SBox box);

/// All four S boxes in index order (S00, S01, S10, S11).
std::array<SBox, 4> all_sboxes();

/// Extremal nonlocal box PR_{alpha beta delta}:
/// a XOR b = (x XOR alpha)(y XOR beta) XOR delta, each allowed pair with 1/2.
struct PRBox {
  std::uint8_t alpha = 0;
  std::uint8_t beta = 0;
  std::uint8_t delta = 0;

  /// True when (a, b) is an allowed output pair for inputs (x, y).
  constexpr bool allows(int x, int y, int a, int b) const {
    return ((a ^ b) & 1) == ((((x ^ alpha) & (y ^ beta)) ^ delta) & 1);
  }
  /// Canonical index 4 * alpha + 2 * beta + delta.
  constexpr int index() const { return 4 * alpha + 2 * beta + delta; }
  static constexpr PRBox from_index(int index) {
    return PRBox{static_cast<std::uint8_t>((index >> 2) & 1),
                 static_cast<std::uint8_t>((index >> 1) & 1),
                 static_cast<std::uint8_t>(index & 1)};
  }

  friend constexpr auto operator<=>(const PRBox&, const PRBox&) = default;
};

std::string to_string(PRBox box);

/// Joint box p(ab|xy) shared by Alice (x, a) and Bob (y, b).
///
/// The constructor checks nonnegativity and per-(x,y) normalization only;
/// no-signalling is a separate predicate so that signalling tables can be
/// represented and diagnosed.
class BipartiteBox {
 public:
  /// Entry (x, y, a, b) lives at ((x * Y + y) * A + a) * B + b.
  BipartiteBox(int alice_inputs, int bob_inputs, int alice_outputs,
               int bob_outputs, std::vector<Prob> table);

  /// p(ab|xy) = alice(a|x) * bob(b|y).
  static BipartiteBox product(const LocalBox& alice, const LocalBox& bob);
  static BipartiteBox product(SBox alice, SBox bob);
  static BipartiteBox pr_box(PRBox box);

  int alice_inputs() const { return alice_inputs_; }
  int bob_inputs() const { return bob_inputs_; }
  int alice_outputs() const { return alice_outputs_; }
  int bob_outputs() const { return bob_outputs_; }
  const Prob& at(int x, int y, int a, int b) const;
  const std::vector<Prob>& table() const { return table_; }

  bool is_2x2() const {
    return alice_inputs_ == 2 && bob_inputs_ == 2 && alice_outputs_ == 2 &&
           bob_outputs_ == 2;
  }

  friend bool operator==(const BipartiteBox&, const BipartiteBox&) = default;

 private:
  std::size_t offset(int x, int y, int a, int b) const;

  int alice_inputs_;
  int bob_inputs_;
  int alice_outputs_;
  int bob_outputs_;
  std::vector<Prob> table_;
};

enum class Party { kAlice, kBob };

/// First slice found whose marginal depends on the remote input. For
/// kAlice: Σ_b p(ab|x,y) differs between y = `remote_reference` and
/// y = `remote_input`, at local input/output (`local_input`, `local_output`).
struct SignallingWitness {
  Party party;
  int local_input;
  int local_output;
  int remote_reference;
  int remote_input;
  Prob reference_value;
  Prob value;

  std::string describe() const;
};

/// Empty result means the box is no-signalling in both directions.
std::optional<SignallingWitness> find_signalling(const BipartiteBox& box);

bool is_no_signalling(const BipartiteBox& box);

/// p(a|x). Throws SignallingError if the box signals.
LocalBox alice_marginal(const BipartiteBox& box);

/// Bob's local box p(b|y). Throws SignallingError if the box signals.
LocalBox bob_marginal(const BipartiteBox& box);

/// p(b|y) as a vector over b. Throws SignallingError if the box signals.
std::vector<Prob> bob_outcome_distribution(const BipartiteBox& box, int y);

/// Alice's box conditioned on Bob's (y, b): p(ab|xy) / p(b|y).
/// Throws ZeroProbabilityError if p(b|y) = 0, SignallingError if the box
/// signals.
LocalBox condition_on_bob(const BipartiteBox& box, int y, int b);

}  // namespace nsbox
