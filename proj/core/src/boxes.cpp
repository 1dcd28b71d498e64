#include "nsbox/boxes.hpp"

#include <sstream>
#include <utility>

#include "nsbox/errors.hpp"

namespace nsbox {
namespace {

void require_shape(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

std::string cell(std::initializer_list<std::pair<const char*, int>> coords) {
  std::ostringstream out;
  out << "(";
  bool first = true;
  for (const auto& [name, value] : coords) {
    if (!first) out << ", ";
    out << name << "=" << value;
    first = false;
  }
  out << ")";
  return out.str();
}

}  // namespace

// ---------------------------------------------------------------- LocalBox

LocalBox::LocalBox(int num_inputs, int num_outputs, std::vector<Prob> table)
    : num_inputs_(num_inputs),
      num_outputs_(num_outputs),
      table_(std::move(table)) {
  require_shape(num_inputs_ >= 1 && num_outputs_ >= 1,
                "local box needs at least one input and one output");
  require_shape(table_.size() == static_cast<std::size_t>(num_inputs_) *
                                     static_cast<std::size_t>(num_outputs_),
                "local box table has wrong size");
  for (int x = 0; x < num_inputs_; ++x) {
    Prob row = 0;
    for (int a = 0; a < num_outputs_; ++a) {
      const Prob& p = at(x, a);
      if (!is_probability(p)) {
        throw ValidationError("local box entry " + cell({{"x", x}, {"a", a}}) +
                              " = " + to_string(p) + " outside [0,1]");
      }
      row += p;
    }
    if (row != 1) {
      throw ValidationError("local box row x=" + std::to_string(x) +
                            " sums to " + to_string(row) + ", not 1");
    }
  }
}

const Prob& LocalBox::at(int x, int a) const {
  return table_.at(static_cast<std::size_t>(x * num_outputs_ + a));
}

bool LocalBox::is_deterministic() const {
  for (const auto& p : table_) {
    if (p != 0 && p != 1) return false;
  }
  return true;
}

// ------------------------------------------------------------- DetLocalBox

DetLocalBox::DetLocalBox(std::vector<int> strategy, int num_outputs)
    : strategy_(std::move(strategy)), num_outputs_(num_outputs) {
  require_shape(!strategy_.empty(), "deterministic box needs an input");
  require_shape(num_outputs_ >= 1, "deterministic box needs an output");
  for (int a : strategy_) {
    require_shape(a >= 0 && a < num_outputs_,
                  "deterministic strategy output out of range");
  }
}

DetLocalBox DetLocalBox::from_local_box(const LocalBox& box) {
  if (!box.is_deterministic()) {
    throw ValidationError("local box is not deterministic");
  }
  std::vector<int> strategy(static_cast<std::size_t>(box.num_inputs()));
  for (int x = 0; x < box.num_inputs(); ++x) {
    for (int a = 0; a < box.num_outputs(); ++a) {
      if (box.at(x, a) == 1) strategy[static_cast<std::size_t>(x)] = a;
    }
  }
  return DetLocalBox(std::move(strategy), box.num_outputs());
}

LocalBox DetLocalBox::to_local_box() const {
  std::vector<Prob> table(strategy_.size() *
                          static_cast<std::size_t>(num_outputs_));
  for (std::size_t x = 0; x < strategy_.size(); ++x) {
    table[x * static_cast<std::size_t>(num_outputs_) +
          static_cast<std::size_t>(strategy_[x])] = 1;
  }
  return LocalBox(num_inputs(), num_outputs_, std::move(table));
}

std::vector<DetLocalBox> enumerate_det_boxes(int num_inputs, int num_outputs) {
  require_shape(num_inputs >= 1 && num_outputs >= 1,
                "enumerate_det_boxes needs X, A >= 1");
  std::vector<DetLocalBox> boxes;
  std::vector<int> f(static_cast<std::size_t>(num_inputs), 0);
  while (true) {
    boxes.emplace_back(f, num_outputs);
    // Odometer with f(X-1) as the fastest digit gives lexicographic order.
    int pos = num_inputs - 1;
    while (pos >= 0 && f[static_cast<std::size_t>(pos)] == num_outputs - 1) {
      f[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++f[static_cast<std::size_t>(pos)];
  }
  return boxes;
}

// -------------------------------------------------------------------- SBox

DetLocalBox SBox::to_det() const { return DetLocalBox({output(0), output(1)}, 2); }

LocalBox SBox::to_local_box() const { return to_det().to_local_box(); }

SBox SBox::from_local_box(const LocalBox& box) {
  if (box.num_inputs() != 2 || box.num_outputs() != 2) {
    throw ValidationError("S box must be a 2-input 2-output box");
  }
  const auto det = DetLocalBox::from_local_box(box);
  const int beta = det.output(0);
  const int alpha = det.output(1) ^ beta;
  return SBox{static_cast<std::uint8_t>(alpha), static_cast<std::uint8_t>(beta)};
}

std::string to_string(SBox box) {
  return "S" + std::to_string(box.alpha) + std::to_string(box.beta);
}

std::array<SBox, 4> all_sboxes() {
  return {SBox::from_index(0), SBox::from_index(1), SBox::from_index(2),
          SBox::from_index(3)};
}

std::string to_string(PRBox box) {
  return "PR" + std::to_string(box.alpha) + std::to_string(box.beta) +
         std::to_string(box.delta);
}

// ------------------------------------------------------------ BipartiteBox

BipartiteBox::BipartiteBox(int alice_inputs, int bob_inputs, int alice_outputs,
                           int bob_outputs, std::vector<Prob> table)
    : alice_inputs_(alice_inputs),
      bob_inputs_(bob_inputs),
      alice_outputs_(alice_outputs),
      bob_outputs_(bob_outputs),
      table_(std::move(table)) {
  require_shape(alice_inputs_ >= 1 && bob_inputs_ >= 1 && alice_outputs_ >= 1 &&
                    bob_outputs_ >= 1,
                "bipartite box dimensions must be positive");
  require_shape(table_.size() == static_cast<std::size_t>(alice_inputs_) *
                                     static_cast<std::size_t>(bob_inputs_) *
                                     static_cast<std::size_t>(alice_outputs_) *
                                     static_cast<std::size_t>(bob_outputs_),
                "bipartite box table has wrong size");
  for (int x = 0; x < alice_inputs_; ++x) {
    for (int y = 0; y < bob_inputs_; ++y) {
      Prob row = 0;
      for (int a = 0; a < alice_outputs_; ++a) {
        for (int b = 0; b < bob_outputs_; ++b) {
          const Prob& p = at(x, y, a, b);
          if (!is_probability(p)) {
            throw ValidationError(
                "bipartite entry " +
                cell({{"x", x}, {"y", y}, {"a", a}, {"b", b}}) + " = " +
                to_string(p) + " outside [0,1]");
          }
          row += p;
        }
      }
      if (row != 1) {
        throw ValidationError("bipartite row " + cell({{"x", x}, {"y", y}}) +
                              " sums to " + to_string(row) + ", not 1");
      }
    }
  }
}

std::size_t BipartiteBox::offset(int x, int y, int a, int b) const {
  return static_cast<std::size_t>(
      ((x * bob_inputs_ + y) * alice_outputs_ + a) * bob_outputs_ + b);
}

const Prob& BipartiteBox::at(int x, int y, int a, int b) const {
  return table_.at(offset(x, y, a, b));
}

BipartiteBox BipartiteBox::product(const LocalBox& alice, const LocalBox& bob) {
  const int ax = alice.num_inputs(), by = bob.num_inputs();
  const int aa = alice.num_outputs(), bb = bob.num_outputs();
  std::vector<Prob> table;
  table.reserve(static_cast<std::size_t>(ax * by * aa * bb));
  for (int x = 0; x < ax; ++x)
    for (int y = 0; y < by; ++y)
      for (int a = 0; a < aa; ++a)
        for (int b = 0; b < bb; ++b) table.push_back(alice.at(x, a) * bob.at(y, b));
  return BipartiteBox(ax, by, aa, bb, std::move(table));
}

BipartiteBox BipartiteBox::product(SBox alice, SBox bob) {
  return product(alice.to_local_box(), bob.to_local_box());
}

BipartiteBox BipartiteBox::pr_box(PRBox box) {
  std::vector<Prob> table;
  table.reserve(16);
  const Prob half(1, 2);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          table.push_back(box.allows(x, y, a, b) ? half : Prob(0));
  return BipartiteBox(2, 2, 2, 2, std::move(table));
}

// ----------------------------------------------------------- no-signalling

std::string SignallingWitness::describe() const {
  std::ostringstream out;
  if (party == Party::kAlice) {
    out << "Alice's marginal p(a=" << local_output << "|x=" << local_input
        << ") is " << to_string(reference_value) << " at y=" << remote_reference
        << " but " << to_string(value) << " at y=" << remote_input;
  } else {
    out << "Bob's marginal p(b=" << local_output << "|y=" << local_input
        << ") is " << to_string(reference_value) << " at x=" << remote_reference
        << " but " << to_string(value) << " at x=" << remote_input;
  }
  return out.str();
}

namespace {

Prob alice_slice(const BipartiteBox& box, int x, int y, int a) {
  Prob sum = 0;
  for (int b = 0; b < box.bob_outputs(); ++b) sum += box.at(x, y, a, b);
  return sum;
}

Prob bob_slice(const BipartiteBox& box, int x, int y, int b) {
  Prob sum = 0;
  for (int a = 0; a < box.alice_outputs(); ++a) sum += box.at(x, y, a, b);
  return sum;
}

void require_no_signalling(const BipartiteBox& box) {
  if (auto witness = find_signalling(box)) {
    throw SignallingError("box is signalling: " + witness->describe());
  }
}

}  // namespace

std::optional<SignallingWitness> find_signalling(const BipartiteBox& box) {
  for (int x = 0; x < box.alice_inputs(); ++x) {
    for (int a = 0; a < box.alice_outputs(); ++a) {
      const Prob reference = alice_slice(box, x, 0, a);
      for (int y = 1; y < box.bob_inputs(); ++y) {
        Prob value = alice_slice(box, x, y, a);
        if (value != reference) {
          return SignallingWitness{Party::kAlice, x, a, 0, y, reference,
                                   std::move(value)};
        }
      }
    }
  }
  for (int y = 0; y < box.bob_inputs(); ++y) {
    for (int b = 0; b < box.bob_outputs(); ++b) {
      const Prob reference = bob_slice(box, 0, y, b);
      for (int x = 1; x < box.alice_inputs(); ++x) {
        Prob value = bob_slice(box, x, y, b);
        if (value != reference) {
          return SignallingWitness{Party::kBob, y, b, 0, x, reference,
                                   std::move(value)};
        }
      }
    }
  }
  return std::nullopt;
}

bool is_no_signalling(const BipartiteBox& box) {
  return !find_signalling(box).has_value();
}

LocalBox alice_marginal(const BipartiteBox& box) {
  require_no_signalling(box);
  std::vector<Prob> table;
  table.reserve(static_cast<std::size_t>(box.alice_inputs() * box.alice_outputs()));
  for (int x = 0; x < box.alice_inputs(); ++x)
    for (int a = 0; a < box.alice_outputs(); ++a)
      table.push_back(alice_slice(box, x, 0, a));
  return LocalBox(box.alice_inputs(), box.alice_outputs(), std::move(table));
}

LocalBox bob_marginal(const BipartiteBox& box) {
  require_no_signalling(box);
  std::vector<Prob> table;
  table.reserve(static_cast<std::size_t>(box.bob_inputs() * box.bob_outputs()));
  for (int y = 0; y < box.bob_inputs(); ++y)
    for (int b = 0; b < box.bob_outputs(); ++b)
      table.push_back(bob_slice(box, 0, y, b));
  return LocalBox(box.bob_inputs(), box.bob_outputs(), std::move(table));
}

std::vector<Prob> bob_outcome_distribution(const BipartiteBox& box, int y) {
  require_no_signalling(box);
  if (y < 0 || y >= box.bob_inputs()) {
    throw ValidationError("Bob input y=" + std::to_string(y) + " out of range");
  }
  std::vector<Prob> dist;
  dist.reserve(static_cast<std::size_t>(box.bob_outputs()));
  for (int b = 0; b < box.bob_outputs(); ++b) dist.push_back(bob_slice(box, 0, y, b));
  return dist;
}

LocalBox condition_on_bob(const BipartiteBox& box, int y, int b) {
  const auto dist = bob_outcome_distribution(box, y);
  if (b < 0 || b >= box.bob_outputs()) {
    throw ValidationError("Bob outcome b=" + std::to_string(b) + " out of range");
  }
  const Prob& pb = dist[static_cast<std::size_t>(b)];
  if (pb == 0) {
    throw ZeroProbabilityError("p(b=" + std::to_string(b) + "|y=" +
                               std::to_string(y) +
                               ") = 0; conditional state undefined");
  }
  std::vector<Prob> table;
  table.reserve(static_cast<std::size_t>(box.alice_inputs() * box.alice_outputs()));
  for (int x = 0; x < box.alice_inputs(); ++x)
    for (int a = 0; a < box.alice_outputs(); ++a)
      table.push_back(box.at(x, y, a, b) / pb);
  return LocalBox(box.alice_inputs(), box.alice_outputs(), std::move(table));
}

}  // namespace nsbox
