#include "nsbox/steering.hpp"

#include <algorithm>
#include <sstream>

#include "nsbox/errors.hpp"

namespace nsbox {
namespace {

std::string describe_box(const LocalBox& box) {
  std::ostringstream out;
  out << "[";
  for (int x = 0; x < box.num_inputs(); ++x) {
    if (x) out << "; ";
    for (int a = 0; a < box.num_outputs(); ++a) {
      if (a) out << " ";
      out << to_string(box.at(x, a));
    }
  }
  out << "]";
  return out.str();
}

std::string describe_box(const DetLocalBox& box) {
  std::ostringstream out;
  out << "f=(";
  for (int x = 0; x < box.num_inputs(); ++x) {
    if (x) out << ",";
    out << box.output(x);
  }
  out << ")";
  return out.str();
}

}  // namespace

SteeringState construct_steering_state(std::span<const Ensemble> ensembles) {
  if (ensembles.size() < 2) {
    throw ValidationError("steering needs at least two ensembles");
  }
  const int nx = ensembles.front().num_inputs();
  const int na = ensembles.front().num_outputs();
  for (const auto& e : ensembles) {
    if (e.num_inputs() != nx || e.num_outputs() != na) {
      throw ValidationError("ensembles have different shapes");
    }
  }
  const LocalBox reference = mix(ensembles.front());
  for (std::size_t y = 1; y < ensembles.size(); ++y) {
    if (!realizes(ensembles[y], reference)) {
      throw IncompatibleEnsemblesError(
          "incompatible ensembles: ensemble " + std::to_string(y) + " mixes to " +
          describe_box(mix(ensembles[y])) + " but ensemble 0 mixes to " +
          describe_box(reference));
    }
  }

  std::size_t cardinality = 0;
  for (const auto& e : ensembles) cardinality = std::max(cardinality, e.size());
  std::vector<Ensemble> padded;
  padded.reserve(ensembles.size());
  for (const auto& e : ensembles) padded.push_back(e.padded(cardinality));

  const int ny = static_cast<int>(padded.size());
  const int nb = static_cast<int>(cardinality);
  std::vector<Prob> table(static_cast<std::size_t>(nx * ny * na * nb));
  for (int x = 0; x < nx; ++x) {
    for (int y = 0; y < ny; ++y) {
      const auto& members = padded[static_cast<std::size_t>(y)].members();
      for (int b = 0; b < nb; ++b) {
        const auto& m = members[static_cast<std::size_t>(b)];
        const int a = m.box.output(x);
        table[static_cast<std::size_t>(((x * ny + y) * na + a) * nb + b)] = m.weight;
      }
    }
  }
  return SteeringState{BipartiteBox(nx, ny, na, nb, std::move(table)),
                       std::move(padded)};
}

CheckResult check_common_marginal(const SteeringState& state) {
  CheckResult r{"i_common_marginal", true, {}};
  const auto& ensembles = state.source_ensembles;
  if (ensembles.empty()) {
    r.passed = false;
    r.witness = "no source ensembles";
    return r;
  }
  const LocalBox reference = mix(ensembles.front());
  for (std::size_t y = 1; y < ensembles.size(); ++y) {
    const LocalBox other = mix(ensembles[y]);
    if (other != reference) {
      r.passed = false;
      r.witness = "ensemble " + std::to_string(y) + " mixes to " +
                  describe_box(other) + ", ensemble 0 to " + describe_box(reference);
      return r;
    }
  }
  return r;
}

CheckResult check_probability_distribution(const SteeringState& state) {
  CheckResult r{"ii_probability_distribution", true, {}};
  const auto& box = state.box;
  for (int x = 0; x < box.alice_inputs(); ++x) {
    for (int y = 0; y < box.bob_inputs(); ++y) {
      Prob row = 0;
      for (int a = 0; a < box.alice_outputs(); ++a) {
        for (int b = 0; b < box.bob_outputs(); ++b) {
          const Prob& p = box.at(x, y, a, b);
          if (p < 0) {
            r.passed = false;
            r.witness = "negative entry at x=" + std::to_string(x) +
                        " y=" + std::to_string(y) + " a=" + std::to_string(a) +
                        " b=" + std::to_string(b);
            return r;
          }
          row += p;
        }
      }
      if (row != 1) {
        r.passed = false;
        r.witness = "row x=" + std::to_string(x) + " y=" + std::to_string(y) +
                    " sums to " + to_string(row);
        return r;
      }
    }
  }
  return r;
}

CheckResult check_no_signalling(const SteeringState& state) {
  CheckResult r{"iii_no_signalling", true, {}};
  if (auto witness = find_signalling(state.box)) {
    r.passed = false;
    r.witness = witness->describe();
  }
  return r;
}

CheckResult check_conditioning(const SteeringState& state) {
  CheckResult r{"iv_conditioning", true, {}};
  const auto& box = state.box;
  if (!is_no_signalling(box)) {
    r.passed = false;
    r.witness = "box is signalling; conditionals undefined";
    return r;
  }
  if (static_cast<std::size_t>(box.bob_inputs()) != state.source_ensembles.size()) {
    r.passed = false;
    r.witness = "Bob's input count differs from the number of ensembles";
    return r;
  }
  for (int y = 0; y < box.bob_inputs(); ++y) {
    const auto& members = state.source_ensembles[static_cast<std::size_t>(y)].members();
    const auto pb = bob_outcome_distribution(box, y);
    if (members.size() != pb.size()) {
      r.passed = false;
      r.witness = "ensemble " + std::to_string(y) + " has " +
                  std::to_string(members.size()) + " members but Bob has " +
                  std::to_string(pb.size()) + " outcomes";
      return r;
    }
    for (int b = 0; b < box.bob_outputs(); ++b) {
      const auto& m = members[static_cast<std::size_t>(b)];
      if (pb[static_cast<std::size_t>(b)] != m.weight) {
        r.passed = false;
        r.witness = "p(b=" + std::to_string(b) + "|y=" + std::to_string(y) +
                    ") = " + to_string(pb[static_cast<std::size_t>(b)]) +
                    " but w = " + to_string(m.weight);
        return r;
      }
      if (m.weight == 0) continue;
      const LocalBox conditional = condition_on_bob(box, y, b);
      if (conditional != m.box.to_local_box()) {
        r.passed = false;
        r.witness = "conditioning on y=" + std::to_string(y) + " b=" +
                    std::to_string(b) + " gives " + describe_box(conditional) +
                    ", expected " + describe_box(m.box);
        return r;
      }
    }
  }
  return r;
}

VerificationReport verify_steering_state(const SteeringState& state) {
  VerificationReport report;
  report.checks.push_back(check_common_marginal(state));
  report.checks.push_back(check_probability_distribution(state));
  report.checks.push_back(check_no_signalling(state));
  report.checks.push_back(check_conditioning(state));
  return report;
}

Ensemble steered_ensemble(const SteeringState& state, int y) {
  const auto pb = bob_outcome_distribution(state.box, y);
  std::vector<Ensemble::Member> members;
  for (int b = 0; b < state.box.bob_outputs(); ++b) {
    const Prob& w = pb[static_cast<std::size_t>(b)];
    if (w == 0) continue;
    members.push_back(
        {w, DetLocalBox::from_local_box(condition_on_bob(state.box, y, b))});
  }
  return Ensemble(std::move(members));
}

IdentifiedConstituent bob_identifies_constituent(const SteeringState& state,
                                                 int y, int b) {
  if (y < 0 || static_cast<std::size_t>(y) >= state.source_ensembles.size()) {
    throw ValidationError("Bob input y=" + std::to_string(y) + " out of range");
  }
  const auto& members = state.source_ensembles[static_cast<std::size_t>(y)].members();
  if (b < 0 || static_cast<std::size_t>(b) >= members.size()) {
    throw ValidationError("Bob outcome b=" + std::to_string(b) + " out of range");
  }
  const auto& m = members[static_cast<std::size_t>(b)];
  if (m.weight == 0) {
    throw ZeroProbabilityError("outcome b=" + std::to_string(b) + " of y=" +
                               std::to_string(y) + " has zero weight");
  }
  return IdentifiedConstituent{static_cast<std::size_t>(b), m.box};
}

}  // namespace nsbox
