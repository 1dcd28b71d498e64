#include "nsbox/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <thread>

#include <boost/math/distributions/binomial.hpp>

#include "nsbox/errors.hpp"

namespace nsbox {
namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Draws an index with probability weight / total by comparing a uniform
// 64-bit word against floor(cumulative * 2^64). No floating point involved.
class ExactSampler {
 public:
  explicit ExactSampler(const std::vector<Prob>& weights) {
    using boost::multiprecision::mpz_int;
    const mpz_int scale = mpz_int(1) << 64;
    Prob cumulative = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] == 0) continue;
      cumulative += weights[i];
      indices_.push_back(i);
      const Rational scaled = cumulative * Rational(scale);
      const mpz_int bound = boost::multiprecision::numerator(scaled) /
                            boost::multiprecision::denominator(scaled);
      bounds_.push_back(bound >= scale ? ~std::uint64_t{0}
                                       : bound.convert_to<std::uint64_t>());
    }
    if (indices_.empty()) throw ValidationError("cannot sample from zero weights");
  }

  std::size_t operator()(std::uint64_t u) const {
    for (std::size_t k = 0; k + 1 < indices_.size(); ++k) {
      if (u < bounds_[k]) return indices_[k];
    }
    return indices_.back();
  }

 private:
  std::vector<std::size_t> indices_;
  std::vector<std::uint64_t> bounds_;
};

// Per-member lookup tables shared by all rounds.
struct MemberModel {
  BipartiteBox box;
  std::array<ExactSampler, 4> outcome_by_xy;  // (a, b) at index 2a + b
  std::array<std::array<std::optional<SBox>, 2>, 2> alice_by_yb;
  std::array<std::array<std::optional<SBox>, 2>, 2> inference_by_yb;
};

std::vector<Prob> row_weights(const BipartiteBox& box, int x, int y) {
  std::vector<Prob> w;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) w.push_back(box.at(x, y, a, b));
  return w;
}

MemberModel make_model(const NonlocalEnsemble::MemberRef& member) {
  BipartiteBox box = member_box(member);
  std::array<ExactSampler, 4> samplers{
      ExactSampler(row_weights(box, 0, 0)), ExactSampler(row_weights(box, 0, 1)),
      ExactSampler(row_weights(box, 1, 0)), ExactSampler(row_weights(box, 1, 1))};
  MemberModel model{std::move(box), std::move(samplers), {}, {}};
  for (int y = 0; y < 2; ++y) {
    const auto pb = bob_outcome_distribution(model.box, y);
    for (int b = 0; b < 2; ++b) {
      if (pb[static_cast<std::size_t>(b)] != 0) {
        model.alice_by_yb[y][b] = SBox::from_local_box(condition_on_bob(model.box, y, b));
      }
      try {
        model.inference_by_yb[y][b] = referee_infer(member, y, b);
      } catch (const ValidationError&) {
      }
    }
  }
  return model;
}

RoundLog play_round(std::uint64_t seed, std::uint64_t round_id,
                    const ExactSampler& member_sampler, const ExactSampler& input_sampler,
                    const std::vector<MemberModel>& models) {
  std::mt19937_64 rng(round_stream_seed(seed, round_id));
  RoundLog log;
  log.round_id = round_id;
  log.member_id = member_sampler(rng());
  const std::size_t xy = input_sampler(rng());
  log.x = static_cast<int>(xy >> 1);
  log.y = static_cast<int>(xy & 1);
  const MemberModel& model = models[log.member_id];
  const std::size_t ab = model.outcome_by_xy[xy](rng());
  log.a = static_cast<int>(ab >> 1);
  log.b = static_cast<int>(ab & 1);
  log.alice_actual = *model.alice_by_yb[log.y][log.b];
  log.referee_inference = model.inference_by_yb[log.y][log.b];
  return log;
}

double binomial_two_sided_p(std::uint64_t k, std::uint64_t n, double p) {
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  const boost::math::binomial_distribution<double> dist(static_cast<double>(n), p);
  const double lower = boost::math::cdf(dist, static_cast<double>(k));
  const double upper =
      k == 0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, static_cast<double>(k - 1)));
  return std::min(1.0, 2.0 * std::min(lower, upper));
}

bool is_bit(int v) { return v == 0 || v == 1; }

}  // namespace

void InputPolicy::validate() const {
  Prob total = 0;
  for (const auto& w : weights) {
    if (w < 0) throw ValidationError("input policy has a negative weight");
    total += w;
  }
  if (total != 1) {
    throw ValidationError("input policy weights sum to " + to_string(total) + ", not 1");
  }
}

InputPolicy InputPolicy::uniform() {
  return InputPolicy{{Prob(1, 4), Prob(1, 4), Prob(1, 4), Prob(1, 4)}};
}

double EmpiricalBox::sup_distance(const BipartiteBox& exact) const {
  if (!exact.is_2x2()) throw ValidationError("sup distance needs a 2x2x2x2 box");
  double worst = 0.0;
  for (std::size_t i = 0; i < 16; ++i) {
    worst = std::max(worst, std::abs(table[i] - to_double(exact.table()[i])));
  }
  return worst;
}

EmpiricalBox estimate_box(std::span<const RoundLog> logs) {
  EmpiricalBox est;
  std::array<std::uint64_t, 16> counts{};
  for (const auto& log : logs) {
    if (!is_bit(log.x) || !is_bit(log.y) || !is_bit(log.a) || !is_bit(log.b)) {
      throw ValidationError("round " + std::to_string(log.round_id) +
                            " has a non-binary input or output");
    }
    ++est.trials[static_cast<std::size_t>(2 * log.x + log.y)];
    ++counts[static_cast<std::size_t>(((log.x * 2 + log.y) * 2 + log.a) * 2 + log.b)];
  }
  std::string missing;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      if (est.trials[static_cast<std::size_t>(2 * x + y)] == 0) {
        missing += (missing.empty() ? "" : " ") + std::string("(x=") +
                   std::to_string(x) + ",y=" + std::to_string(y) + ")";
      }
    }
  if (!missing.empty()) {
    throw ValidationError("unsampled input cells: " + missing);
  }
  for (std::size_t i = 0; i < 16; ++i) {
    est.table[i] = static_cast<double>(counts[i]) / static_cast<double>(est.trials[i / 4]);
  }
  return est;
}

AuditVerdict referee_audit(std::span<const RoundLog> logs,
                           const NonlocalEnsemble& ensemble,
                           const AuditOptions& options) {
  AuditVerdict verdict;
  auto fail_round = [&](std::uint64_t id, std::string reason) {
    verdict.rounds_passed = false;
    verdict.round_failures.push_back({id, std::move(reason)});
  };

  // Per member: which (x, y, a, b) are possible, and the Referee's inference
  // for each (y, b) (empty with a reason when the rule does not apply).
  struct MemberFacts {
    bool zero_weight = false;
    std::array<bool, 16> possible{};
    std::array<std::optional<SBox>, 4> inferred{};
    std::string infer_error;
  };
  std::vector<MemberFacts> facts(ensemble.size());
  for (std::size_t id = 0; id < ensemble.size(); ++id) {
    const auto member = ensemble.member(id);
    const auto box = member_box(member);
    auto& f = facts[id];
    f.zero_weight = ensemble.weight(id) == 0;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            f.possible[static_cast<std::size_t>(((x * 2 + y) * 2 + a) * 2 + b)] =
                box.at(x, y, a, b) != 0;
    try {
      for (int y = 0; y < 2; ++y)
        for (int b = 0; b < 2; ++b)
          f.inferred[static_cast<std::size_t>(2 * y + b)] = referee_infer(member, y, b);
    } catch (const ValidationError& err) {
      f.inferred = {};
      f.infer_error = err.what();
    }
  }

  std::array<std::uint64_t, 2> trials{};
  std::array<std::array<std::uint64_t, 4>, 2> counts{};
  for (const auto& log : logs) {
    if (log.member_id >= ensemble.size()) {
      fail_round(log.round_id, "member id out of range");
      continue;
    }
    if (!is_bit(log.x) || !is_bit(log.y) || !is_bit(log.a) || !is_bit(log.b)) {
      fail_round(log.round_id, "non-binary input or output");
      continue;
    }
    const auto& f = facts[log.member_id];
    if (f.zero_weight) {
      fail_round(log.round_id, "member has zero weight");
    }
    if (!f.possible[static_cast<std::size_t>(((log.x * 2 + log.y) * 2 + log.a) * 2 + log.b)]) {
      fail_round(log.round_id, "outcome (a,b) impossible for the recorded member");
    }
    if (log.alice_actual.output(log.x) != log.a) {
      fail_round(log.round_id, "Alice's output contradicts her constituent");
    }
    const auto& inferred = f.inferred[static_cast<std::size_t>(2 * log.y + log.b)];
    if (!inferred) {
      fail_round(log.round_id, "Referee rule undefined: " + f.infer_error);
    } else if (*inferred != log.alice_actual) {
      fail_round(log.round_id, "Referee infers " + to_string(*inferred) +
                                   " but Alice holds " + to_string(log.alice_actual));
    }
    ++trials[static_cast<std::size_t>(log.y)];
    ++counts[static_cast<std::size_t>(log.y)]
            [static_cast<std::size_t>(log.alice_actual.index())];
  }

  std::array<std::array<Prob, 4>, 2> expected{};
  try {
    if (options.target) {
      const auto d = relabeled_triangle_decompositions(*options.target);
      expected = {d.epsilon_weights, d.eta_weights};
    } else {
      for (int y = 0; y < 2; ++y) {
        expected[static_cast<std::size_t>(y)] =
            sbox_weights(posterior_alice_ensemble(ensemble, y).ensemble);
      }
    }
  } catch (const Error& err) {
    verdict.frequencies_passed = false;
    verdict.frequency_error = err.what();
    return verdict;
  }

  std::size_t num_cells = 0;
  for (auto n : trials) num_cells += n > 0 ? 4 : 0;
  if (num_cells == 0) return verdict;
  verdict.per_cell_alpha = options.significance / static_cast<double>(num_cells);
  for (int y = 0; y < 2; ++y) {
    const auto n = trials[static_cast<std::size_t>(y)];
    if (n == 0) continue;
    for (int s = 0; s < 4; ++s) {
      FrequencyCell cell;
      cell.y = y;
      cell.constituent = SBox::from_index(s);
      cell.count = counts[static_cast<std::size_t>(y)][static_cast<std::size_t>(s)];
      cell.trials = n;
      cell.expected = to_double(expected[static_cast<std::size_t>(y)][static_cast<std::size_t>(s)]);
      cell.p_value = binomial_two_sided_p(cell.count, n, cell.expected);
      cell.passed = cell.p_value >= verdict.per_cell_alpha;
      if (!cell.passed) verdict.frequencies_passed = false;
      verdict.cells.push_back(cell);
    }
  }
  return verdict;
}

std::uint64_t round_stream_seed(std::uint64_t seed, std::uint64_t round_id) {
  return splitmix64(seed ^ splitmix64(round_id));
}

SimulationReport summarize(std::span<const RoundLog> logs,
                           const NonlocalEnsemble& ensemble, std::uint64_t seed,
                           const AuditOptions& audit) {
  SimulationReport report;
  report.rounds = logs.size();
  report.rng_seed = seed;
  try {
    report.empirical_joint = estimate_box(logs);
  } catch (const ValidationError&) {
    report.empirical_joint.reset();
  }
  std::array<std::array<std::array<std::uint64_t, 4>, 2>, 2> by_outcome{};
  std::array<std::uint64_t, 2> by_input{};
  for (const auto& log : logs) {
    if (!is_bit(log.y) || !is_bit(log.b)) continue;
    ++by_outcome[log.y][log.b][static_cast<std::size_t>(log.alice_actual.index())];
    ++report.outcome_counts[log.y][log.b];
    ++by_input[log.y];
  }
  for (std::size_t y = 0; y < 2; ++y) {
    for (std::size_t s = 0; s < 4; ++s) {
      std::uint64_t total_s = 0;
      for (std::size_t b = 0; b < 2; ++b) {
        const auto n = report.outcome_counts[y][b];
        report.alice_by_outcome[y][b][s] =
            n ? static_cast<double>(by_outcome[y][b][s]) / static_cast<double>(n) : 0.0;
        total_s += by_outcome[y][b][s];
      }
      report.alice_by_input[y][s] =
          by_input[y] ? static_cast<double>(total_s) / static_cast<double>(by_input[y]) : 0.0;
    }
  }
  report.verdict = referee_audit(logs, ensemble, audit);
  return report;
}

SimulationResult run_protocol(const NonlocalEnsemble& ensemble,
                              const SimulationOptions& options,
                              const AuditOptions& audit) {
  if (options.rounds == 0) throw ValidationError("rounds must be at least 1");
  options.policy.validate();

  std::vector<Prob> member_weights;
  std::vector<MemberModel> models;
  member_weights.reserve(ensemble.size());
  models.reserve(ensemble.size());
  for (std::size_t id = 0; id < ensemble.size(); ++id) {
    member_weights.push_back(ensemble.weight(id));
    models.push_back(make_model(ensemble.member(id)));
  }
  const ExactSampler member_sampler(member_weights);
  const ExactSampler input_sampler(
      std::vector<Prob>(options.policy.weights.begin(), options.policy.weights.end()));

  std::vector<RoundLog> logs(options.rounds);
  const unsigned workers = std::max(1u, options.threads);
  auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t r = begin; r < end; ++r) {
      logs[r] = play_round(options.seed, r, member_sampler, input_sampler, models);
    }
  };
  if (workers == 1 || options.rounds < 2 * workers) {
    run_range(0, options.rounds);
  } else {
    std::vector<std::jthread> pool;
    const std::uint64_t chunk = (options.rounds + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t begin = w * chunk;
      const std::uint64_t end = std::min<std::uint64_t>(options.rounds, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end);
    }
  }

  SimulationResult result;
  result.report = summarize(logs, ensemble, options.seed, audit);
  result.logs = std::move(logs);
  return result;
}

}  // namespace nsbox
