// One line per criterion: "[PASS] n <name>: details" or "[FAIL] ...".
// Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "nsbox/blind_steering.hpp"
#include "nsbox/decomposition.hpp"
#include "nsbox/errors.hpp"
#include "nsbox/simulation.hpp"
#include "nsbox/steering.hpp"
#include "support/oracles.hpp"

using namespace nsbox;
using nsbox::testing::q;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
  void fail(const std::string& why) {
    if (passed) detail = why;
    passed = false;
  }
};

Ensemble sb(std::initializer_list<std::pair<Prob, int>> members) {
  std::vector<Ensemble::Member> out;
  for (const auto& [w, i] : members) out.push_back({w, SBox::from_index(i).to_det()});
  return Ensemble(out);
}

Outcome steering_suite() {
  Outcome out;
  testing::Gen gen(20240601);
  int cases = 0;
  for (; cases < 200; ++cases) {
    const auto target = gen.local_box(gen.uniform_int(1, 3), gen.uniform_int(1, 3));
    const int k = gen.uniform_int(2, 3);
    std::vector<Ensemble> es;
    for (int i = 0; i < k; ++i) es.push_back(gen.decomposition(target));
    const auto state = construct_steering_state(es);
    const auto report = verify_steering_state(state);
    if (!report.all_passed()) {
      for (const auto& c : report.checks)
        if (!c.passed) out.fail("case " + std::to_string(cases) + " " + c.name + ": " + c.witness);
    }
    if (!testing::ns_bruteforce(state.box)) out.fail("case " + std::to_string(cases) + " signals");
    for (int y = 0; y < k; ++y)
      if (!ensembles_equal(steered_ensemble(state, y), es[static_cast<std::size_t>(y)]))
        out.fail("case " + std::to_string(cases) + " round trip differs at y=" + std::to_string(y));
  }
  if (out.passed) out.detail = std::to_string(cases) + " cases, obligations i-iv and round trip exact";
  return out;
}

Outcome pr_emergence() {
  Outcome out;
  const std::vector<Ensemble> es{sb({{q(1, 2), 0}, {q(1, 2), 1}}), sb({{q(1, 2), 2}, {q(1, 2), 3}})};
  const auto state = construct_steering_state(es);
  int matched = 0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          if (state.box.at(x, y, a, b) == testing::pr_entry(0, 0, 0, x, y, a, b)) {
            ++matched;
          } else {
            out.fail("entry x=" + std::to_string(x) + " y=" + std::to_string(y) + " a=" +
                     std::to_string(a) + " b=" + std::to_string(b) + " differs");
          }
        }
  if (out.passed) out.detail = std::to_string(matched) + "/16 entries equal PR000";
  return out;
}

std::vector<TargetState> interior_grid() {
  std::vector<TargetState> grid;
  for (int i = 0; i <= 16; ++i)
    for (int j = 0; j <= 16; ++j)
      if (j > i && i + j < 16) grid.push_back({q(i, 16), q(j, 16)});
  return grid;
}

Outcome blind_grid() {
  Outcome out;
  int blind_points = 0;
  const auto grid = interior_grid();
  for (const auto& t : grid) {
    const std::string at = "(" + to_string(t.s) + "," + to_string(t.t) + ")";
    const auto sol = solve_constraints(t);
    const std::array<Prob, 4> P{q(0), 1 - t.s - t.t, q(0), t.t - t.s};
    const std::array<Prob, 2> Q{2 * t.s, q(0)};
    if (sol.product != P || sol.pr != Q) out.fail("aggregates differ at " + at);
    const auto n = build_nonlocal_ensemble(sol);
    const auto report = verify_blind_steering(n, t);
    if (!report.all_passed()) out.fail("verification fails at " + at);
    const auto d = triangle_decompositions(t);
    const std::array<Prob, 4> eps{t.s, 1 - t.t, q(0), t.t - t.s};
    const std::array<Prob, 4> eta{q(0), 1 - t.s - t.t, t.s, t.t};
    if (d.epsilon_weights != eps || d.eta_weights != eta) out.fail("triangles differ at " + at);
    if (t.s > 0) {
      ++blind_points;
      for (int y = 0; y < 2; ++y)
        for (int b = 0; b < 2; ++b)
          if (bob_posterior(n, y, b).support_size() < 2)
            out.fail("Bob identifies Alice's box at " + at + " y=" + std::to_string(y) +
                     " b=" + std::to_string(b));
    }
  }
  if (out.passed)
    out.detail = std::to_string(grid.size()) + " grid points exact, " + std::to_string(blind_points) +
                 " with s>0 blind for all (y,b)";
  return out;
}

Outcome family_invariance() {
  Outcome out;
  testing::Gen gen(777);
  const PRBox beta0[] = {{0, 0, 0}, {0, 0, 1}, {1, 0, 0}, {1, 0, 1}};
  const auto grid = interior_grid();
  long splits = 0;
  for (const auto& t : grid) {
    const auto sol = solve_constraints(t);
    const auto ref = build_nonlocal_ensemble(sol);
    const auto ref0 = posterior_alice_ensemble(ref, 0).ensemble.canonical();
    const auto ref1 = posterior_alice_ensemble(ref, 1).ensemble.canonical();
    for (int trial = 0; trial < 100; ++trial, ++splits) {
      std::vector<NonlocalEnsemble::ProductMember> products;
      std::vector<NonlocalEnsemble::PRMember> prs;
      for (const int alice : {1, 3}) {
        const auto w = gen.distribution(4, 8);
        for (int k = 0; k < 4; ++k)
          products.push_back({sol.product[static_cast<std::size_t>(alice)] * w[static_cast<std::size_t>(k)],
                              SBox::from_index(alice), SBox::from_index(k)});
      }
      const auto w = gen.distribution(4, 8);
      for (int k = 0; k < 4; ++k) prs.push_back({sol.pr[0] * w[static_cast<std::size_t>(k)], beta0[k]});
      const auto n = build_nonlocal_ensemble(sol, NonlocalEnsemble(products, prs));
      const auto e0 = posterior_alice_ensemble(n, 0).ensemble.canonical();
      const auto e1 = posterior_alice_ensemble(n, 1).ensemble.canonical();
      if (sbox_weights(e0) != sbox_weights(ref0) || sbox_weights(e1) != sbox_weights(ref1))
        out.fail("posterior differs at (" + to_string(t.s) + "," + to_string(t.t) + ")");
    }
  }
  if (out.passed)
    out.detail = std::to_string(splits) + " random splits over " + std::to_string(grid.size()) +
                 " grid points, posteriors identical";
  return out;
}

Outcome decomposition_round_trip() {
  Outcome out;
  testing::Gen gen(4242);
  for (int i = 0; i < 200; ++i) {
    const auto box = mix_nonlocal(gen.nonlocal_ensemble(8));
    const auto d = decompose(box);
    if (mix_nonlocal(d) != box) out.fail("round trip " + std::to_string(i) + " differs");
  }
  // Noisy PR: locate the transition with the facet oracle, then compare.
  Rational transition = -1;
  int agree = 0, total = 0;
  for (int k = 0; k <= 128; ++k) {
    const Rational v(k, 128);
    const auto box = testing::noisy_pr(v);
    const bool oracle = testing::local_by_facet_oracle(box);
    if (!oracle && transition < 0) transition = v;
    ++total;
    if (is_local(box) == oracle) {
      ++agree;
    } else {
      out.fail("is_local disagrees with the facet oracle at v=" + to_string(v));
    }
  }
  // Facet oracle at the last local point is tight: win sum exactly 3.
  const Rational last_local = transition - Rational(1, 128);
  if (testing::chsh_win_sum(testing::noisy_pr(last_local), 0, 0, 0) != 3)
    out.fail("facet not tight at v=" + to_string(last_local));
  if (out.passed)
    out.detail = "200 round trips exact; is_local matches facet oracle at " + std::to_string(agree) + "/" +
                 std::to_string(total) + " values, local up to v=" + to_string(last_local);
  return out;
}

Outcome simulation_statistics() {
  Outcome out;
  const TargetState t{q(1, 4), q(1, 2)};
  const auto n = build_nonlocal_ensemble(solve_constraints(t));
  SimulationOptions opts;
  opts.rounds = 100000;
  opts.seed = 0x5eed2024;
  opts.threads = 4;
  AuditOptions audit;
  audit.target = t;
  const auto first = run_protocol(n, opts, audit);
  const auto d = triangle_decompositions(t);
  double dev = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    dev = std::max(dev, std::abs(first.report.alice_by_input[0][k] - to_double(d.epsilon_weights[k])));
    dev = std::max(dev, std::abs(first.report.alice_by_input[1][k] - to_double(d.eta_weights[k])));
  }
  if (!(dev <= 0.01)) out.fail("sup deviation " + std::to_string(dev));
  if (!first.report.verdict.passed()) out.fail("audit fails on honest run");

  auto corrupted = first.logs;
  corrupted[54321].b ^= 1;
  const auto caught = referee_audit(corrupted, n, audit);
  bool located = !caught.rounds_passed && !caught.round_failures.empty() &&
                 caught.round_failures.front().round_id == 54321;
  if (!located) out.fail("bit flip in round 54321 not detected");

  const auto second = run_protocol(n, opts, audit);
  opts.threads = 1;
  const auto sequential = run_protocol(n, opts, audit);
  if (first.logs != second.logs) out.fail("repeated run differs");
  if (first.logs != sequential.logs) out.fail("sequential run differs");
  if (out.passed) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "sup |freq - exact| = %.4f <= 0.01, audit pass, bit flip caught, logs identical", dev);
    out.detail = buf;
  }
  return out;
}

Outcome region_handling() {
  Outcome out;
  int rejected = 0, relabeled = 0;
  for (int i = 0; i <= 16; ++i)
    for (int j = 0; j <= 16; ++j) {
      const TargetState t{q(i, 16), q(j, 16)};
      if (i + j == 16) {
        try {
          plan_blind_steering(t);
          out.fail("diagonal target accepted");
        } catch (const RegionError&) {
          ++rejected;
        }
        continue;
      }
      const auto plan = plan_blind_steering(t);
      if (!plan.relabeling.is_identity()) ++relabeled;
      // Independent re-verification in the original coordinates.
      if (!verify_blind_steering(plan.ensemble, t).all_passed() ||
          alice_marginal(mix_nonlocal(plan.ensemble)) != t.to_local_box())
        out.fail("relabeled plan fails at (" + to_string(t.s) + "," + to_string(t.t) + ")");
    }
  if (out.passed)
    out.detail = std::to_string(rejected) + " diagonal targets rejected, " + std::to_string(relabeled) +
                 " relabeled targets verified in original coordinates";
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"steering_suite", steering_suite},
      {"pr_emergence", pr_emergence},
      {"blind_steering_grid", blind_grid},
      {"family_invariance", family_invariance},
      {"decomposition_round_trip", decomposition_round_trip},
      {"simulation_statistics", simulation_statistics},
      {"region_handling", region_handling},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome result;
    try {
      result = criteria[i].second();
    } catch (const std::exception& e) {
      result.fail(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %zu %s: %s (%.2fs)\n", result.passed ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), result.detail.c_str(), secs);
    if (!result.passed) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
