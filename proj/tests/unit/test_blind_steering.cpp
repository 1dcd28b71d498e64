#include "doctest.h"

#include "nsbox/blind_steering.hpp"
#include "nsbox/errors.hpp"
#include "support/oracles.hpp"

using namespace nsbox;
using nsbox::testing::q;

namespace {

using W = std::array<Prob, 4>;

TargetState st(long sn, long sd, long tn, long td) { return {q(sn, sd), q(tn, td)}; }

NonlocalEnsemble canonical_ensemble(const TargetState& t,
                                    SplitPolicy policy = SplitPolicy::kCanonical) {
  return build_nonlocal_ensemble(solve_constraints(t), policy);
}

// Independent posterior: enumerate members and outcomes with the Referee
// rule, nothing else.
std::array<std::array<W, 2>, 2> posterior_oracle(const NonlocalEnsemble& n) {
  std::array<std::array<W, 2>, 2> out{};
  for (int y = 0; y < 2; ++y) {
    for (const auto& p : n.products()) {
      const int b = p.bob.output(y);
      out[y][b][static_cast<std::size_t>(p.alice.index())] += p.weight;
    }
    for (const auto& p : n.prs()) {
      for (int b = 0; b < 2; ++b) {
        const int beta = (p.box.alpha * y) ^ p.box.delta ^ b;
        out[y][b][static_cast<std::size_t>(2 * y + beta)] += p.weight / 2;
      }
    }
    for (int b = 0; b < 2; ++b) {
      Prob total = 0;
      for (auto& w : out[y][b]) total += w;
      if (total != 0)
        for (auto& w : out[y][b]) w /= total;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("target state") {
  const TargetState t = st(1, 4, 1, 2);
  const auto box = t.to_local_box();
  CHECK(box.at(0, 0) == q(1, 4));
  CHECK(box.at(1, 0) == q(1, 2));
  CHECK(TargetState::from_local_box(box) == t);
  CHECK_THROWS_AS((TargetState{q(5, 4), q(0)}.to_local_box()), ValidationError);
}

TEST_CASE("canonical region") {
  CHECK(in_canonical_region(st(1, 4, 1, 2)));
  CHECK(in_canonical_region(st(0, 1, 0, 1)));
  CHECK(in_canonical_region(st(1, 4, 1, 4)));
  CHECK_FALSE(in_canonical_region(st(1, 2, 1, 4)));
  CHECK_FALSE(in_canonical_region(st(1, 4, 3, 4)));
  CHECK_FALSE(in_canonical_region(st(1, 2, 1, 2)));
}

TEST_CASE("triangle decompositions") {
  const auto a = triangle_decompositions(st(1, 4, 1, 2));
  CHECK(a.epsilon_weights == W{q(1, 4), q(1, 2), q(0), q(1, 4)});
  CHECK(a.eta_weights == W{q(0), q(1, 4), q(1, 4), q(1, 2)});
  CHECK(realizes(a.epsilon, st(1, 4, 1, 2).to_local_box()));
  CHECK(realizes(a.eta, st(1, 4, 1, 2).to_local_box()));
  CHECK(a.warnings.empty());

  const auto b = triangle_decompositions(st(0, 1, 0, 1));
  CHECK(b.epsilon_weights == W{q(0), q(1), q(0), q(0)});
  CHECK(b.eta_weights == W{q(0), q(1), q(0), q(0)});
  CHECK(b.epsilon.canonical().size() == 1);
  CHECK(ensembles_equal(b.epsilon, b.eta));
  CHECK_FALSE(b.warnings.empty());

  const auto c = triangle_decompositions(st(1, 4, 1, 4));
  CHECK(c.epsilon_weights == W{q(1, 4), q(3, 4), q(0), q(0)});
  CHECK(c.eta_weights == W{q(0), q(1, 2), q(1, 4), q(1, 4)});
  CHECK(c.epsilon.canonical().size() == 2);
  REQUIRE_FALSE(c.warnings.empty());
  CHECK(c.warnings.front().find("degenerate") != std::string::npos);

  CHECK_THROWS_AS(triangle_decompositions(st(1, 2, 1, 2)), RegionError);
  CHECK_THROWS_AS(triangle_decompositions(st(3, 4, 1, 2)), RegionError);
  CHECK_THROWS_AS(triangle_decompositions(st(1, 4, 3, 4)), RegionError);
}

TEST_CASE("solve_constraints") {
  const auto a = solve_constraints(st(1, 4, 1, 2));
  CHECK(a.pr == std::array<Prob, 2>{q(1, 2), q(0)});
  CHECK(a.product == W{q(0), q(1, 4), q(0), q(1, 4)});
  CHECK(a.p00_lower == 0);
  CHECK(a.p00_upper == 0);

  const auto b = solve_constraints(st(0, 1, 0, 1));
  CHECK(b.pr == std::array<Prob, 2>{q(0), q(0)});
  CHECK(b.product == W{q(0), q(1), q(0), q(0)});

  const auto c = solve_constraints(st(3, 8, 1, 2));
  CHECK(c.pr[0] == q(3, 4));
  CHECK(c.product[1] == q(1, 8));
  CHECK(c.product[3] == q(1, 8));
  CHECK(c.product[0] + c.product[1] + c.product[2] + c.product[3] + c.pr[0] + c.pr[1] == 1);

  const auto& sys = a.system;
  for (const Rational& p00 : {q(0), q(1, 16), q(1, 8)}) {
    const W P{sys.product[0].at(p00), sys.product[1].at(p00), sys.product[2].at(p00),
              sys.product[3].at(p00)};
    CHECK(P[0] == p00);
    // Both closed-form reductions hold along the whole line.
    const Prob Q0 = sys.pr[0].at(p00), Q1 = sys.pr[1].at(p00);
    CHECK(W{P[0] + Q0 / 2, P[1] + Q0 / 2, P[2] + Q1 / 2, P[3] + Q1 / 2} ==
          W{q(1, 4), q(1, 2), q(0), q(1, 4)});
    CHECK(W{P[0] + Q1 / 2, P[1] + Q1 / 2, P[2] + Q0 / 2, P[3] + Q0 / 2} ==
          W{q(0), q(1, 4), q(1, 4), q(1, 2)});
  }

  CHECK_THROWS_AS(solve_constraints(st(1, 2, 1, 2)), RegionError);
}

TEST_CASE("build_nonlocal_ensemble") {
  const auto a = canonical_ensemble(st(1, 4, 1, 2));
  CHECK(a.catalog_weights()[4 * 1 + 2] == q(1, 4));   // S01 x S10
  CHECK(a.catalog_weights()[4 * 3 + 3] == q(1, 4));   // S11 x S11
  CHECK(a.catalog_weights()[16] == q(1, 2));          // PR000

  const auto fixed = canonical_ensemble(st(1, 4, 1, 2), SplitPolicy::kBobFixedS00);
  CHECK(fixed.catalog_weights()[4 * 1 + 0] == q(1, 4));
  CHECK(fixed.catalog_weights()[4 * 3 + 0] == q(1, 4));
  CHECK(fixed.catalog_weights()[16] == q(1, 2));

  const auto vertex = canonical_ensemble(st(0, 1, 0, 1), SplitPolicy::kBobFixedS00);
  CHECK(vertex.size() == 1);
  CHECK(vertex.catalog_weights()[4] == 1);

  const auto sol = solve_constraints(st(1, 4, 1, 2));
  const NonlocalEnsemble split({{q(1, 4), SBox{0, 1}, SBox{0, 0}}, {q(1, 4), SBox{1, 1}, SBox{0, 0}}},
                               {{q(1, 4), PRBox{0, 0, 0}}, {q(1, 4), PRBox{1, 0, 1}}});
  const auto alt = build_nonlocal_ensemble(sol, split);
  for (int y = 0; y < 2; ++y)
    CHECK(ensembles_equal(posterior_alice_ensemble(alt, y).ensemble,
                          posterior_alice_ensemble(a, y).ensemble));
  CHECK(verify_blind_steering(alt, st(1, 4, 1, 2)).all_passed());

  const NonlocalEnsemble bad_beta({{q(1, 4), SBox{0, 1}, SBox{0, 0}}, {q(1, 4), SBox{1, 1}, SBox{0, 0}}},
                                  {{q(1, 2), PRBox{0, 1, 0}}});
  CHECK_THROWS_AS(build_nonlocal_ensemble(sol, bad_beta), ValidationError);
  const NonlocalEnsemble bad_alice({{q(1, 4), SBox{0, 0}, SBox{0, 0}}, {q(1, 4), SBox{1, 1}, SBox{0, 0}}},
                                   {{q(1, 2), PRBox{0, 0, 0}}});
  CHECK_THROWS_AS(build_nonlocal_ensemble(sol, bad_alice), ValidationError);
  const NonlocalEnsemble bad_aggr({{q(1, 2), SBox{0, 1}, SBox{0, 0}}}, {{q(1, 2), PRBox{0, 0, 0}}});
  CHECK_THROWS_AS(build_nonlocal_ensemble(sol, bad_aggr), ValidationError);
}

TEST_CASE("verify_blind_steering") {
  CHECK(verify_blind_steering(canonical_ensemble(st(1, 4, 1, 2)), st(1, 4, 1, 2)).all_passed());
  CHECK(verify_blind_steering(canonical_ensemble(st(1, 4, 1, 2), SplitPolicy::kBobFixedS00),
                              st(1, 4, 1, 2))
            .all_passed());

  const NonlocalEnsemble beta1({}, {{q(1), PRBox{0, 1, 0}}});
  for (const auto& t : {st(1, 4, 1, 2), st(1, 8, 3, 8), st(1, 16, 1, 8)}) {
    const auto report = verify_blind_steering(beta1, t);
    CHECK_FALSE(report.all_passed());
    const auto* y0 = report.find("y0_reduces_to_epsilon");
    REQUIRE(y0 != nullptr);
    CHECK_FALSE(y0->passed);
    CHECK_FALSE(y0->witness.empty());
  }

  const NonlocalEnsemble vertex({{q(1), SBox{0, 1}, SBox{0, 0}}}, {});
  CHECK(verify_blind_steering(vertex, st(0, 1, 0, 1)).all_passed());

  // Diagonal targets are reported, not thrown.
  const auto diag = verify_blind_steering(vertex, st(1, 2, 1, 2));
  CHECK_FALSE(diag.all_passed());
  CHECK_FALSE(diag.find("target_region")->passed);

  // Wrong target for a valid ensemble fails the marginal check.
  const auto wrong = verify_blind_steering(canonical_ensemble(st(1, 4, 1, 2)), st(1, 8, 1, 2));
  CHECK_FALSE(wrong.find("marginal_matches_target")->passed);
}

TEST_CASE("referee_infer") {
  using MR = NonlocalEnsemble::MemberRef;
  CHECK(referee_infer(MR{NonlocalEnsemble::PRMember{q(1), PRBox{0, 0, 0}}}, 1, 1) == SBox{1, 1});
  for (int y = 0; y < 2; ++y)
    for (int b = 0; b < 2; ++b)
      CHECK(referee_infer(MR{NonlocalEnsemble::ProductMember{q(1), SBox{0, 1}, SBox{0, 0}}}, y, b) ==
            SBox{0, 1});
  CHECK(referee_infer(MR{NonlocalEnsemble::PRMember{q(1), PRBox{1, 0, 1}}}, 1, 0) == SBox{1, 0});
  CHECK_THROWS_AS(referee_infer(MR{NonlocalEnsemble::PRMember{q(1), PRBox{0, 1, 0}}}, 0, 0),
                  ValidationError);

  // Agrees with conditioning the member's own box.
  for (int i = 0; i < 8; ++i) {
    const PRBox pr = PRBox::from_index(i);
    if (pr.beta) continue;
    for (int y = 0; y < 2; ++y)
      for (int b = 0; b < 2; ++b)
        CHECK(SBox::from_local_box(condition_on_bob(BipartiteBox::pr_box(pr), y, b)) ==
              referee_infer(MR{NonlocalEnsemble::PRMember{q(1), pr}}, y, b));
  }
}

TEST_CASE("bob_posterior") {
  const auto fixed = canonical_ensemble(st(1, 4, 1, 2), SplitPolicy::kBobFixedS00);
  const auto p00 = bob_posterior(fixed, 0, 0);
  CHECK(p00.weights == W{q(1, 3), q(1, 3), q(0), q(1, 3)});
  CHECK(p00.support_size() == 3);
  const auto p10 = bob_posterior(fixed, 1, 0);
  CHECK(p10.weights[2] > 0);
  CHECK(p10.weights[1] > 0);
  CHECK(p10.weights[3] > 0);
  // The Bob-fixed split gives b = 1 only from the PR box: Bob knows Alice's box.
  CHECK(bob_posterior(fixed, 0, 1).support_size() == 1);

  const auto canonical = canonical_ensemble(st(1, 4, 1, 2));
  for (int y = 0; y < 2; ++y)
    for (int b = 0; b < 2; ++b) CHECK(bob_posterior(canonical, y, b).support_size() >= 2);

  const auto vertex = canonical_ensemble(st(0, 1, 0, 1));
  for (int y = 0; y < 2; ++y)
    for (int b = 0; b < 2; ++b) {
      const auto outcome = bob_outcome_distribution(mix_nonlocal(vertex), y);
      if (outcome[static_cast<std::size_t>(b)] == 0) {
        CHECK_THROWS_AS(bob_posterior(vertex, y, b), ZeroProbabilityError);
      } else {
        CHECK(bob_posterior(vertex, y, b).weights == W{q(0), q(1), q(0), q(0)});
      }
    }
}

TEST_CASE("bob_posterior matches the enumeration oracle") {
  testing::Gen gen(41);
  for (int trial = 0; trial < 100; ++trial) {
    auto n = gen.nonlocal_ensemble(6);
    bool has_beta1 = false;
    for (const auto& p : n.prs()) has_beta1 |= p.box.beta != 0;
    if (has_beta1) continue;
    const auto oracle = posterior_oracle(n);
    const auto box = mix_nonlocal(n);
    for (int y = 0; y < 2; ++y)
      for (int b = 0; b < 2; ++b) {
        if (bob_outcome_distribution(box, y)[static_cast<std::size_t>(b)] == 0) continue;
        CHECK(bob_posterior(n, y, b).weights == oracle[y][b]);
      }
  }
}

TEST_CASE("interior targets are verified and blind") {
  for (int i = 1; i < 16; ++i)
    for (int j = i + 1; i + j < 16; ++j) {
      const TargetState t{q(i, 16), q(j, 16)};
      const auto n = canonical_ensemble(t);
      CHECK(verify_blind_steering(n, t).all_passed());
      const auto d = triangle_decompositions(t);
      CHECK(d.epsilon_weights[2] == 0);
      CHECK(d.eta_weights[0] == 0);
      for (int y = 0; y < 2; ++y)
        for (int b = 0; b < 2; ++b) CHECK(bob_posterior(n, y, b).support_size() >= 2);
    }
}

TEST_CASE("family invariance over random splits") {
  testing::Gen gen(53);
  for (const auto& t : {st(1, 4, 1, 2), st(1, 8, 5, 8), st(3, 16, 1, 4)}) {
    const auto sol = solve_constraints(t);
    const auto ref0 = posterior_alice_ensemble(canonical_ensemble(t), 0).ensemble;
    const auto ref1 = posterior_alice_ensemble(canonical_ensemble(t), 1).ensemble;
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<NonlocalEnsemble::ProductMember> products;
      std::vector<NonlocalEnsemble::PRMember> prs;
      for (const int alice : {1, 3}) {
        const auto w = gen.distribution(4, 6);
        for (int k = 0; k < 4; ++k)
          products.push_back({sol.product[static_cast<std::size_t>(alice)] * w[static_cast<std::size_t>(k)],
                              SBox::from_index(alice), SBox::from_index(k)});
      }
      const auto w = gen.distribution(4, 6);
      const PRBox beta0[] = {{0, 0, 0}, {0, 0, 1}, {1, 0, 0}, {1, 0, 1}};
      for (int k = 0; k < 4; ++k) prs.push_back({sol.pr[0] * w[static_cast<std::size_t>(k)], beta0[k]});
      const auto n = build_nonlocal_ensemble(sol, NonlocalEnsemble(products, prs));
      CHECK(ensembles_equal(posterior_alice_ensemble(n, 0).ensemble, ref0));
      CHECK(ensembles_equal(posterior_alice_ensemble(n, 1).ensemble, ref1));
      CHECK(verify_blind_steering(n, t).all_passed());
    }
  }
}

TEST_CASE("relabeling") {
  const Relabeling flip{true, false}, swap{false, true};
  CHECK(relabel(st(1, 4, 1, 2), flip) == st(3, 4, 1, 2));
  CHECK(relabel(st(1, 4, 1, 2), swap) == st(1, 2, 1, 4));
  for (int i = 0; i < 4; ++i) {
    const Relabeling r{(i & 1) != 0, (i & 2) != 0};
    for (int k = 0; k < 4; ++k) {
      const SBox s = SBox::from_index(k);
      CHECK(relabel(relabel(s, r), r) == s);
      // Relabeled table equals the table with relabeled inputs/outputs.
      const auto lb = s.to_local_box(), rb = relabel(s, r).to_local_box();
      for (int x = 0; x < 2; ++x)
        for (int a = 0; a < 2; ++a)
          CHECK(rb.at(x ^ static_cast<int>(r.swap_input), a ^ static_cast<int>(r.flip_output)) ==
                lb.at(x, a));
    }
    for (int k = 0; k < 8; ++k) {
      const PRBox p = PRBox::from_index(k);
      CHECK(relabel(relabel(p, r), r) == p);
      const auto pb = BipartiteBox::pr_box(p), rb = BipartiteBox::pr_box(relabel(p, r));
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              CHECK(rb.at(x ^ static_cast<int>(r.swap_input), y, a ^ static_cast<int>(r.flip_output), b) ==
                    pb.at(x, y, a, b));
    }
    const TargetState t = st(1, 8, 3, 8);
    CHECK(relabel(relabel(t, r), r) == t);
  }
  CHECK(relabel(relabel(st(1, 8, 3, 8), flip), swap) == relabel(relabel(st(1, 8, 3, 8), swap), flip));
}

TEST_CASE("canonicalizing relabeling") {
  CHECK(canonicalizing_relabeling(st(1, 4, 1, 2)).is_identity());
  CHECK(canonicalizing_relabeling(st(3, 4, 1, 2)) == Relabeling{true, false});
  CHECK(canonicalizing_relabeling(st(1, 2, 1, 4)) == Relabeling{false, true});
  CHECK(canonicalizing_relabeling(st(3, 4, 7, 8)) == Relabeling{true, true});
  CHECK_THROWS_AS(canonicalizing_relabeling(st(1, 2, 1, 2)), RegionError);
  CHECK_THROWS_AS(canonicalizing_relabeling(st(1, 4, 3, 4)), RegionError);
  CHECK_THROWS_AS(canonicalizing_relabeling(st(0, 1, 1, 1)), RegionError);
  CHECK_THROWS_AS(canonicalizing_relabeling(TargetState{q(3, 2), q(0)}), ValidationError);
}

TEST_CASE("relabeling covariance over the whole grid") {
  for (int i = 0; i <= 16; ++i)
    for (int j = 0; j <= 16; ++j) {
      const TargetState t{q(i, 16), q(j, 16)};
      if (i + j == 16) {
        CHECK_THROWS_AS(plan_blind_steering(t), RegionError);
        continue;
      }
      const auto plan = plan_blind_steering(t);
      CHECK(in_canonical_region(plan.canonical_target));
      CHECK(relabel(plan.canonical_target, plan.relabeling) == t);
      CHECK(plan.report.all_passed());
      CHECK(verify_blind_steering(plan.ensemble, t).all_passed());
      CHECK(alice_marginal(mix_nonlocal(plan.ensemble)) == t.to_local_box());
      CHECK(realizes(plan.decompositions.epsilon, t.to_local_box()));
      CHECK(realizes(plan.decompositions.eta, t.to_local_box()));
    }
}

TEST_CASE("plan with a user split in original coordinates") {
  const TargetState t = st(3, 4, 1, 2);  // flip of (1/4, 1/2)
  const NonlocalEnsemble split({{q(1, 4), SBox{0, 0}, SBox{1, 0}}, {q(1, 4), SBox{1, 0}, SBox{1, 1}}},
                               {{q(1, 4), PRBox{0, 0, 1}}, {q(1, 4), PRBox{1, 0, 0}}});
  const auto plan = plan_blind_steering(t, split);
  CHECK(plan.report.all_passed());
  CHECK(plan.ensemble.catalog_weights() == split.catalog_weights());
}
