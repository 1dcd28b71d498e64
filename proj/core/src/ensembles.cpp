#include "nsbox/ensembles.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "nsbox/errors.hpp"

namespace nsbox {

// ---------------------------------------------------------------- Ensemble

Ensemble::Ensemble(std::vector<Member> members) : members_(std::move(members)) {
  if (members_.empty()) throw ValidationError("ensemble has no members");
  Prob total = 0;
  const int x = members_.front().box.num_inputs();
  const int a = members_.front().box.num_outputs();
  for (const auto& m : members_) {
    if (m.weight < 0) {
      throw ValidationError("ensemble weight " + to_string(m.weight) +
                            " is negative");
    }
    if (m.box.num_inputs() != x || m.box.num_outputs() != a) {
      throw ValidationError("ensemble members have different shapes");
    }
    total += m.weight;
  }
  if (total != 1) {
    throw ValidationError("ensemble weights sum to " + to_string(total) +
                          ", not 1");
  }
}

Ensemble Ensemble::canonical() const {
  std::map<DetLocalBox, Prob> merged;
  for (const auto& m : members_) {
    if (m.weight == 0) continue;
    auto [it, inserted] = merged.try_emplace(m.box, m.weight);
    if (!inserted) it->second += m.weight;
  }
  std::vector<Member> out;
  out.reserve(merged.size());
  for (auto& [box, weight] : merged) out.push_back(Member{weight, box});
  return Ensemble(std::move(out));
}

Ensemble Ensemble::padded(std::size_t size) const {
  auto members = members_;
  const DetLocalBox filler(std::vector<int>(static_cast<std::size_t>(num_inputs()), 0),
                           num_outputs());
  while (members.size() < size) members.push_back(Member{Prob(0), filler});
  return Ensemble(std::move(members));
}

LocalBox mix(const Ensemble& ensemble) {
  const int nx = ensemble.num_inputs();
  const int na = ensemble.num_outputs();
  std::vector<Prob> table(static_cast<std::size_t>(nx * na));
  for (const auto& m : ensemble.members()) {
    for (int x = 0; x < nx; ++x) {
      table[static_cast<std::size_t>(x * na + m.box.output(x))] += m.weight;
    }
  }
  return LocalBox(nx, na, std::move(table));
}

bool realizes(const Ensemble& ensemble, const LocalBox& target) {
  if (ensemble.num_inputs() != target.num_inputs() ||
      ensemble.num_outputs() != target.num_outputs()) {
    throw ValidationError("ensemble and target box have different shapes");
  }
  return mix(ensemble) == target;
}

bool ensembles_equal(const Ensemble& lhs, const Ensemble& rhs) {
  if (lhs.num_inputs() != rhs.num_inputs() ||
      lhs.num_outputs() != rhs.num_outputs()) {
    return false;
  }
  const auto l = lhs.canonical();
  const auto r = rhs.canonical();
  if (l.size() != r.size()) return false;
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (l.members()[i].box != r.members()[i].box ||
        l.members()[i].weight != r.members()[i].weight) {
      return false;
    }
  }
  return true;
}

std::array<Prob, 4> sbox_weights(const Ensemble& ensemble) {
  if (ensemble.num_inputs() != 2 || ensemble.num_outputs() != 2) {
    throw ValidationError("S-box weights need a 2-input 2-output ensemble");
  }
  std::array<Prob, 4> weights{};
  for (const auto& m : ensemble.members()) {
    weights[static_cast<std::size_t>(SBox::from_local_box(m.box.to_local_box()).index())] +=
        m.weight;
  }
  return weights;
}

Ensemble ensemble_from_sbox_weights(const std::array<Prob, 4>& weights) {
  std::vector<Ensemble::Member> members;
  for (int i = 0; i < 4; ++i) {
    if (weights[static_cast<std::size_t>(i)] != 0) {
      members.push_back({weights[static_cast<std::size_t>(i)], SBox::from_index(i).to_det()});
    }
  }
  return Ensemble(std::move(members));
}

// -------------------------------------------------------- NonlocalEnsemble

NonlocalEnsemble::NonlocalEnsemble(std::vector<ProductMember> products,
                                   std::vector<PRMember> prs)
    : products_(std::move(products)), prs_(std::move(prs)) {
  if (products_.empty() && prs_.empty()) {
    throw ValidationError("nonlocal ensemble has no members");
  }
  Prob total = 0;
  auto check = [&](const Prob& w) {
    if (w < 0) {
      throw ValidationError("nonlocal ensemble weight " + to_string(w) +
                            " is negative");
    }
    total += w;
  };
  for (const auto& m : products_) {
    if (m.alice.alpha > 1 || m.alice.beta > 1 || m.bob.alpha > 1 || m.bob.beta > 1) {
      throw ValidationError("S box labels must be bits");
    }
    check(m.weight);
  }
  for (const auto& m : prs_) {
    if (m.box.alpha > 1 || m.box.beta > 1 || m.box.delta > 1) {
      throw ValidationError("PR box labels must be bits");
    }
    check(m.weight);
  }
  if (total != 1) {
    throw ValidationError("nonlocal ensemble weights sum to " + to_string(total) +
                          ", not 1");
  }
}

NonlocalEnsemble::MemberRef NonlocalEnsemble::member(std::size_t id) const {
  if (id < products_.size()) return products_[id];
  if (id < size()) return prs_[id - products_.size()];
  throw ValidationError("member id " + std::to_string(id) + " out of range");
}

const Prob& NonlocalEnsemble::weight(std::size_t id) const {
  if (id < products_.size()) return products_[id].weight;
  if (id < size()) return prs_[id - products_.size()].weight;
  throw ValidationError("member id " + std::to_string(id) + " out of range");
}

std::array<Prob, 24> NonlocalEnsemble::catalog_weights() const {
  std::array<Prob, 24> w{};
  for (const auto& m : products_) {
    w[static_cast<std::size_t>(4 * m.alice.index() + m.bob.index())] += m.weight;
  }
  for (const auto& m : prs_) w[static_cast<std::size_t>(16 + m.box.index())] += m.weight;
  return w;
}

NonlocalEnsemble NonlocalEnsemble::from_catalog_weights(const std::array<Prob, 24>& w) {
  std::vector<ProductMember> products;
  std::vector<PRMember> prs;
  for (int i = 0; i < 16; ++i) {
    if (w[static_cast<std::size_t>(i)] != 0) {
      products.push_back({w[static_cast<std::size_t>(i)], SBox::from_index(i / 4),
                          SBox::from_index(i % 4)});
    }
  }
  for (int i = 0; i < 8; ++i) {
    if (w[static_cast<std::size_t>(16 + i)] != 0) {
      prs.push_back({w[static_cast<std::size_t>(16 + i)], PRBox::from_index(i)});
    }
  }
  return NonlocalEnsemble(std::move(products), std::move(prs));
}

std::array<Prob, 4> NonlocalEnsemble::product_aggregates() const {
  std::array<Prob, 4> agg{};
  for (const auto& m : products_) agg[static_cast<std::size_t>(m.alice.index())] += m.weight;
  return agg;
}

std::array<Prob, 2> NonlocalEnsemble::pr_aggregates() const {
  std::array<Prob, 2> agg{};
  for (const auto& m : prs_) agg[m.box.beta] += m.weight;
  return agg;
}

BipartiteBox member_box(const NonlocalEnsemble::MemberRef& member) {
  return std::visit(
      [](const auto& m) -> BipartiteBox {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NonlocalEnsemble::ProductMember>) {
          return BipartiteBox::product(m.alice, m.bob);
        } else {
          return BipartiteBox::pr_box(m.box);
        }
      },
      member);
}

BipartiteBox mix_nonlocal(const NonlocalEnsemble& ensemble) {
  std::vector<Prob> table(16);
  for (std::size_t id = 0; id < ensemble.size(); ++id) {
    const Prob& w = ensemble.weight(id);
    if (w == 0) continue;
    const auto box = member_box(ensemble.member(id));
    for (std::size_t i = 0; i < 16; ++i) table[i] += w * box.table()[i];
  }
  return BipartiteBox(2, 2, 2, 2, std::move(table));
}

PosteriorEnsemble posterior_alice_ensemble(const NonlocalEnsemble& ensemble,
                                           int y) {
  if (y != 0 && y != 1) throw ValidationError("Bob input must be 0 or 1");
  std::vector<PosteriorTerm> terms;
  std::array<Prob, 4> merged{};
  for (std::size_t id = 0; id < ensemble.size(); ++id) {
    const Prob& w = ensemble.weight(id);
    if (w == 0) continue;
    const auto box = member_box(ensemble.member(id));
    const auto pb = bob_outcome_distribution(box, y);
    for (int b = 0; b < 2; ++b) {
      if (pb[static_cast<std::size_t>(b)] == 0) continue;
      const SBox alice = SBox::from_local_box(condition_on_bob(box, y, b));
      Prob term_weight = w * pb[static_cast<std::size_t>(b)];
      merged[static_cast<std::size_t>(alice.index())] += term_weight;
      terms.push_back(PosteriorTerm{id, b, alice, std::move(term_weight)});
    }
  }
  return PosteriorEnsemble{ensemble_from_sbox_weights(merged), std::move(terms)};
}

std::array<Prob, 4> posterior_closed_form(const NonlocalEnsemble& ensemble,
                                          int y) {
  if (y != 0 && y != 1) throw ValidationError("Bob input must be 0 or 1");
  const auto p = ensemble.product_aggregates();
  const auto q = ensemble.pr_aggregates();
  std::array<Prob, 4> w{};
  for (int i = 0; i < 2; ++i) {
    const Prob& qi = q[static_cast<std::size_t>(y == 0 ? i : i ^ 1)];
    for (int j = 0; j < 2; ++j) {
      const auto k = static_cast<std::size_t>(2 * i + j);
      w[k] = p[k] + qi / 2;
    }
  }
  return w;
}

}  // namespace nsbox
