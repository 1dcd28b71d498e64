#pragma once

#include <array>
#include <cstddef>
#include <variant>
#include <vector>

#include "nsbox/boxes.hpp"
#include "nsbox/rational.hpp"

namespace nsbox {

/// Weighted set {w_j, f_j} of deterministic local boxes.
///
/// Members are kept in the order supplied, including zero-weight entries, so
/// that positional identity (used by the steering construction) survives.
/// canonical() gives the merged set view used for equality.
class Ensemble {
 public:
  struct Member {
    Prob weight;
    DetLocalBox box;
  };

  /// Throws ValidationError on an empty list, negative weights, weights not
  /// summing to one, or members of different shape.
  explicit Ensemble(std::vector<Member> members);

  const std::vector<Member>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  int num_inputs() const { return members_.front().box.num_inputs(); }
  int num_outputs() const { return members_.front().box.num_outputs(); }

  /// Duplicates merged, zero weights dropped, sorted by box.
  Ensemble canonical() const;

  /// Copy padded with zero-weight members up to `size` (no-op if larger).
  Ensemble padded(std::size_t size) const;

 private:
  std::vector<Member> members_;
};

/// p(a|x) = Σ_j w_j p_j(a|x).
LocalBox mix(const Ensemble& ensemble);

/// mix(ensemble) == target exactly. Throws ValidationError on shape mismatch.
bool realizes(const Ensemble& ensemble, const LocalBox& target);

/// Equality as weighted sets, after merging duplicates and dropping zeros.
/// Ensembles of different shape are simply unequal.
bool ensembles_equal(const Ensemble& lhs, const Ensemble& rhs);

/// Weights of a 2x2 ensemble indexed by SBox::index(). Throws ValidationError
/// for other shapes.
std::array<Prob, 4> sbox_weights(const Ensemble& ensemble);

/// Builds a 2x2 ensemble from weights indexed by SBox::index(); zero weights
/// are omitted.
Ensemble ensemble_from_sbox_weights(const std::array<Prob, 4>& weights);

/// Weighted set of 2x2x2x2 bipartite vertices: products S_ij x S_kl and PR
/// boxes. Weights are nonnegative and sum to one exactly.
class NonlocalEnsemble {
 public:
  struct ProductMember {
    Prob weight;
    SBox alice;
    SBox bob;
  };
  struct PRMember {
    Prob weight;
    PRBox box;
  };
  using MemberRef = std::variant<ProductMember, PRMember>;

  NonlocalEnsemble(std::vector<ProductMember> products,
                   std::vector<PRMember> prs);

  const std::vector<ProductMember>& products() const { return products_; }
  const std::vector<PRMember>& prs() const { return prs_; }

  /// Flat member numbering: products first, then PR boxes.
  std::size_t size() const { return products_.size() + prs_.size(); }
  MemberRef member(std::size_t id) const;
  const Prob& weight(std::size_t id) const;

  /// Weights over the 24-vertex catalog (16 products indexed
  /// 4 * alice.index() + bob.index(), then 8 PR boxes by PRBox::index()).
  std::array<Prob, 24> catalog_weights() const;
  static NonlocalEnsemble from_catalog_weights(const std::array<Prob, 24>& w);

  /// P_ij = Σ_kl p_ijkl, indexed by SBox::index().
  std::array<Prob, 4> product_aggregates() const;
  /// Q_beta = Σ_{alpha,delta} q_{alpha beta delta}.
  std::array<Prob, 2> pr_aggregates() const;

 private:
  std::vector<ProductMember> products_;
  std::vector<PRMember> prs_;
};

/// Induced bipartite table of a single member.
BipartiteBox member_box(const NonlocalEnsemble::MemberRef& member);

/// Convex combination of the member tables.
BipartiteBox mix_nonlocal(const NonlocalEnsemble& ensemble);

/// One contribution to Alice's ensemble after Bob inputs y: member
/// `member_id` produced outcome b with probability `weight` (member weight
/// times p(b|y)) and left Alice in `alice`.
struct PosteriorTerm {
  std::size_t member_id;
  int b;
  SBox alice;
  Prob weight;
};

struct PosteriorEnsemble {
  Ensemble ensemble;                  // merged over S boxes
  std::vector<PosteriorTerm> terms;   // unmerged provenance
};

/// Alice's ensemble after Bob's input y, marginalized over b. Computed from
/// condition_on_bob on each member's induced box.
PosteriorEnsemble posterior_alice_ensemble(const NonlocalEnsemble& ensemble,
                                           int y);

/// Closed-form weights of the posterior ensemble, indexed by SBox::index():
/// P_ij + Q_i / 2 for y = 0 and P_ij + Q_{i XOR 1} / 2 for y = 1.
std::array<Prob, 4> posterior_closed_form(const NonlocalEnsemble& ensemble,
                                          int y);

}  // namespace nsbox
