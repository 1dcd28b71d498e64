#pragma once

#include <span>
#include <vector>

#include "nsbox/rational.hpp"

namespace nsbox::lp {

/// { w : A w = b, w >= 0 } over the rationals.
struct EqualityProblem {
  std::vector<std::vector<Rational>> matrix;  // rows of A
  std::vector<Rational> rhs;                  // b

  std::size_t num_variables() const {
    return matrix.empty() ? 0 : matrix.front().size();
  }
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

struct Result {
  Status status = Status::kInfeasible;
  std::vector<Rational> point;  // set when status == kOptimal
};

/// Any basic feasible point (two-phase simplex, Bland's rule).
Result find_feasible(const EqualityProblem& problem);

/// Minimizes `objectives[0]`, then `objectives[1]` over the optimal face of
/// the first, and so on. Exact; Bland's rule throughout.
Result minimize_lexicographic(const EqualityProblem& problem,
                              std::span<const std::vector<Rational>> objectives);

/// Lexicographically smallest feasible point: minimize w_0, then w_1, ...
Result lexicographic_min_point(const EqualityProblem& problem);

}  // namespace nsbox::lp
