#include "nsbox/exact_simplex.hpp"

#include <optional>

#include "nsbox/errors.hpp"

namespace nsbox::lp {
namespace {

// Dense tableau over [original | artificial | rhs]. Columns can be
// disallowed, which pins them at zero (used for artificials after phase one
// and for restricting to an optimal face).
class Tableau {
 public:
  explicit Tableau(const EqualityProblem& problem)
      : num_vars_(problem.num_variables()) {
    const std::size_t m = problem.matrix.size();
    if (problem.rhs.size() != m) {
      throw ValidationError("LP right-hand side has wrong length");
    }
    num_cols_ = num_vars_ + m;
    rows_.assign(m, std::vector<Rational>(num_cols_ + 1));
    basis_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      if (problem.matrix[i].size() != num_vars_) {
        throw ValidationError("LP matrix rows have different lengths");
      }
      const bool negate = problem.rhs[i] < 0;
      for (std::size_t j = 0; j < num_vars_; ++j) {
        rows_[i][j] = negate ? Rational(-problem.matrix[i][j]) : problem.matrix[i][j];
      }
      rows_[i][num_vars_ + i] = 1;
      rows_[i][num_cols_] = negate ? Rational(-problem.rhs[i]) : problem.rhs[i];
      basis_[i] = num_vars_ + i;
    }
    allowed_.assign(num_cols_, true);
  }

  // Returns false when the system has no nonnegative solution.
  bool phase_one() {
    std::vector<Rational> cost(num_cols_);
    for (std::size_t j = num_vars_; j < num_cols_; ++j) cost[j] = 1;
    if (optimize(cost) != Status::kOptimal) return false;  // cannot happen
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (basis_[i] >= num_vars_ && rows_[i][num_cols_] != 0) return false;
    }
    // Drive zero-level artificials out of the basis; rows where that is
    // impossible are linearly dependent and get dropped.
    std::vector<std::size_t> redundant;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (basis_[i] < num_vars_) continue;
      std::optional<std::size_t> entering;
      for (std::size_t j = 0; j < num_vars_; ++j) {
        if (rows_[i][j] != 0) {
          entering = j;
          break;
        }
      }
      if (entering) {
        pivot(i, *entering);
      } else {
        redundant.push_back(i);
      }
    }
    for (auto it = redundant.rbegin(); it != redundant.rend(); ++it) {
      rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(*it));
      basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(*it));
    }
    for (std::size_t j = num_vars_; j < num_cols_; ++j) allowed_[j] = false;
    return true;
  }

  // Minimizes cost (length num_cols_) over the allowed columns.
  Status optimize(const std::vector<Rational>& cost) {
    while (true) {
      const auto reduced = reduced_costs(cost);
      std::optional<std::size_t> entering;
      for (std::size_t j = 0; j < num_cols_; ++j) {
        if (allowed_[j] && !is_basic(j) && reduced[j] < 0) {
          entering = j;
          break;
        }
      }
      if (!entering) return Status::kOptimal;

      std::optional<std::size_t> leaving;
      Rational best_ratio;
      for (std::size_t i = 0; i < rows_.size(); ++i) {
        const Rational& coeff = rows_[i][*entering];
        if (coeff <= 0) continue;
        Rational ratio = rows_[i][num_cols_] / coeff;
        if (!leaving || ratio < best_ratio ||
            (ratio == best_ratio && basis_[i] < basis_[*leaving])) {
          leaving = i;
          best_ratio = std::move(ratio);
        }
      }
      if (!leaving) return Status::kUnbounded;
      pivot(*leaving, *entering);
    }
  }

  // Pins every nonbasic column with positive reduced cost at zero, leaving
  // exactly the optimal face of `cost`.
  void restrict_to_optimal_face(const std::vector<Rational>& cost) {
    const auto reduced = reduced_costs(cost);
    for (std::size_t j = 0; j < num_cols_; ++j) {
      if (allowed_[j] && !is_basic(j) && reduced[j] > 0) allowed_[j] = false;
    }
  }

  std::vector<Rational> point() const {
    std::vector<Rational> x(num_vars_);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (basis_[i] < num_vars_) x[basis_[i]] = rows_[i][num_cols_];
    }
    return x;
  }

  std::vector<Rational> extend(const std::vector<Rational>& objective) const {
    if (objective.size() != num_vars_) {
      throw ValidationError("LP objective has wrong length");
    }
    std::vector<Rational> cost(num_cols_);
    for (std::size_t j = 0; j < num_vars_; ++j) cost[j] = objective[j];
    return cost;
  }

 private:
  bool is_basic(std::size_t j) const {
    for (auto b : basis_) {
      if (b == j) return true;
    }
    return false;
  }

  std::vector<Rational> reduced_costs(const std::vector<Rational>& cost) const {
    std::vector<Rational> reduced(cost.begin(), cost.end());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const Rational& cb = cost[basis_[i]];
      if (cb == 0) continue;
      for (std::size_t j = 0; j < num_cols_; ++j) {
        if (rows_[i][j] != 0) reduced[j] -= cb * rows_[i][j];
      }
    }
    return reduced;
  }

  void pivot(std::size_t row, std::size_t col) {
    const Rational inv = 1 / rows_[row][col];
    for (auto& v : rows_[row]) {
      if (v != 0) v *= inv;
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i == row || rows_[i][col] == 0) continue;
      const Rational factor = rows_[i][col];
      for (std::size_t j = 0; j <= num_cols_; ++j) {
        if (rows_[row][j] != 0) rows_[i][j] -= factor * rows_[row][j];
      }
    }
    basis_[row] = col;
  }

  std::size_t num_vars_;
  std::size_t num_cols_ = 0;
  std::vector<std::vector<Rational>> rows_;
  std::vector<std::size_t> basis_;
  std::vector<bool> allowed_;
};

}  // namespace

Result find_feasible(const EqualityProblem& problem) {
  Tableau tableau(problem);
  if (!tableau.phase_one()) return {};
  return Result{Status::kOptimal, tableau.point()};
}

Result minimize_lexicographic(const EqualityProblem& problem,
                              std::span<const std::vector<Rational>> objectives) {
  Tableau tableau(problem);
  if (!tableau.phase_one()) return {};
  for (const auto& objective : objectives) {
    const auto cost = tableau.extend(objective);
    const Status status = tableau.optimize(cost);
    if (status != Status::kOptimal) return Result{status, {}};
    tableau.restrict_to_optimal_face(cost);
  }
  return Result{Status::kOptimal, tableau.point()};
}

Result lexicographic_min_point(const EqualityProblem& problem) {
  const std::size_t n = problem.num_variables();
  std::vector<std::vector<Rational>> objectives(n, std::vector<Rational>(n));
  for (std::size_t k = 0; k < n; ++k) objectives[k][k] = 1;
  return minimize_lexicographic(problem, objectives);
}

}  // namespace nsbox::lp
