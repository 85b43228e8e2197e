#pragma once

// Dense bounded-variable simplex used for branch-and-bound bounds. The
// tableau is kept between calls so that fixing variables can be re-optimized
// from the previous basis with the dual simplex.

#include "brepchain/ilp.hpp"

#include <utility>
#include <vector>

namespace brepchain::lp {

/// maximize c.x subject to rows, with every variable in [0, 1].
struct Problem {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<Constraint> rows;  // terms index the num_vars columns
};

enum class Status { Optimal, Infeasible, IterationLimit };

struct Result {
  Status status = Status::Optimal;
  double objective = 0.0;
  std::vector<double> x;
  long iterations = 0;
};

class Simplex {
 public:
  explicit Simplex(Problem problem);

  /// Two-phase solve from scratch; lo/hi bound the structural columns.
  Result solve(const std::vector<double>& lo, const std::vector<double>& hi);

  /// Fixes structural columns and re-optimizes from the last basis. Falls
  /// back to a cold solve when the last call did not end optimal.
  Result fix(const std::vector<std::pair<int, double>>& fixes);

 private:
  enum class Outcome { Optimal, Infeasible, Limit };

  double& at(int r, int c) { return tab_[static_cast<size_t>(r) * n_ + c]; }
  void compute_reduced();
  void pivot(int pr, int pc);
  Outcome primal(long& iterations, long limit);
  Outcome dual(long& iterations, long limit);
  Result result(long iterations);

  Problem p_;
  int m_ = 0, nv_ = 0, n_ = 0;
  std::vector<double> tab_;
  std::vector<double> lo_, hi_, value_, cost_, reduced_;
  std::vector<int> basis_, row_of_;
  bool warm_ = false;
};

/// Cold solve with every variable in [0, 1].
Result solve(const Problem& problem);

}  // namespace brepchain::lp
