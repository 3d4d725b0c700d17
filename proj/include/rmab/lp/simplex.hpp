#pragma once

#include <string>
#include <vector>

#include "rmab/lp/program.hpp"

namespace rmab::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(Status status);

struct SolveResult {
  Status status = Status::IterationLimit;
  double objective = 0.0;
  std::vector<double> x;  ///< structural column values
  long iterations = 0;
  double max_violation = 0.0;
  bool warm_started = false;
};

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  /// Eta-file length that triggers a fresh LU factorization of the basis.
  int refactor_interval = 48;
  /// Consecutive degenerate pivots before pricing switches to Bland's rule.
  int degenerate_switch = 400;
  /// 0 means 20 * (rows + columns) + 1000.
  long max_iterations = 0;
};

/// Solver seam: the planner and learner only talk to this interface so an
/// external LP code can be dropped in.
class LpSolver {
 public:
  virtual ~LpSolver() = default;
  virtual SolveResult solve(const LpProgram& program) const = 0;
};

/// Two-phase primal revised simplex on the standard form A x (+ slack) = b,
/// x >= 0. The basis is held as a sparse LU factorization (SuiteSparse KLU)
/// followed by a product-form eta file that is folded back in every
/// `refactor_interval` pivots. Pricing is Dantzig's rule with a Harris
/// two-pass ratio test; after a long run of degenerate pivots both switch to
/// Bland's rule until the objective moves again, which rules out cycling.
class RevisedSimplex final : public LpSolver {
 public:
  RevisedSimplex() = default;
  explicit RevisedSimplex(SimplexOptions options) : options_(options) {}

  SolveResult solve(const LpProgram& program) const override;
  const SimplexOptions& options() const { return options_; }

 private:
  SimplexOptions options_;
};

const LpSolver& default_solver();

}  // namespace rmab::lp
