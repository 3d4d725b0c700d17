#pragma once

#include <vector>

#include "rmab/lp/program.hpp"
#include "rmab/lp/simplex.hpp"
#include "rmab/model.hpp"

namespace rmab {

struct PlannerOptions {
  /// Merge arms whose models compare equal bit for bit (and that share an
  /// initial distribution) into one block of variables weighted by the class
  /// size. The optimum is unchanged; the program shrinks by the class size.
  bool group_identical_arms = false;
};

/// Where each occupancy variable mu(class, s, a; t) lives in the program.
struct OccupancyLayout {
  int horizon = 0;
  std::vector<int> class_of_arm;
  std::vector<int> representative;  ///< first arm of each class
  std::vector<int> class_size;
  std::vector<ArmShape> class_shape;
  std::vector<int> offset;  ///< first column of each class

  int num_classes() const { return static_cast<int>(representative.size()); }
  int column(int cls, int t, int s, int a) const {
    const ArmShape& sh = class_shape[cls];
    return offset[cls] + (t * sh.num_states + s) * sh.num_actions + a;
  }
};

/// Partition arms into classes of identical (model, initial distribution).
/// Without grouping every arm is its own class.
OccupancyLayout make_layout(const BanditInstance& instance, bool group_identical_arms);

struct RelaxedLp {
  lp::LpProgram program;
  OccupancyLayout layout;
  std::vector<int> budget_rows;   ///< one per t
  std::vector<int> flow_rows;     ///< per class, s and t = 2..T
  std::vector<int> initial_rows;  ///< per class and s
};

/// Occupancy-measure relaxation: maximize expected reward subject to the
/// budget holding in expectation at every step. The basis hint is the
/// all-passive measure, which is always feasible.
RelaxedLp build_relaxed_lp(const BanditInstance& instance, PlannerOptions options = {});

/// mu_n(s, a; t) per arm, zero-based t.
class OccupancySolution {
 public:
  OccupancySolution() = default;
  OccupancySolution(std::vector<ArmShape> shapes, int horizon);

  int num_arms() const { return static_cast<int>(shapes_.size()); }
  int horizon() const { return horizon_; }
  const ArmShape& shape(int n) const { return shapes_[n]; }
  const std::vector<ArmShape>& shapes() const { return shapes_; }

  double mu(int n, int t, int s, int a) const { return mu_[n][index(n, t, s, a)]; }
  double& mu(int n, int t, int s, int a) { return mu_[n][index(n, t, s, a)]; }
  /// Sum over actions: the probability that arm n is in state s at t.
  double marginal(int n, int s, int t) const;

  double objective = 0.0;
  double max_residual = 0.0;
  long iterations = 0;

 private:
  std::size_t index(int n, int t, int s, int a) const {
    const ArmShape& sh = shapes_[n];
    return (static_cast<std::size_t>(t) * sh.num_states + s) * sh.num_actions + a;
  }

  std::vector<ArmShape> shapes_;
  int horizon_ = 0;
  std::vector<std::vector<double>> mu_;
};

/// Solve a relaxed LP and expand class variables back to per-arm measures.
/// Entries in [-1e-8, 0) are clamped to zero; anything more negative, a
/// residual above 1e-6, or a non-optimal status raises InvariantError.
OccupancySolution solve_relaxed_lp(const RelaxedLp& relaxed, const BanditInstance& instance,
                                   const lp::LpSolver& solver = lp::default_solver());

/// Denominator below which a state counts as unreachable.
inline constexpr double kRecoveryEpsilon = 1e-9;

/// chi(s, a; t) = mu(s, a; t) / sum_b mu(s, b; t), passive where the
/// denominator is at most kRecoveryEpsilon.
RandomizedPolicy recover_policy(const OccupancySolution& solution);

/// Optimum of the relaxed LP. Identical arms are grouped.
double relaxed_upper_bound(const BanditInstance& instance, const lp::LpSolver& solver = lp::default_solver());

struct OmrPlan {
  OccupancySolution occupancy;
  RandomizedPolicy policy;  ///< with indices from the planning rewards
};

/// Relaxed LP, policy recovery and index assignment in one call.
OmrPlan plan_omr(const BanditInstance& instance, const lp::LpSolver& solver = lp::default_solver());

}  // namespace rmab
