#include "rmab/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rmab/errors.hpp"

namespace rmab {

OccupancyLayout make_layout(const BanditInstance& instance, bool group_identical_arms) {
  OccupancyLayout layout;
  layout.horizon = instance.horizon;
  const int n_arms = instance.num_arms();
  layout.class_of_arm.assign(n_arms, -1);
  int next_col = 0;
  for (int n = 0; n < n_arms; ++n) {
    int cls = -1;
    if (group_identical_arms) {
      for (int c = 0; c < layout.num_classes(); ++c) {
        const int r = layout.representative[c];
        if (instance.arms[r].same_model(instance.arms[n]) && instance.initial_state[r] == instance.initial_state[n]) {
          cls = c;
          break;
        }
      }
    }
    if (cls < 0) {
      cls = layout.num_classes();
      const ArmModel& arm = instance.arms[n];
      layout.representative.push_back(n);
      layout.class_size.push_back(0);
      layout.class_shape.push_back({arm.num_states(), arm.num_actions()});
      layout.offset.push_back(next_col);
      next_col += arm.num_states() * arm.num_actions() * instance.horizon;
    }
    layout.class_of_arm[n] = cls;
    ++layout.class_size[cls];
  }
  return layout;
}

RelaxedLp build_relaxed_lp(const BanditInstance& instance, PlannerOptions options) {
  require_valid(instance);
  RelaxedLp out;
  out.layout = make_layout(instance, options.group_identical_arms);
  const OccupancyLayout& layout = out.layout;
  const int horizon = instance.horizon;
  lp::LpProgram& prog = out.program;

  for (int c = 0; c < layout.num_classes(); ++c) {
    const ArmModel& arm = instance.arms[layout.representative[c]];
    const double weight = layout.class_size[c];
    for (int t = 0; t < horizon; ++t)
      for (int s = 0; s < arm.num_states(); ++s)
        for (int a = 0; a < arm.num_actions(); ++a) prog.add_col(weight * arm.mean_reward(s, a));
  }

  for (int t = 0; t < horizon; ++t) {
    const int row = prog.add_row(lp::Sense::LessEqual, instance.budget);
    out.budget_rows.push_back(row);
    for (int c = 0; c < layout.num_classes(); ++c) {
      const ArmModel& arm = instance.arms[layout.representative[c]];
      const double weight = layout.class_size[c];
      for (int s = 0; s < arm.num_states(); ++s)
        for (int a = 0; a < arm.num_actions(); ++a) prog.add_entry(row, layout.column(c, t, s, a), weight * arm.cost(a));
    }
  }

  for (int c = 0; c < layout.num_classes(); ++c) {
    const int rep = layout.representative[c];
    const ArmModel& arm = instance.arms[rep];
    const int S = arm.num_states();
    const int A = arm.num_actions();
    for (int s = 0; s < S; ++s) {
      const int row = prog.add_row(lp::Sense::Equal, instance.initial_state[rep][s]);
      out.initial_rows.push_back(row);
      for (int a = 0; a < A; ++a) prog.add_entry(row, layout.column(c, 0, s, a), 1.0);
    }
    for (int t = 1; t < horizon; ++t) {
      for (int s = 0; s < S; ++s) {
        const int row = prog.add_row(lp::Sense::Equal, 0.0);
        out.flow_rows.push_back(row);
        for (int a = 0; a < A; ++a) prog.add_entry(row, layout.column(c, t, s, a), 1.0);
        for (int y = 0; y < S; ++y)
          for (int a = 0; a < A; ++a) prog.add_entry(row, layout.column(c, t - 1, y, a), -arm.transition(y, a, s));
      }
    }
  }

  // Basis of the budget-free optimal policy: one column per (t, s), budget
  // slacks basic. It is block triangular, and its duals are the backward
  // values, so every reduced cost is optimal and only budget rows can be
  // violated. The solver starts the dual simplex from it.
  for (int c = 0; c < layout.num_classes(); ++c) {
    const ArmModel& arm = instance.arms[layout.representative[c]];
    const double weight = layout.class_size[c];
    const int S = arm.num_states();
    const int A = arm.num_actions();
    std::vector<int> best(static_cast<std::size_t>(horizon) * S, 0);
    std::vector<double> value(S, 0.0), next(S, 0.0);
    for (int t = horizon - 1; t >= 0; --t) {
      for (int s = 0; s < S; ++s) {
        double top = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < A; ++a) {
          double q = weight * arm.mean_reward(s, a);
          for (int y = 0; y < S; ++y) q += arm.transition(s, a, y) * next[y];
          if (q > top) {
            top = q;
            best[t * S + s] = a;
          }
        }
        value[s] = top;
      }
      std::swap(value, next);
    }
    for (int t = 0; t < horizon; ++t)
      for (int s = 0; s < S; ++s) prog.basis_hint.push_back(layout.column(c, t, s, best[t * S + s]));
  }
  return out;
}

OccupancySolution::OccupancySolution(std::vector<ArmShape> shapes, int horizon)
    : shapes_(std::move(shapes)), horizon_(horizon) {
  mu_.resize(shapes_.size());
  for (std::size_t n = 0; n < shapes_.size(); ++n)
    mu_[n].assign(static_cast<std::size_t>(horizon) * shapes_[n].num_states * shapes_[n].num_actions, 0.0);
}

double OccupancySolution::marginal(int n, int s, int t) const {
  double total = 0.0;
  for (int a = 0; a < shapes_[n].num_actions; ++a) total += mu(n, t, s, a);
  return total;
}

OccupancySolution solve_relaxed_lp(const RelaxedLp& relaxed, const BanditInstance& instance,
                                   const lp::LpSolver& solver) {
  const lp::SolveResult res = solver.solve(relaxed.program);
  if (res.status == lp::Status::IterationLimit) throw SolverError("relaxed LP: iteration limit reached");
  if (res.status != lp::Status::Optimal)
    throw InvariantError("relaxed LP reported " + lp::to_string(res.status) + " for a valid instance");
  if (res.max_violation > 1e-6) {
    std::ostringstream msg;
    msg << "relaxed LP residual " << res.max_violation << " exceeds 1e-6";
    throw InvariantError(msg.str());
  }

  const OccupancyLayout& layout = relaxed.layout;
  OccupancySolution sol(shapes_of(instance), instance.horizon);
  sol.objective = res.objective;
  sol.max_residual = res.max_violation;
  sol.iterations = res.iterations;
  for (int n = 0; n < instance.num_arms(); ++n) {
    const int c = layout.class_of_arm[n];
    const ArmShape& sh = layout.class_shape[c];
    for (int t = 0; t < instance.horizon; ++t)
      for (int s = 0; s < sh.num_states; ++s)
        for (int a = 0; a < sh.num_actions; ++a) {
          double v = res.x[layout.column(c, t, s, a)];
          if (v < -1e-8) throw InvariantError("relaxed LP returned a negative occupancy entry");
          sol.mu(n, t, s, a) = std::max(0.0, v);
        }
  }
  return sol;
}

RandomizedPolicy recover_policy(const OccupancySolution& solution) {
  RandomizedPolicy policy(solution.shapes(), solution.horizon());
  for (int n = 0; n < solution.num_arms(); ++n) {
    const ArmShape& sh = solution.shape(n);
    for (int t = 0; t < solution.horizon(); ++t)
      for (int s = 0; s < sh.num_states; ++s) {
        auto row = policy.distribution(n, s, t);
        const double denom = solution.marginal(n, s, t);
        if (denom > kRecoveryEpsilon) {
          for (int a = 0; a < sh.num_actions; ++a) row[a] = solution.mu(n, t, s, a) / denom;
        } else {
          std::fill(row.begin(), row.end(), 0.0);
          row[0] = 1.0;
        }
      }
  }
  return policy;
}

double relaxed_upper_bound(const BanditInstance& instance, const lp::LpSolver& solver) {
  const RelaxedLp relaxed = build_relaxed_lp(instance, {.group_identical_arms = true});
  return solve_relaxed_lp(relaxed, instance, solver).objective;
}

OmrPlan plan_omr(const BanditInstance& instance, const lp::LpSolver& solver) {
  const RelaxedLp relaxed = build_relaxed_lp(instance, {.group_identical_arms = true});
  OmrPlan plan;
  plan.occupancy = solve_relaxed_lp(relaxed, instance, solver);
  plan.policy = recover_policy(plan.occupancy);
  plan.policy.assign_indices(reward_tables(instance));
  return plan;
}

}  // namespace rmab
