#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmab/lp/program.hpp"
#include "rmab/lp/simplex.hpp"
#include "rmab/model.hpp"

namespace rmab {

/// Per-arm sample counts and the estimates built from them.
struct EmpiricalModel {
  std::vector<ArmShape> shapes;
  int samples_per_pair = 0;  ///< Lambda; 0 for an injected model
  double eta = 0.0;
  double delta = 0.0;         ///< shared confidence radius
  long planning_steps = 0;    ///< T1 = max_n S_n A_n * Lambda
  std::vector<std::vector<std::int64_t>> counts;  ///< per arm [s][a][s']
  std::vector<std::vector<double>> p_hat;          ///< per arm [s][a][s']
  std::vector<std::vector<double>> r_hat;          ///< per arm [s][a]

  double transition(int n, int s, int a, int y) const {
    const ArmShape& sh = shapes[n];
    return p_hat[n][(static_cast<std::size_t>(s) * sh.num_actions + a) * sh.num_states + y];
  }
  double reward(int n, int s, int a) const { return r_hat[n][static_cast<std::size_t>(s) * shapes[n].num_actions + a]; }
  /// r_hat + delta, capped at 1.
  double optimistic_reward(int n, int s, int a) const;
  /// Per-arm optimistic reward tables [s][a].
  std::vector<std::vector<double>> optimistic_rewards() const;

  /// The true model with delta = 0.
  static EmpiricalModel from_true_model(const BanditInstance& instance);
};

/// Lambda(T) = ceil(sqrt(T)).
int samples_per_pair(long total_horizon);

/// sqrt(log(sum_n S_n A_n * Lambda / eta) / (2 Lambda)).
double confidence_radius(std::int64_t state_action_pairs, int lambda, double eta);

/// Query every (arm, state, action) exactly `lambda` times. The pair (n, s, a)
/// draws from its own child stream of `seed`.
EmpiricalModel generative_sample(const BanditInstance& instance, int lambda, double eta, std::uint64_t seed);

struct ExtendedLpOptions {
  /// Single time slice with stationary flow balance and unit mass, for long
  /// execution horizons. The objective is then a per-step rate.
  bool stationary = false;
  /// Leave out band rows whose endpoint is 0 (lower) or 1 (upper); they can
  /// never bind.
  bool skip_vacuous_bands = false;
};

/// Column layout of z_n(s, a, s'; t).
struct ExtendedLayout {
  int slices = 0;
  std::vector<ArmShape> shapes;
  std::vector<int> offset;

  int column(int n, int t, int s, int a, int y) const {
    const ArmShape& sh = shapes[n];
    return offset[n] + ((t * sh.num_states + s) * sh.num_actions + a) * sh.num_states + y;
  }
};

struct ExtendedLp {
  lp::LpProgram program;
  ExtendedLayout layout;
  bool stationary = false;
  std::vector<int> budget_rows;
  std::vector<int> flow_rows;
  std::vector<int> initial_rows;  ///< initial distribution rows, or unit-mass rows when stationary
  std::vector<int> band_rows;
};

/// Optimistic planning program over the confidence bands of `model`. Costs,
/// budget and initial distribution come from `instance`.
ExtendedLp build_extended_lp(const EmpiricalModel& model, const BanditInstance& instance, int horizon,
                             ExtendedLpOptions options = {});

struct ExtendedOccupancy {
  ExtendedLayout layout;
  bool stationary = false;
  std::vector<double> z;
  double objective = 0.0;
  double max_residual = 0.0;

  double at(int n, int t, int s, int a, int y) const { return z[layout.column(n, t, s, a, y)]; }
};

ExtendedOccupancy solve_extended_lp(const ExtendedLp& program, const lp::LpSolver& solver = lp::default_solver());

/// chi(s, a; t) = sum_y z(s, a, y; t) / sum_{b, y} z(s, b, y; t); passive
/// where the denominator is at most 1e-9.
RandomizedPolicy recover_learned_policy(const ExtendedOccupancy& occupancy);

struct LearnedPlan {
  ExtendedOccupancy occupancy;
  RandomizedPolicy policy;  ///< indices from the optimistic rewards
};

/// Extended LP, recovery and index assignment for a given model.
LearnedPlan plan_from_model(const EmpiricalModel& model, const BanditInstance& instance, int horizon,
                            ExtendedLpOptions options = {});

enum class RegretOracle {
  Auto,           ///< average-reward DP when the joint chain is small, else LP rate
  AverageReward,  ///< exact optimal average reward of the joint chain
  LpRate,         ///< per-step optimum of the stationary true-model relaxation
};

std::string to_string(RegretOracle oracle);

/// Optimum of the stationary relaxation of the true model: an upper bound on
/// the optimal average reward.
double stationary_lp_rate(const BanditInstance& instance);

struct LearnOptions {
  long horizon = 0;  ///< total horizon T
  double eta = 0.1;
  int lambda_override = 0;  ///< 0 means ceil(sqrt(T))
  int trials = 100;
  std::uint64_t seed = 0;
  RegretOracle oracle = RegretOracle::Auto;
  /// Execution phases longer than this use the stationary extended LP.
  int max_lp_horizon = 256;
  /// Number of evenly spaced points in the reported regret series.
  int series_points = 20;
};

struct RegretPoint {
  long t = 0;
  double cumulative_regret = 0.0;
  double stderr = 0.0;
};

struct LearnResult {
  int lambda = 0;
  double delta = 0.0;
  long planning_steps = 0;   ///< T1
  long execution_steps = 0;  ///< T2
  bool stationary_plan = false;
  RegretOracle oracle = RegretOracle::Auto;  ///< resolved oracle
  double oracle_rate = 0.0;  ///< per-step oracle reward
  double mean_optimistic_objective = 0.0;
  double mean_reward = 0.0;  ///< mean cumulative reward over the whole horizon
  double reward_stderr = 0.0;
  std::vector<RegretPoint> series;
  long decisions_checked = 0;
};

/// Smallest T with T1 = max_n S_n A_n * ceil(sqrt(T)) < T.
long minimum_learning_horizon(const BanditInstance& instance);

/// Sample every pair Lambda times (no reward is credited for those T1 steps),
/// plan on the optimistic extended LP for the remaining T2 = T - T1 steps and
/// execute the index policy. Regret is T * oracle_rate minus the realized
/// cumulative reward. Throws ConfigError("horizon", ...) when T <= T1.
LearnResult run_learning(const BanditInstance& instance, const LearnOptions& options);

}  // namespace rmab
