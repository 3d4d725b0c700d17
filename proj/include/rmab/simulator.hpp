#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rmab/model.hpp"
#include "rmab/omr.hpp"
#include "rmab/planner.hpp"
#include "rmab/rng.hpp"

namespace rmab {

/// Maps the current joint state to a joint action.
class PolicyExecutor {
 public:
  virtual ~PolicyExecutor() = default;
  virtual std::string name() const = 0;
  virtual ActivationDecision decide(const JointState& state, int t, RandomStream& rng) const = 0;
};

/// Budgeted index policy driven by a recovered chi and its indices.
class OmrExecutor final : public PolicyExecutor {
 public:
  /// Throws InvariantError when the policy has unnormalized rows or no indices.
  OmrExecutor(RandomizedPolicy policy, CostTable costs, int budget, std::string name = "omr");
  std::string name() const override { return name_; }
  ActivationDecision decide(const JointState& state, int t, RandomStream& rng) const override;
  const RandomizedPolicy& policy() const { return policy_; }

 private:
  RandomizedPolicy policy_;
  CostTable costs_;
  int budget_;
  std::string name_;
};

/// Myopic baseline: arms in decreasing order of their best immediate reward,
/// each given its highest-reward affordable action (cheapest on ties).
class GreedyExecutor final : public PolicyExecutor {
 public:
  explicit GreedyExecutor(const BanditInstance& instance);
  std::string name() const override { return "greedy"; }
  ActivationDecision decide(const JointState& state, int t, RandomStream& rng) const override;

 private:
  std::vector<std::vector<double>> rewards_;
  CostTable costs_;
  int budget_;
};

/// Arms in uniformly random order, each taking a uniformly random affordable
/// action (passive included).
class RandomExecutor final : public PolicyExecutor {
 public:
  explicit RandomExecutor(const BanditInstance& instance);
  std::string name() const override { return "random"; }
  ActivationDecision decide(const JointState& state, int t, RandomStream& rng) const override;

 private:
  CostTable costs_;
  int budget_;
};

class PassiveExecutor final : public PolicyExecutor {
 public:
  explicit PassiveExecutor(int num_arms) : num_arms_(num_arms) {}
  std::string name() const override { return "passive"; }
  ActivationDecision decide(const JointState& state, int t, RandomStream& rng) const override;

 private:
  int num_arms_;
};

/// Called once per step with the state the decision was taken in.
using StepObserver = std::function<void(int trial, int t, const JointState& state, const ActivationDecision& decision)>;

struct RunOptions {
  int trials = 100;
  std::uint64_t seed = 0;
  /// Step counts at which the cumulative reward is also reported.
  std::vector<int> checkpoints;
  StepObserver observer;
};

struct PolicyRun {
  std::string policy;
  int trials = 0;
  double mean = 0.0;  ///< mean cumulative planning-scale reward
  double stderr = 0.0;
  double raw_mean = 0.0;  ///< same, mapped back through each arm's normalization
  double raw_stderr = 0.0;
  std::vector<double> checkpoint_mean;
  std::vector<double> checkpoint_stderr;
  RunRecord sample;  ///< trajectory of trial 0
  long decisions_checked = 0;
};

struct TrialOutcome {
  double total = 0.0;
  double raw_total = 0.0;
  std::vector<double> checkpoint_totals;
};

/// Throws InvariantError unless the decision is budget feasible and every arm
/// outside the activation set is passive.
void check_decision(const ActivationDecision& decision, const CostTable& costs, int budget);

/// One trajectory of `instance.horizon` steps. Environment draws (initial
/// states, rewards, transitions) come from `env`, policy draws from `policy_rng`.
TrialOutcome simulate_trial(const BanditInstance& instance, const PolicyExecutor& executor, RandomStream& env,
                            RandomStream& policy_rng, const std::vector<int>& checkpoints, RunRecord* record = nullptr,
                            const StepObserver& observer = {}, int trial = 0);

/// Monte-Carlo estimate of the expected cumulative reward. Trial i uses the
/// child streams ("env", i) and ("policy", i) of the seed.
PolicyRun run_policy(const BanditInstance& instance, const PolicyExecutor& executor, const RunOptions& options);

inline constexpr std::uint64_t kDpSizeGuard = 1'000'000;

/// prod_n S_n * T, the table size of the joint backward induction.
std::uint64_t joint_table_size(const BanditInstance& instance);

struct DpResult {
  double value = 0.0;
  std::uint64_t joint_states = 0;
  /// Optimal joint action per (t, joint state), arm 0 the fastest digit.
  std::vector<std::vector<std::vector<int>>> policy;
};

/// Exact finite-horizon optimum over budget-feasible joint actions. Throws
/// SizeGuardError when joint_table_size exceeds `guard`.
DpResult dp_oracle(const BanditInstance& instance, std::uint64_t guard = kDpSizeGuard, bool keep_policy = false);

/// Optimal long-run average reward per step of the joint chain, by relative
/// value iteration on the aperiodic transform tau P + (1 - tau) I.
double average_reward_oracle(const BanditInstance& instance, std::uint64_t guard = kDpSizeGuard);

/// Exact expected cumulative reward of the index policy, by propagating the
/// joint state distribution through exact_action_distribution.
double evaluate_policy_exact(const BanditInstance& instance, const RandomizedPolicy& policy);

/// rho copies of every arm, class-major (arm n*rho + r is copy r of arm n),
/// budget rho * K.
BanditInstance replicate(const BanditInstance& base, int rho);

struct GapReport {
  std::string policy;
  int trials = 0;
  double mean = 0.0;
  double stderr = 0.0;
  double lp_bound = 0.0;
  double gap = 0.0;
  double per_arm_gap = 0.0;
  double per_arm_stderr = 0.0;
  bool has_dp = false;
  double dp_value = 0.0;
  double dp_gap = 0.0;
};

GapReport make_gap_report(const PolicyRun& run, double lp_bound, int num_arms);

/// B_n(s; t) and D_n(s, a; t) for one trajectory of a replicated instance.
struct ClassCounts {
  int rho = 0;
  std::vector<std::vector<std::vector<int>>> in_state;                   ///< [n][t][s]
  std::vector<std::vector<std::vector<std::vector<int>>>> with_action;  ///< [n][t][s][a]
};

struct ScalingRow {
  int rho = 0;
  GapReport report;
  double count_mean = 0.0;  ///< mean over trials of max_{n,s,t} |B/rho - P_n(s;t)|
  double count_stderr = 0.0;
  ClassCounts counts;  ///< trial 0
};

ScalingRow scaling_run(const BanditInstance& base, int rho, int trials, std::uint64_t seed);
std::vector<ScalingRow> scaling_experiment(const BanditInstance& base, const std::vector<int>& rho_list, int trials,
                                           std::uint64_t seed);

/// OMR, greedy and random policies against the LP bound (and the DP optimum
/// when the size guard allows).
std::vector<GapReport> evaluate_baselines(const BanditInstance& instance, int trials, std::uint64_t seed);

struct MeanStderr {
  double mean = 0.0;
  double stderr = 0.0;
};
MeanStderr mean_and_stderr(const std::vector<double>& xs);

}  // namespace rmab
