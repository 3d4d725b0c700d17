#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rmab/rng.hpp"

namespace rmab {

/// Law of the realized reward given its mean.
enum class RewardLaw {
  Bernoulli,      ///< r ~ Ber(mean)
  Deterministic,  ///< r = mean
};

/// Affine map between a scenario's raw reward and the [0,1] planning reward:
/// raw = scale * planning + offset.
struct RewardNormalization {
  double scale = 1.0;
  double offset = 0.0;

  bool is_identity() const { return scale == 1.0 && offset == 0.0; }
  double to_raw(double planning) const { return scale * planning + offset; }
  double to_planning(double raw) const { return (raw - offset) / scale; }
  bool operator==(const RewardNormalization&) const = default;
};

/// One arm: a finite controlled Markov chain with action 0 passive.
///
/// Tensors are stored flat: transition as [s][a][s'], mean reward as [s][a].
/// Shapes are checked at construction; stochasticity and reward ranges are
/// checked by validate_instance so that malformed models can be diagnosed
/// rather than rejected outright.
class ArmModel {
 public:
  ArmModel(int arm_id, int num_states, int num_actions, std::vector<double> transition,
           std::vector<double> mean_reward, std::vector<int> action_cost = {},
           RewardLaw law = RewardLaw::Bernoulli, RewardNormalization normalization = {});

  int arm_id() const { return arm_id_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  double transition(int s, int a, int next) const {
    return transition_[(static_cast<std::size_t>(s) * num_actions_ + a) * num_states_ + next];
  }
  std::span<const double> transition_row(int s, int a) const {
    return {transition_.data() + (static_cast<std::size_t>(s) * num_actions_ + a) * num_states_,
            static_cast<std::size_t>(num_states_)};
  }
  double mean_reward(int s, int a) const {
    return mean_reward_[static_cast<std::size_t>(s) * num_actions_ + a];
  }
  int cost(int a) const { return action_cost_[a]; }
  std::span<const int> action_costs() const { return action_cost_; }
  int max_cost() const;
  /// Smallest strictly positive action cost, or 0 when the arm has none.
  int min_positive_cost() const;

  RewardLaw reward_law() const { return law_; }
  const RewardNormalization& normalization() const { return normalization_; }

  const std::vector<double>& transition_tensor() const { return transition_; }
  const std::vector<double>& reward_matrix() const { return mean_reward_; }

  /// Same dynamics, rewards, costs and reward law, compared bit for bit.
  /// The arm id is ignored.
  bool same_model(const ArmModel& other) const;

  ArmModel with_id(int arm_id) const;

 private:
  int arm_id_;
  int num_states_;
  int num_actions_;
  std::vector<double> transition_;
  std::vector<double> mean_reward_;
  std::vector<int> action_cost_;
  RewardLaw law_;
  RewardNormalization normalization_;
};

struct BanditInstance {
  std::vector<ArmModel> arms;
  int budget = 0;
  int horizon = 0;
  /// Per-arm initial distribution over that arm's states.
  std::vector<std::vector<double>> initial_state;

  int num_arms() const { return static_cast<int>(arms.size()); }
  /// Smallest positive action cost over all arms (0 if every action is free).
  int min_positive_cost() const;
};

using JointState = std::vector<int>;

struct Violation {
  enum class Severity { Error, Warning };

  int arm = -1;     ///< -1 for instance-level checks
  int state = -1;   ///< -1 when not state-specific
  int action = -1;  ///< -1 when not action-specific
  std::string check;
  Severity severity = Severity::Error;

  std::string describe() const;
};

/// Every invariant failure of the instance. Empty iff the instance is valid.
/// A budget below every positive cost is reported with Warning severity.
std::vector<Violation> validate_instance(const BanditInstance& instance);

/// True when validate_instance reports no Error-severity violation.
bool is_valid(const BanditInstance& instance);

/// Throws UsageError listing the violations unless the instance is valid.
void require_valid(const BanditInstance& instance);

/// Draw s' ~ P(s, a, .). Throws UsageError on out-of-range s or a.
int sample_transition(const ArmModel& arm, int s, int a, RandomStream& rng);

/// Draw a reward with mean r(s, a) under the arm's reward law (planning scale).
double sample_reward(const ArmModel& arm, int s, int a, RandomStream& rng);

/// Draw an initial state from a distribution.
int sample_initial_state(std::span<const double> distribution, RandomStream& rng);

/// Per-arm shape used to lay out policy tensors.
struct ArmShape {
  int num_states = 0;
  int num_actions = 0;
  bool operator==(const ArmShape&) const = default;
};

std::vector<ArmShape> shapes_of(const BanditInstance& instance);

/// Markov randomized policy chi_n(s, a; t) with optional index tensor psi_n(s; t).
///
/// Time is zero-based, t in [0, horizon). A stationary policy stores a single
/// slice that is used for every t.
class RandomizedPolicy {
 public:
  RandomizedPolicy() = default;
  RandomizedPolicy(std::vector<ArmShape> shapes, int horizon, bool stationary = false);

  int num_arms() const { return static_cast<int>(shapes_.size()); }
  int horizon() const { return horizon_; }
  bool stationary() const { return stationary_; }
  const ArmShape& shape(int n) const { return shapes_[n]; }

  std::span<const double> distribution(int n, int s, int t) const;
  std::span<double> distribution(int n, int s, int t);
  double chi(int n, int s, int a, int t) const { return distribution(n, s, t)[a]; }

  bool has_indices() const { return !indices_.empty(); }
  double index(int n, int s, int t) const;
  /// Set psi_n(s;t) for every (n, s, t) from per-arm reward tables [s][a].
  void assign_indices(const std::vector<std::vector<double>>& rewards);

 private:
  std::size_t slice(int t) const;

  std::vector<ArmShape> shapes_;
  int horizon_ = 0;
  bool stationary_ = false;
  std::vector<std::vector<double>> chi_;      // per arm [slice][s][a]
  std::vector<std::vector<double>> indices_;  // per arm [slice][s]
};

/// Rows that fail to sum to one (1e-9), negative entries, and index bounds.
std::vector<Violation> validate_policy(const RandomizedPolicy& policy);

/// Per-arm mean reward tables [s][a] on the planning scale.
std::vector<std::vector<double>> reward_tables(const BanditInstance& instance);

struct RunRecord {
  std::vector<JointState> states;
  std::vector<std::vector<int>> actions;
  std::vector<double> rewards;      ///< R(t) on the planning scale
  std::vector<double> raw_rewards;  ///< R(t) mapped back through each arm's normalization
  std::vector<int> spent_budget;
  std::uint64_t seed = 0;
};

std::vector<Violation> validate_run_record(const RunRecord& record, const BanditInstance& instance);

}  // namespace rmab
