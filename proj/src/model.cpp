#include "rmab/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rmab/errors.hpp"

namespace rmab {

namespace {

constexpr double kStochasticTol = 1e-9;

void check_range(const ArmModel& arm, int s, int a, const char* what) {
  if (s < 0 || s >= arm.num_states() || a < 0 || a >= arm.num_actions()) {
    std::ostringstream os;
    os << what << ": (s=" << s << ", a=" << a << ") out of range for arm " << arm.arm_id()
       << " with " << arm.num_states() << " states and " << arm.num_actions() << " actions";
    throw UsageError(os.str());
  }
}

}  // namespace

ArmModel::ArmModel(int arm_id, int num_states, int num_actions, std::vector<double> transition,
                   std::vector<double> mean_reward, std::vector<int> action_cost, RewardLaw law,
                   RewardNormalization normalization)
    : arm_id_(arm_id),
      num_states_(num_states),
      num_actions_(num_actions),
      transition_(std::move(transition)),
      mean_reward_(std::move(mean_reward)),
      action_cost_(std::move(action_cost)),
      law_(law),
      normalization_(normalization) {
  if (num_states < 1) throw UsageError("ArmModel: need at least one state");
  if (num_actions < 1) throw UsageError("ArmModel: need at least the passive action");
  const auto s = static_cast<std::size_t>(num_states);
  const auto a = static_cast<std::size_t>(num_actions);
  if (transition_.size() != s * a * s) throw UsageError("ArmModel: transition tensor must be S*A*S");
  if (mean_reward_.size() != s * a) throw UsageError("ArmModel: reward matrix must be S*A");
  if (action_cost_.empty()) {
    action_cost_.resize(a);
    for (std::size_t i = 0; i < a; ++i) action_cost_[i] = static_cast<int>(i);
  }
  if (action_cost_.size() != a) throw UsageError("ArmModel: cost vector must have A entries");
  if (!(normalization_.scale > 0.0)) throw UsageError("ArmModel: normalization scale must be positive");
}

int ArmModel::max_cost() const { return *std::max_element(action_cost_.begin(), action_cost_.end()); }

int ArmModel::min_positive_cost() const {
  int best = 0;
  for (int c : action_cost_)
    if (c > 0 && (best == 0 || c < best)) best = c;
  return best;
}

bool ArmModel::same_model(const ArmModel& other) const {
  return num_states_ == other.num_states_ && num_actions_ == other.num_actions_ &&
         transition_ == other.transition_ && mean_reward_ == other.mean_reward_ &&
         action_cost_ == other.action_cost_ && law_ == other.law_ &&
         normalization_ == other.normalization_;
}

ArmModel ArmModel::with_id(int arm_id) const {
  ArmModel copy = *this;
  copy.arm_id_ = arm_id;
  return copy;
}

int BanditInstance::min_positive_cost() const {
  int best = 0;
  for (const auto& arm : arms) {
    int c = arm.min_positive_cost();
    if (c > 0 && (best == 0 || c < best)) best = c;
  }
  return best;
}

std::string Violation::describe() const {
  std::ostringstream os;
  os << (severity == Severity::Error ? "error" : "warning");
  if (arm >= 0) os << " arm " << arm;
  if (state >= 0) os << " s=" << state;
  if (action >= 0) os << " a=" << action;
  os << ": " << check;
  return os.str();
}

std::vector<Violation> validate_instance(const BanditInstance& instance) {
  std::vector<Violation> out;
  auto add = [&out](int arm, int s, int a, std::string check,
                    Violation::Severity sev = Violation::Severity::Error) {
    out.push_back(Violation{arm, s, a, std::move(check), sev});
  };

  if (instance.arms.empty()) add(-1, -1, -1, "instance has no arms");
  if (instance.budget < 0) add(-1, -1, -1, "budget must be nonnegative");
  if (instance.horizon < 1) add(-1, -1, -1, "horizon must be at least 1");
  if (instance.initial_state.size() != instance.arms.size())
    add(-1, -1, -1, "one initial distribution per arm is required");

  for (int n = 0; n < instance.num_arms(); ++n) {
    const ArmModel& arm = instance.arms[n];
    if (arm.cost(0) != 0) add(n, -1, 0, "passive action must cost 0");
    for (int a = 0; a < arm.num_actions(); ++a)
      if (arm.cost(a) < 0) add(n, -1, a, "action cost must be nonnegative");

    for (int s = 0; s < arm.num_states(); ++s) {
      for (int a = 0; a < arm.num_actions(); ++a) {
        double sum = 0.0;
        bool negative = false;
        for (double p : arm.transition_row(s, a)) {
          sum += p;
          negative = negative || p < 0.0 || !std::isfinite(p);
        }
        if (negative) add(n, s, a, "transition probabilities must be finite and nonnegative");
        if (std::abs(sum - 1.0) > kStochasticTol) {
          std::ostringstream os;
          os << "transition row sums to " << sum << ", expected 1";
          add(n, s, a, os.str());
        }
        const double r = arm.mean_reward(s, a);
        if (!(r >= 0.0 && r <= 1.0)) add(n, s, a, "mean reward must lie in [0,1]");
      }
      // Scenario arms carry an affine normalization of penalty-bearing raw
      // rewards; the passive-reward rule applies to native arms only.
      if (arm.normalization().is_identity() && arm.mean_reward(s, 0) != 0.0)
        add(n, s, 0, "passive action must earn zero reward");
    }

    if (n < static_cast<int>(instance.initial_state.size())) {
      const auto& init = instance.initial_state[n];
      if (static_cast<int>(init.size()) != arm.num_states()) {
        add(n, -1, -1, "initial distribution has the wrong length");
      } else {
        double sum = 0.0;
        bool negative = false;
        for (double p : init) {
          sum += p;
          negative = negative || p < 0.0;
        }
        if (negative) add(n, -1, -1, "initial distribution has negative entries");
        if (std::abs(sum - 1.0) > kStochasticTol) add(n, -1, -1, "initial distribution must sum to 1");
      }
    }
  }

  const int min_cost = instance.min_positive_cost();
  if (min_cost > 0 && instance.budget < min_cost)
    add(-1, -1, -1, "budget is below every positive action cost; all policies are passive",
        Violation::Severity::Warning);
  return out;
}

bool is_valid(const BanditInstance& instance) {
  for (const auto& v : validate_instance(instance))
    if (v.severity == Violation::Severity::Error) return false;
  return true;
}

void require_valid(const BanditInstance& instance) {
  std::ostringstream os;
  bool bad = false;
  for (const auto& v : validate_instance(instance)) {
    if (v.severity != Violation::Severity::Error) continue;
    os << (bad ? "; " : "invalid instance: ") << v.describe();
    bad = true;
  }
  if (bad) throw UsageError(os.str());
}

int sample_transition(const ArmModel& arm, int s, int a, RandomStream& rng) {
  check_range(arm, s, a, "sample_transition");
  return static_cast<int>(rng.categorical(arm.transition_row(s, a)));
}

double sample_reward(const ArmModel& arm, int s, int a, RandomStream& rng) {
  check_range(arm, s, a, "sample_reward");
  const double mean = arm.mean_reward(s, a);
  if (arm.reward_law() == RewardLaw::Deterministic) return mean;
  return rng.uniform01() < mean ? 1.0 : 0.0;
}

int sample_initial_state(std::span<const double> distribution, RandomStream& rng) {
  return static_cast<int>(rng.categorical(distribution));
}

std::vector<ArmShape> shapes_of(const BanditInstance& instance) {
  std::vector<ArmShape> shapes;
  shapes.reserve(instance.arms.size());
  for (const auto& arm : instance.arms) shapes.push_back({arm.num_states(), arm.num_actions()});
  return shapes;
}

RandomizedPolicy::RandomizedPolicy(std::vector<ArmShape> shapes, int horizon, bool stationary)
    : shapes_(std::move(shapes)), horizon_(horizon), stationary_(stationary) {
  if (horizon < 1) throw UsageError("RandomizedPolicy: horizon must be positive");
  const std::size_t slices = stationary ? 1 : static_cast<std::size_t>(horizon);
  chi_.reserve(shapes_.size());
  for (const auto& shape : shapes_) {
    std::vector<double> tensor(slices * shape.num_states * shape.num_actions, 0.0);
    for (std::size_t k = 0; k < slices * shape.num_states; ++k) tensor[k * shape.num_actions] = 1.0;
    chi_.push_back(std::move(tensor));
  }
}

std::size_t RandomizedPolicy::slice(int t) const {
  // A stationary policy applies at every t >= 0.
  if (t < 0 || (!stationary_ && t >= horizon_))
    throw UsageError("RandomizedPolicy: time " + std::to_string(t) + " out of range");
  return stationary_ ? 0 : static_cast<std::size_t>(t);
}

std::span<const double> RandomizedPolicy::distribution(int n, int s, int t) const {
  const ArmShape& shape = shapes_.at(n);
  if (s < 0 || s >= shape.num_states) throw UsageError("RandomizedPolicy: state out of range");
  const std::size_t offset = (slice(t) * shape.num_states + s) * shape.num_actions;
  return {chi_[n].data() + offset, static_cast<std::size_t>(shape.num_actions)};
}

std::span<double> RandomizedPolicy::distribution(int n, int s, int t) {
  const ArmShape& shape = shapes_.at(n);
  if (s < 0 || s >= shape.num_states) throw UsageError("RandomizedPolicy: state out of range");
  const std::size_t offset = (slice(t) * shape.num_states + s) * shape.num_actions;
  return {chi_[n].data() + offset, static_cast<std::size_t>(shape.num_actions)};
}

double RandomizedPolicy::index(int n, int s, int t) const {
  if (indices_.empty()) throw UsageError("RandomizedPolicy: indices were not assigned");
  return indices_[n][slice(t) * shapes_[n].num_states + s];
}

void RandomizedPolicy::assign_indices(const std::vector<std::vector<double>>& rewards) {
  if (rewards.size() != shapes_.size()) throw UsageError("assign_indices: one reward table per arm");
  const std::size_t slices = stationary_ ? 1 : static_cast<std::size_t>(horizon_);
  indices_.assign(shapes_.size(), {});
  for (std::size_t n = 0; n < shapes_.size(); ++n) {
    const ArmShape& shape = shapes_[n];
    if (rewards[n].size() != static_cast<std::size_t>(shape.num_states * shape.num_actions))
      throw UsageError("assign_indices: reward table shape mismatch");
    auto& psi = indices_[n];
    psi.assign(slices * shape.num_states, 0.0);
    for (std::size_t k = 0; k < slices; ++k) {
      for (int s = 0; s < shape.num_states; ++s) {
        const double* row = chi_[n].data() + (k * shape.num_states + s) * shape.num_actions;
        double value = 0.0;
        for (int a = 1; a < shape.num_actions; ++a) value += row[a] * rewards[n][s * shape.num_actions + a];
        psi[k * shape.num_states + s] = value;
      }
    }
  }
}

std::vector<Violation> validate_policy(const RandomizedPolicy& policy) {
  std::vector<Violation> out;
  const int slices = policy.stationary() ? 1 : policy.horizon();
  for (int n = 0; n < policy.num_arms(); ++n) {
    const ArmShape& shape = policy.shape(n);
    for (int t = 0; t < slices; ++t) {
      for (int s = 0; s < shape.num_states; ++s) {
        auto row = policy.distribution(n, s, t);
        double sum = 0.0, active = 0.0;
        for (int a = 0; a < shape.num_actions; ++a) {
          if (row[a] < 0.0) out.push_back({n, s, a, "negative action probability at t=" + std::to_string(t)});
          sum += row[a];
          if (a > 0) active += row[a];
        }
        if (std::abs(sum - 1.0) > kStochasticTol)
          out.push_back({n, s, -1, "action distribution at t=" + std::to_string(t) + " sums to " + std::to_string(sum)});
        if (policy.has_indices()) {
          const double psi = policy.index(n, s, t);
          if (psi < 0.0 || psi > active + 1e-12)
            out.push_back({n, s, -1, "index outside [0, active mass] at t=" + std::to_string(t)});
        }
      }
    }
  }
  return out;
}

std::vector<std::vector<double>> reward_tables(const BanditInstance& instance) {
  std::vector<std::vector<double>> tables;
  tables.reserve(instance.arms.size());
  for (const auto& arm : instance.arms) tables.push_back(arm.reward_matrix());
  return tables;
}

std::vector<Violation> validate_run_record(const RunRecord& record, const BanditInstance& instance) {
  std::vector<Violation> out;
  const double n = static_cast<double>(instance.num_arms());
  for (std::size_t t = 0; t < record.spent_budget.size(); ++t) {
    if (record.spent_budget[t] > instance.budget)
      out.push_back({-1, -1, -1, "budget exceeded at t=" + std::to_string(t)});
    if (t < record.actions.size()) {
      int spent = 0;
      for (int k = 0; k < instance.num_arms(); ++k) spent += instance.arms[k].cost(record.actions[t][k]);
      if (spent != record.spent_budget[t])
        out.push_back({-1, -1, -1, "recorded spend disagrees with actions at t=" + std::to_string(t)});
    }
  }
  for (std::size_t t = 0; t < record.rewards.size(); ++t)
    if (record.rewards[t] < 0.0 || record.rewards[t] > n)
      out.push_back({-1, -1, -1, "step reward outside [0, N] at t=" + std::to_string(t)});
  return out;
}

}  // namespace rmab
