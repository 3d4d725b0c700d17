#include "rmab/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "rmab/errors.hpp"
#include "rmab/rng.hpp"

namespace rmab {

RewardNormalization normalization_for(const std::vector<double>& raw_rewards) {
  const auto [lo, hi] = std::minmax_element(raw_rewards.begin(), raw_rewards.end());
  RewardNormalization norm;
  norm.offset = *lo;
  norm.scale = *hi > *lo ? *hi - *lo : 1.0;
  return norm;
}

namespace {

std::vector<double> uniform_distribution(int n) { return std::vector<double>(n, 1.0 / n); }

// Raw rewards [s][a] to planning rewards and the arm's normalization.
std::pair<std::vector<double>, RewardNormalization> normalize(const std::vector<double>& raw) {
  const RewardNormalization norm = normalization_for(raw);
  std::vector<double> planning(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) planning[k] = std::clamp(norm.to_planning(raw[k]), 0.0, 1.0);
  return {planning, norm};
}

}  // namespace

std::vector<double> birth_death_success_rates(const BirthDeathParams& params) {
  std::vector<double> p;
  for (std::size_t i = 0; i < params.lambdas.size(); ++i) {
    RandomStream rng = RandomStream::child(params.seed, "birth-death-p", i);
    p.push_back(params.p_min + (params.p_max - params.p_min) * rng.uniform01());
  }
  return p;
}

BanditInstance build_birth_death(const BirthDeathParams& params) {
  if (params.lambdas.empty()) throw UsageError("birth-death: at least one class is required");
  for (double l : params.lambdas)
    if (!(l > 0.0)) throw UsageError("birth-death: arrival rates must be positive");
  if (!(params.mu > 0.0)) throw UsageError("birth-death: mu must be positive");
  if (params.num_states < 2) throw UsageError("birth-death: at least two states are required");
  if (!(params.p_min >= 0.0 && params.p_max >= params.p_min)) throw UsageError("birth-death: bad success range");
  if (params.num_arms < 1 || params.horizon < 1) throw UsageError("birth-death: arms and horizon must be positive");
  if (params.num_states * params.p_max > 1.0) {
    std::ostringstream msg;
    msg << "birth-death: reward rate S * p_max = " << params.num_states * params.p_max << " exceeds 1";
    throw UsageError(msg.str());
  }

  const int S = params.num_states;
  const std::vector<double> p = birth_death_success_rates(params);
  std::vector<ArmModel> classes;
  for (std::size_t i = 0; i < params.lambdas.size(); ++i) {
    const double up = params.lambdas[i] / (params.lambdas[i] + params.mu);
    const double down = params.mu / (params.lambdas[i] + params.mu);
    std::vector<double> kernel(static_cast<std::size_t>(S) * 2 * S, 0.0);
    std::vector<double> reward(static_cast<std::size_t>(S) * 2, 0.0);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < 2; ++a) {
        double* row = kernel.data() + (static_cast<std::size_t>(s) * 2 + a) * S;
        row[s < S - 1 ? s + 1 : s] += up;
        row[s > 0 ? s - 1 : s] += down;
      }
      reward[s * 2 + 1] = (s + 1) * p[i];
    }
    classes.emplace_back(static_cast<int>(i), S, 2, std::move(kernel), std::move(reward));
  }

  BanditInstance inst;
  inst.horizon = params.horizon;
  inst.budget = static_cast<int>(std::floor(params.alpha * params.num_arms + 1e-9));
  for (int n = 0; n < params.num_arms; ++n) {
    inst.arms.push_back(classes[n % classes.size()].with_id(n));
    inst.initial_state.push_back(uniform_distribution(S));
  }
  return inst;
}

BanditInstance build_random_multi_action(const RandomMultiActionParams& params) {
  if (params.num_arms < 1 || params.num_states < 1 || params.num_actions < 2 || params.horizon < 1)
    throw UsageError("random-multi-action: need N >= 1, S >= 1, A >= 2, T >= 1");
  if (params.budget < 0 || params.classes < 0) throw UsageError("random-multi-action: budget and classes must be >= 0");
  const int S = params.num_states;
  const int A = params.num_actions;
  const int models = params.classes > 0 ? std::min(params.classes, params.num_arms) : params.num_arms;

  std::vector<ArmModel> base;
  for (int m = 0; m < models; ++m) {
    std::vector<double> kernel(static_cast<std::size_t>(S) * A * S);
    std::vector<double> reward(static_cast<std::size_t>(S) * A, 0.0);
    const std::uint64_t model_key = stream_key(params.seed, "model", m);
    for (int s = 0; s < S; ++s) {
      const std::uint64_t state_key = stream_key(model_key, "state", s);
      for (int a = 0; a < A; ++a) {
        RandomStream rng = RandomStream::child(state_key, "action", a);
        double* row = kernel.data() + (static_cast<std::size_t>(s) * A + a) * S;
        double total = 0.0;
        for (int y = 0; y < S; ++y) total += row[y] = rng.exponential();
        for (int y = 0; y < S; ++y) row[y] /= total;
        const double r = rng.uniform01();
        if (a > 0) reward[s * A + a] = r;
      }
    }
    base.emplace_back(m, S, A, std::move(kernel), std::move(reward));
  }

  BanditInstance inst;
  inst.horizon = params.horizon;
  inst.budget = params.budget;
  for (int n = 0; n < params.num_arms; ++n) {
    inst.arms.push_back(base[n % models].with_id(n));
    inst.initial_state.push_back(uniform_distribution(S));
  }
  return inst;
}

namespace deadline {

int state_index(int d, int b) {
  if (d == 0 && b == 0) return 0;
  if (d < 1 || d > kMaxDeadline || b < 1 || b > kMaxDemand) throw UsageError("deadline: state out of range");
  return 1 + (d - 1) * kMaxDemand + (b - 1);
}

std::pair<int, int> state_of(int index) {
  if (index < 0 || index >= kNumStates) throw UsageError("deadline: state index out of range");
  if (index == 0) return {0, 0};
  return {1 + (index - 1) / kMaxDemand, 1 + (index - 1) % kMaxDemand};
}

double raw_reward(int d, int b, int a) {
  if (b > 0 && d > 1) return 0.5 * a;
  if (b > 0 && d == 1) return 0.5 * a - 0.2 * (b - a) * (b - a);
  return 0.0;
}

}  // namespace deadline

BanditInstance build_deadline(const DeadlineParams& params) {
  if (params.num_arms < 1 || params.capacity < 0 || params.horizon < 1)
    throw UsageError("deadline: need N >= 1, M >= 0, T >= 1");
  using namespace deadline;
  const int S = kNumStates;
  const double arrival = kArrivalProbability / (S - 1);
  std::vector<double> kernel(static_cast<std::size_t>(S) * 2 * S, 0.0);
  std::vector<double> raw(static_cast<std::size_t>(S) * 2, 0.0);
  for (int s = 0; s < S; ++s) {
    const auto [d, b] = state_of(s);
    for (int a = 0; a < 2; ++a) {
      raw[s * 2 + a] = raw_reward(d, b, a);
      double* row = kernel.data() + (static_cast<std::size_t>(s) * 2 + a) * S;
      if (d > 1) {
        // A vehicle whose demand is met leaves an empty spot behind.
        const int left = std::max(0, b - a);
        row[left > 0 ? state_index(d - 1, left) : 0] = 1.0;
      } else {
        for (int y = 1; y < S; ++y) row[y] = arrival;
        row[0] = 1.0 - kArrivalProbability;
      }
    }
  }
  auto [planning, norm] = normalize(raw);
  const ArmModel arm(0, S, 2, std::move(kernel), std::move(planning), {0, 1}, RewardLaw::Deterministic, norm);

  BanditInstance inst;
  inst.horizon = params.horizon;
  inst.budget = params.capacity;
  std::vector<double> init(S, 0.0);
  init[0] = 1.0;
  for (int n = 0; n < params.num_arms; ++n) {
    inst.arms.push_back(arm.with_id(n));
    inst.initial_state.push_back(init);
  }
  return inst;
}

namespace video {

int action_index(int quality, int level) {
  if (quality == 0 && level == 0) return 0;
  if (quality < 1 || quality > 3 || level < 1 || level > 3) throw UsageError("video: action out of range");
  return 1 + (level - 1) * 3 + (quality - 1);
}

std::pair<int, int> action_of(int index) {
  if (index < 0 || index >= kNumActions) throw UsageError("video: action index out of range");
  if (index == 0) return {0, 0};
  return {1 + (index - 1) % 3, 1 + (index - 1) / 3};
}

double success_probability(int quality, int level) { return kSuccess.at(quality).at(level); }

double raw_reward(int buffer, int last_quality, int quality, int level) {
  const double p = success_probability(quality, level);
  return quality * p - (buffer == 0 ? 1.0 : 0.0) - std::abs(quality - last_quality) * p;
}

}  // namespace video

BanditInstance build_video_streaming(const VideoParams& params) {
  if (params.num_arms < 1 || params.total_bandwidth < 0 || params.horizon < 1 || params.buffer_max < 1)
    throw UsageError("video: need N >= 1, bandwidth >= 0, T >= 1, B_max >= 1");
  using namespace video;
  const int S = (params.buffer_max + 1) * 4;
  const int A = kNumActions;
  std::vector<double> kernel(static_cast<std::size_t>(S) * A * S, 0.0);
  std::vector<double> raw(static_cast<std::size_t>(S) * A, 0.0);
  std::vector<int> costs(A);
  for (int a = 0; a < A; ++a) costs[a] = kBandwidth[action_of(a).second];
  for (int s = 0; s < S; ++s) {
    const int buffer = s / 4;
    const int gamma = s % 4;
    const int drained = std::max(0, buffer - 1) * 4 + gamma;
    for (int a = 0; a < A; ++a) {
      const auto [quality, level] = action_of(a);
      const double p = success_probability(quality, level);
      raw[s * A + a] = raw_reward(buffer, gamma, quality, level);
      double* row = kernel.data() + (static_cast<std::size_t>(s) * A + a) * S;
      if (p > 0.0) {
        const int grown = buffer == 0 ? std::min(1, params.buffer_max) : buffer;
        row[grown * 4 + quality] += p;
      }
      row[drained] += 1.0 - p;
    }
  }
  auto [planning, norm] = normalize(raw);
  const ArmModel arm(0, S, A, std::move(kernel), std::move(planning), costs, RewardLaw::Deterministic, norm);

  BanditInstance inst;
  inst.horizon = params.horizon;
  inst.budget = params.total_bandwidth;
  for (int n = 0; n < params.num_arms; ++n) {
    inst.arms.push_back(arm.with_id(n));
    inst.initial_state.push_back(uniform_distribution(S));
  }
  return inst;
}

}  // namespace rmab
