#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rmab/model.hpp"

namespace rmab {

struct BirthDeathParams {
  std::vector<double> lambdas = {3, 6, 9, 12, 15, 18, 21, 24, 27, 30};
  double mu = 20.0;
  double p_min = 0.01;
  double p_max = 0.1;
  int num_states = 10;
  double alpha = 0.3;
  int num_arms = 100;
  int horizon = 100;
  std::uint64_t seed = 0;
};

/// Arms are assigned to classes round robin. States 0..S-1 stand for the
/// levels 1..S; level s moves up with probability lambda/(lambda+mu) and down
/// otherwise, the blocked move at either end becoming a self loop. Both
/// actions share the kernel; activation earns Bernoulli(level * p_class).
/// Budget K = floor(alpha * N). Initial state uniform.
BanditInstance build_birth_death(const BirthDeathParams& params);

/// One draw of p per class, uniform on [p_min, p_max].
std::vector<double> birth_death_success_rates(const BirthDeathParams& params);

struct RandomMultiActionParams {
  int num_arms = 10;
  int num_states = 5;
  int num_actions = 3;  ///< including the passive action
  int horizon = 20;
  int budget = 3;
  /// When positive, arm n copies the model of class n mod classes.
  int classes = 0;
  std::uint64_t seed = 0;
};

/// Kernel rows from a flat Dirichlet, active mean rewards uniform on [0, 1],
/// passive reward 0, costs c[a] = a. Every (model, s, a) triple has its own
/// stream, so an instance with fewer actions is a restriction of one with more.
BanditInstance build_random_multi_action(const RandomMultiActionParams& params);

/// Deadline scheduling: 109 states, the empty spot (0,0) plus (D, B) for
/// D in 1..12 and B in 1..9.
namespace deadline {
inline constexpr int kMaxDeadline = 12;
inline constexpr int kMaxDemand = 9;
inline constexpr int kNumStates = 1 + kMaxDeadline * kMaxDemand;
inline constexpr double kArrivalProbability = 0.7;

int state_index(int d, int b);
std::pair<int, int> state_of(int index);  ///< (D, B)
double raw_reward(int d, int b, int a);
}  // namespace deadline

struct DeadlineParams {
  int num_arms = 100;
  int capacity = 30;  ///< M, the per-step charging budget
  int horizon = 100;
  std::uint64_t seed = 0;
};

/// Rewards are deterministic and normalized into [0, 1] per arm.
BanditInstance build_deadline(const DeadlineParams& params);

/// Wireless video streaming: state (B, Gamma) with index B * 4 + Gamma;
/// action 0 is passive and action 1 + 3 (W - 1) + (R - 1) sends quality R
/// with resource level W.
namespace video {
inline constexpr std::array<int, 4> kBandwidth = {0, 1, 3, 5};
/// Success probability by [R][W]; row and column 0 are the passive action.
inline constexpr std::array<std::array<double, 4>, 4> kSuccess = {{
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 1.0, 1.0, 1.0},
    {0.0, 0.293, 0.57, 1.0},
    {0.0, 0.01, 0.01, 0.6},
}};
inline constexpr int kNumActions = 10;

int action_index(int quality, int level);
std::pair<int, int> action_of(int index);  ///< (R, W); (0, 0) for passive
double success_probability(int quality, int level);
double raw_reward(int buffer, int last_quality, int quality, int level);
}  // namespace video

struct VideoParams {
  int num_arms = 10;
  int total_bandwidth = 15;
  int horizon = 100;
  int buffer_max = 10;
  std::uint64_t seed = 0;
};

/// Success leaves the buffer in place and sets Gamma = R (from an empty
/// buffer it grows by one second); failure and the passive action drain one
/// second. Rewards are deterministic QoE values normalized into [0, 1].
BanditInstance build_video_streaming(const VideoParams& params);

/// Affine map sending the smallest raw reward to 0 and the largest to 1
/// (scale 1 when all rewards coincide).
RewardNormalization normalization_for(const std::vector<double>& raw_rewards);

}  // namespace rmab
