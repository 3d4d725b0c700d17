#pragma once

// Small instance generators for tests. They use their own std::mt19937_64 so
// that test fixtures never depend on the library's stream discipline.

#include <random>
#include <vector>

#include "rmab/model.hpp"

namespace fixture {

inline std::vector<double> random_simplex(std::mt19937_64& gen, int k) {
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> p(k);
  double total = 0.0;
  for (double& v : p) total += v = ex(gen);
  for (double& v : p) v /= total;
  return p;
}

// Arm with random kernel, active rewards uniform on [0,1], passive reward 0
// and costs c[a] = a.
inline rmab::ArmModel random_arm(std::mt19937_64& gen, int id, int states, int actions) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> kernel;
  std::vector<double> reward(static_cast<std::size_t>(states) * actions, 0.0);
  for (int s = 0; s < states; ++s)
    for (int a = 0; a < actions; ++a) {
      const auto row = random_simplex(gen, states);
      kernel.insert(kernel.end(), row.begin(), row.end());
      if (a > 0) reward[s * actions + a] = u(gen);
    }
  return rmab::ArmModel(id, states, actions, kernel, reward);
}

inline rmab::BanditInstance random_instance(std::uint64_t seed, int arms, int states, int actions, int horizon,
                                            int budget) {
  std::mt19937_64 gen(seed);
  rmab::BanditInstance inst;
  inst.horizon = horizon;
  inst.budget = budget;
  for (int n = 0; n < arms; ++n) {
    inst.arms.push_back(random_arm(gen, n, states, actions));
    inst.initial_state.push_back(random_simplex(gen, states));
  }
  return inst;
}

// Same model copied to every arm, uniform initial state.
inline rmab::BanditInstance identical_arms(const rmab::ArmModel& arm, int arms, int horizon, int budget) {
  rmab::BanditInstance inst;
  inst.horizon = horizon;
  inst.budget = budget;
  for (int n = 0; n < arms; ++n) {
    inst.arms.push_back(arm.with_id(n));
    inst.initial_state.push_back(std::vector<double>(arm.num_states(), 1.0 / arm.num_states()));
  }
  return inst;
}

// Two states, two actions: the active action moves to state 1 for sure and
// earns `reward` in state 1; the passive action stays put.
inline rmab::ArmModel switch_arm(int id, double reward) {
  std::vector<double> kernel = {1, 0, 0, 1, 0, 1, 0, 1};
  std::vector<double> rewards = {0, 0, 0, reward};
  return rmab::ArmModel(id, 2, 2, kernel, rewards);
}

}  // namespace fixture
