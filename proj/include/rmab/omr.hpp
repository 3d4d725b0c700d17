#pragma once

#include <map>
#include <span>
#include <vector>

#include "rmab/model.hpp"
#include "rmab/rng.hpp"

namespace rmab {

struct ActivationDecision {
  std::vector<int> actions;         ///< a_n(t) per arm
  std::vector<int> activation_set;  ///< arms given an active action, in activation order
  std::vector<int> considered;      ///< arms that drew from their restricted chi, in order
  int spent = 0;
};

/// Per-arm action costs c_n[a].
using CostTable = std::vector<std::vector<int>>;
CostTable cost_table(const BanditInstance& instance);

/// psi_n = sum_{a != 0} chi_n(s_n, a; t) r_n(s_n, a) for the current joint
/// state. `rewards` holds per-arm tables [s][a] on the planning scale.
std::vector<double> compute_indices(const RandomizedPolicy& policy, const std::vector<std::vector<double>>& rewards,
                                    const JointState& state, int t);

/// Arms sorted by decreasing index; runs of equal index are shuffled with rng.
std::vector<int> priority_order(std::span<const double> indices, RandomStream& rng);

/// Budgeted activation. Arms are taken in decreasing index order; each draws
/// an action from its chi restricted to {passive} and the actions it can still
/// afford, renormalized. Arms with zero index stay passive, and selection
/// stops once the remaining budget is below the smallest positive cost.
ActivationDecision select_actions(const RandomizedPolicy& policy, std::span<const double> indices,
                                  const CostTable& costs, const JointState& state, int t, int budget,
                                  RandomStream& rng);

/// Same, with the indices stored in the policy.
ActivationDecision select_actions(const RandomizedPolicy& policy, const CostTable& costs, const JointState& state,
                                  int t, int budget, RandomStream& rng);

/// Exact law of the joint action chosen by select_actions at a fixed state,
/// by enumerating tie orders and per-arm draws. Exponential in the number of
/// arms; meant for small instances.
std::map<std::vector<int>, double> exact_action_distribution(const RandomizedPolicy& policy,
                                                             std::span<const double> indices, const CostTable& costs,
                                                             const JointState& state, int t, int budget);

}  // namespace rmab
