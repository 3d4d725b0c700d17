#include "rmab/omr.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>

#include "rmab/errors.hpp"

namespace rmab {

namespace {

int smallest_positive_cost(const CostTable& costs) {
  int best = std::numeric_limits<int>::max();
  for (const auto& row : costs)
    for (int c : row)
      if (c > 0) best = std::min(best, c);
  return best;
}

// chi restricted to the passive action and the affordable active ones.
std::vector<double> restricted_row(std::span<const double> chi, const std::vector<int>& cost, int remaining) {
  std::vector<double> w(chi.begin(), chi.end());
  for (std::size_t a = 1; a < w.size(); ++a)
    if (cost[a] > remaining) w[a] = 0.0;
  return w;
}

void check_inputs(const RandomizedPolicy& policy, std::span<const double> indices, const CostTable& costs,
                  const JointState& state) {
  const auto n = static_cast<std::size_t>(policy.num_arms());
  if (indices.size() != n || costs.size() != n || state.size() != n)
    throw UsageError("select_actions: per-arm inputs disagree with the policy");
}

}  // namespace

CostTable cost_table(const BanditInstance& instance) {
  CostTable out;
  out.reserve(instance.arms.size());
  for (const auto& arm : instance.arms) out.emplace_back(arm.action_costs().begin(), arm.action_costs().end());
  return out;
}

std::vector<double> compute_indices(const RandomizedPolicy& policy, const std::vector<std::vector<double>>& rewards,
                                    const JointState& state, int t) {
  std::vector<double> psi(policy.num_arms(), 0.0);
  for (int n = 0; n < policy.num_arms(); ++n) {
    const auto chi = policy.distribution(n, state[n], t);
    const int A = policy.shape(n).num_actions;
    const double* r = rewards[n].data() + static_cast<std::size_t>(state[n]) * A;
    double value = 0.0;
    for (int a = 1; a < A; ++a) value += chi[a] * r[a];
    psi[n] = value;
  }
  return psi;
}

std::vector<int> priority_order(std::span<const double> indices, RandomStream& rng) {
  std::vector<int> order(indices.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return indices[i] > indices[j]; });
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() && indices[order[end]] == indices[order[start]]) ++end;
    if (end - start > 1) rng.shuffle(std::span<int>(order.data() + start, end - start));
    start = end;
  }
  return order;
}

ActivationDecision select_actions(const RandomizedPolicy& policy, std::span<const double> indices,
                                  const CostTable& costs, const JointState& state, int t, int budget,
                                  RandomStream& rng) {
  check_inputs(policy, indices, costs, state);
  ActivationDecision out;
  out.actions.assign(policy.num_arms(), 0);
  const int min_cost = smallest_positive_cost(costs);
  const std::vector<int> order = priority_order(indices, rng);
  int remaining = budget;
  for (int n : order) {
    if (remaining < min_cost || indices[n] <= 0.0) break;
    const auto w = restricted_row(policy.distribution(n, state[n], t), costs[n], remaining);
    out.considered.push_back(n);
    if (std::accumulate(w.begin(), w.end(), 0.0) <= 0.0) continue;
    const int a = static_cast<int>(rng.categorical(w));
    if (a == 0) continue;
    out.actions[n] = a;
    out.activation_set.push_back(n);
    out.spent += costs[n][a];
    remaining -= costs[n][a];
  }
  return out;
}

ActivationDecision select_actions(const RandomizedPolicy& policy, const CostTable& costs, const JointState& state,
                                  int t, int budget, RandomStream& rng) {
  if (!policy.has_indices()) throw UsageError("select_actions: policy carries no indices");
  std::vector<double> psi(policy.num_arms());
  for (int n = 0; n < policy.num_arms(); ++n) psi[n] = policy.index(n, state[n], t);
  return select_actions(policy, psi, costs, state, t, budget, rng);
}

std::map<std::vector<int>, double> exact_action_distribution(const RandomizedPolicy& policy,
                                                             std::span<const double> indices, const CostTable& costs,
                                                             const JointState& state, int t, int budget) {
  check_inputs(policy, indices, costs, state);
  const int n_arms = policy.num_arms();
  const int min_cost = smallest_positive_cost(costs);

  std::vector<int> base(n_arms);
  std::iota(base.begin(), base.end(), 0);
  std::stable_sort(base.begin(), base.end(), [&](int i, int j) { return indices[i] > indices[j]; });
  std::vector<std::pair<int, int>> groups;  // [start, end) of equal-index runs
  for (int start = 0; start < n_arms;) {
    int end = start + 1;
    while (end < n_arms && indices[base[end]] == indices[base[start]]) ++end;
    groups.emplace_back(start, end);
    start = end;
  }

  std::map<std::vector<int>, double> law;
  std::vector<int> actions(n_arms, 0);

  std::function<void(const std::vector<int>&, std::size_t, int, double)> draw =
      [&](const std::vector<int>& order, std::size_t pos, int remaining, double prob) {
        const int n = pos < order.size() ? order[pos] : -1;
        if (n < 0 || remaining < min_cost || indices[n] <= 0.0) {
          law[actions] += prob;
          return;
        }
        const auto w = restricted_row(policy.distribution(n, state[n], t), costs[n], remaining);
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        if (total <= 0.0) {
          draw(order, pos + 1, remaining, prob);
          return;
        }
        for (std::size_t a = 0; a < w.size(); ++a) {
          if (w[a] <= 0.0) continue;
          actions[n] = static_cast<int>(a);
          draw(order, pos + 1, remaining - costs[n][a], prob * w[a] / total);
        }
        actions[n] = 0;
      };

  std::function<void(std::size_t, std::vector<int>&, double)> orders = [&](std::size_t g, std::vector<int>& order,
                                                                           double prob) {
    if (g == groups.size()) {
      draw(order, 0, budget, prob);
      return;
    }
    auto [start, end] = groups[g];
    std::vector<int> members(base.begin() + start, base.begin() + end);
    std::sort(members.begin(), members.end());
    double count = 0.0;
    std::vector<int> tmp = members;
    do ++count;
    while (std::next_permutation(tmp.begin(), tmp.end()));
    do {
      std::copy(members.begin(), members.end(), order.begin() + start);
      orders(g + 1, order, prob / count);
    } while (std::next_permutation(members.begin(), members.end()));
  };

  std::vector<int> order(base);
  orders(0, order, 1.0);
  return law;
}

}  // namespace rmab
