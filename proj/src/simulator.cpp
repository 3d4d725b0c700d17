#include "rmab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

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

// Mixed-radix codes with arm 0 as the fastest digit.
struct Radix {
  std::vector<int> base;
  std::uint64_t size = 1;

  explicit Radix(std::vector<int> b) : base(std::move(b)) {
    for (int x : base) size *= static_cast<std::uint64_t>(x);
  }
  void decode(std::uint64_t code, std::vector<int>& out) const {
    out.resize(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      out[i] = static_cast<int>(code % base[i]);
      code /= base[i];
    }
  }
  std::uint64_t encode(const std::vector<int>& digits) const {
    std::uint64_t code = 0;
    for (std::size_t i = base.size(); i-- > 0;) code = code * base[i] + digits[i];
    return code;
  }
};

Radix state_radix(const BanditInstance& instance) {
  std::vector<int> b;
  for (const auto& arm : instance.arms) b.push_back(arm.num_states());
  return Radix(std::move(b));
}

struct JointAction {
  std::vector<int> actions;
};

std::vector<JointAction> feasible_joint_actions(const BanditInstance& instance) {
  std::vector<JointAction> out;
  const int n_arms = instance.num_arms();
  std::vector<int> a(n_arms, 0);
  std::function<void(int, int)> rec = [&](int n, int spent) {
    if (n == n_arms) {
      out.push_back({a});
      return;
    }
    for (int x = 0; x < instance.arms[n].num_actions(); ++x) {
      const int c = instance.arms[n].cost(x);
      if (spent + c > instance.budget) continue;
      a[n] = x;
      rec(n + 1, spent + c);
    }
    a[n] = 0;
  };
  rec(0, 0);
  return out;
}

// E[v(s')] under the product kernel, contracting the slowest digit first.
class Contractor {
 public:
  explicit Contractor(const BanditInstance& instance) : instance_(instance), radix_(state_radix(instance)) {
    buf_a_.resize(radix_.size);
    buf_b_.resize(radix_.size);
  }

  double expect(const std::vector<double>& v, const std::vector<int>& s, const std::vector<int>& a) {
    const double* cur = v.data();
    std::uint64_t len = radix_.size;
    std::vector<double>* out = &buf_a_;
    for (int n = instance_.num_arms() - 1; n >= 0; --n) {
      const int S = radix_.base[n];
      const std::uint64_t stride = len / S;
      const auto row = instance_.arms[n].transition_row(s[n], a[n]);
      double* dst = out->data();
      std::fill(dst, dst + stride, 0.0);
      for (int y = 0; y < S; ++y) {
        const double p = row[y];
        if (p == 0.0) continue;
        const double* src = cur + y * stride;
        for (std::uint64_t k = 0; k < stride; ++k) dst[k] += p * src[k];
      }
      cur = dst;
      len = stride;
      out = out == &buf_a_ ? &buf_b_ : &buf_a_;
    }
    return cur[0];
  }

  const Radix& radix() const { return radix_; }

 private:
  const BanditInstance& instance_;
  Radix radix_;
  std::vector<double> buf_a_, buf_b_;
};

double immediate_reward(const BanditInstance& instance, const std::vector<int>& s, const std::vector<int>& a) {
  double r = 0.0;
  for (int n = 0; n < instance.num_arms(); ++n) r += instance.arms[n].mean_reward(s[n], a[n]);
  return r;
}

std::vector<double> initial_joint_distribution(const BanditInstance& instance, const Radix& radix) {
  std::vector<double> p(radix.size);
  std::vector<int> s;
  for (std::uint64_t js = 0; js < radix.size; ++js) {
    radix.decode(js, s);
    double q = 1.0;
    for (int n = 0; n < instance.num_arms(); ++n) q *= instance.initial_state[n][s[n]];
    p[js] = q;
  }
  return p;
}

}  // namespace

MeanStderr mean_and_stderr(const std::vector<double>& xs) {
  MeanStderr out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.stderr = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  return out;
}

OmrExecutor::OmrExecutor(RandomizedPolicy policy, CostTable costs, int budget, std::string name)
    : policy_(std::move(policy)), costs_(std::move(costs)), budget_(budget), name_(std::move(name)) {
  if (!policy_.has_indices()) throw InvariantError("OMR executor needs a policy with indices");
  const auto bad = validate_policy(policy_);
  if (!bad.empty()) throw InvariantError("OMR executor given an invalid policy: " + bad.front().describe());
}

ActivationDecision OmrExecutor::decide(const JointState& state, int t, RandomStream& rng) const {
  return select_actions(policy_, costs_, state, t, budget_, rng);
}

GreedyExecutor::GreedyExecutor(const BanditInstance& instance)
    : rewards_(reward_tables(instance)), costs_(cost_table(instance)), budget_(instance.budget) {}

ActivationDecision GreedyExecutor::decide(const JointState& state, int, RandomStream& rng) const {
  const int n_arms = static_cast<int>(state.size());
  ActivationDecision out;
  out.actions.assign(n_arms, 0);
  std::vector<double> best(n_arms, 0.0);
  for (int n = 0; n < n_arms; ++n) {
    const int A = static_cast<int>(costs_[n].size());
    for (int a = 1; a < A; ++a)
      if (costs_[n][a] <= budget_) best[n] = std::max(best[n], rewards_[n][state[n] * A + a]);
  }
  const std::vector<int> order = priority_order(best, rng);
  const int min_cost = smallest_positive_cost(costs_);
  int remaining = budget_;
  for (int n : order) {
    if (remaining < min_cost || best[n] <= 0.0) break;
    const int A = static_cast<int>(costs_[n].size());
    int pick = 0;
    double value = 0.0;
    for (int a = 1; a < A; ++a) {
      if (costs_[n][a] > remaining) continue;
      const double r = rewards_[n][state[n] * A + a];
      if (r > value || (r == value && pick > 0 && costs_[n][a] < costs_[n][pick])) {
        value = r;
        pick = a;
      }
    }
    out.considered.push_back(n);
    if (pick == 0) continue;
    out.actions[n] = pick;
    out.activation_set.push_back(n);
    out.spent += costs_[n][pick];
    remaining -= costs_[n][pick];
  }
  return out;
}

RandomExecutor::RandomExecutor(const BanditInstance& instance)
    : costs_(cost_table(instance)), budget_(instance.budget) {}

ActivationDecision RandomExecutor::decide(const JointState& state, int, RandomStream& rng) const {
  const int n_arms = static_cast<int>(state.size());
  ActivationDecision out;
  out.actions.assign(n_arms, 0);
  std::vector<int> order(n_arms);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<int>(order));
  int remaining = budget_;
  std::vector<int> options;
  for (int n : order) {
    options.assign(1, 0);
    for (int a = 1; a < static_cast<int>(costs_[n].size()); ++a)
      if (costs_[n][a] <= remaining) options.push_back(a);
    const int a = options[rng.uniform_index(options.size())];
    out.considered.push_back(n);
    if (a == 0) continue;
    out.actions[n] = a;
    out.activation_set.push_back(n);
    out.spent += costs_[n][a];
    remaining -= costs_[n][a];
  }
  return out;
}

ActivationDecision PassiveExecutor::decide(const JointState&, int, RandomStream&) const {
  ActivationDecision out;
  out.actions.assign(num_arms_, 0);
  return out;
}

void check_decision(const ActivationDecision& decision, const CostTable& costs, int budget) {
  if (decision.actions.size() != costs.size()) throw InvariantError("decision has the wrong number of arms");
  std::vector<char> active(costs.size(), 0);
  for (int n : decision.activation_set) active.at(n) = 1;
  int spent = 0;
  for (std::size_t n = 0; n < costs.size(); ++n) {
    const int a = decision.actions[n];
    if (a < 0 || a >= static_cast<int>(costs[n].size())) throw InvariantError("decision action out of range");
    if (a != 0 && !active[n]) throw InvariantError("arm outside the activation set is not passive");
    spent += costs[n][a];
  }
  if (spent != decision.spent) throw InvariantError("decision misreports its spent budget");
  if (spent > budget) {
    std::ostringstream msg;
    msg << "budget violation: spent " << spent << " > " << budget;
    throw InvariantError(msg.str());
  }
}

TrialOutcome simulate_trial(const BanditInstance& instance, const PolicyExecutor& executor, RandomStream& env,
                            RandomStream& policy_rng, const std::vector<int>& checkpoints, RunRecord* record,
                            const StepObserver& observer, int trial) {
  const int n_arms = instance.num_arms();
  const CostTable costs = cost_table(instance);
  TrialOutcome out;
  out.checkpoint_totals.assign(checkpoints.size(), 0.0);
  JointState state(n_arms);
  for (int n = 0; n < n_arms; ++n) state[n] = sample_initial_state(instance.initial_state[n], env);
  std::size_t next_checkpoint = 0;
  auto flush_checkpoints = [&](int steps_done) {
    while (next_checkpoint < checkpoints.size() && checkpoints[next_checkpoint] <= steps_done)
      out.checkpoint_totals[next_checkpoint++] = out.total;
  };
  flush_checkpoints(0);
  for (int t = 0; t < instance.horizon; ++t) {
    const ActivationDecision decision = executor.decide(state, t, policy_rng);
    check_decision(decision, costs, instance.budget);
    if (observer) observer(trial, t, state, decision);
    double step = 0.0, raw_step = 0.0;
    JointState next(n_arms);
    for (int n = 0; n < n_arms; ++n) {
      const ArmModel& arm = instance.arms[n];
      const int a = decision.actions[n];
      const double r = sample_reward(arm, state[n], a, env);
      step += r;
      raw_step += arm.normalization().to_raw(r);
      next[n] = sample_transition(arm, state[n], a, env);
    }
    if (record) {
      record->states.push_back(state);
      record->actions.push_back(decision.actions);
      record->rewards.push_back(step);
      record->raw_rewards.push_back(raw_step);
      record->spent_budget.push_back(decision.spent);
    }
    out.total += step;
    out.raw_total += raw_step;
    state = std::move(next);
    flush_checkpoints(t + 1);
  }
  flush_checkpoints(std::numeric_limits<int>::max());
  return out;
}

PolicyRun run_policy(const BanditInstance& instance, const PolicyExecutor& executor, const RunOptions& options) {
  if (options.trials < 1) throw UsageError("run_policy: trials must be at least 1");
  require_valid(instance);
  PolicyRun run;
  run.policy = executor.name();
  run.trials = options.trials;
  run.sample.seed = options.seed;
  std::vector<double> totals(options.trials), raw(options.trials);
  std::vector<std::vector<double>> at(options.checkpoints.size(), std::vector<double>(options.trials));
  for (int i = 0; i < options.trials; ++i) {
    RandomStream env = RandomStream::child(options.seed, "env", i);
    RandomStream pol = RandomStream::child(options.seed, "policy", i);
    const TrialOutcome o = simulate_trial(instance, executor, env, pol, options.checkpoints,
                                          i == 0 ? &run.sample : nullptr, options.observer, i);
    totals[i] = o.total;
    raw[i] = o.raw_total;
    for (std::size_t k = 0; k < at.size(); ++k) at[k][i] = o.checkpoint_totals[k];
    run.decisions_checked += instance.horizon;
  }
  const auto m = mean_and_stderr(totals);
  const auto mr = mean_and_stderr(raw);
  run.mean = m.mean;
  run.stderr = m.stderr;
  run.raw_mean = mr.mean;
  run.raw_stderr = mr.stderr;
  for (const auto& xs : at) {
    const auto c = mean_and_stderr(xs);
    run.checkpoint_mean.push_back(c.mean);
    run.checkpoint_stderr.push_back(c.stderr);
  }
  return run;
}

std::uint64_t joint_table_size(const BanditInstance& instance) {
  // Saturate instead of overflowing on large instances.
  constexpr std::uint64_t cap = std::numeric_limits<std::uint64_t>::max() / 4096;
  std::uint64_t size = static_cast<std::uint64_t>(std::max(instance.horizon, 1));
  for (const auto& arm : instance.arms) {
    size *= static_cast<std::uint64_t>(arm.num_states());
    if (size > cap) return cap;
  }
  return size;
}

DpResult dp_oracle(const BanditInstance& instance, std::uint64_t guard, bool keep_policy) {
  require_valid(instance);
  const std::uint64_t size = joint_table_size(instance);
  if (size > guard) throw SizeGuardError(size, guard);
  Contractor contract(instance);
  const Radix& radix = contract.radix();
  const auto actions = feasible_joint_actions(instance);

  DpResult out;
  out.joint_states = radix.size;
  if (keep_policy) out.policy.assign(instance.horizon, std::vector<std::vector<int>>(radix.size));
  std::vector<double> v(radix.size, 0.0), next(radix.size);
  std::vector<int> s;
  for (int t = instance.horizon - 1; t >= 0; --t) {
    for (std::uint64_t js = 0; js < radix.size; ++js) {
      radix.decode(js, s);
      double best = -std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t k = 0; k < actions.size(); ++k) {
        const auto& a = actions[k].actions;
        double q = immediate_reward(instance, s, a);
        if (t + 1 < instance.horizon) q += contract.expect(v, s, a);
        if (q > best) {
          best = q;
          arg = k;
        }
      }
      next[js] = best;
      if (keep_policy) out.policy[t][js] = actions[arg].actions;
    }
    std::swap(v, next);
  }
  const auto p0 = initial_joint_distribution(instance, radix);
  for (std::uint64_t js = 0; js < radix.size; ++js) out.value += p0[js] * v[js];
  return out;
}

double average_reward_oracle(const BanditInstance& instance, std::uint64_t guard) {
  require_valid(instance);
  BanditInstance one = instance;
  one.horizon = 1;
  const std::uint64_t size = joint_table_size(one);
  if (size > guard) throw SizeGuardError(size, guard);
  Contractor contract(instance);
  const Radix& radix = contract.radix();
  const auto actions = feasible_joint_actions(instance);
  constexpr double tau = 0.5;

  std::vector<double> h(radix.size, 0.0), th(radix.size);
  std::vector<int> s;
  for (int iter = 0; iter < 1'000'000; ++iter) {
    for (std::uint64_t js = 0; js < radix.size; ++js) {
      radix.decode(js, s);
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& ja : actions) {
        const double q = tau * immediate_reward(instance, s, ja.actions) + tau * contract.expect(h, s, ja.actions) +
                         (1.0 - tau) * h[js];
        best = std::max(best, q);
      }
      th[js] = best;
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::uint64_t js = 0; js < radix.size; ++js) {
      lo = std::min(lo, th[js] - h[js]);
      hi = std::max(hi, th[js] - h[js]);
    }
    const double ref = th[0];
    for (std::uint64_t js = 0; js < radix.size; ++js) h[js] = th[js] - ref;
    if (hi - lo < 1e-12) return 0.5 * (lo + hi) / tau;
  }
  throw SolverError("relative value iteration did not converge");
}

double evaluate_policy_exact(const BanditInstance& instance, const RandomizedPolicy& policy) {
  require_valid(instance);
  if (!policy.has_indices()) throw UsageError("evaluate_policy_exact: policy carries no indices");
  const Radix radix = state_radix(instance);
  const CostTable costs = cost_table(instance);
  const int n_arms = instance.num_arms();
  std::vector<double> p = initial_joint_distribution(instance, radix), next(radix.size);
  std::vector<int> s, y;
  std::vector<double> psi(n_arms);
  double value = 0.0;
  for (int t = 0; t < instance.horizon; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::uint64_t js = 0; js < radix.size; ++js) {
      if (p[js] == 0.0) continue;
      radix.decode(js, s);
      for (int n = 0; n < n_arms; ++n) psi[n] = policy.index(n, s[n], t);
      const auto law = exact_action_distribution(policy, psi, costs, s, t, instance.budget);
      for (const auto& [a, q] : law) {
        const double w = p[js] * q;
        value += w * immediate_reward(instance, s, a);
        for (std::uint64_t jn = 0; jn < radix.size; ++jn) {
          radix.decode(jn, y);
          double pr = w;
          for (int n = 0; n < n_arms && pr != 0.0; ++n) pr *= instance.arms[n].transition(s[n], a[n], y[n]);
          next[jn] += pr;
        }
      }
    }
    std::swap(p, next);
  }
  return value;
}

BanditInstance replicate(const BanditInstance& base, int rho) {
  if (rho < 1) throw UsageError("replicate: rho must be at least 1");
  BanditInstance out;
  out.budget = base.budget * rho;
  out.horizon = base.horizon;
  for (int n = 0; n < base.num_arms(); ++n)
    for (int r = 0; r < rho; ++r) {
      out.arms.push_back(base.arms[n].with_id(n * rho + r));
      out.initial_state.push_back(base.initial_state[n]);
    }
  return out;
}

GapReport make_gap_report(const PolicyRun& run, double lp_bound, int num_arms) {
  GapReport g;
  g.policy = run.policy;
  g.trials = run.trials;
  g.mean = run.mean;
  g.stderr = run.stderr;
  g.lp_bound = lp_bound;
  g.gap = lp_bound - run.mean;
  g.per_arm_gap = g.gap / num_arms;
  g.per_arm_stderr = run.stderr / num_arms;
  return g;
}

ScalingRow scaling_run(const BanditInstance& base, int rho, int trials, std::uint64_t seed) {
  const BanditInstance inst = replicate(base, rho);
  const OmrPlan plan = plan_omr(inst);
  const OmrExecutor exec(plan.policy, cost_table(inst), inst.budget);
  const int classes = base.num_arms();
  const int horizon = inst.horizon;

  ScalingRow row;
  row.rho = rho;
  row.counts.rho = rho;
  row.counts.in_state.resize(classes);
  row.counts.with_action.resize(classes);
  for (int c = 0; c < classes; ++c) {
    const ArmShape sh{base.arms[c].num_states(), base.arms[c].num_actions()};
    row.counts.in_state[c].assign(horizon, std::vector<int>(sh.num_states, 0));
    row.counts.with_action[c].assign(horizon,
                                     std::vector<std::vector<int>>(sh.num_states, std::vector<int>(sh.num_actions, 0)));
  }

  std::vector<double> deviation(trials, 0.0);
  std::vector<std::vector<int>> count(classes);
  auto observer = [&](int trial, int t, const JointState& state, const ActivationDecision& d) {
    for (int c = 0; c < classes; ++c) count[c].assign(base.arms[c].num_states(), 0);
    for (int n = 0; n < inst.num_arms(); ++n) {
      const int c = n / rho;
      ++count[c][state[n]];
      if (trial == 0) {
        ++row.counts.in_state[c][t][state[n]];
        ++row.counts.with_action[c][t][state[n]][d.actions[n]];
      }
    }
    double worst = deviation[trial];
    for (int c = 0; c < classes; ++c)
      for (int s = 0; s < base.arms[c].num_states(); ++s) {
        const double target = plan.occupancy.marginal(c * rho, s, t);
        worst = std::max(worst, std::abs(static_cast<double>(count[c][s]) / rho - target));
      }
    deviation[trial] = worst;
  };

  RunOptions opts;
  opts.trials = trials;
  opts.seed = seed;
  opts.observer = observer;
  const PolicyRun run = run_policy(inst, exec, opts);
  row.report = make_gap_report(run, plan.occupancy.objective, inst.num_arms());
  const auto dev = mean_and_stderr(deviation);
  row.count_mean = dev.mean;
  row.count_stderr = dev.stderr;
  return row;
}

std::vector<ScalingRow> scaling_experiment(const BanditInstance& base, const std::vector<int>& rho_list, int trials,
                                           std::uint64_t seed) {
  std::vector<ScalingRow> rows;
  for (std::size_t k = 0; k < rho_list.size(); ++k)
    rows.push_back(scaling_run(base, rho_list[k], trials, stream_key(seed, "rho", rho_list[k])));
  return rows;
}

std::vector<GapReport> evaluate_baselines(const BanditInstance& instance, int trials, std::uint64_t seed) {
  const OmrPlan plan = plan_omr(instance);
  const double bound = plan.occupancy.objective;
  bool has_dp = joint_table_size(instance) <= kDpSizeGuard;
  double dp_value = 0.0;
  if (has_dp) dp_value = dp_oracle(instance).value;

  const OmrExecutor omr(plan.policy, cost_table(instance), instance.budget);
  const GreedyExecutor greedy(instance);
  const RandomExecutor random(instance);
  const PolicyExecutor* executors[] = {&omr, &greedy, &random};
  std::vector<GapReport> out;
  RunOptions opts;
  opts.trials = trials;
  opts.seed = seed;
  for (const PolicyExecutor* e : executors) {
    GapReport g = make_gap_report(run_policy(instance, *e, opts), bound, instance.num_arms());
    g.has_dp = has_dp;
    g.dp_value = dp_value;
    g.dp_gap = has_dp ? dp_value - g.mean : 0.0;
    out.push_back(g);
  }
  return out;
}

}  // namespace rmab
