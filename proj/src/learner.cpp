#include "rmab/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rmab/errors.hpp"
#include "rmab/omr.hpp"
#include "rmab/simulator.hpp"

namespace rmab {

namespace {

constexpr double kDenominatorEpsilon = 1e-9;

std::int64_t state_action_pairs(const BanditInstance& instance) {
  std::int64_t total = 0;
  for (const auto& arm : instance.arms) total += static_cast<std::int64_t>(arm.num_states()) * arm.num_actions();
  return total;
}

long widest_arm(const BanditInstance& instance) {
  long widest = 0;
  for (const auto& arm : instance.arms) widest = std::max<long>(widest, static_cast<long>(arm.num_states()) * arm.num_actions());
  return widest;
}

}  // namespace

double EmpiricalModel::optimistic_reward(int n, int s, int a) const { return std::min(1.0, reward(n, s, a) + delta); }

std::vector<std::vector<double>> EmpiricalModel::optimistic_rewards() const {
  std::vector<std::vector<double>> out(shapes.size());
  for (std::size_t n = 0; n < shapes.size(); ++n) {
    const ArmShape& sh = shapes[n];
    out[n].resize(static_cast<std::size_t>(sh.num_states) * sh.num_actions);
    for (int s = 0; s < sh.num_states; ++s)
      for (int a = 0; a < sh.num_actions; ++a) out[n][s * sh.num_actions + a] = optimistic_reward(static_cast<int>(n), s, a);
  }
  return out;
}

EmpiricalModel EmpiricalModel::from_true_model(const BanditInstance& instance) {
  EmpiricalModel m;
  m.shapes = shapes_of(instance);
  for (const auto& arm : instance.arms) {
    m.counts.emplace_back(arm.transition_tensor().size(), 0);
    m.p_hat.push_back(arm.transition_tensor());
    m.r_hat.push_back(arm.reward_matrix());
  }
  return m;
}

int samples_per_pair(long total_horizon) {
  if (total_horizon < 1) throw UsageError("samples_per_pair: horizon must be positive");
  auto lambda = static_cast<long>(std::ceil(std::sqrt(static_cast<double>(total_horizon))));
  while (lambda * lambda < total_horizon) ++lambda;
  while (lambda > 1 && (lambda - 1) * (lambda - 1) >= total_horizon) --lambda;
  return static_cast<int>(lambda);
}

double confidence_radius(std::int64_t state_action_pairs, int lambda, double eta) {
  if (lambda < 1) throw UsageError("confidence_radius: lambda must be positive");
  if (!(eta > 0.0 && eta < 1.0)) throw UsageError("confidence_radius: eta must lie in (0, 1)");
  const double arg = static_cast<double>(state_action_pairs) * static_cast<double>(lambda) / eta;
  return std::sqrt(std::log(arg) / (2.0 * lambda));
}

EmpiricalModel generative_sample(const BanditInstance& instance, int lambda, double eta, std::uint64_t seed) {
  if (lambda < 1) throw UsageError("generative_sample: lambda must be at least 1");
  require_valid(instance);
  EmpiricalModel m;
  m.shapes = shapes_of(instance);
  m.samples_per_pair = lambda;
  m.eta = eta;
  m.delta = confidence_radius(state_action_pairs(instance), lambda, eta);
  m.planning_steps = widest_arm(instance) * lambda;
  for (int n = 0; n < instance.num_arms(); ++n) {
    const ArmModel& arm = instance.arms[n];
    const int S = arm.num_states();
    const int A = arm.num_actions();
    std::vector<std::int64_t> counts(static_cast<std::size_t>(S) * A * S, 0);
    std::vector<double> p(counts.size(), 0.0), r(static_cast<std::size_t>(S) * A, 0.0);
    const std::uint64_t arm_key = stream_key(seed, "arm", n);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        RandomStream rng = RandomStream::child(arm_key, "pair", static_cast<std::uint64_t>(s) * A + a);
        const std::size_t base = (static_cast<std::size_t>(s) * A + a) * S;
        double reward_sum = 0.0;
        for (int k = 0; k < lambda; ++k) {
          reward_sum += sample_reward(arm, s, a, rng);
          ++counts[base + sample_transition(arm, s, a, rng)];
        }
        for (int y = 0; y < S; ++y) p[base + y] = static_cast<double>(counts[base + y]) / lambda;
        r[static_cast<std::size_t>(s) * A + a] = reward_sum / lambda;
      }
    m.counts.push_back(std::move(counts));
    m.p_hat.push_back(std::move(p));
    m.r_hat.push_back(std::move(r));
  }
  return m;
}

ExtendedLp build_extended_lp(const EmpiricalModel& model, const BanditInstance& instance, int horizon,
                             ExtendedLpOptions options) {
  if (horizon < 1) throw UsageError("build_extended_lp: horizon must be positive");
  if (model.shapes != shapes_of(instance)) throw UsageError("build_extended_lp: model shape differs from instance");
  ExtendedLp out;
  out.stationary = options.stationary;
  ExtendedLayout& layout = out.layout;
  layout.slices = options.stationary ? 1 : horizon;
  layout.shapes = model.shapes;
  const int n_arms = static_cast<int>(model.shapes.size());
  lp::LpProgram& prog = out.program;

  for (int n = 0; n < n_arms; ++n) {
    const ArmShape& sh = model.shapes[n];
    layout.offset.push_back(prog.num_cols());
    for (int t = 0; t < layout.slices; ++t)
      for (int s = 0; s < sh.num_states; ++s)
        for (int a = 0; a < sh.num_actions; ++a) {
          const double r = model.optimistic_reward(n, s, a);
          for (int y = 0; y < sh.num_states; ++y) prog.add_col(r);
        }
  }

  for (int t = 0; t < layout.slices; ++t) {
    const int row = prog.add_row(lp::Sense::LessEqual, instance.budget);
    out.budget_rows.push_back(row);
    for (int n = 0; n < n_arms; ++n) {
      const ArmShape& sh = model.shapes[n];
      for (int s = 0; s < sh.num_states; ++s)
        for (int a = 0; a < sh.num_actions; ++a)
          for (int y = 0; y < sh.num_states; ++y)
            prog.add_entry(row, layout.column(n, t, s, a, y), instance.arms[n].cost(a));
    }
  }

  for (int n = 0; n < n_arms; ++n) {
    const ArmShape& sh = model.shapes[n];
    const int S = sh.num_states;
    const int A = sh.num_actions;
    auto outflow = [&](int row, int t, int s) {
      for (int a = 0; a < A; ++a)
        for (int y = 0; y < S; ++y) prog.add_entry(row, layout.column(n, t, s, a, y), 1.0);
    };
    auto inflow = [&](int row, int t, int s) {
      for (int x = 0; x < S; ++x)
        for (int b = 0; b < A; ++b) prog.add_entry(row, layout.column(n, t, x, b, s), -1.0);
    };
    if (options.stationary) {
      for (int s = 0; s < S; ++s) {
        const int row = prog.add_row(lp::Sense::Equal, 0.0);
        out.flow_rows.push_back(row);
        outflow(row, 0, s);
        inflow(row, 0, s);
      }
      const int mass = prog.add_row(lp::Sense::Equal, 1.0);
      out.initial_rows.push_back(mass);
      for (int s = 0; s < S; ++s) outflow(mass, 0, s);
    } else {
      for (int s = 0; s < S; ++s) {
        const int row = prog.add_row(lp::Sense::Equal, instance.initial_state[n][s]);
        out.initial_rows.push_back(row);
        outflow(row, 0, s);
      }
      for (int t = 1; t < layout.slices; ++t)
        for (int s = 0; s < S; ++s) {
          const int row = prog.add_row(lp::Sense::Equal, 0.0);
          out.flow_rows.push_back(row);
          outflow(row, t, s);
          inflow(row, t - 1, s);
        }
    }

    for (int t = 0; t < layout.slices; ++t)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
          for (int y = 0; y < S; ++y) {
            const double p = model.transition(n, s, a, y);
            const double hi = std::min(1.0, p + model.delta);
            const double lo = std::max(0.0, p - model.delta);
            if (!(options.skip_vacuous_bands && hi >= 1.0)) {
              const int row = prog.add_row(lp::Sense::LessEqual, 0.0);
              out.band_rows.push_back(row);
              for (int x = 0; x < S; ++x)
                prog.add_entry(row, layout.column(n, t, s, a, x), (x == y ? 1.0 : 0.0) - hi);
            }
            if (!(options.skip_vacuous_bands && lo <= 0.0)) {
              const int row = prog.add_row(lp::Sense::LessEqual, 0.0);
              out.band_rows.push_back(row);
              for (int x = 0; x < S; ++x)
                prog.add_entry(row, layout.column(n, t, s, a, x), lo - (x == y ? 1.0 : 0.0));
            }
          }
  }
  return out;
}

ExtendedOccupancy solve_extended_lp(const ExtendedLp& program, const lp::LpSolver& solver) {
  const lp::SolveResult res = solver.solve(program.program);
  if (res.status == lp::Status::IterationLimit) throw SolverError("extended LP: iteration limit reached");
  if (res.status != lp::Status::Optimal)
    throw InvariantError("extended LP reported " + lp::to_string(res.status));
  if (res.max_violation > 1e-6) {
    std::ostringstream msg;
    msg << "extended LP residual " << res.max_violation << " exceeds 1e-6";
    throw InvariantError(msg.str());
  }
  ExtendedOccupancy out;
  out.layout = program.layout;
  out.stationary = program.stationary;
  out.objective = res.objective;
  out.max_residual = res.max_violation;
  out.z.resize(res.x.size());
  for (std::size_t j = 0; j < res.x.size(); ++j) {
    if (res.x[j] < -1e-8) throw InvariantError("extended LP returned a negative entry");
    out.z[j] = std::max(0.0, res.x[j]);
  }
  return out;
}

RandomizedPolicy recover_learned_policy(const ExtendedOccupancy& occ) {
  const ExtendedLayout& layout = occ.layout;
  RandomizedPolicy policy(layout.shapes, layout.slices, occ.stationary);
  for (std::size_t n = 0; n < layout.shapes.size(); ++n) {
    const ArmShape& sh = layout.shapes[n];
    const int arm = static_cast<int>(n);
    for (int t = 0; t < layout.slices; ++t)
      for (int s = 0; s < sh.num_states; ++s) {
        auto row = policy.distribution(arm, s, t);
        double denom = 0.0;
        for (int a = 0; a < sh.num_actions; ++a) {
          double mass = 0.0;
          for (int y = 0; y < sh.num_states; ++y) mass += occ.at(arm, t, s, a, y);
          row[a] = mass;
          denom += mass;
        }
        if (denom > kDenominatorEpsilon) {
          for (double& v : row) v /= denom;
        } else {
          std::fill(row.begin(), row.end(), 0.0);
          row[0] = 1.0;
        }
      }
  }
  return policy;
}

LearnedPlan plan_from_model(const EmpiricalModel& model, const BanditInstance& instance, int horizon,
                            ExtendedLpOptions options) {
  LearnedPlan plan;
  plan.occupancy = solve_extended_lp(build_extended_lp(model, instance, horizon, options));
  plan.policy = recover_learned_policy(plan.occupancy);
  plan.policy.assign_indices(model.optimistic_rewards());
  return plan;
}

std::string to_string(RegretOracle oracle) {
  switch (oracle) {
    case RegretOracle::Auto: return "auto";
    case RegretOracle::AverageReward: return "dp-average";
    case RegretOracle::LpRate: return "lp-rate";
  }
  return "unknown";
}

double stationary_lp_rate(const BanditInstance& instance) {
  const EmpiricalModel truth = EmpiricalModel::from_true_model(instance);
  const ExtendedLp lp = build_extended_lp(truth, instance, 1, {.stationary = true, .skip_vacuous_bands = true});
  return solve_extended_lp(lp).objective;
}

long minimum_learning_horizon(const BanditInstance& instance) {
  const long widest = widest_arm(instance);
  long t = 1;
  while (widest * samples_per_pair(t) >= t) ++t;
  return t;
}

LearnResult run_learning(const BanditInstance& instance, const LearnOptions& options) {
  require_valid(instance);
  if (options.horizon < 1) throw ConfigError("horizon", "must be positive");
  if (!(options.eta > 0.0 && options.eta < 1.0)) throw ConfigError("eta", "must lie in (0, 1)");
  if (options.trials < 1) throw ConfigError("trials", "must be at least 1");

  LearnResult out;
  out.lambda = options.lambda_override > 0 ? options.lambda_override : samples_per_pair(options.horizon);
  out.delta = confidence_radius(state_action_pairs(instance), out.lambda, options.eta);
  out.planning_steps = widest_arm(instance) * out.lambda;
  if (out.planning_steps >= options.horizon) {
    std::ostringstream msg;
    msg << "planning phase needs " << out.planning_steps << " steps, leaving none for execution";
    if (options.lambda_override <= 0) msg << "; minimum horizon is " << minimum_learning_horizon(instance);
    throw ConfigError("horizon", msg.str());
  }
  out.execution_steps = options.horizon - out.planning_steps;
  if (out.execution_steps > std::numeric_limits<int>::max()) throw ConfigError("horizon", "too large");
  out.stationary_plan = out.execution_steps > options.max_lp_horizon;

  out.oracle = options.oracle;
  if (out.oracle == RegretOracle::Auto) {
    BanditInstance one = instance;
    one.horizon = 1;
    out.oracle = joint_table_size(one) <= 4096 ? RegretOracle::AverageReward : RegretOracle::LpRate;
  }
  out.oracle_rate =
      out.oracle == RegretOracle::AverageReward ? average_reward_oracle(instance) : stationary_lp_rate(instance);

  std::vector<long> points;
  const int count = std::max(1, options.series_points);
  for (int k = 1; k <= count; ++k) {
    const long t = static_cast<long>(std::llround(static_cast<double>(options.horizon) * k / count));
    if (t > 0 && (points.empty() || t > points.back())) points.push_back(t);
  }
  std::vector<int> checkpoints;
  for (long t : points) checkpoints.push_back(static_cast<int>(std::max(0L, t - out.planning_steps)));

  BanditInstance exec_instance = instance;
  exec_instance.horizon = static_cast<int>(out.execution_steps);
  const CostTable costs = cost_table(instance);
  const ExtendedLpOptions lp_options{.stationary = out.stationary_plan, .skip_vacuous_bands = true};

  std::vector<std::vector<double>> regret(points.size(), std::vector<double>(options.trials));
  std::vector<double> totals(options.trials);
  double objective_sum = 0.0;
  for (int i = 0; i < options.trials; ++i) {
    const EmpiricalModel model =
        generative_sample(instance, out.lambda, options.eta, stream_key(options.seed, "sample", i));
    const LearnedPlan plan = plan_from_model(model, instance, exec_instance.horizon, lp_options);
    objective_sum += plan.occupancy.objective;
    const OmrExecutor exec(plan.policy, costs, instance.budget, "ucb");
    RandomStream env = RandomStream::child(options.seed, "env", i);
    RandomStream pol = RandomStream::child(options.seed, "policy", i);
    const TrialOutcome o = simulate_trial(exec_instance, exec, env, pol, checkpoints);
    out.decisions_checked += exec_instance.horizon;
    totals[i] = o.total;
    for (std::size_t k = 0; k < points.size(); ++k)
      regret[k][i] = static_cast<double>(points[k]) * out.oracle_rate - o.checkpoint_totals[k];
  }
  out.mean_optimistic_objective = objective_sum / options.trials;
  const auto total = mean_and_stderr(totals);
  out.mean_reward = total.mean;
  out.reward_stderr = total.stderr;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto r = mean_and_stderr(regret[k]);
    out.series.push_back({points[k], r.mean, r.stderr});
  }
  return out;
}

}  // namespace rmab
