#include "rmab/cli/runner.hpp"

#include <ostream>

#include "rmab/errors.hpp"
#include "rmab/learner.hpp"
#include "rmab/planner.hpp"
#include "rmab/simulator.hpp"

namespace rmab::cli {

std::vector<std::string> columns_for(Mode mode) {
  switch (mode) {
    case Mode::Plan:
    case Mode::Baselines:
      return {"policy", "trials", "mean_reward", "stderr", "lp_bound", "gap", "per_arm_gap"};
    case Mode::Learn:
      return {"t", "cumulative_regret", "stderr"};
    case Mode::Scale:
      return {"rho",         "arms", "trials",         "mean_reward",      "stderr",       "lp_bound",
              "gap",         "per_arm_gap", "per_arm_stderr", "count_deviation", "count_stderr"};
    case Mode::Oracle:
      return {"dp_value", "lp_bound", "joint_states"};
  }
  return {};
}

namespace {

void add_common_metadata(Table& table, const ExperimentConfig& config, const BanditInstance& instance) {
  table.add_meta("toolkit", kToolkitName);
  table.add_meta("version", kToolkitVersion);
  table.add_meta("seed", std::to_string(config.seed));
  // The destination is left out so the same run writes the same bytes anywhere.
  for (const auto& [key, value] : config.echo)
    if (key != "output") table.add_meta("config." + key, value);
  table.add_meta("arms", std::to_string(instance.num_arms()));
  table.add_meta("budget", std::to_string(instance.budget));
  table.add_meta("horizon", std::to_string(instance.horizon));

  bool shared = true;
  for (const ArmModel& arm : instance.arms) shared = shared && arm.normalization() == instance.arms[0].normalization();
  if (shared) {
    table.add_meta("normalization.offset", format_number(instance.arms[0].normalization().offset));
    table.add_meta("normalization.scale", format_number(instance.arms[0].normalization().scale));
  } else {
    for (const ArmModel& arm : instance.arms) {
      const std::string n = std::to_string(arm.arm_id());
      table.add_meta("normalization.offset." + n, format_number(arm.normalization().offset));
      table.add_meta("normalization.scale." + n, format_number(arm.normalization().scale));
    }
  }
}

std::vector<Cell> gap_row(const GapReport& g) {
  return {g.policy, static_cast<long long>(g.trials), g.mean, g.stderr, g.lp_bound, g.gap, g.per_arm_gap};
}

void fill_plan(Table& table, const ExperimentConfig& config, const BanditInstance& instance) {
  const OmrPlan plan = plan_omr(instance);
  const OmrExecutor omr(plan.policy, cost_table(instance), instance.budget);
  RunOptions opts;
  opts.trials = config.trials;
  opts.seed = config.seed;
  const PolicyRun run = run_policy(instance, omr, opts);
  table.add_meta("raw_mean.omr", format_number(run.raw_mean));
  table.add_meta("raw_stderr.omr", format_number(run.raw_stderr));
  table.add_meta("decisions_checked", std::to_string(run.decisions_checked));
  table.rows.push_back(gap_row(make_gap_report(run, plan.occupancy.objective, instance.num_arms())));
}

void fill_baselines(Table& table, const ExperimentConfig& config, const BanditInstance& instance) {
  const std::vector<GapReport> reports = evaluate_baselines(instance, config.trials, config.seed);
  if (!reports.empty()) {
    table.add_meta("dp_available", reports[0].has_dp ? "true" : "false");
    if (reports[0].has_dp) table.add_meta("dp_value", format_number(reports[0].dp_value));
  }
  for (const GapReport& g : reports) {
    if (g.has_dp) table.add_meta("dp_gap." + g.policy, format_number(g.dp_gap));
    table.rows.push_back(gap_row(g));
  }
}

void fill_learn(Table& table, const ExperimentConfig& config, const BanditInstance& instance) {
  LearnOptions opts;
  opts.horizon = config.horizon;
  opts.eta = config.eta;
  opts.lambda_override = config.lambda_override;
  opts.trials = config.trials;
  opts.seed = config.seed;
  opts.oracle = config.oracle;
  opts.max_lp_horizon = config.max_lp_horizon;
  opts.series_points = config.series_points;
  const LearnResult r = run_learning(instance, opts);
  table.add_meta("lambda", std::to_string(r.lambda));
  table.add_meta("delta", format_number(r.delta));
  table.add_meta("planning_steps", std::to_string(r.planning_steps));
  table.add_meta("execution_steps", std::to_string(r.execution_steps));
  table.add_meta("stationary_plan", r.stationary_plan ? "true" : "false");
  table.add_meta("regret_oracle", to_string(r.oracle));
  table.add_meta("oracle_rate", format_number(r.oracle_rate));
  table.add_meta("mean_optimistic_objective", format_number(r.mean_optimistic_objective));
  table.add_meta("mean_reward", format_number(r.mean_reward));
  table.add_meta("reward_stderr", format_number(r.reward_stderr));
  table.add_meta("decisions_checked", std::to_string(r.decisions_checked));
  for (const RegretPoint& p : r.series)
    table.rows.push_back({static_cast<long long>(p.t), p.cumulative_regret, p.stderr});
}

void fill_scale(Table& table, const ExperimentConfig& config, const BanditInstance& base) {
  table.add_meta("base_arms", std::to_string(base.num_arms()));
  table.add_meta("base_budget", std::to_string(base.budget));
  for (const ScalingRow& row : scaling_experiment(base, config.rho_list, config.trials, config.seed)) {
    const GapReport& g = row.report;
    table.rows.push_back({static_cast<long long>(row.rho), static_cast<long long>(base.num_arms()) * row.rho,
                          static_cast<long long>(g.trials), g.mean, g.stderr, g.lp_bound, g.gap, g.per_arm_gap,
                          g.per_arm_stderr, row.count_mean, row.count_stderr});
  }
}

void fill_oracle(Table& table, const BanditInstance& instance) {
  const DpResult dp = dp_oracle(instance);
  const double bound = relaxed_upper_bound(instance);
  table.rows.push_back({dp.value, bound, static_cast<long long>(dp.joint_states)});
}

}  // namespace

Table run_to_table(const ExperimentConfig& config) {
  Table table;
  table.columns = columns_for(config.mode);
  const BanditInstance instance = config.mode == Mode::Scale ? build_scaling_base(config) : build_scenario(config);
  require_valid(instance);
  add_common_metadata(table, config, instance);
  switch (config.mode) {
    case Mode::Plan: fill_plan(table, config, instance); break;
    case Mode::Baselines: fill_baselines(table, config, instance); break;
    case Mode::Learn: fill_learn(table, config, instance); break;
    case Mode::Scale: fill_scale(table, config, instance); break;
    case Mode::Oracle: fill_oracle(table, instance); break;
  }
  return table;
}

int run_experiment(const ExperimentConfig& config, std::ostream& err) {
  try {
    write_table(run_to_table(config), config.format, config.output);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UsageError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SizeGuardError& e) {
    err << "size guard: " << e.what() << '\n';
    return kExitSizeGuard;
  } catch (const InvariantError& e) {
    err << "invariant breach: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitInvariant;
  }
}

int run_config_text(const std::string& text, const std::vector<std::string>& overrides, std::ostream& err) {
  ExperimentConfig config;
  try {
    config = parse_config(text, overrides);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return run_experiment(config, err);
}

}  // namespace rmab::cli
