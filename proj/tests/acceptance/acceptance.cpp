// Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
// exits nonzero if any failed. Output files land in a scratch directory so the
// determinism check can rerun them and compare bytes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "rmab/cli/config.hpp"
#include "rmab/cli/output.hpp"
#include "rmab/cli/runner.hpp"
#include "rmab/errors.hpp"
#include "rmab/learner.hpp"
#include "rmab/planner.hpp"
#include "rmab/scenarios.hpp"
#include "rmab/simulator.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

using namespace rmab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Criterion 8 is judged on these counters, filled by every other criterion.
struct Feasibility {
  long decisions = 0;
  long budget_violations = 0;
  long policies = 0;
  long policy_violations = 0;
  long invariant_errors = 0;
};
Feasibility feasibility;

fs::path out_dir;

// Each output file with the function that produced it.
struct Artifact {
  std::string name;
  std::function<std::string()> produce;
};
std::vector<Artifact> artifacts;

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Produce, record and write an artifact; returns its bytes.
std::string emit(const std::string& name, std::function<std::string()> produce) {
  std::string bytes = produce();
  write_file(out_dir / name, bytes);
  artifacts.push_back({name, std::move(produce)});
  return bytes;
}

void check_policy(const RandomizedPolicy& policy) {
  ++feasibility.policies;
  if (!validate_policy(policy).empty()) ++feasibility.policy_violations;
}

// Independent budget recount on every decision.
StepObserver budget_observer(const BanditInstance& inst) {
  return [costs = cost_table(inst), budget = inst.budget](int, int, const JointState&, const ActivationDecision& d) {
    ++feasibility.decisions;
    long spent = 0;
    for (std::size_t n = 0; n < d.actions.size(); ++n) spent += costs[n][d.actions[n]];
    if (spent > budget || spent != d.spent) ++feasibility.budget_violations;
  };
}

PolicyRun observed_run(const BanditInstance& inst, const PolicyExecutor& exec, int trials, std::uint64_t seed) {
  RunOptions opts;
  opts.trials = trials;
  opts.seed = seed;
  opts.observer = budget_observer(inst);
  return run_policy(inst, exec, opts);
}

cli::Table config_table(const std::string& text) {
  try {
    return cli::run_to_table(cli::parse_config(text));
  } catch (const InvariantError&) {
    ++feasibility.invariant_errors;
    throw;
  }
}

double cell(const cli::Table& t, std::size_t row, const std::string& column) {
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    if (t.columns[c] == column) {
      const cli::Cell& v = t.rows.at(row)[c];
      if (const double* d = std::get_if<double>(&v)) return *d;
      return static_cast<double>(std::get<long long>(v));
    }
  throw std::runtime_error("no column " + column);
}

long meta_long(const cli::Table& t, const std::string& key) {
  for (const auto& [k, v] : t.metadata)
    if (k == key) return std::stol(v);
  return 0;
}

// LP bound >= DP optimum >= exact value of the index policy.
Outcome dominance_chain() {
  int checked = 0;
  double worst_lp = 0.0, worst_omr = 0.0;
  std::ostringstream csv;
  csv << "instance,lp_bound,dp_value,omr_value\n";
  for (int i = 0; i < 50; ++i) {
    const int arms = 1 + i % 3;
    const int states = 2 + (i / 3) % 2;
    const int horizon = 1 + (i / 6) % 4;
    const int budget = 1 + (i / 2) % arms;
    const BanditInstance inst = fixture::random_instance(1000 + i, arms, states, 2, horizon, budget);
    const OmrPlan plan = plan_omr(inst);
    check_policy(plan.policy);
    const double lp = plan.occupancy.objective;
    const double dp = dp_oracle(inst).value;
    const double omr = evaluate_policy_exact(inst, plan.policy);
    worst_lp = std::max(worst_lp, dp - lp);
    worst_omr = std::max(worst_omr, omr - dp);
    csv << i << ',' << cli::format_number(lp) << ',' << cli::format_number(dp) << ',' << cli::format_number(omr)
        << '\n';
    ++checked;
  }
  write_file(out_dir / "dominance.csv", csv.str());
  const bool pass = checked == 50 && worst_lp <= 1e-6 && worst_omr <= 1e-6;
  return {pass, "50 instances, max(dp - lp) = " + fmt(worst_lp) + ", max(omr - dp) = " + fmt(worst_omr)};
}

const char* kScaleConfig =
    "scenario = birth-death\n"
    "mode = scale\n"
    "seed = 11\n"
    "trials = 500\n"
    "rho_list = 2,8,32\n";

cli::Table scale_table;

Outcome optimality_trend() {
  emit("scale.csv", [] {
    scale_table = config_table(kScaleConfig);
    return cli::to_csv(scale_table);
  });
  bool pass = scale_table.rows.size() == 3;
  std::string detail = "per-arm gap";
  for (std::size_t r = 0; r < scale_table.rows.size(); ++r) {
    detail += " " + fmt(cell(scale_table, r, "per_arm_gap")) + " (" + fmt(cell(scale_table, r, "per_arm_stderr")) + ")";
    if (r == 0) continue;
    const double drop = cell(scale_table, r - 1, "per_arm_gap") - cell(scale_table, r, "per_arm_gap");
    const double se = std::hypot(cell(scale_table, r - 1, "per_arm_stderr"), cell(scale_table, r, "per_arm_stderr"));
    pass = pass && drop > 2 * se;
  }
  return {pass, detail + " at rho 2, 8, 32 over 500 trials"};
}

Outcome mean_field_convergence() {
  if (scale_table.rows.size() != 3) return {false, "scaling run missing"};
  const double at2 = cell(scale_table, 0, "count_deviation");
  const double at32 = cell(scale_table, 2, "count_deviation");
  return {at32 < 0.5 * at2, "max deviation " + fmt(at2) + " at rho 2, " + fmt(at32) + " at rho 32"};
}

// Two classes of two arms each with action independent dynamics. Every
// class-0 reward beats every class-1 reward, so serving class 0 is optimal
// and regret comes from the sampling phase.
BanditInstance regret_instance() {
  std::mt19937_64 gen(2024);
  BanditInstance inst;
  inst.horizon = 1;
  inst.budget = 2;
  const int S = 4;
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<double> kernel;
    for (int s = 0; s < S; ++s) {
      const std::vector<double> row = fixture::random_simplex(gen, S);
      for (int a = 0; a < 2; ++a) kernel.insert(kernel.end(), row.begin(), row.end());
    }
    std::vector<double> reward(S * 2, 0.0);
    for (int s = 0; s < S; ++s) reward[s * 2 + 1] = (cls == 0 ? 0.75 : 0.1) + 0.05 * s;
    const ArmModel arm(0, S, 2, kernel, reward);
    for (int k = 0; k < 2; ++k) {
      inst.arms.push_back(arm.with_id(static_cast<int>(inst.arms.size())));
      inst.initial_state.push_back(std::vector<double>(S, 1.0 / S));
    }
  }
  return inst;
}

std::string learn_csv(const LearnResult& r) {
  cli::Table t;
  t.columns = cli::columns_for(cli::Mode::Learn);
  t.add_meta("lambda", std::to_string(r.lambda));
  t.add_meta("delta", cli::format_number(r.delta));
  t.add_meta("oracle_rate", cli::format_number(r.oracle_rate));
  for (const RegretPoint& p : r.series) t.rows.push_back({static_cast<long long>(p.t), p.cumulative_regret, p.stderr});
  return cli::to_csv(t);
}

LearnResult learn(const BanditInstance& inst, long horizon) {
  LearnOptions opts;
  opts.horizon = horizon;
  opts.eta = 0.1;
  opts.trials = 200;
  opts.seed = 5;
  opts.oracle = RegretOracle::AverageReward;
  opts.series_points = 8;
  const LearnResult r = run_learning(inst, opts);
  feasibility.decisions += r.decisions_checked;
  return r;
}

Outcome regret_shape() {
  auto small = std::make_shared<LearnResult>();
  auto large = std::make_shared<LearnResult>();
  emit("learn_4000.csv", [small] { return learn_csv(*small = learn(regret_instance(), 4000)); });
  emit("learn_16000.csv", [large] { return learn_csv(*large = learn(regret_instance(), 16000)); });
  const RegretPoint& a = small->series.back();
  const RegretPoint& b = large->series.back();
  const double ratio = b.cumulative_regret / a.cumulative_regret;
  const bool pass = a.cumulative_regret > 0 && ratio <= 2.4;
  return {pass, "regret " + fmt(a.cumulative_regret) + " (" + fmt(a.stderr) + ") at 4000, " +
                    fmt(b.cumulative_regret) + " (" + fmt(b.stderr) + ") at 16000, ratio " + fmt(ratio)};
}

bool escapes(const EmpiricalModel& m, const BanditInstance& inst) {
  for (int n = 0; n < inst.num_arms(); ++n) {
    const ArmModel& arm = inst.arms[n];
    for (int s = 0; s < arm.num_states(); ++s)
      for (int a = 0; a < arm.num_actions(); ++a) {
        if (std::abs(m.r_hat[n][s * arm.num_actions() + a] - arm.mean_reward(s, a)) > m.delta) return true;
        for (int y = 0; y < arm.num_states(); ++y)
          if (std::abs(m.transition(n, s, a, y) - arm.transition(s, a, y)) > m.delta) return true;
      }
  }
  return false;
}

Outcome confidence_coverage() {
  const BanditInstance inst = fixture::random_instance(77, 2, 3, 2, 10, 1);
  const int reps = 1000, lambda = 1000;
  const double eta = 0.1;
  int escaped = 0;
  for (int r = 0; r < reps; ++r) escaped += escapes(generative_sample(inst, lambda, eta, 9000 + r), inst);
  const double p = 2 * eta / lambda;
  const double allowed = reps * p + 3 * std::sqrt(reps * p * (1 - p));
  return {escaped <= allowed, std::to_string(escaped) + " of 1000 phases escaped, allowed " + fmt(allowed)};
}

Outcome known_model() {
  RandomMultiActionParams params;
  params.seed = 31;
  const BanditInstance inst = build_random_multi_action(params);
  const LearnedPlan learned = plan_from_model(EmpiricalModel::from_true_model(inst), inst, inst.horizon);
  const OmrPlan plan = plan_omr(inst);
  check_policy(learned.policy);
  check_policy(plan.policy);
  auto runs = std::make_shared<std::pair<PolicyRun, PolicyRun>>();
  emit("known_model.csv", [inst, learned = learned.policy, omr = plan.policy, runs] {
    const int trials = 10000;
    runs->first = observed_run(inst, OmrExecutor(learned, cost_table(inst), inst.budget, "learned"), trials, 41);
    runs->second = observed_run(inst, OmrExecutor(omr, cost_table(inst), inst.budget), trials, 42);
    std::ostringstream s;
    s << "policy,mean_reward,stderr\n";
    s << "learned," << cli::format_number(runs->first.mean) << ',' << cli::format_number(runs->first.stderr) << '\n';
    s << "omr," << cli::format_number(runs->second.mean) << ',' << cli::format_number(runs->second.stderr) << '\n';
    return s.str();
  });
  const PolicyRun& a = runs->first;
  const PolicyRun& b = runs->second;
  const double diff = std::abs(a.mean - b.mean);
  const double se = std::hypot(a.stderr, b.stderr);
  return {diff <= 2 * se, "learned " + fmt(a.mean) + ", pipeline " + fmt(b.mean) + ", |diff| " + fmt(diff) +
                              " vs 2 stderr " + fmt(2 * se)};
}

Outcome scenario_constants() {
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  };
  const BanditInstance dl = build_deadline({});
  const ArmModel& d = dl.arms[0];
  expect(d.num_states() == 109 && deadline::kNumStates == 109, "deadline state count");
  expect(std::abs(deadline::raw_reward(1, 3, 0) + 1.8) <= 1e-12, "deadline reward (D=1,B=3,a=0)");
  expect(deadline::raw_reward(5, 3, 1) == 0.5, "deadline reward (D=5,B=3,a=1)");
  expect(d.transition(deadline::state_index(4, 2), 1, deadline::state_index(3, 1)) == 1.0,
         "deadline move (D=4,B=2,a=1)");
  expect(std::abs(d.normalization().to_raw(d.mean_reward(deadline::state_index(1, 3), 0)) + 1.8) <= 1e-12,
         "deadline stored reward");

  expect(video::kSuccess[2][1] == 0.293, "video P(2,1)");
  expect(video::kSuccess[3][3] == 0.6, "video P(3,3)");
  expect(video::kSuccess[2][2] == 0.57 && video::kSuccess[3][1] == 0.01, "video table");
  const BanditInstance vs = build_video_streaming({});
  const ArmModel& v = vs.arms[0];
  expect(v.transition(5 * 4 + 1, video::action_index(2, 1), 5 * 4 + 2) == 0.293, "video kernel P(2,1)");
  expect(v.transition(5 * 4 + 1, video::action_index(3, 3), 5 * 4 + 3) == 0.6, "video kernel P(3,3)");

  double worst = 0.0;
  for (int lambda : {1, 10, 1000, 10000, 1000000})
    for (double eta : {0.5, 0.1, 0.01})
      for (int pairs : {2, 8, 60}) {
        const long double ref = std::sqrt(std::log(static_cast<long double>(pairs) * lambda / eta) / (2.0L * lambda));
        const double got = confidence_radius(pairs, lambda, eta);
        worst = std::max(worst, static_cast<double>(std::abs((got - ref) / ref)));
      }
  expect(worst <= 1e-15, "confidence radius");

  std::string detail = "confidence radius max relative error " + fmt(worst);
  for (const std::string& f : failed) detail += "; mismatch: " + f;
  return {failed.empty(), detail};
}

const char* kBaselineConfig =
    "scenario = random-multi-action\n"
    "mode = baselines\n"
    "seed = 13\n"
    "trials = 500\n"
    "horizon = 100\n"
    "random.N = 50\n"
    "random.A = 3\n";

Outcome baseline_separation() {
  auto table = std::make_shared<cli::Table>();
  emit("baselines.csv", [table] {
    *table = config_table(kBaselineConfig);
    return cli::to_csv(*table);
  });
  const cli::Table& t = *table;
  std::size_t omr = 0, greedy = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& name = std::get<std::string>(t.rows[r][0]);
    if (name == "omr") omr = r;
    if (name == "greedy") greedy = r;
  }
  const double diff = cell(t, omr, "mean_reward") - cell(t, greedy, "mean_reward");
  const double se = std::hypot(cell(t, omr, "stderr"), cell(t, greedy, "stderr"));
  return {diff > 2 * se, "omr " + fmt(cell(t, omr, "mean_reward")) + ", greedy " + fmt(cell(t, greedy, "mean_reward")) +
                             ", difference " + fmt(diff) + " vs 2 stderr " + fmt(2 * se)};
}

// Also runs the plan-mode CLI path once so its decisions are counted.
Outcome feasibility_counters() {
  const std::string plan_cfg = "scenario = birth-death\nmode = plan\nseed = 3\ntrials = 200\n";
  auto table = std::make_shared<cli::Table>();
  emit("plan.csv", [plan_cfg, table] {
    *table = config_table(plan_cfg);
    return cli::to_csv(*table);
  });
  feasibility.decisions += meta_long(*table, "decisions_checked");
  const bool pass = feasibility.budget_violations == 0 && feasibility.policy_violations == 0 &&
                    feasibility.invariant_errors == 0 && feasibility.decisions > 0 && feasibility.policies > 0;
  return {pass, std::to_string(feasibility.decisions) + " decisions, " + std::to_string(feasibility.budget_violations) +
                    " budget violations; " + std::to_string(feasibility.policies) + " policies, " +
                    std::to_string(feasibility.policy_violations) + " normalization violations"};
}

Outcome determinism() {
  std::vector<std::string> differing;
  for (const Artifact& a : artifacts)
    if (a.produce() != read_file(out_dir / a.name)) differing.push_back(a.name);
  std::string detail = std::to_string(artifacts.size()) + " output files rerun";
  for (const std::string& d : differing) detail += "; differs: " + d;
  return {differing.empty() && !artifacts.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  out_dir = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "rmab_acceptance";
  fs::create_directories(out_dir);

  // Feasibility and determinism look back over the other runs, so they go
  // last; lines are printed in criterion order.
  struct Criterion {
    int number;
    std::string name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "dominance chain", dominance_chain},
      {2, "optimality gap shrinks with rho", optimality_trend},
      {3, "class counts approach the occupancy measure", mean_field_convergence},
      {4, "regret grows like sqrt(T)", regret_shape},
      {5, "confidence band coverage", confidence_coverage},
      {6, "known model reduces to the planner", known_model},
      {7, "scenario constants and radius formula", scenario_constants},
      {9, "index policy beats greedy", baseline_separation},
      {8, "feasibility", feasibility_counters},
      {10, "determinism", determinism},
  };

  std::map<int, std::string> lines;
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << "criterion " << c.number << " done in " << fmt(secs) << " s" << std::endl;
    lines[c.number] = std::string(o.pass ? "PASS" : "FAIL") + "  criterion " + std::to_string(c.number) + " " + c.name +
                      ": " + o.detail + " [" + fmt(secs) + " s]";
    failures += !o.pass;
  }
  for (const auto& [number, line] : lines) std::cout << line << '\n';
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
