#include <doctest.h>

#include <cmath>

#include "rmab/errors.hpp"
#include "rmab/learner.hpp"
#include "rmab/planner.hpp"
#include "rmab/scenarios.hpp"
#include "rmab/simulator.hpp"
#include "support/instances.hpp"

using namespace rmab;

namespace {

// True kernel outside [p_hat - delta, p_hat + delta] anywhere.
bool escapes(const EmpiricalModel& m, const BanditInstance& inst) {
  for (int n = 0; n < inst.num_arms(); ++n) {
    const ArmModel& arm = inst.arms[n];
    for (int s = 0; s < arm.num_states(); ++s)
      for (int a = 0; a < arm.num_actions(); ++a)
        for (int y = 0; y < arm.num_states(); ++y)
          if (std::abs(arm.transition(s, a, y) - m.transition(n, s, a, y)) > m.delta) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("samples per pair is the ceiling square root") {
  CHECK(samples_per_pair(1) == 1);
  CHECK(samples_per_pair(4) == 2);
  CHECK(samples_per_pair(5) == 3);
  CHECK(samples_per_pair(16000) == 127);
  CHECK(samples_per_pair(1'000'000) == 1000);
}

TEST_CASE("confidence radius formula") {
  const double expected = std::sqrt(std::log(2.0 * 2.0 * 2.0 * 1e4 / 0.1) / (2.0 * 1e4));
  CHECK(std::abs(confidence_radius(8, 10000, 0.1) - expected) <= 1e-15 * expected);
}

TEST_CASE("radius grows as eta shrinks") {
  double previous = 0.0;
  for (double eta : {0.5, 0.1, 0.01, 1e-4, 1e-8}) {
    const double d = confidence_radius(12, 100, eta);
    CHECK(d > previous);
    previous = d;
  }
}

TEST_CASE("deterministic kernel is estimated exactly") {
  const BanditInstance inst = fixture::identical_arms(fixture::switch_arm(0, 0.5), 2, 10, 1);
  const EmpiricalModel m = generative_sample(inst, 25, 0.1, 3);
  CHECK(m.p_hat[0] == inst.arms[0].transition_tensor());
  CHECK(m.p_hat[1] == inst.arms[1].transition_tensor());
  CHECK(m.samples_per_pair == 25);
  CHECK(m.planning_steps == 4 * 25);
  for (const auto& c : m.counts) {
    std::int64_t total = 0;
    for (auto k : c) total += k;
    CHECK(total == 4 * 25);
  }
}

TEST_CASE("sampling is reproducible per seed") {
  const BanditInstance inst = fixture::random_instance(3, 2, 3, 2, 10, 1);
  const EmpiricalModel a = generative_sample(inst, 50, 0.1, 8);
  const EmpiricalModel b = generative_sample(inst, 50, 0.1, 8);
  const EmpiricalModel c = generative_sample(inst, 50, 0.1, 9);
  CHECK(a.counts == b.counts);
  CHECK(a.r_hat == b.r_hat);
  CHECK(a.counts != c.counts);
}

TEST_CASE("true kernel stays inside the band") {
  const BanditInstance inst = fixture::random_instance(4, 2, 2, 2, 10, 1);
  const int reps = 1000, lambda = 100;
  const double eta = 0.1;
  int escaped = 0;
  for (int r = 0; r < reps; ++r) escaped += escapes(generative_sample(inst, lambda, eta, 1000 + r), inst);
  CHECK(escaped <= reps * 2 * eta / lambda);
}

TEST_CASE("extended program sizes") {
  const BanditInstance inst = fixture::identical_arms(fixture::switch_arm(0, 0.5), 1, 2, 1);
  const EmpiricalModel m = EmpiricalModel::from_true_model(inst);
  const ExtendedLp lp = build_extended_lp(m, inst, 2);
  CHECK(lp.program.num_cols() == 16);
  CHECK(lp.budget_rows.size() == 2);
  CHECK(lp.initial_rows.size() == 2);
  CHECK(lp.flow_rows.size() == 2);
  CHECK(lp.band_rows.size() == 2 * 2 * 2 * 2 * 2);
  CHECK(lp.program.num_rows() == 2 + 2 + 2 + 32);
}

TEST_CASE("collapsed bands reproduce the relaxed program") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const BanditInstance inst = fixture::random_instance(seed + 7, 3, 3, 3, 5, 2);
    const EmpiricalModel m = EmpiricalModel::from_true_model(inst);
    const double ext = solve_extended_lp(build_extended_lp(m, inst, 5)).objective;
    CHECK(std::abs(ext - relaxed_upper_bound(inst)) <= 1e-6);
    const double skipped = solve_extended_lp(build_extended_lp(m, inst, 5, {.skip_vacuous_bands = true})).objective;
    CHECK(std::abs(skipped - ext) <= 1e-6);
  }
}

TEST_CASE("collapsed bands on the default multi-action scenario") {
  // Paired band rows with equal bounds are exactly dependent; this size used
  // to drive the basis singular.
  RandomMultiActionParams p;
  p.horizon = 6;
  const BanditInstance inst = build_random_multi_action(p);
  const ExtendedOccupancy occ =
      solve_extended_lp(build_extended_lp(EmpiricalModel::from_true_model(inst), inst, inst.horizon));
  CHECK(occ.objective == doctest::Approx(relaxed_upper_bound(inst)).epsilon(1e-9));
}

TEST_CASE("stationary program with collapsed bands is the stationary rate") {
  const BanditInstance inst = fixture::random_instance(5, 2, 3, 2, 1, 1);
  const EmpiricalModel m = EmpiricalModel::from_true_model(inst);
  const ExtendedLp lp = build_extended_lp(m, inst, 1, {.stationary = true});
  CHECK(lp.initial_rows.size() == 2);  // unit mass per arm
  CHECK(solve_extended_lp(lp).objective == doctest::Approx(stationary_lp_rate(inst)).epsilon(1e-9));
  CHECK(stationary_lp_rate(inst) >= average_reward_oracle(inst) - 1e-9);
}

TEST_CASE("optimism holds when the bands cover the truth") {
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const BanditInstance inst = fixture::random_instance(seed + 40, 2, 3, 2, 4, 1);
    const EmpiricalModel m = generative_sample(inst, 60, 0.1, seed);
    if (escapes(m, inst)) continue;
    bool rewards_covered = true;
    for (int n = 0; n < 2; ++n)
      for (int k = 0; k < 6; ++k)
        rewards_covered = rewards_covered && std::abs(m.r_hat[n][k] - inst.arms[n].reward_matrix()[k]) <= m.delta;
    if (!rewards_covered) continue;
    ++covered;
    const double optimistic = solve_extended_lp(build_extended_lp(m, inst, 4)).objective;
    CHECK(optimistic >= relaxed_upper_bound(inst) - 1e-6);
  }
  CHECK(covered > 10);
}

TEST_CASE("concentrated z gives a point mass") {
  ExtendedOccupancy occ;
  occ.layout.slices = 1;
  occ.layout.shapes = {{2, 3}};
  occ.layout.offset = {0};
  occ.z.assign(2 * 3 * 2, 0.0);
  occ.z[occ.layout.column(0, 0, 1, 2, 0)] = 0.7;
  const RandomizedPolicy chi = recover_learned_policy(occ);
  CHECK(chi.chi(0, 1, 2, 0) == 1.0);
  CHECK(chi.chi(0, 0, 0, 0) == 1.0);  // no mass: passive
}

TEST_CASE("recovery through the marginal of z") {
  const BanditInstance inst = fixture::random_instance(13, 2, 3, 3, 4, 2);
  const EmpiricalModel m = generative_sample(inst, 30, 0.2, 1);
  const ExtendedOccupancy occ = solve_extended_lp(build_extended_lp(m, inst, 4));
  OccupancySolution mu(shapes_of(inst), 4);
  for (int n = 0; n < 2; ++n)
    for (int t = 0; t < 4; ++t)
      for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 3; ++a) {
          double sum = 0.0;
          for (int y = 0; y < 3; ++y) sum += occ.at(n, t, s, a, y);
          mu.mu(n, t, s, a) = sum;
        }
  const RandomizedPolicy a = recover_learned_policy(occ);
  const RandomizedPolicy b = recover_policy(mu);
  CHECK(validate_policy(a).empty());
  for (int n = 0; n < 2; ++n)
    for (int t = 0; t < 4; ++t)
      for (int s = 0; s < 3; ++s)
        for (int k = 0; k < 3; ++k) CHECK(a.chi(n, s, k, t) == doctest::Approx(b.chi(n, s, k, t)).epsilon(1e-12));
}

TEST_CASE("recovered rows are distributions on random instances") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const BanditInstance inst = fixture::random_instance(seed + 90, 3, 3, 3, 3, 2);
    const LearnedPlan plan = plan_from_model(generative_sample(inst, 20, 0.1, seed), inst, 3);
    CHECK(validate_policy(plan.policy).empty());
    CHECK(plan.policy.has_indices());
  }
}

TEST_CASE("injected true model reproduces the planning pipeline") {
  const BanditInstance inst = fixture::random_instance(17, 4, 3, 2, 8, 2);
  const LearnedPlan learned = plan_from_model(EmpiricalModel::from_true_model(inst), inst, inst.horizon);
  const OmrPlan plan = plan_omr(inst);
  CHECK(learned.occupancy.objective == doctest::Approx(plan.occupancy.objective).epsilon(1e-8));
  RunOptions opts;
  opts.trials = 4000;
  opts.seed = 2;
  const PolicyRun a = run_policy(inst, OmrExecutor(learned.policy, cost_table(inst), inst.budget), opts);
  opts.seed = 3;
  const PolicyRun b = run_policy(inst, OmrExecutor(plan.policy, cost_table(inst), inst.budget), opts);
  CHECK(std::abs(a.mean - b.mean) <= 2 * std::hypot(a.stderr, b.stderr));
}

TEST_CASE("horizon too short for the planning phase") {
  const BanditInstance inst = fixture::random_instance(1, 2, 3, 2, 10, 1);
  const long minimum = minimum_learning_horizon(inst);
  CHECK(6 * samples_per_pair(minimum) < minimum);
  CHECK(6 * samples_per_pair(minimum - 1) >= minimum - 1);
  LearnOptions opts;
  opts.horizon = minimum - 1;
  opts.trials = 1;
  try {
    run_learning(inst, opts);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "horizon");
    CHECK(std::string(e.what()).find(std::to_string(minimum)) != std::string::npos);
  }
  opts.horizon = minimum;
  CHECK_NOTHROW(run_learning(inst, opts));
}

TEST_CASE("learning run bookkeeping") {
  const BanditInstance inst = fixture::random_instance(6, 2, 2, 2, 10, 1);
  LearnOptions opts;
  opts.horizon = 2000;
  opts.trials = 20;
  opts.seed = 5;
  opts.series_points = 4;
  const LearnResult r = run_learning(inst, opts);
  CHECK(r.lambda == 45);
  CHECK(r.planning_steps == 4 * 45);
  CHECK(r.execution_steps == 2000 - 180);
  CHECK(r.stationary_plan);
  CHECK(r.oracle == RegretOracle::AverageReward);
  REQUIRE(r.series.size() == 4);
  CHECK(r.series.back().t == 2000);
  CHECK(r.series.back().cumulative_regret == doctest::Approx(2000 * r.oracle_rate - r.mean_reward));
  CHECK(r.decisions_checked == 20 * 1820);
  const LearnResult again = run_learning(inst, opts);
  CHECK(again.mean_reward == r.mean_reward);
}
