#include <doctest.h>

#include <cmath>

#include "rmab/errors.hpp"
#include "rmab/planner.hpp"
#include "rmab/scenarios.hpp"

using namespace rmab;

namespace {

void check_rows(const BanditInstance& inst) {
  for (const ArmModel& arm : inst.arms)
    for (int s = 0; s < arm.num_states(); ++s)
      for (int a = 0; a < arm.num_actions(); ++a) {
        double sum = 0.0;
        for (double p : arm.transition_row(s, a)) {
          CHECK(p >= 0.0);
          sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      }
}

}  // namespace

TEST_CASE("birth-death defaults") {
  const BanditInstance inst = build_birth_death({});
  CHECK(inst.num_arms() == 100);
  CHECK(inst.budget == 30);
  CHECK(inst.horizon == 100);
  CHECK(inst.arms[0].num_states() == 10);
  CHECK(inst.arms[0].num_actions() == 2);
  CHECK(validate_instance(inst).empty());
  check_rows(inst);
}

TEST_CASE("birth-death symmetric rates split evenly") {
  BirthDeathParams p;
  p.lambdas = {20};
  p.mu = 20;
  p.num_arms = 3;
  const BanditInstance inst = build_birth_death(p);
  const ArmModel& arm = inst.arms[0];
  for (int a = 0; a < 2; ++a) {
    CHECK(arm.transition(4, a, 5) == 0.5);
    CHECK(arm.transition(4, a, 3) == 0.5);
    CHECK(arm.transition(0, a, 0) == 0.5);  // blocked move down
    CHECK(arm.transition(9, a, 9) == 0.5);  // blocked move up
  }
  check_rows(inst);
}

TEST_CASE("birth-death rewards scale with the level") {
  BirthDeathParams p;
  p.num_arms = 10;
  p.seed = 4;
  const BanditInstance inst = build_birth_death(p);
  const std::vector<double> rates = birth_death_success_rates(p);
  REQUIRE(rates.size() == 10);
  for (int n = 0; n < 10; ++n) {
    const double rate = rates[n % rates.size()];
    CHECK(rate >= p.p_min);
    CHECK(rate <= p.p_max);
    for (int s = 0; s < 10; ++s) {
      CHECK(inst.arms[n].mean_reward(s, 0) == 0.0);
      CHECK(inst.arms[n].mean_reward(s, 1) == doctest::Approx((s + 1) * rate));
    }
  }
  CHECK(build_birth_death(p).arms[3].reward_matrix() == inst.arms[3].reward_matrix());
}

TEST_CASE("random multi-action instance") {
  RandomMultiActionParams p;
  p.seed = 11;
  const BanditInstance inst = build_random_multi_action(p);
  CHECK(validate_instance(inst).empty());
  check_rows(inst);
  for (const ArmModel& arm : inst.arms) {
    for (int a = 0; a < 3; ++a) CHECK(arm.cost(a) == a);
    for (int s = 0; s < 5; ++s) CHECK(arm.mean_reward(s, 0) == 0.0);
  }
  const BanditInstance again = build_random_multi_action(p);
  for (int n = 0; n < inst.num_arms(); ++n) {
    CHECK(again.arms[n].transition_tensor() == inst.arms[n].transition_tensor());
    CHECK(again.arms[n].reward_matrix() == inst.arms[n].reward_matrix());
  }
  p.seed = 12;
  CHECK(build_random_multi_action(p).arms[0].transition_tensor() != inst.arms[0].transition_tensor());
}

TEST_CASE("fewer actions restrict the larger instance") {
  RandomMultiActionParams p;
  p.seed = 5;
  p.num_actions = 5;
  p.budget = 6;
  const BanditInstance wide = build_random_multi_action(p);
  p.num_actions = 2;
  const BanditInstance narrow = build_random_multi_action(p);
  for (int n = 0; n < p.num_arms; ++n)
    for (int s = 0; s < p.num_states; ++s)
      for (int a = 0; a < 2; ++a) {
        CHECK(narrow.arms[n].mean_reward(s, a) == wide.arms[n].mean_reward(s, a));
        for (int y = 0; y < p.num_states; ++y)
          CHECK(narrow.arms[n].transition(s, a, y) == wide.arms[n].transition(s, a, y));
      }
  CHECK(relaxed_upper_bound(narrow) <= relaxed_upper_bound(wide) + 1e-9);
}

TEST_CASE("classes share models") {
  RandomMultiActionParams p;
  p.classes = 3;
  p.seed = 2;
  const BanditInstance inst = build_random_multi_action(p);
  CHECK(inst.arms[0].transition_tensor() == inst.arms[3].transition_tensor());
  CHECK(inst.arms[1].reward_matrix() == inst.arms[7].reward_matrix());
  CHECK(inst.arms[0].transition_tensor() != inst.arms[1].transition_tensor());
}

TEST_CASE("deadline state space") {
  CHECK(deadline::kNumStates == 109);
  for (int i = 0; i < deadline::kNumStates; ++i) {
    const auto [d, b] = deadline::state_of(i);
    CHECK(deadline::state_index(d, b) == i);
  }
  CHECK_THROWS_AS(deadline::state_index(13, 1), UsageError);
}

TEST_CASE("deadline rewards") {
  CHECK(deadline::raw_reward(1, 3, 0) == doctest::Approx(-1.8));
  CHECK(deadline::raw_reward(5, 3, 1) == 0.5);
  CHECK(deadline::raw_reward(1, 3, 1) == doctest::Approx(0.5 - 0.8));
  CHECK(deadline::raw_reward(0, 0, 1) == 0.0);
}

TEST_CASE("deadline dynamics") {
  const BanditInstance inst = build_deadline({});
  CHECK(validate_instance(inst).empty());
  check_rows(inst);
  const ArmModel& arm = inst.arms[0];
  CHECK(arm.transition(deadline::state_index(4, 2), 1, deadline::state_index(3, 1)) == 1.0);
  CHECK(arm.transition(deadline::state_index(4, 2), 0, deadline::state_index(3, 2)) == 1.0);
  CHECK(arm.transition(deadline::state_index(2, 1), 1, 0) == 1.0);
  CHECK(arm.transition(deadline::state_index(1, 5), 1, 0) == doctest::Approx(0.3));
  CHECK(arm.transition(0, 0, deadline::state_index(12, 9)) == doctest::Approx(0.7 / 108));
  CHECK(inst.initial_state[0][0] == 1.0);
  CHECK(inst.budget == 30);
  const RewardNormalization& norm = arm.normalization();
  const int s = deadline::state_index(1, 3);
  CHECK(norm.to_raw(arm.mean_reward(s, 0)) == doctest::Approx(-1.8));
  for (double r : arm.reward_matrix()) {
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
}

TEST_CASE("video success table") {
  CHECK(video::success_probability(2, 1) == 0.293);
  CHECK(video::success_probability(3, 3) == 0.6);
  CHECK(video::success_probability(1, 1) == 1.0);
  for (int a = 0; a < video::kNumActions; ++a) {
    const auto [r, w] = video::action_of(a);
    CHECK(video::action_index(r, w) == a);
  }
}

TEST_CASE("video dynamics and rewards") {
  VideoParams p;
  const BanditInstance inst = build_video_streaming(p);
  CHECK(validate_instance(inst).empty());
  check_rows(inst);
  const ArmModel& arm = inst.arms[0];
  CHECK(arm.num_states() == 44);
  CHECK(arm.cost(video::action_index(2, 2)) == 3);
  CHECK(arm.cost(0) == 0);
  // Passive drains one second and keeps the last quality.
  CHECK(arm.transition(5 * 4 + 2, 0, 4 * 4 + 2) == 1.0);
  CHECK(arm.transition(0 * 4 + 3, 0, 0 * 4 + 3) == 1.0);
  const int a = video::action_index(2, 1);
  CHECK(arm.transition(5 * 4 + 1, a, 5 * 4 + 2) == doctest::Approx(0.293));
  CHECK(arm.transition(5 * 4 + 1, a, 4 * 4 + 1) == doctest::Approx(0.707));
  CHECK(arm.transition(0 * 4 + 1, a, 1 * 4 + 2) == doctest::Approx(0.293));
  for (int r = 1; r <= 3; ++r)
    for (int w = 1; w <= 3; ++w)
      CHECK(video::raw_reward(3, r, r, w) == doctest::Approx(r * video::success_probability(r, w)));
  CHECK(video::raw_reward(0, 0, 0, 0) == -1.0);
  const RewardNormalization& norm = arm.normalization();
  CHECK(norm.to_raw(arm.mean_reward(0, 0)) == doctest::Approx(-1.0));
  CHECK(inst.budget == 15);
}

TEST_CASE("normalization map") {
  const RewardNormalization n = normalization_for({-2.0, 0.0, 2.0});
  CHECK(n.to_planning(-2.0) == 0.0);
  CHECK(n.to_planning(2.0) == 1.0);
  CHECK(n.to_raw(0.5) == doctest::Approx(0.0));
  CHECK(normalization_for({3.0, 3.0}).scale == 1.0);
}

TEST_CASE("bad parameters are usage errors") {
  BirthDeathParams b;
  b.lambdas.clear();
  CHECK_THROWS_AS(build_birth_death(b), UsageError);
  RandomMultiActionParams r;
  r.num_actions = 1;
  CHECK_THROWS_AS(build_random_multi_action(r), UsageError);
  DeadlineParams d;
  d.num_arms = 0;
  CHECK_THROWS_AS(build_deadline(d), UsageError);
  VideoParams v;
  v.buffer_max = 0;
  CHECK_THROWS_AS(build_video_streaming(v), UsageError);
}
