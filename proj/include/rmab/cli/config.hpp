#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rmab/learner.hpp"
#include "rmab/model.hpp"
#include "rmab/scenarios.hpp"

namespace rmab::cli {

enum class ScenarioKind { BirthDeath, RandomMultiAction, Deadline, VideoStreaming };
enum class Mode { Plan, Learn, Scale, Baselines, Oracle };
enum class Format { Csv, Json };

std::string to_string(ScenarioKind kind);
std::string to_string(Mode mode);

struct ExperimentConfig {
  ScenarioKind scenario = ScenarioKind::BirthDeath;
  Mode mode = Mode::Plan;
  int trials = 100;
  std::uint64_t seed = 0;
  int horizon = 100;
  double eta = 0.1;
  int lambda_override = 0;
  std::vector<int> rho_list = {2, 8, 32};
  std::string output = "-";
  Format format = Format::Csv;

  BirthDeathParams birth_death;
  RandomMultiActionParams random;
  DeadlineParams deadline;
  VideoParams video;

  RegretOracle oracle = RegretOracle::Auto;
  int max_lp_horizon = 256;
  int series_points = 20;

  /// Effective value of every key relevant to this run, as text, for the
  /// output header. Ordered by key.
  std::map<std::string, std::string> echo;
};

/// Parse the flat `key = value` format: one pair per line, `#` starts a
/// comment, blank lines are ignored. Throws ConfigError naming the key on an
/// unknown or duplicate key, a missing required key (scenario, mode, seed) or
/// a value outside its accepted range.
ExperimentConfig parse_config(std::string_view text);

/// Apply `key=value` overrides on top of a config text (later wins).
ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides);

/// Every accepted key with its default and accepted range, one per line.
std::string describe_keys();

/// The configured scenario. Randomized builders draw from the child stream
/// ("scenario", 0) of the run seed.
BanditInstance build_scenario(const ExperimentConfig& config);

/// Base instance for the scaling experiment. For birth-death it has one arm
/// per class and budget floor(alpha * classes); otherwise it is the
/// configured instance.
BanditInstance build_scaling_base(const ExperimentConfig& config);

}  // namespace rmab::cli
