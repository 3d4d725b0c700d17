#include "rmab/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "rmab/errors.hpp"
#include "rmab/rng.hpp"

namespace rmab::cli {

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::BirthDeath: return "birth-death";
    case ScenarioKind::RandomMultiAction: return "random-multi-action";
    case ScenarioKind::Deadline: return "deadline";
    case ScenarioKind::VideoStreaming: return "video-streaming";
  }
  return "unknown";
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Plan: return "plan";
    case Mode::Learn: return "learn";
    case Mode::Scale: return "scale";
    case Mode::Baselines: return "baselines";
    case Mode::Oracle: return "oracle";
  }
  return "unknown";
}

namespace {

enum class Scope { Core, BirthDeath, Random, Deadline, Video, Learner };

struct KeySpec {
  std::string name;
  std::string fallback;  // empty: required, or derived from other keys
  std::string range;
  Scope scope;
  std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)> apply;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void out_of_range(const std::string& key, const std::string& value, const std::string& range) {
  throw ConfigError(key, "value '" + value + "' is outside the accepted range " + range);
}

long long parse_integer(const std::string& key, const std::string& value, long long lo, long long hi,
                        const std::string& range) {
  long long v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) out_of_range(key, value, range);
  if (v < lo || v > hi) out_of_range(key, value, range);
  return v;
}

int parse_int(const std::string& key, const std::string& value, int lo, int hi, const std::string& range) {
  return static_cast<int>(parse_integer(key, value, lo, hi, range));
}

double parse_real(const std::string& key, const std::string& value, const std::function<bool(double)>& ok,
                  const std::string& range) {
  double v = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size() || !std::isfinite(v) || !ok(v))
    out_of_range(key, value, range);
  return v;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

constexpr int kMaxInt = std::numeric_limits<int>::max();

std::vector<KeySpec> key_table() {
  std::vector<KeySpec> keys;
  auto add = [&](std::string name, std::string fallback, std::string range, Scope scope, auto apply) {
    keys.push_back({std::move(name), std::move(fallback), std::move(range), scope, apply});
  };

  add("scenario", "", "{birth-death, random-multi-action, deadline, video-streaming}", Scope::Core,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        if (v == "birth-death") c.scenario = ScenarioKind::BirthDeath;
        else if (v == "random-multi-action") c.scenario = ScenarioKind::RandomMultiAction;
        else if (v == "deadline") c.scenario = ScenarioKind::Deadline;
        else if (v == "video-streaming") c.scenario = ScenarioKind::VideoStreaming;
        else out_of_range(k, v, "{birth-death, random-multi-action, deadline, video-streaming}");
      });
  add("mode", "", "{plan, learn, scale, baselines, oracle}", Scope::Core,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        if (v == "plan") c.mode = Mode::Plan;
        else if (v == "learn") c.mode = Mode::Learn;
        else if (v == "scale") c.mode = Mode::Scale;
        else if (v == "baselines") c.mode = Mode::Baselines;
        else if (v == "oracle") c.mode = Mode::Oracle;
        else out_of_range(k, v, "{plan, learn, scale, baselines, oracle}");
      });
  add("seed", "", "[0, 2^64 - 1]", Scope::Core, [](ExperimentConfig& c, const std::string& k, const std::string& v) {
    std::uint64_t s = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), s);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) out_of_range(k, v, "[0, 2^64 - 1]");
    c.seed = s;
  });
  add("trials", "100", "[1, 10000000]", Scope::Core, [](ExperimentConfig& c, const std::string& k, const std::string& v) {
    c.trials = parse_int(k, v, 1, 10'000'000, "[1, 10000000]");
  });
  add("horizon", "100", "[1, 100000000]", Scope::Core,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.horizon = parse_int(k, v, 1, 100'000'000, "[1, 100000000]");
      });
  add("eta", "0.1", "(0, 1)", Scope::Core, [](ExperimentConfig& c, const std::string& k, const std::string& v) {
    c.eta = parse_real(k, v, [](double x) { return x > 0.0 && x < 1.0; }, "(0, 1)");
  });
  add("lambda_override", "0", "[0, 2147483647] (0 = ceil(sqrt(horizon)))", Scope::Core,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.lambda_override = parse_int(k, v, 0, kMaxInt, "[0, 2147483647] (0 = ceil(sqrt(horizon)))");
      });
  add("rho_list", "2,8,32", "comma-separated integers in [1, 100000]", Scope::Core,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.rho_list.clear();
        for (const auto& item : split_list(v))
          c.rho_list.push_back(parse_int(k, item, 1, 100'000, "comma-separated integers in [1, 100000]"));
        if (c.rho_list.empty()) out_of_range(k, v, "comma-separated integers in [1, 100000]");
      });
  add("output", "-", "file path, or - for standard output", Scope::Core,
      [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output = v; });
  add("format", "csv", "{csv, json}", Scope::Core, [](ExperimentConfig& c, const std::string& k, const std::string& v) {
    if (v == "csv") c.format = Format::Csv;
    else if (v == "json") c.format = Format::Json;
    else out_of_range(k, v, "{csv, json}");
  });

  add("birth_death.N", "100", "[1, 1000000]", Scope::BirthDeath,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.birth_death.num_arms = parse_int(k, v, 1, 1'000'000, "[1, 1000000]");
      });
  add("birth_death.S", "10", "[2, 1000]", Scope::BirthDeath,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.birth_death.num_states = parse_int(k, v, 2, 1000, "[2, 1000]");
      });
  add("birth_death.alpha", "0.3", "[0, 1]", Scope::BirthDeath,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.birth_death.alpha = parse_real(k, v, [](double x) { return x >= 0.0 && x <= 1.0; }, "[0, 1]");
      });
  add("birth_death.mu", "20", "(0, inf)", Scope::BirthDeath,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.birth_death.mu = parse_real(k, v, [](double x) { return x > 0.0; }, "(0, inf)");
      });
  add("birth_death.lambdas", "3,6,9,12,15,18,21,24,27,30", "comma-separated reals in (0, inf)", Scope::BirthDeath,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.birth_death.lambdas.clear();
        for (const auto& item : split_list(v))
          c.birth_death.lambdas.push_back(
              parse_real(k, item, [](double x) { return x > 0.0; }, "comma-separated reals in (0, inf)"));
        if (c.birth_death.lambdas.empty()) out_of_range(k, v, "comma-separated reals in (0, inf)");
      });
  add("birth_death.p_min", "0.01", "[0, 1]", Scope::BirthDeath,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.birth_death.p_min = parse_real(k, v, [](double x) { return x >= 0.0 && x <= 1.0; }, "[0, 1]");
      });
  add("birth_death.p_max", "0.1", "[0, 1]", Scope::BirthDeath,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.birth_death.p_max = parse_real(k, v, [](double x) { return x >= 0.0 && x <= 1.0; }, "[0, 1]");
      });

  add("random.N", "10", "[1, 1000000]", Scope::Random, [](ExperimentConfig& c, const std::string& k, const std::string& v) {
    c.random.num_arms = parse_int(k, v, 1, 1'000'000, "[1, 1000000]");
  });
  add("random.S", "5", "[1, 1000]", Scope::Random, [](ExperimentConfig& c, const std::string& k, const std::string& v) {
    c.random.num_states = parse_int(k, v, 1, 1000, "[1, 1000]");
  });
  add("random.A", "3", "[2, 100] (actions including passive)", Scope::Random,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.random.num_actions = parse_int(k, v, 2, 100, "[2, 100] (actions including passive)");
      });
  add("random.K", "", "[0, 2147483647] (default floor(0.3 N))", Scope::Random,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.random.budget = parse_int(k, v, 0, kMaxInt, "[0, 2147483647] (default floor(0.3 N))");
      });
  add("random.classes", "0", "[0, 1000000] (0 = every arm distinct)", Scope::Random,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.random.classes = parse_int(k, v, 0, 1'000'000, "[0, 1000000] (0 = every arm distinct)");
      });

  add("deadline.N", "100", "[1, 1000000]", Scope::Deadline,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.deadline.num_arms = parse_int(k, v, 1, 1'000'000, "[1, 1000000]");
      });
  add("deadline.M", "30", "[0, 1000000]", Scope::Deadline,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.deadline.capacity = parse_int(k, v, 0, 1'000'000, "[0, 1000000]");
      });

  add("video.N", "10", "[1, 1000000]", Scope::Video, [](ExperimentConfig& c, const std::string& k, const std::string& v) {
    c.video.num_arms = parse_int(k, v, 1, 1'000'000, "[1, 1000000]");
  });
  add("video.bandwidth", "15", "[0, 100000000]", Scope::Video,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.video.total_bandwidth = parse_int(k, v, 0, 100'000'000, "[0, 100000000]");
      });
  add("video.bmax", "10", "[1, 1000]", Scope::Video, [](ExperimentConfig& c, const std::string& k, const std::string& v) {
    c.video.buffer_max = parse_int(k, v, 1, 1000, "[1, 1000]");
  });

  add("learner.oracle", "auto", "{auto, dp, lp}", Scope::Learner,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        if (v == "auto") c.oracle = RegretOracle::Auto;
        else if (v == "dp") c.oracle = RegretOracle::AverageReward;
        else if (v == "lp") c.oracle = RegretOracle::LpRate;
        else out_of_range(k, v, "{auto, dp, lp}");
      });
  add("learner.max_lp_horizon", "256", "[1, 100000]", Scope::Learner,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.max_lp_horizon = parse_int(k, v, 1, 100'000, "[1, 100000]");
      });
  add("learner.series_points", "20", "[1, 100000]", Scope::Learner,
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        c.series_points = parse_int(k, v, 1, 100'000, "[1, 100000]");
      });
  return keys;
}

bool scope_relevant(Scope scope, const ExperimentConfig& c) {
  switch (scope) {
    case Scope::Core: return true;
    case Scope::BirthDeath: return c.scenario == ScenarioKind::BirthDeath;
    case Scope::Random: return c.scenario == ScenarioKind::RandomMultiAction;
    case Scope::Deadline: return c.scenario == ScenarioKind::Deadline;
    case Scope::Video: return c.scenario == ScenarioKind::VideoStreaming;
    case Scope::Learner: return c.mode == Mode::Learn;
  }
  return false;
}

void read_pairs(std::string_view text, std::map<std::string, std::string>& given, bool allow_repeat) {
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(number), "expected key = value, got '" + body + "'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(number), "empty key");
    if (value.empty()) throw ConfigError(key, "empty value");
    if (!allow_repeat && given.count(key)) throw ConfigError(key, "key given more than once");
    given[key] = value;
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides) {
  std::map<std::string, std::string> given;
  read_pairs(text, given, false);
  for (const auto& o : overrides) read_pairs(o, given, true);

  const auto keys = key_table();
  std::set<std::string> known;
  for (const auto& k : keys) known.insert(k.name);
  for (const auto& [key, value] : given)
    if (!known.count(key)) throw ConfigError(key, "unknown key");
  for (const auto& k : keys)
    if (k.fallback.empty() && k.scope == Scope::Core && !given.count(k.name))
      throw ConfigError(k.name, "required key is missing; accepted range " + k.range);

  ExperimentConfig c;
  for (const auto& k : keys) {
    auto it = given.find(k.name);
    if (it != given.end()) {
      k.apply(c, k.name, it->second);
    } else if (!k.fallback.empty()) {
      k.apply(c, k.name, k.fallback);
    }
  }
  if (!given.count("random.K")) c.random.budget = static_cast<int>(std::floor(0.3 * c.random.num_arms + 1e-9));
  if (c.birth_death.p_min > c.birth_death.p_max) throw ConfigError("birth_death.p_min", "must not exceed birth_death.p_max");
  if (c.birth_death.num_states * c.birth_death.p_max > 1.0)
    throw ConfigError("birth_death.p_max", "birth_death.S * birth_death.p_max must not exceed 1");

  c.random.horizon = c.horizon;
  c.birth_death.horizon = c.horizon;
  c.deadline.horizon = c.horizon;
  c.video.horizon = c.horizon;
  const std::uint64_t scenario_seed = stream_key(c.seed, "scenario", 0);
  c.birth_death.seed = scenario_seed;
  c.random.seed = scenario_seed;
  c.deadline.seed = scenario_seed;
  c.video.seed = scenario_seed;

  for (const auto& k : keys) {
    if (!scope_relevant(k.scope, c)) continue;
    auto it = given.find(k.name);
    if (it != given.end()) c.echo[k.name] = it->second;
    else if (!k.fallback.empty()) c.echo[k.name] = k.fallback;
  }
  if (c.scenario == ScenarioKind::RandomMultiAction) c.echo["random.K"] = std::to_string(c.random.budget);
  return c;
}

ExperimentConfig parse_config(std::string_view text) { return parse_config(text, {}); }

std::string describe_keys() {
  std::ostringstream out;
  for (const auto& k : key_table()) {
    out << k.name << "  default=" << (k.fallback.empty() ? (k.scope == Scope::Core ? "(required)" : "(derived)") : k.fallback)
        << "  range=" << k.range << '\n';
  }
  return out.str();
}

BanditInstance build_scenario(const ExperimentConfig& config) {
  try {
    switch (config.scenario) {
      case ScenarioKind::BirthDeath: return build_birth_death(config.birth_death);
      case ScenarioKind::RandomMultiAction: return build_random_multi_action(config.random);
      case ScenarioKind::Deadline: return build_deadline(config.deadline);
      case ScenarioKind::VideoStreaming: return build_video_streaming(config.video);
    }
  } catch (const UsageError& e) {
    throw ConfigError("scenario", e.what());
  }
  throw ConfigError("scenario", "unknown scenario");
}

BanditInstance build_scaling_base(const ExperimentConfig& config) {
  if (config.scenario != ScenarioKind::BirthDeath) return build_scenario(config);
  BirthDeathParams base = config.birth_death;
  base.num_arms = static_cast<int>(base.lambdas.size());
  try {
    return build_birth_death(base);
  } catch (const UsageError& e) {
    throw ConfigError("scenario", e.what());
  }
}

}  // namespace rmab::cli
