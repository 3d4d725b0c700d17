#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rmab/cli/config.hpp"
#include "rmab/cli/runner.hpp"
#include "rmab/errors.hpp"
#include "rmab/lp/program.hpp"
#include "rmab/planner.hpp"

namespace {

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rmab::ConfigError("config", "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace rmab::cli;
  CLI::App app{"Budgeted multi-action restless bandit toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  std::vector<std::string> overrides;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Config file (- for standard input)")->required();
  run->add_option("-o,--output", output, "Override the output key");
  run->add_option("--set", overrides, "key=value override, may repeat");

  bool grouped = false;
  auto* dump = app.add_subcommand("dump-lp", "Write the relaxed LP of the configured instance as triplets");
  dump->add_option("config", config_path, "Config file")->required();
  dump->add_option("-o,--output", output, "Destination (default standard output)");
  dump->add_option("--set", overrides, "key=value override, may repeat");
  dump->add_flag("--grouped", grouped, "Merge identical arms into classes");

  auto* validate = app.add_subcommand("validate", "Check a config and the instance it builds");
  validate->add_option("config", config_path, "Config file")->required();
  validate->add_option("--set", overrides, "key=value override, may repeat");

  app.add_subcommand("keys", "List every config key with its default and range");

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand("keys")) {
    std::cout << describe_keys();
    return kExitOk;
  }

  std::string text;
  try {
    text = read_text(config_path);
  } catch (const rmab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (!output.empty()) overrides.push_back("output=" + output);

  if (*run) return run_config_text(text, overrides, std::cerr);

  try {
    const ExperimentConfig config = parse_config(text, overrides);
    const rmab::BanditInstance instance = build_scenario(config);
    if (*validate) {
      int errors = 0;
      for (const auto& v : rmab::validate_instance(instance)) {
        std::cout << v.describe() << '\n';
        if (v.severity == rmab::Violation::Severity::Error) ++errors;
      }
      std::cout << "arms=" << instance.num_arms() << " budget=" << instance.budget << " horizon=" << instance.horizon
                << (errors ? " invalid" : " valid") << '\n';
      return errors ? kExitConfig : kExitOk;
    }
    rmab::require_valid(instance);
    rmab::PlannerOptions opts;
    opts.group_identical_arms = grouped;
    const rmab::RelaxedLp relaxed = rmab::build_relaxed_lp(instance, opts);
    if (config.output == "-") {
      rmab::lp::write_triplets(std::cout, relaxed.program);
    } else {
      std::ofstream out(config.output, std::ios::binary);
      if (!out) throw rmab::ConfigError("output", "cannot open '" + config.output + "'");
      rmab::lp::write_triplets(out, relaxed.program);
    }
    return kExitOk;
  } catch (const rmab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const rmab::UsageError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
}
