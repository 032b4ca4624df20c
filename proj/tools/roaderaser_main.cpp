// Copyright 2026 The RoadEraser Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// roaderaser: command-line front end for the obstacle detection pipeline.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "roaderaser/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFrameFailures = 1;
constexpr int kExitConfigError = 2;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string variant;
  std::optional<int> jobs;
  bool force = false;
  std::vector<std::string> overrides;  // key=value
};

roaderaser::PipelineConfig resolve(const Flags& f) {
  roaderaser::PipelineConfig cfg;
  if (!f.config.empty()) cfg = roaderaser::PipelineConfig::load(f.config);
  for (const auto& kv : f.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw roaderaser::ConfigError("--set expects key=value, got '" + kv + "'");
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.jobs) cfg.jobs = *f.jobs;
  if (!f.variant.empty()) {
    try {
      cfg.variant = roaderaser::variant_from_string(f.variant);
    } catch (const std::invalid_argument& e) {
      throw roaderaser::ConfigError(e.what());
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace roaderaser;
  CLI::App app{"Road obstacle detection by inpainting and discrepancy scoring"};
  app.require_subcommand(1);
  Flags flags;
  const auto add_common = [&flags](CLI::App* cmd) {
    cmd->add_option("--config", flags.config, "YAML configuration file");
    cmd->add_option("--seed", flags.seed, "Override the run seed");
    cmd->add_option("--variant", flags.variant, "Override the pipeline variant");
    cmd->add_option("--jobs", flags.jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--set", flags.overrides, "Override a config key (key=value), repeatable");
    cmd->add_flag("--force", flags.force, "Overwrite existing outputs");
  };
  struct Command {
    const char* name;
    const char* help;
    CommandResult (*run)(const PipelineConfig&, const CommandOptions&);
  };
  const Command commands[] = {
      {"generate-data", "Build a synthetic training set or a toy benchmark", cmd_generate_data},
      {"train", "Train the discrepancy network for one variant", cmd_train},
      {"infer", "Write obstacle heatmaps for the evaluation frames", cmd_infer},
      {"evaluate", "Score heatmaps against labels", cmd_evaluate},
      {"ablate", "Run infer and evaluate for several variants", cmd_ablate},
  };
  const Command* selected = nullptr;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    sub->callback([&selected, &c] { selected = &c; });
  }
  CLI::App* print = app.add_subcommand("print-config", "Print the effective configuration");
  add_common(print);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    const PipelineConfig cfg = resolve(flags);
    if (print->parsed()) {
      std::cout << cfg.to_yaml();
      return kExitOk;
    }
    const CommandResult result = selected->run(cfg, CommandOptions{flags.force});
    if (!result.failed_frames.empty()) {
      spdlog::error("{} frame(s) failed", result.failed_frames.size());
      return kExitFrameFailures;
    }
    if (selected->run == cmd_ablate) std::cout << result.summary["table"].get<std::string>();
    return kExitOk;
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFrameFailures;
  }
}
