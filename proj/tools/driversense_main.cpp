// Copyright 2026 The DriverSense Authors
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

// driversense: simulate | train | eval | ingest
//
// Exit codes: 0 success, 1 usage error, 2 data or I/O error, 3 internal
// invariant violation.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "driversense/error.hpp"
#include "driversense/pipeline/commands.hpp"
#include "driversense/pipeline/config.hpp"

namespace {

namespace ds = driversense;
namespace dp = driversense::pipeline;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> mode;
  std::vector<std::string> overrides;
};

void AddCommon(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config_path, "flat key = value config file")
      ->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "root seed (overrides the config)");
  app->add_option("--out", o.out, "output directory (overrides the config)");
  app->add_option("--mode", o.mode, "grid or landmark")
      ->check(CLI::IsMember({"grid", "landmark"}));
  app->add_option("--set", o.overrides, "extra key=value config override")
      ->take_all();
}

dp::PipelineConfig BuildConfig(const CommonOptions& o) {
  dp::PipelineConfig config;
  if (!o.config_path.empty()) config = dp::LoadConfigFile(o.config_path);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      ds::ThrowInvalid("--set expects key=value, got '" + kv + "'");
    }
    dp::SetConfigValue(config, dp::internal::Trim(kv.substr(0, eq)),
                       dp::internal::Trim(kv.substr(eq + 1)));
  }
  if (o.seed) config.seed = *o.seed;
  if (o.out) config.out = *o.out;
  if (o.mode) config.mode = *o.mode;
  config.Validate();
  return config;
}

int ExitCodeFor(ds::ErrorKind kind) {
  switch (kind) {
    case ds::ErrorKind::kInvalidArgument:
      return 1;
    case ds::ErrorKind::kData:
    case ds::ErrorKind::kIo:
      return 2;
    case ds::ErrorKind::kInvariant:
      return 3;
  }
  return 3;
}

void PrintManifest(const dp::RunManifest& m) {
  std::cout << m.command << ": " << m.status << '\n';
  for (const auto& [k, v] : m.counters) std::cout << "  " << k << " = " << v << '\n';
  for (const auto& f : m.outputs) {
    std::cout << "  wrote " << f.path << " (" << f.bytes << " bytes)\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driver-as-sensor occupancy mapping pipeline"};
  app.set_version_flag("--version", std::string(dp::kToolVersion));
  app.require_subcommand(1);

  CommonOptions sim_opts, train_opts, eval_opts, ingest_opts;
  std::optional<int> episodes;
  std::string train_data, eval_data;
  std::optional<std::string> models;
  std::vector<std::string> inputs;

  auto* sim = app.add_subcommand("simulate", "generate synthetic episodes");
  AddCommon(sim, sim_opts);
  sim->add_option("--episodes", episodes, "number of episodes");

  auto* train = app.add_subcommand("train", "fit the behavior models");
  AddCommon(train, train_opts);
  train->add_option("--data", train_data, "directory holding the dataset")
      ->required();

  auto* eval = app.add_subcommand("eval", "score fused and baseline maps");
  AddCommon(eval, eval_opts);
  eval->add_option("--data", eval_data, "directory holding the dataset")
      ->required();
  eval->add_option("--models", models,
                   "directory holding trained models (omit for baseline only)");

  auto* ingest = app.add_subcommand("ingest", "convert annotation JSON lines");
  AddCommon(ingest, ingest_opts);
  ingest->add_option("--input", inputs, "annotation files")->take_all();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) {
      auto config = BuildConfig(sim_opts);
      if (episodes) config.episodes = *episodes;
      PrintManifest(dp::CmdSimulate(config, config.out));
    } else if (train->parsed()) {
      const auto config = BuildConfig(train_opts);
      PrintManifest(dp::CmdTrain(config, train_data, config.out));
    } else if (eval->parsed()) {
      const auto config = BuildConfig(eval_opts);
      std::optional<std::filesystem::path> models_dir;
      if (models) models_dir = *models;
      PrintManifest(dp::CmdEval(config, eval_data, models_dir, config.out));
    } else if (ingest->parsed()) {
      const auto config = BuildConfig(ingest_opts);
      std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
      PrintManifest(dp::CmdIngest(config, paths, config.out));
    }
  } catch (const ds::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
