/*
 * Copyright 2026 The vhlsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// Command line front end: run experiments, certify the margin-gap inequality
// on random instances, and dump learned features.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "vhl/errors.hpp"
#include "vhl/experiment/config.hpp"
#include "vhl/experiment/runner.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigFailure = 1, kDiverged = 2, kTheoryViolation = 3 };

int cmd_run(const std::string& config_path, int workers, double target) {
  auto config = vhl::experiment::load_config(config_path);
  vhl::experiment::RunOptions opts;
  if (workers > 0) opts.workers = workers;
  if (target >= 0.0) opts.target = target;
  const auto result = vhl::experiment::run_experiment(config, opts);
  std::cout << fmt::format("metrics: {}\n", config.output.metrics);
  for (const auto& s : result.seeds) {
    std::cout << fmt::format("seed {}: best accuracy {:.4f} at round {}", s.seed, s.best_accuracy, s.best_round);
    if (s.target) {
      std::cout << fmt::format(", target {:.4f} ", *s.target);
      if (s.rounds_to_target) {
        std::cout << fmt::format("reached at round {}", *s.rounds_to_target);
      } else {
        std::cout << "not reached";
      }
    }
    std::cout << '\n';
  }
  std::cout << fmt::format("mean best accuracy {:.4f}\n", result.mean_best_accuracy());
  return kOk;
}

int cmd_theory(int instances, std::uint64_t seed) {
  const auto report = vhl::experiment::run_theory_checks(instances, seed);
  std::cout << fmt::format("instances {} violations {} min slack {:.6g} mean slack {:.6g}\n", report.instances,
                           report.violations, report.min_slack, report.mean_slack);
  if (report.violations > 0) {
    std::cerr << "first failing instance:\n" << *report.failing_instance_json << '\n';
    return kTheoryViolation;
  }
  return kOk;
}

int cmd_export(const std::string& config_path, int round, int layer, const std::string& out_path) {
  const auto config = vhl::experiment::load_config(config_path);
  if (out_path.empty() || out_path == "-") {
    vhl::experiment::export_features_at(config, round, layer, std::cout);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw vhl::Error("cannot open '" + out_path + "' for writing");
    vhl::experiment::export_features_at(config, round, layer, out);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated learning simulator with virtual homogeneity learning"};
  app.require_subcommand(1);

  std::string config_path;
  int workers = 0;
  double target = -1.0;
  auto* run = app.add_subcommand("run", "Run every seed of an experiment config");
  run->add_option("config", config_path, "YAML experiment config")->required();
  run->add_option("--workers", workers, "Client threads per round (overrides fl.workers)");
  run->add_option("--target", target, "Target accuracy for the rounds-to-target summary");

  int instances = 200;
  std::uint64_t seed = 0;
  auto* theory = app.add_subcommand("theory-check", "Check the margin-gap inequality on random instances");
  theory->add_option("--instances", instances, "Number of random instances")->check(CLI::PositiveNumber);
  theory->add_option("--seed", seed, "Seed of the instance stream");

  int round = 0;
  int layer = -1;
  std::string out_path;
  auto* exp = app.add_subcommand("export-features", "Write test and virtual features after some rounds");
  exp->add_option("config", config_path, "YAML experiment config")->required();
  exp->add_option("--round", round, "Rounds to train before exporting")->required();
  exp->add_option("--layer", layer, "Trace layer (0 = input, -1 = feature layer)")->required();
  exp->add_option("--out", out_path, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigFailure;
  }

  try {
    if (*run) return cmd_run(config_path, workers, target);
    if (*theory) return cmd_theory(instances, seed);
    return cmd_export(config_path, round, layer, out_path);
  } catch (const vhl::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const vhl::NumericError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const vhl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigFailure;
  }
}
