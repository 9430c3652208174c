// Copyright 2026 The mapcnot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: mapcnot <experiment> --config FILE [--seed N] [--out DIR]

#include <CLI11.hpp>
#include <iostream>

#include "mapcnot/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pulse-level MAP-gate cNOT simulator and tomography toolkit"};
  std::string experiment, config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::string names;
  for (const auto& n : mapcnot::experiment_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("experiment", experiment, "One of: " + names)->required();
  app.add_option("--config", config, "Run configuration (INI)")->required();
  app.add_option("--seed", seed, "RNG seed, overrides run.rng_seed");
  app.add_option("--out", out, "Output directory, overrides run.output_dir");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  try {
    mapcnot::ExperimentConfig cfg = mapcnot::load_experiment_config(experiment, config);
    if (seed) cfg.rng_seed = *seed;
    if (out) cfg.output_dir = *out;
    const mapcnot::Json summary = mapcnot::run_experiment(cfg);
    std::cout << summary.dump(2) << "\n";
    return 0;
  } catch (const mapcnot::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mapcnot::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
