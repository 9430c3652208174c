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

#include <gtest/gtest.h>

#include <cstdlib>
#include <set>
#include <sys/wait.h>
#include <unistd.h>

#include "test_support.hpp"

namespace mapcnot {
namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("mapcnot_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return path_ / name;
  }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::set<std::string> tree(const fs::path& root) {
  std::set<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) out.insert(fs::relative(e.path(), root).string());
  return out;
}

const char* kQptRun = R"([run]
output_dir = out
shots = 200
rng_seed = 11

[qpt]
gate = cnot
mode = ideal
)";

TEST(Ini, DeviceRoundTrip) {
  DeviceSpec s;
  s.j_eff = 3.3;
  s.flux_offset = 12.5;
  s.levels_per_transmon = 5;
  const DeviceSpec back = device_from_ptree(parse_ini(device_to_ini(s)));
  EXPECT_EQ(device_to_ini(back), device_to_ini(s));
  EXPECT_NEAR(back.j_eff, s.j_eff, 1e-12);
}

TEST(Ini, CalibrationRoundTrip) {
  const MapCalibration& c = testing::default_calibration().cal;
  const MapCalibration back = calibration_from_ptree(parse_ini(calibration_to_ini(c)));
  EXPECT_EQ(calibration_to_ini(back), calibration_to_ini(c));
  EXPECT_NEAR(back.phi, c.phi, 1e-10);
  EXPECT_NEAR(back.stark.amplitude, c.stark.amplitude, 1e-12);
}

TEST(Ini, MalformedTextIsAConfigError) {
  try {
    parse_ini("[run\nx = 1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
  }
}

TEST(OutputDir, RejectsNamesOutsideTheRoot) {
  TempDir t;
  OutputDir out(t.path() / "o");
  for (const char* bad : {"../x", "/tmp/x", "a/b", "..", "."}) {
    try {
      out.write(bad, "x");
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kIoError);
    }
  }
  EXPECT_TRUE(out.files().empty());
}

TEST(RunExperiment, SameSeedGivesIdenticalBytes) {
  TempDir t;
  const fs::path cfg = t.write("run.ini", kQptRun);
  std::map<std::string, std::string> first;
  for (const char* dir : {"a", "b"}) {
    ExperimentConfig c = load_experiment_config("qpt", cfg);
    c.output_dir = t.path() / dir;
    run_experiment(c);
  }
  const auto files = tree(t.path() / "a");
  EXPECT_EQ(files, tree(t.path() / "b"));
  EXPECT_TRUE(files.count("manifest.json"));
  EXPECT_TRUE(files.count("record.csv"));
  for (const auto& f : files) EXPECT_EQ(slurp(t.path() / "a" / f), slurp(t.path() / "b" / f)) << f;

  ExperimentConfig c = load_experiment_config("qpt", cfg);
  c.output_dir = t.path() / "c";
  c.rng_seed = 12;
  run_experiment(c);
  EXPECT_NE(slurp(t.path() / "a" / "record.csv"), slurp(t.path() / "c" / "record.csv"));
}

TEST(RunExperiment, ManifestListsEveryOutputAndNothingElseIsWritten) {
  TempDir t;
  const fs::path cfg = t.write("run.ini", "[run]\noutput_dir = out/dj\n\n[dj]\ncnot = ideal\n");
  const auto before = tree(t.path());
  const Json summary = run_experiment(load_experiment_config("dj", cfg));
  EXPECT_TRUE(summary.at("all_correct").get<bool>());
  const auto after = tree(t.path());
  std::set<std::string> added;
  for (const auto& f : after) {
    if (!before.count(f)) added.insert(f);
  }
  const fs::path out = t.path() / "out" / "dj";
  std::set<std::string> expected{"out", "out/dj"};
  const Json manifest = Json::parse(slurp(out / "manifest.json"));
  for (const auto& f : manifest.at("outputs")) {
    const std::string name = f.at("file").get<std::string>();
    expected.insert("out/dj/" + name);
    EXPECT_EQ(fs::file_size(out / name), f.at("bytes").get<size_t>()) << name;
  }
  expected.insert("out/dj/manifest.json");
  EXPECT_EQ(added, expected);
}

TEST(RunExperiment, ResolvedConfigReproducesTheRun) {
  TempDir t;
  const fs::path cfg = t.write("run.ini", kQptRun);
  ExperimentConfig c = load_experiment_config("qpt", cfg);
  c.output_dir = t.path() / "a";
  run_experiment(c);
  ExperimentConfig again = load_experiment_config("qpt", t.path() / "a" / "config.resolved.ini");
  again.output_dir = t.path() / "b";
  run_experiment(again);
  EXPECT_EQ(slurp(t.path() / "a" / "record.csv"), slurp(t.path() / "b" / "record.csv"));
  EXPECT_EQ(slurp(t.path() / "a" / "ptm.json"), slurp(t.path() / "b" / "ptm.json"));
}

TEST(Config, BadInputsAreConfigErrors) {
  TempDir t;
  const auto code = [&](const std::string& experiment, const std::string& text) {
    try {
      load_experiment_config(experiment, t.write("bad.ini", text));
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  EXPECT_EQ(code("teleport", kQptRun), ErrorCode::kUnknownExperiment);
  EXPECT_EQ(code("qpt", "[run]\nshots = -3\n"), ErrorCode::kConfigError);
  EXPECT_EQ(code("qpt", "[run]\nshots = many\n"), ErrorCode::kConfigError);
  EXPECT_EQ(code("qpt", "[run]\ndevice_file = missing.ini\n"), ErrorCode::kConfigError);
  EXPECT_EQ(exit_code_for(ErrorCode::kConfigError), 1);
  EXPECT_EQ(exit_code_for(ErrorCode::kUnknownExperiment), 1);
  EXPECT_EQ(exit_code_for(ErrorCode::kNonConvergedStep), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::kOptimizerFailed), 3);
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(MAPCNOT_CLI) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  TempDir t;
  const fs::path cfg = t.write("run.ini", "[run]\noutput_dir = out\n\n[dj]\ncnot = ideal\n");
  const fs::path log = t.path() / "log.txt";
  EXPECT_EQ(run_cli("dj --config " + cfg.string(), log), 0) << slurp(log);
  EXPECT_TRUE(fs::exists(t.path() / "out" / "manifest.json"));
  EXPECT_EQ(run_cli("teleport --config " + cfg.string(), log), 1);
  EXPECT_EQ(run_cli("dj --config " + (t.path() / "none.ini").string(), log), 1);
  EXPECT_EQ(run_cli("dj", log), 1);
  const fs::path bad = t.write("bad.ini", "[dj]\ncnot = quantum\n");
  EXPECT_EQ(run_cli("dj --config " + bad.string() + " --out " + (t.path() / "o2").string(), log), 1);
}

TEST(Cli, SeedAndOutFlagsOverrideTheFile) {
  TempDir t;
  const fs::path cfg = t.write("run.ini", kQptRun);
  const fs::path log = t.path() / "log.txt";
  ASSERT_EQ(run_cli("qpt --config " + cfg.string() + " --seed 4 --out " + (t.path() / "x").string(), log), 0);
  ASSERT_EQ(run_cli("qpt --config " + cfg.string() + " --seed 4 --out " + (t.path() / "y").string(), log), 0);
  EXPECT_FALSE(fs::exists(t.path() / "out"));
  for (const auto& f : tree(t.path() / "x")) EXPECT_EQ(slurp(t.path() / "x" / f), slurp(t.path() / "y" / f)) << f;
  const Json m = Json::parse(slurp(t.path() / "x" / "manifest.json"));
  EXPECT_EQ(m.at("rng_seed").get<int>(), 4);
}

}  // namespace
}  // namespace mapcnot
