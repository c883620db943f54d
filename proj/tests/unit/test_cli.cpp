// Copyright 2026 The fincad Authors
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

// End-to-end runs of the fincad binary through the shell.
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <regex>
#include <string>

#include <json.hpp>

#include "fincad/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "fincad_cli_test";

// Runs the CLI with `args` from `cwd`, stdout and stderr into `log`; returns the exit code.
int run(const std::string& args, const fs::path& cwd = kRoot, const std::string& log = "last.log") {
  const std::string cmd = "cd '" + cwd.string() + "' && '" + FINCAD_CLI_PATH + "' " + args + " > '" +
                          (kRoot / log).string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string last_log() { return fincad::read_file(kRoot / "last.log"); }

std::string strip_timestamps(std::string s) {
  static const std::regex stamp(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z)");
  return std::regex_replace(s, stamp, "<ts>");
}

// Builds the synthetic world and runs the full pipeline once, in `dir`.
void pipeline(const fs::path& dir) {
  fs::create_directories(dir);
  REQUIRE(run("make-synthetic -o world", dir) == 0);
  const fs::path w = dir / "world";
  REQUIRE(run("discover -c config.json", w) == 0);
  REQUIRE(run("calibrate-entity -c config.json", w) == 0);
  REQUIRE(run("profile -c config.json", w) == 0);
  REQUIRE(run("backtest -c config.json -t MEM1 BRND -m baseline -m fincad -w both", w) == 0);
}

const fs::path& shared_run() {
  static const fs::path dir = [] {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot);
    pipeline(kRoot / "a");
    return kRoot / "a" / "world";
  }();
  return dir;
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(fincad::read_file(p)); }

}  // namespace

TEST_CASE("pipeline writes every artifact and a manifest") {
  const fs::path run_dir = shared_run() / "run";
  for (const char* f : {"prior.json", "calibration_train.jsonl", "calibration_val.jsonl",
                        "discovery_candidates.json", "calibration/profile.json",
                        "calibration/entities/MEM1.json", "backtest/summary.json",
                        "backtest/MEM1/fincad_is.json", "backtest/MEM1/fincad_is_equity.csv",
                        "backtest/MEM1/fincad_is_probes.csv", "backtest/MEM1/baseline_oos_decisions.jsonl"}) {
    CHECK_MESSAGE(fs::exists(run_dir / f), f);
  }
  const auto m = load(run_dir / "manifest.json");
  for (const char* c : {"discover", "calibrate-entity", "profile", "backtest"}) {
    CHECK(m["commands"].contains(c));
  }
  CHECK(m["config_hash"].get<std::string>().size() == 16);
  CHECK(m["seed"] == 42);
}

TEST_CASE("synthetic memoriser: FinCAD lowers in-sample value and leaves OOS untouched") {
  const fs::path b = shared_run() / "run" / "backtest" / "MEM1";
  const auto cad_is = load(b / "fincad_is.json"), base_is = load(b / "baseline_is.json");
  CHECK(cad_is["ending_value"].get<double>() < base_is["ending_value"].get<double>());
  CHECK(fincad::read_file(b / "fincad_oos_equity.csv") == fincad::read_file(b / "baseline_oos_equity.csv"));
}

TEST_CASE("reruns are byte-identical apart from timestamps") {
  shared_run();
  pipeline(kRoot / "b");
  for (const char* f : {"run/prior.json", "run/calibration_val.jsonl", "run/calibration/profile.json",
                        "run/backtest/summary.json", "run/backtest/MEM1/fincad_is_decisions.jsonl",
                        "run/backtest/BRND/baseline_oos_equity.csv"}) {
    CHECK_MESSAGE(strip_timestamps(fincad::read_file(kRoot / "a" / "world" / f)) ==
                      strip_timestamps(fincad::read_file(kRoot / "b" / "world" / f)),
                  f);
  }
}

TEST_CASE("force-zero-alpha reproduces the baseline equity curve") {
  const fs::path w = shared_run();
  REQUIRE(run("backtest -c config.json --run-dir zero -t MEM1 -m baseline -m fincad -w is "
              "--force-zero-alpha --artifact run/prior.json --calibration-dir run/calibration",
              w) == 0);
  CHECK(fincad::read_file(w / "zero/backtest/MEM1/fincad_is_equity.csv") ==
        fincad::read_file(w / "zero/backtest/MEM1/baseline_is_equity.csv"));
}

TEST_CASE("discovery with budget 1 keeps the seed instruction") {
  const fs::path w = shared_run();
  REQUIRE(run("discover -c config.json --run-dir seedonly --budget 1 --seed-instruction 'Remember it.'", w) == 0);
  CHECK(load(w / "seedonly/prior.json")["instruction"] == "Remember it.");
}

TEST_CASE("align sweeps a k range over the bundled rows") {
  const std::string rows = std::string(FINCAD_DATA_DIR) + "/leaderboard_sharpe.csv";
  fs::create_directories(kRoot);
  REQUIRE(run("align --rows '" + rows + "' -k 5..11 --run-dir align_run") == 0);
  const std::string out = last_log();
  CHECK(out.find("+0.779") != std::string::npos);
  for (int k = 5; k <= 11; ++k) {
    CHECK(fs::exists(kRoot / "align_run/align" / ("k" + std::to_string(k) + "_sharpe.json")));
  }
  CHECK(fs::exists(kRoot / "align_run/align/scatter_sharpe.csv"));
  CHECK(load(kRoot / "align_run/align/k7_sharpe.json")["n_subsets"] == 330);

  CHECK(run("align --rows '" + rows + "' -k 12 --run-dir align_run") == 2);
  CHECK(run("align --rows '" + rows + "' -k 7 --metric calmar --run-dir align_run") == 2);
  CHECK(run("align --rows '" + rows + "' -k 7 --metric sortino --run-dir align_run") == 3);
}

TEST_CASE("exit codes") {
  fs::create_directories(kRoot / "empty");
  CHECK(run("", kRoot / "empty") == 2);
  CHECK(run("no-such-command", kRoot / "empty") == 2);
  CHECK(run("backtest --bogus-flag", kRoot / "empty") == 2);
  CHECK(run("align --rows /nonexistent.csv -k 7 --run-dir x", kRoot / "empty") == 3);

  // Backtesting FinCAD before discovery is a calibration failure with a hint.
  const fs::path w = shared_run();
  CHECK(run("backtest -c config.json --run-dir fresh -t MEM1 -m fincad -w is", w) == 5);
  CHECK(last_log().find("fincad discover") != std::string::npos);
  CHECK(run("backtest -c config.json -t MEM1 -m nonsense", w) == 2);
}
