// Copyright 2026 The xtfc-hjb Authors.
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


#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "test_support.hpp"
#include "xtfc/checkpoint.hpp"
#include "xtfc/cli.hpp"
#include "xtfc/io.hpp"

using namespace xtfc;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "xtfc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  fs::create_directories(dir);
  const fs::path p = dir / "run.toml";
  std::ofstream(p) << text;
  return p;
}

const char* kTinyDi =
    "[problem]\n"
    "name = \"double_integrator\"\n"
    "[network]\n"
    "hidden = 12\n"
    "[train]\n"
    "num_points = 100\n"
    "adam_epochs = 20\n"
    "lbfgs_iters = 20\n"
    "[sim]\n"
    "t_max = 5\n"
    "mc_count = 4\n";

/// Trains the tiny double-integrator model once per process.
const fs::path& tiny_run() {
  static const fs::path dir = [] {
    const fs::path root = testing::scratch_dir("cli_tiny");
    const fs::path cfg = write_config(root, kTinyDi);
    const Result r = run_cli({"train", "--config", cfg.string(), "--out", (root / "a").string()});
    REQUIRE(r.code == 0);
    return root / "a";
  }();
  return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("grid specs") {
  const auto g = cli::parse_grid_spec("-1:1:101,0:2.5:3");
  REQUIRE(g.size() == 2);
  CHECK(g[0].lo == -1.0);
  CHECK(g[0].count == 101);
  CHECK(g[1].hi == 2.5);
  CHECK_THROWS(cli::parse_grid_spec("-1:1"));
  CHECK_THROWS(cli::parse_grid_spec("-1:1:0"));
  CHECK_THROWS(cli::parse_grid_spec("a:1:3"));
}

TEST_CASE("usage errors exit with code 2") {
  const fs::path root = testing::scratch_dir("cli_usage");
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"launch"}).code == 2);
  CHECK(run_cli({"train"}).code == 2);
  const fs::path cfg = write_config(root, "[train]\nhidden = 3\n");
  const Result r = run_cli({"train", "--config", cfg.string(), "--out", (root / "o").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("problem") != std::string::npos);
  CHECK(run_cli({"evaluate", "--checkpoint", (root / "none.xtfc").string()}).code == 2);
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("train writes its artifacts") {
  const fs::path dir = tiny_run();
  for (const char* f : {"checkpoint.xtfc", "train_report.json", "loss_history.csv", "config.toml"}) {
    CHECK(fs::exists(dir / f));
  }
  const auto report = nlohmann::json::parse(slurp(dir / "train_report.json"));
  const Checkpoint ckpt = load_checkpoint(dir / "checkpoint.xtfc");
  CHECK(ckpt.elm.hidden_count() == 12);
  CHECK(report.at("final_loss").get<double>() == ckpt.final_loss);
  std::ifstream hist(dir / "loss_history.csv");
  CHECK(read_csv(hist).rows.size() == 1 + 20 + report.at("lbfgs_iterations").get<std::size_t>());
}

TEST_CASE("training is reproducible from the echoed config and across threads") {
  const fs::path root = testing::scratch_dir("cli_repro");
  const fs::path first = tiny_run();
  const fs::path echoed = first / "config.toml";
  CHECK(run_cli({"train", "--config", echoed.string(), "--out", (root / "b").string()}).code == 0);
  CHECK(run_cli({"train", "--config", echoed.string(), "--out", (root / "c").string(),
                 "--threads", "2"})
            .code == 0);
  const std::string bytes = slurp(first / "checkpoint.xtfc");
  CHECK(slurp(root / "b" / "checkpoint.xtfc") == bytes);
  CHECK(slurp(root / "c" / "checkpoint.xtfc") == bytes);
  CHECK(run_cli({"train", "--config", echoed.string(), "--out", (root / "d").string(),
                 "--seed", "1"})
            .code == 0);
  CHECK(slurp(root / "d" / "checkpoint.xtfc") != bytes);
}

TEST_CASE("evaluate writes the grid with errors") {
  const fs::path dir = tiny_run();
  const fs::path out = dir.parent_path() / "eval";
  const Result r = run_cli({"evaluate", "--checkpoint", (dir / "checkpoint.xtfc").string(),
                            "--grid", "-1:1:5,-1:1:5", "--out", out.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("points 25") != std::string::npos);
  CHECK(r.out.find("max_abs_error") != std::string::npos);
  std::ifstream in(out / "evaluation.csv");
  const CsvTable t = read_csv(in);
  CHECK(t.header == std::vector<std::string>{"x1", "x2", "V_xtfc", "V_exact", "abs_error"});
  REQUIRE(t.rows.size() == 25);
  CHECK(t.rows[12][0] == 0.0);
  CHECK(t.rows[12][1] == 0.0);
  CHECK(std::abs(t.rows[12][2]) < 1e-14);
  CHECK(t.rows[24][0] == 1.0);
  CHECK(t.rows[1][1] == -0.5);

  const Result outside = run_cli({"evaluate", "--checkpoint", (dir / "checkpoint.xtfc").string(),
                                  "--grid", "-3:3:3,0:0:1", "--out", out.string()});
  CHECK(outside.code == 0);
  CHECK(outside.err.find("domain") != std::string::npos);
}

TEST_CASE("simulate from the origin and against the exact policy") {
  const fs::path dir = tiny_run();
  const std::string ckpt = (dir / "checkpoint.xtfc").string();
  const fs::path out = dir.parent_path() / "sim";
  Result r = run_cli({"simulate", "--checkpoint", ckpt, "--x0", "0,0", "--out", out.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("converged true") != std::string::npos);
  std::ifstream in(out / "trajectory.csv");
  CHECK(read_csv(in).rows.size() == 1);

  CHECK(run_cli({"simulate", "--checkpoint", ckpt, "--x0", "1,0,0", "--out", out.string()}).code == 2);
  CHECK(run_cli({"simulate", "--checkpoint", ckpt, "--out", out.string()}).code == 2);

  r = run_cli({"simulate", "--checkpoint", ckpt, "--x0", "0.5,-0.5", "--compare-exact",
               "--out", out.string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(out / "trajectory_exact.csv"));
  const auto cmp = nlohmann::json::parse(slurp(out / "comparison.json"));
  CHECK(cmp.at("exact_value").get<double>() ==
        doctest::Approx(exact_value("double_integrator", (Vec(2) << 0.5, -0.5).finished())));
  CHECK(cmp.contains("max_state_deviation"));
}

TEST_CASE("montecarlo is deterministic in its seed") {
  const fs::path dir = tiny_run();
  const std::string ckpt = (dir / "checkpoint.xtfc").string();
  const fs::path a = dir.parent_path() / "mc_a";
  const fs::path b = dir.parent_path() / "mc_b";
  REQUIRE(run_cli({"montecarlo", "--checkpoint", ckpt, "--count", "3", "--seed", "4",
                   "--out", a.string()})
              .code == 0);
  REQUIRE(run_cli({"montecarlo", "--checkpoint", ckpt, "--count", "3", "--seed", "4",
                   "--threads", "3", "--out", b.string()})
              .code == 0);
  CHECK(slurp(a / "montecarlo.json") == slurp(b / "montecarlo.json"));
  CHECK(fs::exists(a / "traj_000.csv"));
  CHECK(fs::exists(a / "traj_002.csv"));
  const auto j = nlohmann::json::parse(slurp(a / "montecarlo.json"));
  CHECK(j.at("fraction_converged").is_number());
}

TEST_CASE("montecarlo from the origin box converges at once") {
  const fs::path root = testing::scratch_dir("cli_mc_origin");
  const fs::path cfg = write_config(
      root, std::string(kTinyDi) + "ic_lower = [0, 0]\nic_upper = [0, 0]\n");
  const std::string ckpt = (tiny_run() / "checkpoint.xtfc").string();
  const Result r = run_cli({"montecarlo", "--checkpoint", ckpt, "--config", cfg.string(),
                            "--count", "1", "--out", (root / "mc").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("fraction_converged 1") != std::string::npos);
}

TEST_CASE("sweep trains one model per width") {
  const fs::path root = testing::scratch_dir("cli_sweep");
  const fs::path cfg = write_config(root, kTinyDi);
  const Result r = run_cli({"sweep", "--config", cfg.string(), "--widths", "4,8",
                            "--out", (root / "s").string()});
  REQUIRE(r.code == 0);
  std::ifstream in(root / "s" / "summary.csv");
  std::string header;
  std::string row1;
  std::string row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  CHECK(header == "name,neurons,final_loss,status");
  CHECK(row1.rfind("xtfc_n4,4,", 0) == 0);
  CHECK(row2.rfind("xtfc_n8,8,", 0) == 0);
  CHECK(row2.find(",ok") != std::string::npos);
  CHECK(fs::exists(root / "s" / "n8" / "checkpoint.xtfc"));

  const Result par = run_cli({"sweep", "--config", cfg.string(), "--widths", "4,8",
                              "--parallel", "--out", (root / "p").string()});
  REQUIRE(par.code == 0);
  CHECK(slurp(root / "p" / "n8" / "checkpoint.xtfc") ==
        slurp(root / "s" / "n8" / "checkpoint.xtfc"));
}

TEST_CASE("pendulum in constrained_paper mode keeps the torque in bounds") {
  const fs::path root = testing::scratch_dir("cli_pendulum");
  const fs::path cfg = write_config(root,
                                    "[problem]\nname = \"pendulum\"\n"
                                    "[network]\nhidden = 10\n"
                                    "[train]\nnum_points = 100\nadam_epochs = 10\n"
                                    "lbfgs_iters = 10\npolicy_mode = \"constrained_paper\"\n");
  REQUIRE(run_cli({"train", "--config", cfg.string(), "--out", (root / "t").string()}).code == 0);
  REQUIRE(run_cli({"simulate", "--checkpoint", (root / "t" / "checkpoint.xtfc").string(),
                   "--x0", "1.0,0.5", "--t-max", "3", "--out", (root / "s").string()})
              .code == 0);
  std::ifstream in(root / "s" / "trajectory.csv");
  const CsvTable t = read_csv(in);
  for (const auto& row : t.rows) CHECK(std::abs(row[3]) <= 2.0);
}

}  // TEST_SUITE
