// Copyright 2026 The secmoe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Runs the command-line tool as a subprocess.

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include <gtest/gtest.h>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CmdResult {
  int rc = -1;
  std::string out;
};

CmdResult run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + SECMOE_CLI_PATH + " " + args + " 2>&1";
  CmdResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> reals(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> v;
  double x;
  while (in >> x) v.push_back(x);
  return v;
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("secmoe_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    ASSERT_EQ(run("gen-weights --config tiny-moe-4e --seed 3 --out " + (dir_ / "w").string()).rc, 0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    std::ofstream tok(dir_ / "tokens.txt");
    tok << "# eight tokens of width 16\n";
    for (int t = 0; t < 8; ++t) {
      for (int j = 0; j < 16; ++j) tok << u(rng) << (j == 15 ? "\n" : " ");
    }
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::string path(const std::string& name) { return (dir_ / name).string(); }
  static std::string infer_args() {
    return "infer --weights " + path("w") + " --input " + path("tokens.txt");
  }
  static json report(const std::string& extra, const std::string& name) {
    const auto r = run(infer_args() + " " + extra + " --report " + path(name) +
                       " --output " + path(name + ".out"));
    EXPECT_EQ(r.rc, 0) << r.out;
    return json::parse(slurp(path(name)));
  }

  static inline fs::path dir_;
};

TEST_F(Cli, GenWeightsIsDeterministic) {
  ASSERT_EQ(run("gen-weights --config tiny-moe-4e --seed 3 --out " + path("w2")).rc, 0);
  size_t files = 0;
  for (const auto& e : fs::directory_iterator(path("w"))) {
    EXPECT_EQ(slurp(e.path()), slurp(path("w2") / e.path().filename())) << e.path();
    ++files;
  }
  EXPECT_GT(files, 10u);
  const auto manifest = slurp(path("w") + "/manifest.txt");
  EXPECT_NE(manifest.find("d_model=16"), std::string::npos);
  EXPECT_NE(manifest.find("n_experts=4"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("gen-weights --config huge-moe --seed 1 --out " + path("bad")).rc, 2);
  EXPECT_EQ(run("infer").rc, 2);
  EXPECT_EQ(run("no-such-command").rc, 2);
  EXPECT_EQ(run(infer_args() + " --net moon").rc, 2);
}

TEST_F(Cli, MissingFilesExitFour) {
  EXPECT_EQ(run("infer --weights " + path("nowhere") + " --input " + path("tokens.txt")).rc, 4);
  EXPECT_EQ(run("infer --weights " + path("w") + " --input " + path("nowhere.txt")).rc, 4);
}

TEST_F(Cli, InferReportSchema) {
  const auto r = report("--check", "secmoe.json");
  EXPECT_EQ(r["schema"], "secmoe.report/1");
  EXPECT_EQ(r["protocol"], "secmoe");
  const auto& b = r["bytes_online"];
  EXPECT_EQ(b["bytes_total"].get<uint64_t>(),
            b["bytes_c_to_s"].get<uint64_t>() + b["bytes_s_to_c"].get<uint64_t>());
  EXPECT_GT(r["bytes_setup_modeled"].get<uint64_t>(), 0u);
  EXPECT_GT(r["rounds"].get<uint64_t>(), 0u);
  EXPECT_TRUE(r["wall_time_s"].is_number());
  ASSERT_EQ(r["layers"].size(), 1u);
  std::vector<std::string> phases;
  for (const auto& ph : r["layers"][0]["phases"]) phases.push_back(ph["name"]);
  EXPECT_EQ(phases, (std::vector<std::string>{"attention", "layernorm1", "gate", "moe",
                                              "layernorm2"}));
  EXPECT_EQ(reals(slurp(path("secmoe.json.out"))).size(), 8u * 16u);
}

TEST_F(Cli, DenseAgreesWithSparseAtHigherCost) {
  const auto sparse = report("--protocol secmoe --seed 5", "s.json");
  const auto dense = report("--protocol dense --seed 5", "d.json");
  const auto a = reals(slurp(path("s.json.out"))), b = reals(slurp(path("d.json.out")));
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 2.0 / (1 << 18));
  EXPECT_NE(sparse["bytes_online"]["bytes_total"], dense["bytes_online"]["bytes_total"]);
}

TEST_F(Cli, WanModeledSlowerThanLan) {
  const auto lan = report("--net lan", "lan.json");
  const auto wan = report("--net wan", "wan.json");
  EXPECT_GT(wan["modeled_time_s"]["selected"].get<double>(),
            lan["modeled_time_s"]["selected"].get<double>());
  EXPECT_EQ(wan["bytes_online"], lan["bytes_online"]);
  const auto r = run(infer_args() + " --report - --output " + path("env.out"), "SECMOE_NET=wan");
  EXPECT_NE(r.out.find("\"net\": \"wan\""), std::string::npos) << r.out.substr(0, 400);
}

TEST_F(Cli, TwoProcessTcpMatchesInproc) {
  const auto both = report("--seed 7", "both.json");
  // Fixed ports; one already in use is skipped.
  for (int port : {39517, 40123, 41731}) {
    const std::string addr = "127.0.0.1:" + std::to_string(port);
    CmdResult server;
    std::thread t([&] {
      server = run(infer_args() + " --transport tcp --role server --seed 7 --timeout 30 --addr " +
                   addr + " --report " + path("srv.json"));
    });
    const auto client =
        run(infer_args() + " --transport tcp --role client --seed 7 --timeout 30 --addr " + addr +
            " --report " + path("cli.json") + " --output " + path("cli.json.out"));
    t.join();
    if (server.rc == 4 && server.out.find("listen") != std::string::npos) continue;
    ASSERT_EQ(client.rc, 0) << client.out;
    ASSERT_EQ(server.rc, 0) << server.out;
    const auto c = json::parse(slurp(path("cli.json")));
    const auto s = json::parse(slurp(path("srv.json")));
    EXPECT_EQ(c["bytes_online"], both["bytes_online"]);
    EXPECT_EQ(s["bytes_online"], both["bytes_online"]);
    EXPECT_EQ(c["layers"], both["layers"]);
    EXPECT_EQ(slurp(path("cli.json.out")), slurp(path("both.json.out")));
    return;
  }
  FAIL() << "no free port";
}

TEST_F(Cli, BenchReport) {
  const auto r = run("bench --family tiny-moe --experts 2,4 --protocol both --out " +
                     path("bench.json"));
  ASSERT_EQ(r.rc, 0) << r.out;
  const auto b = json::parse(slurp(path("bench.json")));
  EXPECT_EQ(b["schema"], "secmoe.bench/1");
  ASSERT_EQ(b["rows"].size(), 4u);
  for (const auto& row : b["rows"]) {
    EXPECT_TRUE(row.contains("n_experts"));
    EXPECT_TRUE(row.contains("protocol"));
    EXPECT_TRUE(row.contains("online_bytes"));
    EXPECT_TRUE(row.contains("rounds"));
    EXPECT_TRUE(row.contains("modeled_lan_time_s"));
    EXPECT_TRUE(row.contains("modeled_wan_time_s"));
  }
  EXPECT_TRUE(b["flatness_ratio"]["secmoe"]["all"].is_number());
  EXPECT_TRUE(b["flatness_ratio"]["dense"]["all"].is_number());
}

TEST_F(Cli, SelftestQuick) {
  const auto r = run("selftest --level quick");
  EXPECT_EQ(r.rc, 0) << r.out;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

}  // namespace
