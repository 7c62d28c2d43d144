// tests/test_cli.cpp

// Copyright 2026  The pathdisc Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "cli.hpp"
#include "pathdisc/io.hpp"

using namespace pathdisc;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path root = fs::temp_directory_path() / ("pathdisc_cli_" + std::to_string(::getpid()));
  TempDir() {
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~TempDir() { fs::remove_all(root); }
  std::string operator()(const std::string& name) const { return (root / name).string(); }
};

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path().string());
  }
  return files;
}

const char* kSmallConfig = R"({
 "world": {"train_envs": 2, "val_seen_envs": 1, "unseen_envs": 1, "paths_per_train_env": 3,
           "paths_per_val_env": 2, "instructions_per_path": 1, "augmented_pairs": 10},
 "discriminator": {"embed_dim": 3, "hidden_dim": 3},
 "training": {"batch_size": 4, "stages": [{"strategies": ["PS"], "epochs": 1},
                                          {"strategies": ["PR", "RW"], "epochs": 1}]}
}
)";

/// Generates a small world and its negatives under `t`.
void prepare(const TempDir& t) {
  write_file_atomic(t("config.json"), kSmallConfig);
  REQUIRE(run({"gen-world", "--config", t("config.json"), "--out", t("data")}).code == 0);
  REQUIRE(run({"mine", "--data", t("data"), "--out", t("mine")}).code == 0);
}

}  // namespace

TEST_CASE("usage errors exit 1, help exits 0") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == 1);
  CHECK(run({"no-such-command"}).code == 1);
  CHECK(run({"gen-world"}).code == 1);  // --out is required
  CHECK(run({"mine", "--out", "/nonexistent/x", "--data", "/nonexistent/data"}).code == 1);
}

TEST_CASE("gen-world is deterministic and its manifest omits --out") {
  TempDir t;
  write_file_atomic(t("config.json"), kSmallConfig);
  REQUIRE(run({"gen-world", "--config", t("config.json"), "--out", t("a")}).code == 0);
  REQUIRE(run({"gen-world", "--config", t("config.json"), "--out", t("b")}).code == 0);
  CHECK(snapshot(t("a")) == snapshot(t("b")));
  const auto m = nlohmann::json::parse(read_file(t("a/manifest.json")));
  CHECK(m.at("command") == "gen-world");
  CHECK(m.at("args") == nlohmann::json::array({"--config", t("config.json")}));
  CHECK(m.at("config").at("world").at("train_envs") == 2);
  CHECK(fs::exists(t("a/vocab.json")));
  CHECK(fs::exists(t("a/pairs/augmented.jsonl")));

  REQUIRE(run({"gen-world", "--config", t("config.json"), "--seed", "8", "--out", t("c")}).code == 0);
  CHECK(read_file(t("a/pairs/train.jsonl")) != read_file(t("c/pairs/train.jsonl")));
}

TEST_CASE("configuration errors name the problem") {
  TempDir t;
  write_file_atomic(t("bad.json"), R"({"wrold": {}})");
  Result r = run({"gen-world", "--config", t("bad.json"), "--out", t("x")});
  CHECK(r.code == 1);
  CHECK(r.err.find("wrold") != std::string::npos);

  write_file_atomic(t("bad2.json"), R"({"world": {"train_envs": 0}})");
  r = run({"gen-world", "--config", t("bad2.json"), "--out", t("y")});
  CHECK(r.code == 1);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("filter, resume and checkpoint errors") {
  TempDir t;
  prepare(t);
  REQUIRE(run({"train-disc", "--quiet", "--data", t("data"), "--negatives", t("mine/negatives.jsonl"), "--config",
               t("config.json"), "--out", t("disc")})
              .code == 0);
  REQUIRE(run({"score", "--data", t("data"), "--model", t("disc/discriminator.ckpt"), "--out", t("score")}).code == 0);

  Result r = run({"filter", "--ranked", t("score/ranked.jsonl"), "--data", t("data"), "--strategy", "random_top",
                  "--fraction", "0.5", "--out", t("f")});
  CHECK(r.code == 1);
  CHECK(r.err.find("stratum") != std::string::npos);
  r = run({"filter", "--ranked", t("score/ranked.jsonl"), "--data", t("data"), "--strategy", "random-top",
           "--fraction", "0.3", "--out", t("f")});
  CHECK(r.code == 0);
  CHECK(r.out.find("selected 3 of 10") != std::string::npos);

  r = run({"train-disc", "--data", t("data"), "--negatives", t("mine/negatives.jsonl"), "--resume",
           t("disc/state.ckpt"), "--lr", "0.1", "--out", t("r")});
  CHECK(r.code == 1);
  CHECK(r.err.find("--resume") != std::string::npos);

  std::string bytes = read_file(t("disc/discriminator.ckpt"));
  bytes[bytes.size() / 2] ^= 1;
  write_file_atomic(t("corrupt.ckpt"), bytes);
  r = run({"score", "--data", t("data"), "--model", t("corrupt.ckpt"), "--out", t("s2")});
  CHECK(r.code == 1);

  r = run({"train-agent", "--data", t("data"), "--init", "discriminator", "--discriminator",
           t("disc/discriminator.ckpt"), "--out", t("agent")});
  CHECK(r.code == 1);
  CHECK(r.err.find("bidirectional") != std::string::npos);
}

TEST_CASE("a diverging run exits 2") {
  TempDir t;
  prepare(t);
  const Result r = run({"train-disc", "--quiet", "--data", t("data"), "--negatives", t("mine/negatives.jsonl"),
                        "--config", t("config.json"), "--lr", "1e300", "--out", t("disc")});
  CHECK(r.code == 2);
}
