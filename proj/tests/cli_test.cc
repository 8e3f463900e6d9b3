// Copyright 2026 The s2s-offroad Authors
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

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"
#include "s2s/image.h"
#include "s2s/render.h"
#include "s2s/world.h"

namespace s2s {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("s2s_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Exit status of `s2s args`, with output discarded.
  int Run(const std::string& args) const {
    const std::string cmd = std::string(S2S_CLI) + " " + args + " > '" +
                            (dir_ / "stdout.txt").string() + "' 2> '" +
                            (dir_ / "stderr.txt").string() + "'";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string Out(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int LineCount(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

// Byte equality of every file in two trees, except the provenance file, which
// names its own output directory.
void ExpectSameTree(const fs::path& a, const fs::path& b) {
  std::set<std::string> names_a, names_b;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) names_a.insert(fs::relative(e.path(), a).string());
  }
  for (const auto& e : fs::recursive_directory_iterator(b)) {
    if (e.is_regular_file()) names_b.insert(fs::relative(e.path(), b).string());
  }
  ASSERT_EQ(names_a, names_b);
  for (const std::string& n : names_a) {
    if (n == "config.txt") continue;
    EXPECT_EQ(Slurp(a / n), Slurp(b / n)) << n;
  }
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(Run(""), 2);
  EXPECT_EQ(Run("no-such-command"), 2);
  EXPECT_EQ(Run("gen-world --preset bogus --out " + Out("w")), 2);
  EXPECT_EQ(Run("gen-world --set bogus_key=1 --out " + Out("w")), 2);
  EXPECT_EQ(Run("gen-world --extent abc --out " + Out("w")), 2);
  EXPECT_EQ(Run("train --A 3 --out " + Out("t")), 2);
  EXPECT_EQ(Run("eval-online --episodes 1 --out " + Out("e")), 2);
  EXPECT_EQ(Run("eval-offline --out " + Out("e")), 2);
  EXPECT_NE(Slurp(dir_ / "stderr.txt").find("--dataset"), std::string::npos);
  EXPECT_EQ(Run("gen-world --help"), 0);
}

TEST_F(CliTest, GenWorldDeterministicWithProvenance) {
  ASSERT_EQ(Run("gen-world --preset meadow --seed 7 --out " + Out("a")), 0);
  ASSERT_EQ(Run("gen-world --preset meadow --seed 7 --out " + Out("b")), 0);
  ExpectSameTree(dir_ / "a", dir_ / "b");
  const std::string config = Slurp(dir_ / "a" / "config.txt");
  EXPECT_NE(config.find("seed = 7"), std::string::npos);
  EXPECT_NE(config.find("presets = meadow"), std::string::npos);
  const World w = LoadWorld(dir_ / "a" / "world.s2sw");
  EXPECT_EQ(w.spec().seed, 7u);
  EXPECT_EQ(w.spec().preset, Preset::kMeadow);

  ASSERT_EQ(Run("gen-world --preset meadow --seed 8 --out " + Out("c")), 0);
  EXPECT_NE(Slurp(dir_ / "a" / "world.s2sw"), Slurp(dir_ / "c" / "world.s2sw"));
}

TEST_F(CliTest, ConfigFileAndOverridePrecedence) {
  {
    std::ofstream f(dir_ / "run.cfg");
    f << "seed = 5\nextent = 60\n";
  }
  ASSERT_EQ(Run("gen-world --config " + Out("run.cfg") + " --extent 80 --set extent=70 --out " +
                Out("w")),
            0);
  const World w = LoadWorld(dir_ / "w" / "world.s2sw");
  EXPECT_EQ(w.spec().seed, 5u);
  EXPECT_DOUBLE_EQ(w.extent(), 70.0);
  EXPECT_EQ(Run("gen-world --config " + Out("missing.cfg") + " --out " + Out("w")), 2);
}

TEST_F(CliTest, DenseRocksShowRedInPreview) {
  ASSERT_EQ(Run("gen-world --rock-density 2 --extent 100 --out " + Out("w")), 0);
  const Image img = ReadPng(dir_ / "w" / "world.png");
  int red = 0;
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const uint8_t* p = img.At(r, c);
      red += p[0] == 255 && p[1] == 0 && p[2] == 0;
    }
  }
  EXPECT_GT(red, 0);
}

TEST_F(CliTest, CollectPairsLayoutAndDeterminism) {
  ASSERT_EQ(Run("collect-pairs --n 10 --seed 3 --out " + Out("p")), 0);
  int rgb = 0, seg = 0, depth = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "p")) {
    const std::string n = e.path().filename().string();
    rgb += n.ends_with("_rgb.png");
    seg += n.ends_with("_seg.png");
    depth += n.ends_with("_depth.f32");
  }
  EXPECT_EQ(rgb, 10);
  EXPECT_EQ(seg, 10);
  EXPECT_EQ(depth, 10);
  EXPECT_EQ(LineCount(dir_ / "p" / "meta.jsonl"), 10);

  std::ifstream meta(dir_ / "p" / "meta.jsonl");
  std::set<std::string> presets;
  std::set<uint64_t> rand_seeds;
  for (std::string line; std::getline(meta, line);) {
    const nlohmann::json j = nlohmann::json::parse(line);
    const std::string id = j["id"];
    presets.insert(j["preset"].get<std::string>());
    rand_seeds.insert(j["randomization_seed"].get<uint64_t>());
    const Image s = ReadPng(dir_ / "p" / (id + "_seg.png"));
    for (uint8_t v : s.data) EXPECT_LE(v, 5);
    for (float d : ReadF32(dir_ / "p" / (id + "_depth.f32"))) {
      EXPECT_GT(d, 0.0f);
      EXPECT_LE(d, 100.0f);
    }
  }
  EXPECT_EQ(presets.size(), 3u);
  EXPECT_EQ(rand_seeds.size(), 10u);

  ASSERT_EQ(Run("collect-pairs --n 10 --seed 3 --out " + Out("q")), 0);
  ExpectSameTree(dir_ / "p", dir_ / "q");
}

TEST_F(CliTest, CollectPairsUnwritableOutputExitsOne) {
  {
    std::ofstream f(dir_ / "file");
    f << "x";
  }
  EXPECT_EQ(Run("collect-pairs --n 2 --out " + Out("file") + "/sub"), 1);
}

TEST_F(CliTest, TrainSmoke) {
  const auto t0 = std::chrono::steady_clock::now();
  ASSERT_EQ(Run("train --empty --population 8 --iterations 3 --seed 2 --out " + Out("t")), 0);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 60.0);
  EXPECT_EQ(LineCount(dir_ / "t" / "curve.csv"), 1 + 3);  // header + iterations
  EXPECT_TRUE(fs::exists(dir_ / "t" / "policy.bin"));
  for (const char* a : {"1", "5", "10"}) {
    EXPECT_EQ(Run(std::string("train --empty --population 2 --iterations 1 --episodes 1 --A ") +
                  a + " --out " + Out(std::string("a") + a)),
              0)
        << a;
  }
}

TEST_F(CliTest, EvalOfflineTableAndOracleStub) {
  ASSERT_EQ(Run("make-offline --episodes 4 --seed 1 --out " + Out("ds")), 0);
  ASSERT_EQ(Run("eval-offline --dataset " + Out("ds") + " --replay --random 5 --out " + Out("r")),
            0);
  std::ifstream csv(dir_ / "r" / "report.csv");
  std::string header, replay, random;
  std::getline(csv, header);
  std::getline(csv, replay);
  std::getline(csv, random);
  EXPECT_EQ(header, "method,dataset,seeds,records,GT,GT_std,ATE,ATE_std,GT_G,GT_G_std,L2,L2_std");
  EXPECT_TRUE(replay.starts_with("Replay,ds,1,"));
  std::vector<std::string> fields;
  {
    std::stringstream ss(replay);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
  }
  ASSERT_EQ(fields.size(), 12u);
  EXPECT_EQ(fields[4], "0.000000");  // GT
  EXPECT_EQ(fields[6], "0.000000");  // ATE
  fields.clear();
  {
    std::stringstream ss(random);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
  }
  ASSERT_EQ(fields.size(), 12u);
  EXPECT_EQ(fields[2], "5");
  EXPECT_GT(std::stod(fields[5]), 0.0);  // GT std across seeds

  ASSERT_EQ(Run("eval-offline --dataset " + Out("ds") + " --replay --random 5 --out " + Out("s")),
            0);
  EXPECT_EQ(Slurp(dir_ / "r" / "report.csv"), Slurp(dir_ / "s" / "report.csv"));
}

TEST_F(CliTest, EvalOfflineModalityMismatchExitsOne) {
  ASSERT_EQ(Run("make-offline --episodes 2 --modality rgb --out " + Out("ds")), 0);
  EXPECT_EQ(Run("eval-offline --dataset " + Out("ds") + " --random 1 --out " + Out("r")), 1);
  EXPECT_NE(Slurp(dir_ / "stderr.txt").find("translation"), std::string::npos);
  EXPECT_EQ(Run("eval-offline --dataset " + Out("nowhere") + " --random 1 --out " + Out("r")), 1);
}

TEST_F(CliTest, EvalOfflineThroughTranslator) {
  // Swap every record's observation for a palette-colored RGB image, which the
  // stand-in translator maps back to the class map exactly.
  ASSERT_EQ(Run("make-offline --episodes 2 --seed 4 --out " + Out("ds")), 0);
  ASSERT_EQ(Run("eval-offline --dataset " + Out("ds") + " --random 2 --out " + Out("direct")), 0);
  std::ifstream in(dir_ / "ds" / "records.jsonl");
  std::string rewritten;
  for (std::string line; std::getline(in, line);) {
    nlohmann::json j = nlohmann::json::parse(line);
    const std::string id = j["id"];
    const ClassMap map = ClassMapFromGray(ReadPng(dir_ / "ds" / (id + "_seg.png")));
    WritePng(dir_ / "ds" / (id + "_rgb.png"), ColorizeSegmentation(map));
    fs::remove(dir_ / "ds" / (id + "_seg.png"));
    j["obs"] = nullptr;
    j["rgb"] = id + "_rgb.png";
    rewritten += j.dump() + "\n";
  }
  in.close();
  {
    std::ofstream out(dir_ / "ds" / "records.jsonl");
    out << rewritten;
  }
  EXPECT_EQ(Run("eval-offline --dataset " + Out("ds") + " --random 2 --out " + Out("r")), 1);
  ASSERT_EQ(Run("eval-offline --dataset " + Out("ds") + " --random 2 --translator " +
                std::string(S2S_PALETTE_TRANSLATOR) + " --out " + Out("r")),
            0);
  EXPECT_EQ(Slurp(dir_ / "direct" / "report.csv"), Slurp(dir_ / "r" / "report.csv"));
  EXPECT_EQ(Run("eval-offline --dataset " + Out("ds") + " --random 1 --translator false --out " +
                Out("f")),
            1);
}

TEST_F(CliTest, EvalOnlineReproducibleWithPreview) {
  const std::string args =
      "eval-online --baseline seeker --empty --goal-range 15 --episodes 6 --seed 1 --preview ";
  ASSERT_EQ(Run(args + "--out " + Out("a")), 0);
  ASSERT_EQ(Run(args + "--out " + Out("b")), 0);
  ExpectSameTree(dir_ / "a", dir_ / "b");
  const nlohmann::json report = nlohmann::json::parse(Slurp(dir_ / "a" / "report.json"));
  EXPECT_EQ(report["episodes"], 6);
  for (const char* k : {"success_rate", "collision_rate"}) {
    EXPECT_GE(report[k].get<double>(), 0.0);
    EXPECT_LE(report[k].get<double>(), 1.0);
  }
  int previews = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "a" / "preview")) {
    ++previews;
    EXPECT_TRUE(e.path().filename().string().starts_with("ep000_"));
  }
  int total_decisions = 0;
  for (const auto& o : report["outcomes"]) total_decisions += o["decisions"].get<int>();
  EXPECT_EQ(previews, report["outcomes"][0]["decisions"].get<int>());
  EXPECT_EQ(LineCount(dir_ / "a" / "episodes.jsonl"), total_decisions);

  ASSERT_EQ(Run("eval-online --baseline random --scene rock --episodes 3 --out " + Out("r")), 0);
}

TEST_F(CliTest, RenderPreviewFiles) {
  ASSERT_EQ(Run("render-preview --preset canyon --image-size 32 --out " + Out("v")), 0);
  for (const char* f : {"rgb.png", "seg.png", "depth.png", "config.txt"}) {
    EXPECT_TRUE(fs::exists(dir_ / "v" / f)) << f;
  }
  const ClassMap seg = ClassMapFromColors(ReadPng(dir_ / "v" / "seg.png"));
  EXPECT_EQ(seg.width, 32);
}

}  // namespace
}  // namespace s2s
