/*
 * Copyright 2026 The catinfluence Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "catinf/cli.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"
#include "json.hpp"

namespace catinf::cli {
namespace {

namespace fs = std::filesystem;
using Args = std::vector<std::string>;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("catinf_cli_" +
             std::string(::testing::UnitTest::GetInstance()
                             ->current_test_info()
                             ->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return main_entry(args, out_, err_);
  }

  // A small sim-1 dataset written through the simulate command.
  void simulate(const fs::path& dir, std::size_t workers = 1) {
    ASSERT_EQ(run({"simulate", "--kind", "sim1", "--n", "400", "--seed", "3",
                   "--trees", "20", "--workers", std::to_string(workers),
                   "--out", dir.string()}),
              kOk)
        << err_.str();
  }

  std::vector<std::string> data_args(const fs::path& dir) {
    return {"--schema", (dir / "schema.json").string(), "--data",
            (dir / "data.csv").string()};
  }

  fs::path root_;
  std::ostringstream out_;
  std::ostringstream err_;
};

std::vector<std::string> operator+(std::vector<std::string> a,
                                   const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

TEST_F(CliTest, SimulateWritesTableAndPlots) {
  simulate(root_ / "sim");
  for (const char* name :
       {"data.csv", "schema.json", "table.csv", "table.json", "datta.csv",
        "datta.json", "plot_X1.tsv", "plot_X4.tsv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(root_ / "sim" / name)) << name;
  }
  std::istringstream table(slurp(root_ / "sim" / "table.csv"));
  std::string line;
  std::getline(table, line);
  EXPECT_EQ(line, "feature,value,influence,total,n_sub,flagged");
  std::size_t rows = 0;
  while (std::getline(table, line)) ++rows;
  EXPECT_EQ(rows, 8u);
  const auto manifest =
      nlohmann::json::parse(slurp(root_ / "sim" / "manifest.json"));
  EXPECT_EQ(manifest["command"], "simulate");
}

TEST_F(CliTest, InfluenceSingleRow) {
  simulate(root_ / "sim");
  ASSERT_EQ(run(Args{"influence"} + data_args(root_ / "sim") +
                std::vector<std::string>{"--fix", "X1=1", "--class", "1",
                                         "--scope", "all", "--trees", "20",
                                         "--out", (root_ / "inf").string()}),
            kOk)
      << err_.str();
  std::istringstream csv(slurp(root_ / "inf" / "influence.csv"));
  std::string header, row, extra;
  std::getline(csv, header);
  std::getline(csv, row);
  EXPECT_EQ(header, "scenario,X1,X2,X3,X4,total,n_sub");
  EXPECT_EQ(row.rfind("X1=1,", 0), 0u);
  EXPECT_FALSE(std::getline(csv, extra));
  const auto json =
      nlohmann::json::parse(slurp(root_ / "inf" / "influence.json"));
  EXPECT_TRUE(json.is_object());
}

TEST_F(CliTest, ScanDropAndDatta) {
  simulate(root_ / "sim");
  const auto common = data_args(root_ / "sim") +
                      std::vector<std::string>{"--trees", "20", "--plot"};
  ASSERT_EQ(run(Args{"scan"} + common +
                std::vector<std::string>{"--out", (root_ / "s").string()}),
            kOk)
      << err_.str();
  EXPECT_TRUE(fs::exists(root_ / "s" / "scan.csv"));
  EXPECT_TRUE(fs::exists(root_ / "s" / "scan_scenarios.csv"));
  EXPECT_TRUE(fs::exists(root_ / "s" / "scan_plot_X3.tsv"));

  ASSERT_EQ(run(Args{"drop"} + common +
                std::vector<std::string>{"--feature", "X2", "--out",
                                         (root_ / "d").string()}),
            kOk)
      << err_.str();
  EXPECT_FALSE(fs::exists(root_ / "d" / "drop_plot_X2.tsv"));
  std::istringstream drop(slurp(root_ / "d" / "drop_scenarios.csv"));
  std::string header;
  std::getline(drop, header);
  EXPECT_EQ(header, "scenario,X1,X3,X4,total,n_sub");

  ASSERT_EQ(run(Args{"datta"} + data_args(root_ / "sim") +
                std::vector<std::string>{"--trees", "20", "--raw", "--out",
                                         (root_ / "x").string()}),
            kOk)
      << err_.str();
  EXPECT_TRUE(fs::exists(root_ / "x" / "datta.csv"));
}

TEST_F(CliTest, DropOnSixFeatureDataset) {
  std::string schema = R"({"features": [)";
  const char* names[] = {"sex", "age", "cardi", "diab", "hyper", "obes"};
  for (int j = 0; j < 6; ++j) {
    schema += std::string(j ? "," : "") + R"({"name": ")" + names[j] +
              R"(", "domain": ["0", "1", "2"]})";
  }
  schema += R"(], "response": {"name": "decease", "domain": ["0", "1"]}})";
  spit(root_ / "schema.json", schema);
  std::string data = "sex,age,cardi,diab,hyper,obes,decease\n";
  for (int i = 0; i < 300; ++i) {
    std::string row;
    for (int j = 0; j < 6; ++j) row += std::to_string((i * (j + 3) / 7) % 3) + ",";
    data += row + std::to_string((i / 3 + i % 5) % 2) + "\n";
  }
  spit(root_ / "data.csv", data);
  ASSERT_EQ(run({"drop", "--schema", (root_ / "schema.json").string(),
                 "--data", (root_ / "data.csv").string(), "--feature", "age",
                 "--class", "1", "--classifier", "frequency", "--out",
                 (root_ / "out").string()}),
            kOk)
      << err_.str();
  const auto json = nlohmann::json::parse(slurp(root_ / "out" / "drop.json"));
  EXPECT_EQ(json["axes"].size(), 5u);
  std::istringstream table(slurp(root_ / "out" / "drop_scenarios.csv"));
  std::string header;
  std::getline(table, header);
  EXPECT_EQ(header, "scenario,sex,cardi,diab,hyper,obes,total,n_sub");
}

TEST_F(CliTest, ExitCodes) {
  simulate(root_ / "sim");
  const auto args = data_args(root_ / "sim");
  const std::string out = (root_ / "o").string();
  EXPECT_EQ(run(Args{"influence"} + args +
                std::vector<std::string>{"--fix", "X1=7", "--out", out}),
            kConfigError);
  EXPECT_NE(err_.str().find("X1"), std::string::npos);
  EXPECT_EQ(run(Args{"influence"} + args +
                std::vector<std::string>{"--fix", "X9=1", "--out", out}),
            kConfigError);
  EXPECT_EQ(run(Args{"scan"} + args +
                std::vector<std::string>{"--class", "maybe", "--out", out}),
            kConfigError);
  EXPECT_EQ(run({"scan", "--bogus"}), kConfigError);
  EXPECT_EQ(run({"scan", "--schema", (root_ / "sim" / "schema.json").string(),
                 "--data", (root_ / "missing.csv").string(), "--out", out}),
            kDataError);
  EXPECT_EQ(run(Args{"scan"} + args +
                std::vector<std::string>{"--assignment-cap", "8", "--out",
                                         out}),
            kCapacityError);
  EXPECT_EQ(run(Args{"influence"} + args +
                std::vector<std::string>{"--classifier", "frequency",
                                         "--alpha", "0", "--mode", "sampled",
                                         "--fix", "X1=1", "--out", out}),
            kConfigError);
  EXPECT_NE(err_.str().find("--alpha"), std::string::npos);

  spit(root_ / "schema.json",
       R"({"features": [{"name": "A", "domain": ["x", "y"]}],
           "response": {"name": "Y", "domain": ["0", "1"]}})");
  spit(root_ / "data.csv", "A,Y\nx,1\ny,0\nx,1\n");
  EXPECT_EQ(run({"influence", "--schema", (root_ / "schema.json").string(),
                 "--data", (root_ / "data.csv").string(), "--classifier",
                 "frequency", "--fix", "A=y", "--out", out}),
            kEmptySubsample);
  spit(root_ / "bad.csv", "A,Y\nx,1\nz,0\n");
  EXPECT_EQ(run({"datta", "--schema", (root_ / "schema.json").string(),
                 "--data", (root_ / "bad.csv").string(), "--out", out}),
            kDataError);
  EXPECT_NE(err_.str().find("line 3"), std::string::npos) << err_.str();
}

TEST_F(CliTest, HelpExitsCleanly) {
  EXPECT_EQ(run({"--help"}), kOk);
  EXPECT_FALSE(out_.str().empty());
}

TEST_F(CliTest, RerunsAreByteIdentical) {
  simulate(root_ / "a", 1);
  simulate(root_ / "b", 4);
  for (const auto& entry : fs::directory_iterator(root_ / "a")) {
    const auto name = entry.path().filename();
    if (name == "manifest.json") continue;
    EXPECT_EQ(slurp(entry.path()), slurp(root_ / "b" / name)) << name;
  }
  const auto scan = [&](const fs::path& dir, const std::string& workers) {
    return run(Args{"scan"} + data_args(root_ / "a") +
               std::vector<std::string>{"--trees", "20", "--workers", workers,
                                        "--out", dir.string()});
  };
  ASSERT_EQ(scan(root_ / "s1", "1"), kOk);
  ASSERT_EQ(scan(root_ / "s2", "3"), kOk);
  for (const char* name : {"scan.csv", "scan.json", "scan_scenarios.csv"}) {
    EXPECT_EQ(slurp(root_ / "s1" / name), slurp(root_ / "s2" / name)) << name;
  }
}

}  // namespace
}  // namespace catinf::cli
