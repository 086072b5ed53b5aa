/*
 * Copyright 2026 The Antidote Authors.
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

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "antidote/binary_io.hpp"
#include "antidote/experiment.hpp"
#include "cli.hpp"
#include "test_util.hpp"

namespace antidote {
namespace {

namespace fs = std::filesystem;

constexpr const char* kSchema = R"(schema_version = 1
delimiter = ,
label = y
label.positive = 1
continuous = c0, c1
discrete.d0 = a, b, c
discrete.d1 = x, z
sensitive.s0 = f, m
)";

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string synthetic_csv(std::uint64_t seed, int rows) {
  Rng rng(seed);
  std::ostringstream out;
  out << "c0,c1,d0,d1,s0,y\n";
  const char* d0[] = {"a", "b", "c"};
  const char* d1[] = {"x", "z"};
  const char* s0[] = {"f", "m"};
  std::uniform_int_distribution<int> level(0, 20), pick3(0, 2), pick2(0, 1);
  for (int r = 0; r < rows; ++r) {
    const int c0 = level(rng), c1 = level(rng), s = pick2(rng);
    const int y = (c0 + 4 * s + pick3(rng) * 2 > 14) ? 1 : 0;
    out << c0 << ',' << c1 << ',' << d0[pick3(rng)] << ',' << d1[pick2(rng)] << ',' << s0[s] << ',' << y << '\n';
  }
  return out.str();
}

struct Workspace {
  testing::TempDir dir;
  fs::path config;

  explicit Workspace(const std::string& extra = "", int train_rows = 400, int test_rows = 200) {
    write_text(dir.path() / "toy.schema", kSchema);
    fs::create_directories(dir.path() / "data");
    write_text(dir.path() / "data" / "train.csv", synthetic_csv(1, train_rows));
    write_text(dir.path() / "data" / "test.csv", synthetic_csv(2, test_rows));
    config = dir.path() / "toy.cfg";
    const bool own_gap = extra.find("max_continuous_gap") != std::string::npos;
    write_text(config, std::string("schema = toy.schema\ndata_dir = data\ntrain = train.csv\ntest = test.csv\n"
                                   "output_dir = out\nseed = 3\nrepetitions = 2\n") +
                           (own_gap ? "" : "comparability.max_continuous_gap = 0.05\n") +
                           std::string("gan.epochs = 2\ngan.batch_size = 64\ngan.noise_dim = 8\ngan.trace_rows = 50\n"
                                   "nn.hidden = 8, 8\nnn.iterations = 200\nnn.batch_size = 32\n"
                                   "sample.target_percentage = 5\nsample.max_iterations = 100\n") +
                           extra);
  }
  fs::path out() const { return dir.path() / "out"; }
};

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "antidote");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

TEST(Config, DefaultsAndRegimeParsing) {
  Workspace ws("regimes = lr:base, nn:anti+dis, nn:antidro\n");
  const auto cfg = ExperimentConfig::read(ws.config);
  EXPECT_EQ(cfg.comparability.max_discrete_diff, 1);
  EXPECT_DOUBLE_EQ(cfg.comparability.max_continuous_gap, 0.05);
  ASSERT_EQ(cfg.regimes.size(), 3u);
  EXPECT_EQ(cfg.regimes[1].name(), "nn:anti+dis");
  EXPECT_EQ(cfg.regimes[2].regime, Regime::kAntiDro);
  EXPECT_EQ(cfg.train_path, ws.dir.path() / "data" / "train.csv");
  EXPECT_EQ(cfg.resolved_bundle(), ws.out() / "generator.bundle");
  EXPECT_DOUBLE_EQ(cfg.antidro_percentage, cfg.sampling.target_percentage);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, UnknownKeysAndBadRangesAreRejected) {
  const fs::path base = ".";
  EXPECT_THROW(ExperimentConfig::parse("schema = s\ntrain = t\nfoo = 1\n", base), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("schema = s\ntrain = t\nregimes = lr:magic\n", base), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("train = t\n", base), ConfigError);
  Workspace ws;
  auto cfg = ExperimentConfig::read(ws.config);
  cfg.comparability.max_continuous_gap = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ExperimentConfig::read(ws.config);
  cfg.sampling.target_percentage = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ExperimentConfig::read(ws.config);
  cfg.regimes = {RegimeSpec::parse("lr:antidro")};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ExperimentConfig::read(ws.config);
  cfg.train_path = ws.dir.path() / "missing.csv";
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, DataDirectoryFallsBackToEnvironment) {
  const fs::path base = "/cfg";
  ::setenv(kDataDirEnv, "/env/data", 1);
  auto cfg = ExperimentConfig::parse("schema = s\ntrain = t.csv\n", base);
  EXPECT_EQ(cfg.train_path, fs::path("/env/data/t.csv"));
  EXPECT_EQ(cfg.schema_path, fs::path("/cfg/s"));
  cfg = ExperimentConfig::parse("schema = s\ntrain = t.csv\ndata_dir = d\n", base);
  EXPECT_EQ(cfg.train_path, fs::path("/cfg/d/t.csv"));
  ::unsetenv(kDataDirEnv);
  cfg = ExperimentConfig::parse("schema = s\ntrain = t.csv\n", base);
  EXPECT_EQ(cfg.train_path, fs::path("/cfg/t.csv"));
}

TEST(Cli, ExitCodes) {
  Workspace ws;
  EXPECT_EQ(run_cli({"--help"}), cli::kExitOk);
  EXPECT_EQ(run_cli({"pairs"}), cli::kExitConfig);
  EXPECT_EQ(run_cli({"--config", ws.config.string(), "bogus"}), cli::kExitConfig);
  EXPECT_EQ(run_cli({"--config", (ws.dir.path() / "nope.cfg").string(), "pairs"}), cli::kExitConfig);
  EXPECT_EQ(run_cli({"--config", ws.config.string(), "--threads", "0", "pairs"}), cli::kExitConfig);

  Workspace bad("comparability.max_discrete_diff = 7\n");
  std::string err;
  EXPECT_EQ(run_cli({"--config", bad.config.string(), "pairs"}, nullptr, &err), cli::kExitConfig);
  EXPECT_NE(err.find("configuration error"), std::string::npos);

  // Zero continuous tolerance and unique values: no pairs to train on.
  Workspace none("comparability.max_discrete_diff = 0\ncomparability.max_continuous_gap = 0\n", 3, 3);
  EXPECT_EQ(run_cli({"--config", none.config.string(), "-q", "train-generator"}, nullptr, &err), cli::kExitRuntime)
      << err;
}

TEST(Cli, PairsIsDeterministicAndPrintsCounts) {
  Workspace ws;
  std::string out;
  ASSERT_EQ(run_cli({"--config", ws.config.string(), "-q", "pairs"}, &out), 0);
  EXPECT_NE(out.find("train"), std::string::npos);
  const auto first = read_file_bytes(ws.out() / "pairs_train.csv");
  const auto counts = read_file_bytes(ws.out() / "pair_counts.csv");
  EXPECT_EQ(counts.substr(0, counts.find('\n')), "split,rows,positive,negative,positive_differing,negative_differing");
  const auto other = ws.dir.path() / "again";
  ASSERT_EQ(run_cli({"--config", ws.config.string(), "-q", "--out", other.string(), "pairs"}), 0);
  EXPECT_EQ(read_file_bytes(other / "pairs_train.csv"), first);
  EXPECT_EQ(read_file_bytes(other / "pairs_test.csv"), read_file_bytes(ws.out() / "pairs_test.csv"));
}

TEST(Cli, EmptyDatasetGivesZeroPairs) {
  Workspace ws;
  write_text(ws.dir.path() / "data" / "train.csv", "c0,c1,d0,d1,s0,y\n");
  std::string out;
  ASSERT_EQ(run_cli({"--config", ws.config.string(), "-q", "pairs"}, &out), 0);
  const auto counts = read_file_bytes(ws.out() / "pair_counts.csv");
  EXPECT_NE(counts.find("train,0,0,0,0,0"), std::string::npos);
}

TEST(Cli, TrainSampleAndReload) {
  Workspace ws;
  ASSERT_EQ(run_cli({"--config", ws.config.string(), "-q", "train-generator"}), 0);
  const auto bundle = read_file_bytes(ws.out() / "generator.bundle");
  const auto trace = read_file_bytes(ws.out() / "trace.csv");
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 3);

  const auto other = ws.dir.path() / "second";
  ASSERT_EQ(run_cli({"--config", ws.config.string(), "-q", "--out", other.string(), "train-generator"}), 0);
  EXPECT_EQ(read_file_bytes(other / "generator.bundle"), bundle);

  std::string out;
  ASSERT_EQ(run_cli({"--config", ws.config.string(), "-q", "sample", "--percentage", "5"}, &out), 0);
  const auto csv = read_file_bytes(ws.out() / "antidote.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 20);
  ASSERT_EQ(run_cli({"--config", ws.config.string(), "-q", "--out", other.string(), "sample", "--bundle",
                     (other / "generator.bundle").string()}),
            0);
  EXPECT_EQ(read_file_bytes(other / "antidote.csv"), csv);

  ASSERT_EQ(run_cli({"--config", ws.config.string(), "-q", "sample", "--percentage", "0"}), 0);
  const auto empty = read_file_bytes(ws.out() / "antidote.csv");
  EXPECT_EQ(std::count(empty.begin(), empty.end(), '\n'), 1);
}

TEST(Experiment, DeltaTableAndReports) {
  Workspace ws("regimes = lr:base, lr:dis, nn:base, nn:random-comparable, lr:anti\nrandom.percentage = 50\n");
  std::string out;
  ASSERT_EQ(run_cli({"--config", ws.config.string(), "-q", "experiment"}, &out), 0);
  const auto delta = read_file_bytes(ws.out() / "delta.csv");
  std::istringstream lines(delta);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "classifier,regime,status,metric,value,base,delta_percent");
  int base_rows = 0, rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    if (line.rfind("lr,base,", 0) == 0 || line.rfind("nn,base,", 0) == 0) {
      ++base_rows;
      EXPECT_EQ(line.substr(line.rfind(',') + 1), "0.000000") << line;
    }
  }
  EXPECT_EQ(base_rows, 18);
  EXPECT_EQ(rows, 5 * 9);
  EXPECT_TRUE(fs::exists(ws.out() / "reports.json"));
  EXPECT_TRUE(fs::exists(ws.out() / "antidote.csv"));
  const auto reports = read_file_bytes(ws.out() / "reports.csv");
  EXPECT_EQ(std::count(reports.begin(), reports.end(), '\n'), 6);
}

TEST(Experiment, AntidroUsesItsOwnAntidoteSize) {
  Workspace ws("regimes = nn:anti, nn:antidro\nantidro.target_percentage = 15\n");
  ASSERT_EQ(run_cli({"--config", ws.config.string(), "-q", "experiment"}), 0);
  auto data_rows = [](const fs::path& p) {
    const auto text = read_file_bytes(p);
    return std::count(text.begin(), text.end(), '\n') - 1;
  };
  EXPECT_EQ(data_rows(ws.out() / "antidote.csv"), 20);
  EXPECT_EQ(data_rows(ws.out() / "antidote_antidro.csv"), 60);
  // The smaller set is a subset of the larger one.
  const auto small = read_file_bytes(ws.out() / "antidote.csv");
  const auto large = read_file_bytes(ws.out() / "antidote_antidro.csv");
  std::istringstream lines(small);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) EXPECT_NE(large.find(line + "\n"), std::string::npos) << line;
}

TEST(Experiment, FailedRegimesAreMarkedNotFatal) {
  RegimeOutcome ok, bad;
  ok.spec = RegimeSpec::parse("lr:base");
  ok.ok = true;
  ok.report.roc = 80;
  bad.spec = RegimeSpec::parse("lr:anti");
  bad.error = "boom";
  const auto csv = delta_table_csv({ok, bad});
  EXPECT_NE(csv.find("lr,anti,failed"), std::string::npos);
  EXPECT_NE(csv.find("lr,base,ok,roc,80.000000,80.000000,0.000000"), std::string::npos);

  // A single-class test split makes every metric undefined.
  Workspace ws("regimes = lr:base\n");
  write_text(ws.dir.path() / "data" / "test.csv", "c0,c1,d0,d1,s0,y\n1,1,a,x,f,0\n2,2,b,x,m,0\n");
  EXPECT_EQ(run_cli({"--config", ws.config.string(), "-q", "experiment"}), cli::kExitRuntime);
  EXPECT_NE(read_file_bytes(ws.out() / "delta.csv").find("lr,base,failed"), std::string::npos);
}

TEST(Tradeoff, ZeroPercentReproducesBase) {
  Workspace ws("regimes = nn:base\ntradeoff.regimes = nn:anti, nn:antidro\n");
  auto cfg = ExperimentConfig::read(ws.config);
  cfg.tradeoff_percentages = {0};
  set_log_quiet(true);
  const auto rows = cmd_tradeoff(cfg);
  const auto base = cmd_experiment(cfg);
  ASSERT_EQ(rows.size(), 2u);
  ASSERT_TRUE(base[0].ok);
  for (const auto& r : rows) {
    ASSERT_TRUE(r.ok);
    EXPECT_DOUBLE_EQ(r.roc, base[0].report.roc);
    EXPECT_DOUBLE_EQ(r.pos_mean, base[0].report.comp.headline.positive->mean);
  }
  const auto csv = read_file_bytes(ws.out() / "tradeoff.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "percentage,classifier,regime,status,roc,pos_mean,neg_mean,pos_mean_variance");
  set_log_quiet(false);
}

TEST(Tradeoff, SweepWritesOneRowPerPercentageAndRegime) {
  Workspace ws("tradeoff.regimes = lr:anti\n");
  std::string out;
  ASSERT_EQ(run_cli({"--config", ws.config.string(), "-q", "tradeoff", "--percentages", "0,5,10"}, &out), 0);
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 4);
}

}  // namespace
}  // namespace antidote
