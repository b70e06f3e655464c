#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "echoscore/error.hpp"
#include "echoscore/pipeline.hpp"

using namespace echoscore;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("echoscore_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

synth::SbmSpec small_spec() {
  synth::SbmSpec spec;
  spec.n = 120;
  spec.p_in = 0.15;
  spec.p_out = 0.01;
  spec.seed = 3;
  return spec;
}

RunConfig small_run(const fs::path& data, const fs::path& out) {
  RunConfig cfg;
  cfg.edges = data / "edges.tsv";
  cfg.embeddings = data / "features.csv";
  cfg.labels = data / "labels.csv";
  cfg.out = out;
  cfg.seed = 11;
  cfg.train.epochs = 40;
  cfg.rwc_walks = 1000;
  return cfg;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ECHOSCORE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(Synth, WritesFourFilesDeterministically) {
  const auto a = scratch("synth_a"), b = scratch("synth_b");
  write_synth_dataset(small_spec(), a);
  write_synth_dataset(small_spec(), b);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename()));
  }
  EXPECT_EQ(files, 4u);
  EXPECT_EQ(slurp(a / "labels.csv").substr(0, 11), "user,score\n");
}

TEST(Manifest, RoundTripAndHashIgnoresOutput) {
  const auto data = scratch("manifest_data");
  write_synth_dataset(small_spec(), data);
  RunConfig cfg = small_run(data, "/tmp/x");
  cfg.rwc_endpoints = 4;
  cfg.distance = DistanceMode::kRaw;
  const RunConfig back = RunConfig::from_manifest(nlohmann::json::parse(cfg.to_manifest().dump()));
  EXPECT_EQ(back.to_manifest(), cfg.to_manifest());
  RunConfig moved = cfg;
  moved.out = "/somewhere/else";
  EXPECT_EQ(moved.config_hash(), cfg.config_hash());
  moved.seed = 12;
  EXPECT_NE(moved.config_hash(), cfg.config_hash());
  EXPECT_THROW(RunConfig::from_manifest(nlohmann::json::object()), ConfigError);
}

TEST(RunConfig, Validation) {
  const auto data = scratch("validate_data");
  write_synth_dataset(small_spec(), data);
  RunConfig cfg = small_run(data, data / "out");
  EXPECT_NO_THROW(cfg.validate());
  RunConfig missing = cfg;
  missing.labels = data / "nope.csv";
  EXPECT_THROW(missing.validate(), ConfigError);
  RunConfig no_features = cfg;
  no_features.embeddings.reset();
  EXPECT_THROW(no_features.validate(), ConfigError);
  no_features.no_text = true;
  EXPECT_NO_THROW(no_features.validate());
  RunConfig frac = cfg;
  frac.train_frac = 1.0;
  EXPECT_THROW(frac.validate(), ConfigError);
}

TEST(Analyze, WritesReportsAndRerunsByteIdentical) {
  const auto data = scratch("analyze_data");
  write_synth_dataset(small_spec(), data);
  const auto out1 = scratch("analyze_1"), out2 = scratch("analyze_2");
  const RunConfig cfg = small_run(data, out1);
  const RunSummary s = run_analysis(cfg);
  EXPECT_GE(s.communities, 2u);
  EXPECT_TRUE(s.pi.has_value());
  EXPECT_TRUE(s.ideology_mae.has_value());
  for (auto name : {"graph_stats.json", "embedding.bin", "training_log.csv", "partition.csv", "ecs_report.json",
                    "ecs_users.csv", "baselines.json", "ideology.csv", "ideology_report.json",
                    "ideology_histogram.csv", "projection.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out1 / name)) << name;
  }
  const auto report = nlohmann::json::parse(slurp(out1 / "ecs_report.json"));
  EXPECT_EQ(report["config_hash"], cfg.config_hash());
  EXPECT_EQ(report["seed"], 11);

  RunConfig again = RunConfig::from_manifest(nlohmann::json::parse(slurp(out1 / "manifest.json")));
  again.out = out2;
  run_analysis(again);
  for (auto name : {"ecs_report.json", "baselines.json", "ideology_report.json", "graph_stats.json"}) {
    EXPECT_EQ(slurp(out1 / name), slurp(out2 / name)) << name;
  }
}

TEST(Analyze, MissingLabelsSkipWithNotice) {
  const auto data = scratch("nolabels_data");
  write_synth_dataset(small_spec(), data);
  RunConfig cfg = small_run(data, scratch("nolabels_out"));
  cfg.labels.reset();
  cfg.embeddings.reset();
  cfg.no_text = true;
  const RunSummary s = run_analysis(cfg);
  EXPECT_FALSE(s.pi.has_value());
  EXPECT_FALSE(s.ideology_mae.has_value());
  EXPECT_TRUE(s.rwc.has_value());
  EXPECT_FALSE(fs::exists(cfg.out / "ideology_report.json"));
  EXPECT_FALSE(s.notices.empty());
}

TEST(Ablate, TableSchema) {
  const auto data = scratch("ablate_data");
  write_synth_dataset(small_spec(), data);
  RunConfig cfg = small_run(data, scratch("ablate_out"));
  run_ablation(cfg);
  const std::string table = slurp(cfg.out / "ablation.csv");
  std::istringstream lines(table);
  std::string header, row1, row2, extra;
  std::getline(lines, header);
  std::getline(lines, row1);
  std::getline(lines, row2);
  EXPECT_EQ(header, "mode,ecs,mae,mse");
  EXPECT_EQ(row1.substr(0, 10), "with_text,");
  EXPECT_EQ(row2.substr(0, 8), "no_text,");
  EXPECT_FALSE(std::getline(lines, extra));
  cfg.embeddings.reset();
  cfg.no_text = true;
  EXPECT_THROW(run_ablation(cfg), ConfigError);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  EXPECT_EQ(run_cli("synth --n 120 --p-in 0.15 --p-out 0.01 --seed 3 --out " + (dir / "data").string()), 0);
  const std::string edges = (dir / "data" / "edges.tsv").string();
  EXPECT_EQ(run_cli("analyze --edges " + edges + " --no-text --epochs 20 --walks 1000 --out " + (dir / "run").string()), 0);
  EXPECT_EQ(run_cli("ecs --edges " + edges + " --embedding " + (dir / "run" / "embedding.bin").string() +
                    " --out " + (dir / "ecs.json").string()),
            0);
  EXPECT_EQ(run_cli("analyze --edges " + edges + " --out " + (dir / "x").string()), 2);  // no features
  EXPECT_EQ(run_cli("analyze --no-text --edges /does/not/exist --out " + (dir / "x").string()), 2);
  EXPECT_EQ(run_cli("analyze --bogus-flag"), 2);
  std::ofstream(dir / "bad.tsv") << "a b\nc\n";
  EXPECT_EQ(run_cli("analyze --no-text --edges " + (dir / "bad.tsv").string() + " --out " + (dir / "x").string()), 3);
  std::ofstream(dir / "k4.tsv") << "a b\na c\na d\nb c\nb d\nc d\n";
  EXPECT_EQ(run_cli("analyze --no-text --edges " + (dir / "k4.tsv").string() + " --out " + (dir / "y").string()), 3);
  EXPECT_EQ(run_cli("train --no-text --edges " + edges + " --lr 1e300 --epochs 50 --out " +
                    (dir / "z.bin").string()),
            4);
}
