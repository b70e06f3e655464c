#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "echoscore/baselines.hpp"
#include "echoscore/ecs.hpp"
#include "echoscore/gae.hpp"
#include "echoscore/ideology.hpp"
#include "echoscore/synth.hpp"

namespace echoscore {

/// Everything an analysis run depends on. Serialized as the run manifest; the
/// output directory is excluded from the config hash so reruns elsewhere match.
struct RunConfig {
  std::filesystem::path edges;
  std::optional<std::filesystem::path> docs;
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> labels;
  std::filesystem::path out;
  bool no_text = false;

  std::uint64_t seed = 0;
  gae::TrainConfig train;  // train.seed is derived from `seed`
  std::size_t tfidf_dim = 256;
  double louvain_resolution = 1.0;
  DistanceMode distance = DistanceMode::kNormalizedHalf;
  bool size_weighted = false;
  std::size_t rwc_walks = 10000;
  std::optional<std::size_t> rwc_endpoints;
  std::size_t fluidc_max_iter = 100;
  double train_frac = 0.10;
  double pi_neutral_band = 0.0;
  std::size_t kmeans_restarts = 10;
  std::size_t kmeans_max_iter = 100;

  /// Checks parameter ranges and that inputs exist; throws ConfigError.
  void validate() const;

  nlohmann::ordered_json to_manifest() const;
  static RunConfig from_manifest(const nlohmann::json& manifest);
  std::string config_hash() const;
};

/// Per-stage seeds fanned out from RunConfig::seed.
struct StageSeeds {
  std::uint64_t train, louvain, fluidc, rwc, kmeans, split;
  static StageSeeds from(std::uint64_t global_seed);
};

struct RunSummary {
  double ecs = 0.0;
  std::size_t communities = 0;
  std::optional<double> rwc;
  std::optional<double> pi;
  std::optional<double> ideology_mae;
  std::optional<double> ideology_mse;
  std::optional<double> degroot_mae;
  std::optional<double> degroot_mse;
  std::vector<std::string> notices;
};

/// ingest -> features -> train -> communities -> ECS -> baselines -> ideology,
/// writing every report into cfg.out.
RunSummary run_analysis(const RunConfig& cfg);

struct AblationSummary {
  RunSummary with_text;
  RunSummary no_text;
};

/// Runs the configured features arm and the identity-features arm on the same
/// graph and seeds, into cfg.out/with_text and cfg.out/no_text.
AblationSummary run_ablation(const RunConfig& cfg);

/// Writes edges.tsv, features.csv, partition.csv and labels.csv.
void write_synth_dataset(const synth::SbmSpec& spec, const std::filesystem::path& dir);

nlohmann::ordered_json ecs_report_json(const EcsReport& report);

/// Writes `text` to `path` atomically enough for reports (temp file + rename).
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace echoscore
