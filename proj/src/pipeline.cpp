#include "echoscore/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "echoscore/csv.hpp"
#include "echoscore/error.hpp"
#include "echoscore/pca.hpp"
#include "echoscore/seed.hpp"

namespace echoscore {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Above this many unordered pairs the reconstruction AUC is skipped.
constexpr double kAucPairLimit = 8e6;

std::string loss_mode_name(gae::LossMode mode) {
  switch (mode) {
    case gae::LossMode::kFull: return "full";
    case gae::LossMode::kSampled: return "sampled";
    case gae::LossMode::kAuto: break;
  }
  return "auto";
}

gae::LossMode parse_loss_mode(const std::string& name) {
  if (name == "auto") return gae::LossMode::kAuto;
  if (name == "full") return gae::LossMode::kFull;
  if (name == "sampled") return gae::LossMode::kSampled;
  throw ConfigError("unknown loss mode '" + name + "'");
}

DistanceMode parse_distance(const std::string& name) {
  if (name == to_string(DistanceMode::kNormalizedHalf)) return DistanceMode::kNormalizedHalf;
  if (name == to_string(DistanceMode::kRaw)) return DistanceMode::kRaw;
  throw ConfigError("unknown distance mode '" + name + "'");
}

ordered_json optional_path(const std::optional<fs::path>& p) {
  return p ? ordered_json(p->string()) : ordered_json(nullptr);
}

template <typename T>
ordered_json optional_value(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

void write_json(const fs::path& path, const ordered_json& j) { write_text_file(path, j.dump(2) + "\n"); }

template <typename Writer>
void write_stream(const fs::path& path, Writer&& writer) {
  std::ostringstream out;
  writer(out);
  write_text_file(path, out.str());
}

ordered_json provenance(const RunConfig& cfg) {
  return ordered_json{{"config_hash", cfg.config_hash()}, {"seed", cfg.seed}};
}

ordered_json graph_stats(const InteractionGraph& g) {
  const auto comp = g.connected_components();
  std::vector<std::size_t> comp_size;
  for (auto c : comp) {
    if (c >= comp_size.size()) comp_size.resize(c + 1, 0);
    ++comp_size[c];
  }
  std::size_t isolated = 0;
  for (NodeIndex v = 0; v < g.num_nodes(); ++v) isolated += g.degree(v) == 0;
  const double n = static_cast<double>(g.num_nodes());
  ordered_json j;
  j["nodes"] = g.num_nodes();
  j["edges"] = g.num_edges();
  j["isolated_nodes"] = isolated;
  j["components"] = comp_size.size();
  j["largest_component"] = comp_size.empty() ? 0 : *std::max_element(comp_size.begin(), comp_size.end());
  j["max_degree"] = g.max_degree();
  j["density"] = n > 1 ? 2.0 * static_cast<double>(g.num_edges()) / (n * (n - 1.0)) : 0.0;
  return j;
}

FeatureBuild build_features(const RunConfig& cfg, const InteractionGraph& g) {
  if (cfg.no_text) {
    FeatureBuild fb;
    fb.features = identity_features(g);
    fb.coverage = 1.0;
    return fb;
  }
  if (cfg.embeddings) return mean_pool_import(*cfg.embeddings, g);
  return hashed_tfidf(read_documents(*cfg.docs), g, {.dimension = cfg.tfidf_dim});
}

void append(std::vector<std::string>& to, const std::vector<std::string>& from, const std::string& prefix) {
  for (const auto& w : from) to.push_back(prefix + w);
}

}  // namespace

void write_text_file(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << text;
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void RunConfig::validate() const {
  auto require_file = [](const fs::path& p, const char* what) {
    if (!fs::exists(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
  };
  if (edges.empty()) throw ConfigError("an edge list is required");
  require_file(edges, "edge list");
  if (docs) require_file(*docs, "documents file");
  if (embeddings) require_file(*embeddings, "embedding file");
  if (labels) require_file(*labels, "label file");
  if (docs && embeddings) throw ConfigError("give either a documents file or an embedding file, not both");
  if (!no_text && !docs && !embeddings) {
    throw ConfigError("no text features: pass a documents or embedding file, or run without text");
  }
  train.validate();
  if (tfidf_dim < 16) throw ConfigError("hashed TF-IDF dimension must be at least 16");
  if (!(louvain_resolution > 0.0)) throw ConfigError("Louvain resolution must be positive");
  RwcConfig{.endpoints_per_side = rwc_endpoints, .walks_per_side = rwc_walks}.validate();
  if (fluidc_max_iter < 1) throw ConfigError("FluidC iterations must be positive");
  if (!(train_frac >= 0.0 && train_frac < 1.0)) throw ConfigError("train fraction must be in [0, 1)");
  if (!(pi_neutral_band >= 0.0)) throw ConfigError("neutral band must be nonnegative");
  if (kmeans_restarts < 1 || kmeans_max_iter < 1) throw ConfigError("k-means restarts and iterations must be positive");
}

ordered_json RunConfig::to_manifest() const {
  ordered_json j;
  j["inputs"] = {{"edges", edges.string()},
                 {"docs", optional_path(docs)},
                 {"embeddings", optional_path(embeddings)},
                 {"labels", optional_path(labels)}};
  j["no_text"] = no_text;
  j["seed"] = seed;
  j["train"] = {{"dim", train.dim},
                {"hidden", train.hidden},
                {"epochs", train.epochs},
                {"learning_rate", train.learning_rate},
                {"beta1", train.beta1},
                {"beta2", train.beta2},
                {"adam_epsilon", train.adam_epsilon},
                {"patience", train.patience},
                {"plateau_tolerance", train.plateau_tolerance},
                {"loss_mode", loss_mode_name(train.loss_mode)},
                {"full_loss_node_limit", train.full_loss_node_limit},
                {"negative_ratio", train.negative_ratio}};
  j["features"] = {{"tfidf_dim", tfidf_dim}};
  j["communities"] = {{"louvain_resolution", louvain_resolution}, {"fluidc_max_iter", fluidc_max_iter}};
  j["metrics"] = {{"distance", std::string(to_string(distance))}, {"size_weighted", size_weighted}};
  j["baselines"] = {{"rwc_walks", rwc_walks},
                    {"rwc_endpoints", optional_value(rwc_endpoints)},
                    {"pi_neutral_band", pi_neutral_band}};
  j["ideology"] = {{"train_frac", train_frac}, {"kmeans_restarts", kmeans_restarts}, {"kmeans_max_iter", kmeans_max_iter}};
  return j;
}

RunConfig RunConfig::from_manifest(const nlohmann::json& m) {
  RunConfig cfg;
  try {
    const auto& in = m.at("inputs");
    cfg.edges = in.at("edges").get<std::string>();
    auto opt = [&](const char* key) -> std::optional<fs::path> {
      if (!in.contains(key) || in.at(key).is_null()) return std::nullopt;
      return fs::path(in.at(key).get<std::string>());
    };
    cfg.docs = opt("docs");
    cfg.embeddings = opt("embeddings");
    cfg.labels = opt("labels");
    cfg.no_text = m.at("no_text").get<bool>();
    cfg.seed = m.at("seed").get<std::uint64_t>();
    const auto& t = m.at("train");
    cfg.train.dim = t.at("dim").get<std::size_t>();
    cfg.train.hidden = t.at("hidden").get<std::size_t>();
    cfg.train.epochs = t.at("epochs").get<std::size_t>();
    cfg.train.learning_rate = t.at("learning_rate").get<double>();
    cfg.train.beta1 = t.at("beta1").get<double>();
    cfg.train.beta2 = t.at("beta2").get<double>();
    cfg.train.adam_epsilon = t.at("adam_epsilon").get<double>();
    cfg.train.patience = t.at("patience").get<std::size_t>();
    cfg.train.plateau_tolerance = t.at("plateau_tolerance").get<double>();
    cfg.train.loss_mode = parse_loss_mode(t.at("loss_mode").get<std::string>());
    cfg.train.full_loss_node_limit = t.at("full_loss_node_limit").get<std::size_t>();
    cfg.train.negative_ratio = t.at("negative_ratio").get<std::size_t>();
    cfg.tfidf_dim = m.at("features").at("tfidf_dim").get<std::size_t>();
    cfg.louvain_resolution = m.at("communities").at("louvain_resolution").get<double>();
    cfg.fluidc_max_iter = m.at("communities").at("fluidc_max_iter").get<std::size_t>();
    cfg.distance = parse_distance(m.at("metrics").at("distance").get<std::string>());
    cfg.size_weighted = m.at("metrics").at("size_weighted").get<bool>();
    const auto& b = m.at("baselines");
    cfg.rwc_walks = b.at("rwc_walks").get<std::size_t>();
    if (!b.at("rwc_endpoints").is_null()) cfg.rwc_endpoints = b.at("rwc_endpoints").get<std::size_t>();
    cfg.pi_neutral_band = b.at("pi_neutral_band").get<double>();
    const auto& id = m.at("ideology");
    cfg.train_frac = id.at("train_frac").get<double>();
    cfg.kmeans_restarts = id.at("kmeans_restarts").get<std::size_t>();
    cfg.kmeans_max_iter = id.at("kmeans_max_iter").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid manifest: ") + e.what());
  }
  return cfg;
}

std::string RunConfig::config_hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_manifest().dump())));
  return buf;
}

StageSeeds StageSeeds::from(std::uint64_t global_seed) {
  return {stage_seed(global_seed, "train"),  stage_seed(global_seed, "louvain"), stage_seed(global_seed, "fluidc"),
          stage_seed(global_seed, "rwc"),    stage_seed(global_seed, "kmeans"),  stage_seed(global_seed, "split")};
}

ordered_json ecs_report_json(const EcsReport& report) {
  ordered_json j;
  j["ecs"] = report.ecs;
  if (report.ecs_size_weighted) j["ecs_size_weighted"] = *report.ecs_size_weighted;
  ordered_json communities = ordered_json::array();
  for (const auto& c : report.communities) {
    communities.push_back({{"id", c.id}, {"size", c.size}, {"ecs_star", c.ecs_star}});
  }
  j["communities"] = std::move(communities);
  j["degenerate_users"] = report.degenerate_users;
  j["zero_norm_rows"] = report.zero_norm_rows;
  j["distance_mode"] = std::string(to_string(report.mode));
  return j;
}

RunSummary run_analysis(const RunConfig& cfg) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec || !fs::is_directory(cfg.out)) throw ConfigError("cannot create output directory " + cfg.out.string());

  const StageSeeds seeds = StageSeeds::from(cfg.seed);
  RunSummary summary;
  auto& notices = summary.notices;

  // Ingest.
  const InteractionGraph g = load_edge_list(cfg.edges);
  {
    ordered_json stats = provenance(cfg);
    stats.update(graph_stats(g));
    write_json(cfg.out / "graph_stats.json", stats);
  }

  // Features and embedding.
  const FeatureBuild features = build_features(cfg, g);
  append(notices, features.warnings, "features: ");
  gae::TrainConfig train_cfg = cfg.train;
  train_cfg.seed = seeds.train;
  const gae::EmbeddingMatrix emb = gae::train(g, features.features, train_cfg);
  write_labeled_matrix(cfg.out / "embedding.bin", g.ids(), emb.z, MatrixFormat::kBinary);
  write_stream(cfg.out / "training_log.csv", [&](std::ostream& out) {
    out << "epoch,loss\n";
    for (std::size_t e = 0; e < emb.loss_history.size(); ++e) {
      out << e + 1 << ',' << csv::format_double(emb.loss_history[e]) << '\n';
    }
  });
  std::optional<double> auc;
  const double pairs = 0.5 * static_cast<double>(g.num_nodes()) * static_cast<double>(g.num_nodes() - 1);
  if (g.num_edges() > 0 && pairs <= kAucPairLimit && static_cast<double>(g.num_edges()) < pairs) {
    auc = gae::reconstruction_auc(emb.z, g);
  }

  // Communities and ECS.
  const Partition omega = louvain(g, cfg.louvain_resolution, seeds.louvain);
  write_stream(cfg.out / "partition.csv", [&](std::ostream& out) { write_partition_csv(out, g, omega); });
  if (omega.num_communities() < 2) {
    throw DataError("community detection found a single community; ECS is undefined for one community");
  }
  const EcsReport report = ecs(omega, emb.z, {.mode = cfg.distance, .size_weighted = cfg.size_weighted});
  append(notices, report.warnings, "ecs: ");
  {
    ordered_json j = provenance(cfg);
    j.update(ecs_report_json(report));
    j["training"] = {{"epochs_run", emb.epochs_run},
                     {"initial_loss", emb.initial_loss},
                     {"final_loss", emb.final_loss},
                     {"sampled_loss", emb.sampled_loss},
                     {"reconstruction_auc", optional_value(auc)}};
    j["features"] = {{"provenance", std::string(to_string(features.features.provenance()))},
                     {"dimension", features.features.cols()},
                     {"coverage", features.coverage}};
    write_json(cfg.out / "ecs_report.json", j);
  }
  write_stream(cfg.out / "ecs_users.csv", [&](std::ostream& out) { write_user_scores_csv(out, g, omega, report); });
  summary.ecs = report.ecs;
  summary.communities = omega.num_communities();

  // Baselines.
  ordered_json baselines = provenance(cfg);
  try {
    const FluidResult sides = fluidc(g, 2, seeds.fluidc, cfg.fluidc_max_iter);
    append(notices, sides.warnings, "fluidc: ");
    const RwcResult r = rwc(g, sides.partition, {.endpoints_per_side = cfg.rwc_endpoints, .walks_per_side = cfg.rwc_walks, .seed = seeds.rwc});
    append(notices, r.warnings, "rwc: ");
    summary.rwc = r.rwc;
    baselines["rwc_detail"] = {{"p_xx", r.p_xx},
                               {"p_xy", r.p_xy},
                               {"p_yx", r.p_yx},
                               {"p_yy", r.p_yy},
                               {"endpoints_per_side", {r.endpoints_x, r.endpoints_y}},
                               {"side_sizes", sides.partition.sizes()},
                               {"walks_discarded", r.walks_discarded},
                               {"unreachable_starts", r.unreachable_starts}};
  } catch (const DataError& e) {
    notices.push_back(std::string("rwc skipped: ") + e.what());
  }

  std::optional<LabelFile> labels;
  std::optional<LabelSplit> split;
  if (cfg.labels) {
    labels = read_labels_csv(*cfg.labels, g);
    append(notices, labels->warnings, "labels: ");
    split = split_labels(labels->scores, seeds.split, cfg.train_frac);
    if (labels->scores.empty()) {
      notices.push_back("label file matched no graph users; PI and ideology evaluation skipped");
    } else {
      // Opinions spread from the training labels; seeding every label would
      // leave nothing to propagate on fully labeled graphs.
      NodeScores train_labels;
      for (NodeIndex v : split->train) train_labels[v] = labels->scores.at(v);
      if (train_labels.empty()) {
        notices.push_back("pi: training split is empty, seeding DeGroot with every label");
        train_labels = labels->scores;
      }
      const DeGrootResult spread = degroot_spread(g, train_labels);
      if (!spread.converged) notices.push_back("pi: DeGroot spread hit the iteration cap before converging");
      const PolarizationIndex pi = polarization_index(spread.opinions.x, cfg.pi_neutral_band);
      append(notices, pi.warnings, "pi: ");
      summary.pi = pi.pi;
      baselines["pi_detail"] = {{"a_plus", pi.a_plus},
                                {"a_minus", pi.a_minus},
                                {"gc_plus", pi.gc_plus},
                                {"gc_minus", pi.gc_minus},
                                {"degroot_iterations", spread.iterations},
                                {"degroot_converged", spread.converged}};
      if (!split->train.empty() && !split->eval.empty()) {
        const IdeologyErrors base = degroot_ideology_baseline(g, train_labels, split->eval, labels->scores);
        summary.degroot_mae = base.mae;
        summary.degroot_mse = base.mse;
      } else {
        notices.push_back("degroot baseline skipped: empty training or validation split");
      }
    }
  } else {
    notices.push_back("no labels given; PI and ideology evaluation skipped");
  }
  baselines["rwc"] = optional_value(summary.rwc);
  baselines["pi"] = optional_value(summary.pi);
  baselines["degroot_mae"] = optional_value(summary.degroot_mae);
  baselines["degroot_mse"] = optional_value(summary.degroot_mse);
  write_json(cfg.out / "baselines.json", baselines);

  // Ideology from embedding distances.
  try {
    const EmbeddingSpace space(emb.z, cfg.distance);
    const Eigen::MatrixXd points = cfg.distance == DistanceMode::kNormalizedHalf ? normalized_rows(emb.z) : emb.z;
    const TwoClusters clusters = kmeans2(points, {.restarts = cfg.kmeans_restarts, .max_iter = cfg.kmeans_max_iter, .seed = seeds.kmeans});
    const std::vector<double> scores = ideology_scores(space, clusters);
    write_stream(cfg.out / "ideology.csv", [&](std::ostream& out) {
      out << "user,ideology\n";
      for (NodeIndex v = 0; v < g.num_nodes(); ++v) out << csv::quote(g.id(v)) << ',' << csv::format_double(scores[v]) << '\n';
    });
    if (labels && labels->scores.size() >= 10 && !split->eval.empty()) {
      const IdeologyReport ir = evaluate_ideology(scores, labels->scores, *split);
      summary.ideology_mae = ir.mae;
      summary.ideology_mse = ir.mse;
      ordered_json j = provenance(cfg);
      j["mae"] = ir.mae;
      j["mse"] = ir.mse;
      j["order"] = ir.order;
      j["mae_forward"] = ir.mae_forward;
      j["mae_swapped"] = ir.mae_swapped;
      j["mse_forward"] = ir.mse_forward;
      j["mse_swapped"] = ir.mse_swapped;
      j["n_train"] = ir.n_train;
      j["n_eval"] = ir.n_eval;
      j["cluster_sizes"] = clusters.sizes;
      j["degroot_mae"] = optional_value(summary.degroot_mae);
      j["degroot_mse"] = optional_value(summary.degroot_mse);
      write_json(cfg.out / "ideology_report.json", j);
      write_stream(cfg.out / "ideology_histogram.csv", [&](std::ostream& out) {
        write_histogram_csv(out, ideology_histogram(scores, ir.order, labels->scores, split->eval));
      });
    } else if (labels) {
      notices.push_back("ideology evaluation skipped: fewer than 10 labeled users");
    }
  } catch (const DataError& e) {
    notices.push_back(std::string("ideology skipped: ") + e.what());
  }

  // 2-D projection of the embedding.
  const Eigen::MatrixXd projection = pca_2d(emb.z);
  write_stream(cfg.out / "projection.csv", [&](std::ostream& out) {
    out << "user,pc1,pc2\n";
    for (NodeIndex v = 0; v < g.num_nodes(); ++v) {
      out << csv::quote(g.id(v)) << ',' << csv::format_double(projection(v, 0)) << ','
          << csv::format_double(projection(v, 1)) << '\n';
    }
  });

  ordered_json manifest = cfg.to_manifest();
  manifest["config_hash"] = cfg.config_hash();
  manifest["stage_seeds"] = {{"train", seeds.train},   {"louvain", seeds.louvain}, {"fluidc", seeds.fluidc},
                             {"rwc", seeds.rwc},       {"kmeans", seeds.kmeans},   {"split", seeds.split}};
  write_json(cfg.out / "manifest.json", manifest);

  write_stream(cfg.out / "notices.txt", [&](std::ostream& out) {
    for (const auto& n : notices) out << n << '\n';
  });
  return summary;
}

AblationSummary run_ablation(const RunConfig& cfg) {
  if (!cfg.docs && !cfg.embeddings) throw ConfigError("ablation needs a documents or embedding file for the text arm");
  RunConfig text = cfg;
  text.no_text = false;
  text.out = cfg.out / "with_text";
  RunConfig plain = cfg;
  plain.no_text = true;
  plain.out = cfg.out / "no_text";

  AblationSummary result{run_analysis(text), run_analysis(plain)};

  ordered_json j = provenance(text);
  auto row = [](const RunSummary& s) {
    return ordered_json{{"ecs", s.ecs}, {"mae", optional_value(s.ideology_mae)}, {"mse", optional_value(s.ideology_mse)}};
  };
  j["with_text"] = row(result.with_text);
  j["no_text"] = row(result.no_text);
  write_json(cfg.out / "ablation.json", j);
  write_stream(cfg.out / "ablation.csv", [&](std::ostream& out) {
    auto cell = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); };
    out << "mode,ecs,mae,mse\n";
    out << "with_text," << csv::format_double(result.with_text.ecs) << ',' << cell(result.with_text.ideology_mae) << ','
        << cell(result.with_text.ideology_mse) << '\n';
    out << "no_text," << csv::format_double(result.no_text.ecs) << ',' << cell(result.no_text.ideology_mae) << ','
        << cell(result.no_text.ideology_mse) << '\n';
  });
  return result;
}

void write_synth_dataset(const synth::SbmSpec& spec, const fs::path& dir) {
  const synth::SbmDataset data = synth::generate(spec);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
  write_stream(dir / "edges.tsv", [&](std::ostream& out) { write_edge_list(out, data.graph); });
  write_stream(dir / "features.csv",
               [&](std::ostream& out) { write_labeled_matrix_csv(out, data.graph.ids(), data.features.values()); });
  write_stream(dir / "partition.csv", [&](std::ostream& out) { write_partition_csv(out, data.graph, data.blocks); });
  write_stream(dir / "labels.csv", [&](std::ostream& out) { write_labels_csv(out, data.graph, data.labels); });
}

}  // namespace echoscore
