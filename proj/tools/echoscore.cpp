// echoscore command-line entry point.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "echoscore/baselines.hpp"
#include "echoscore/communities.hpp"
#include "echoscore/csv.hpp"
#include "echoscore/ecs.hpp"
#include "echoscore/error.hpp"
#include "echoscore/features.hpp"
#include "echoscore/gae.hpp"
#include "echoscore/graph.hpp"
#include "echoscore/ideology.hpp"
#include "echoscore/matrix_io.hpp"
#include "echoscore/pipeline.hpp"
#include "echoscore/seed.hpp"
#include "echoscore/synth.hpp"

namespace fs = std::filesystem;
using namespace echoscore;
using nlohmann::ordered_json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

// Options whose CLI form differs from the RunConfig field type.
struct RawRunFlags {
  std::string docs, embeddings, labels, manifest;
  std::string loss_mode = "auto";
  std::string distance = "normalized_euclidean_half";
  std::size_t endpoints = 0;
};

void add_train_flags(CLI::App* cmd, gae::TrainConfig& t, std::string& loss_mode) {
  cmd->add_option("--dim", t.dim, "embedding dimension")->capture_default_str();
  cmd->add_option("--hidden", t.hidden, "hidden layer width")->capture_default_str();
  cmd->add_option("--epochs", t.epochs, "maximum training epochs")->capture_default_str();
  cmd->add_option("--lr", t.learning_rate, "Adam learning rate")->capture_default_str();
  cmd->add_option("--patience", t.patience, "stop after this many epochs with loss change below 1e-5")->capture_default_str();
  cmd->add_option("--loss-mode", loss_mode, "auto, full or sampled")
      ->check(CLI::IsMember({"auto", "full", "sampled"}))
      ->capture_default_str();
  cmd->add_option("--negative-ratio", t.negative_ratio, "negatives per positive in sampled mode")
      ->capture_default_str();
}

gae::LossMode loss_mode_from(const std::string& s) {
  if (s == "full") return gae::LossMode::kFull;
  if (s == "sampled") return gae::LossMode::kSampled;
  return gae::LossMode::kAuto;
}

DistanceMode distance_from(const std::string& s) {
  return s == "euclidean" ? DistanceMode::kRaw : DistanceMode::kNormalizedHalf;
}

CLI::Option* add_distance_flag(CLI::App* cmd, std::string& distance) {
  return cmd->add_option("--distance", distance, "euclidean or normalized_euclidean_half")
      ->check(CLI::IsMember({"euclidean", "normalized_euclidean_half"}))
      ->capture_default_str();
}

void add_run_flags(CLI::App* cmd, RunConfig& cfg, RawRunFlags& raw) {
  cmd->add_option("--edges", cfg.edges, "edge list (two IDs per line)");
  cmd->add_option("--docs", raw.docs, "JSON Lines documents {user, texts}");
  cmd->add_option("--embeddings", raw.embeddings, "precomputed text embedding file (CSV or EGAE binary)");
  cmd->add_option("--labels", raw.labels, "CSV user,score with scores in [-1, 1]");
  cmd->add_option("--out", cfg.out, "output directory")->required();
  cmd->add_flag("--no-text", cfg.no_text, "use identity features instead of text");
  cmd->add_option("--seed", cfg.seed, "global seed")->capture_default_str();
  cmd->add_option("--manifest", raw.manifest, "rerun from a manifest.json (other run flags are ignored)");
  add_train_flags(cmd, cfg.train, raw.loss_mode);
  cmd->add_option("--tfidf-dim", cfg.tfidf_dim, "hashed TF-IDF width")->capture_default_str();
  cmd->add_option("--resolution", cfg.louvain_resolution, "Louvain resolution")->capture_default_str();
  add_distance_flag(cmd, raw.distance);
  cmd->add_flag("--size-weighted", cfg.size_weighted, "also report the size-weighted ECS");
  cmd->add_option("--walks", cfg.rwc_walks, "RWC walks per side")->capture_default_str();
  cmd->add_option("--endpoints", raw.endpoints, "RWC endpoints per side (default: max(10, 1% of side))");
  cmd->add_option("--fluidc-iter", cfg.fluidc_max_iter, "FluidC iteration cap")->capture_default_str();
  cmd->add_option("--train-frac", cfg.train_frac, "fraction of labels held for training")->capture_default_str();
  cmd->add_option("--neutral-band", cfg.pi_neutral_band, "PI neutral band half-width")->capture_default_str();
  cmd->add_option("--kmeans-restarts", cfg.kmeans_restarts, "k-means restarts")->capture_default_str();
}

RunConfig finish_run_config(RunConfig cfg, const RawRunFlags& raw) {
  if (!raw.manifest.empty()) {
    std::ifstream in(raw.manifest);
    if (!in) throw ConfigError("cannot open manifest " + raw.manifest);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("manifest is not valid JSON: " + std::string(e.what()));
    }
    RunConfig m = RunConfig::from_manifest(j);
    m.out = cfg.out;
    return m;
  }
  if (!raw.docs.empty()) cfg.docs = raw.docs;
  if (!raw.embeddings.empty()) cfg.embeddings = raw.embeddings;
  if (!raw.labels.empty()) cfg.labels = raw.labels;
  if (raw.endpoints > 0) cfg.rwc_endpoints = raw.endpoints;
  cfg.train.loss_mode = loss_mode_from(raw.loss_mode);
  cfg.distance = distance_from(raw.distance);
  return cfg;
}

void print_summary(const RunSummary& s) {
  auto opt = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string("n/a"); };
  std::cout << "ecs " << csv::format_double(s.ecs) << " over " << s.communities << " communities\n"
            << "rwc " << opt(s.rwc) << "  pi " << opt(s.pi) << '\n'
            << "ideology mae " << opt(s.ideology_mae) << "  mse " << opt(s.ideology_mse) << '\n'
            << "degroot mae " << opt(s.degroot_mae) << "  mse " << opt(s.degroot_mse) << '\n';
  for (const auto& n : s.notices) std::cerr << "notice: " << n << '\n';
}

// Per-user matrix rows reordered to graph node order; every graph user must be present.
Eigen::MatrixXd aligned_embedding(const fs::path& path, const InteractionGraph& g) {
  const LabeledMatrix file = read_labeled_matrix(path);
  if (!file.tweet_index.empty()) throw DataError(path.string() + ": expected one row per user");
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.num_nodes()), file.values.cols());
  std::vector<bool> seen(g.num_nodes(), false);
  for (std::size_t r = 0; r < file.ids.size(); ++r) {
    const auto v = g.index_of(file.ids[r]);
    if (!v) continue;
    z.row(*v) = file.values.row(static_cast<Eigen::Index>(r));
    seen[*v] = true;
  }
  for (NodeIndex v = 0; v < g.num_nodes(); ++v) {
    if (!seen[v]) throw DataError(path.string() + ": no embedding row for user '" + g.id(v) + "'");
  }
  return z;
}

void emit(const ordered_json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_text_file(out, j.dump(2) + "\n");
  }
}

void require_file(const std::string& path, const char* what) {
  if (!fs::exists(path)) throw ConfigError(std::string(what) + " not found: " + path);
}

synth::SbmSpec read_sbm_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec file " + path);
  synth::SbmSpec spec;
  try {
    nlohmann::json j;
    in >> j;
    spec.n = j.value("n", spec.n);
    spec.block_fractions = j.value("block_fractions", spec.block_fractions);
    spec.p_in = j.value("p_in", spec.p_in);
    spec.p_out = j.value("p_out", spec.p_out);
    spec.feature_dim = j.value("feature_dim", spec.feature_dim);
    spec.separation = j.value("separation", spec.separation);
    spec.noise = j.value("noise", spec.noise);
    spec.seed = j.value("seed", spec.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"echoscore: echo chamber scoring for interaction graphs"};
  app.require_subcommand(1);

  // analyze / ablate
  RunConfig run_cfg;
  RawRunFlags run_raw;
  auto* analyze = app.add_subcommand("analyze", "full pipeline: embed, detect communities, score");
  add_run_flags(analyze, run_cfg, run_raw);
  RunConfig abl_cfg;
  RawRunFlags abl_raw;
  auto* ablate = app.add_subcommand("ablate", "with-text vs identity-features comparison");
  add_run_flags(ablate, abl_cfg, abl_raw);

  // synth
  synth::SbmSpec sbm;
  std::string sbm_spec_file, sbm_out;
  auto* synth_cmd = app.add_subcommand("synth", "generate a stochastic block model dataset");
  synth_cmd->add_option("--spec", sbm_spec_file, "JSON spec; flags given explicitly override it");
  synth_cmd->add_option("--n", sbm.n, "nodes")->capture_default_str();
  synth_cmd->add_option("--blocks", sbm.block_fractions, "block fractions")->capture_default_str();
  synth_cmd->add_option("--p-in", sbm.p_in, "within-block edge probability")->capture_default_str();
  synth_cmd->add_option("--p-out", sbm.p_out, "between-block edge probability")->capture_default_str();
  synth_cmd->add_option("--feature-dim", sbm.feature_dim, "feature width")->capture_default_str();
  synth_cmd->add_option("--separation", sbm.separation, "distance between block means")->capture_default_str();
  synth_cmd->add_option("--noise", sbm.noise, "feature noise sigma")->capture_default_str();
  synth_cmd->add_option("--seed", sbm.seed, "seed")->capture_default_str();
  synth_cmd->add_option("--out", sbm_out, "output directory")->required();

  // train
  RunConfig tr_cfg;
  std::string tr_docs, tr_emb, tr_loss = "auto", tr_out;
  auto* train_cmd = app.add_subcommand("train", "train the graph autoencoder and write user embeddings");
  train_cmd->add_option("--edges", tr_cfg.edges, "edge list")->required();
  train_cmd->add_option("--docs", tr_docs, "JSON Lines documents");
  train_cmd->add_option("--embeddings", tr_emb, "precomputed text embedding file");
  train_cmd->add_flag("--no-text", tr_cfg.no_text, "identity features");
  train_cmd->add_option("--tfidf-dim", tr_cfg.tfidf_dim, "hashed TF-IDF width")->capture_default_str();
  train_cmd->add_option("--seed", tr_cfg.seed, "global seed")->capture_default_str();
  add_train_flags(train_cmd, tr_cfg.train, tr_loss);
  train_cmd->add_option("--out", tr_out, "embedding file (.bin/.egae binary, otherwise CSV)")->required();

  // ecs
  std::string ecs_edges, ecs_emb, ecs_part, ecs_out, ecs_dist = "normalized_euclidean_half", ecs_users;
  double ecs_res = 1.0;
  std::uint64_t ecs_seed = 0;
  bool ecs_weighted = false;
  auto* ecs_cmd = app.add_subcommand("ecs", "score an existing embedding");
  ecs_cmd->add_option("--edges", ecs_edges, "edge list")->required();
  ecs_cmd->add_option("--embedding", ecs_emb, "per-user embedding file")->required();
  ecs_cmd->add_option("--partition", ecs_part, "CSV user,community (default: Louvain)");
  ecs_cmd->add_option("--resolution", ecs_res, "Louvain resolution")->capture_default_str();
  ecs_cmd->add_option("--seed", ecs_seed, "global seed")->capture_default_str();
  add_distance_flag(ecs_cmd, ecs_dist);
  ecs_cmd->add_flag("--size-weighted", ecs_weighted, "also report the size-weighted ECS");
  ecs_cmd->add_option("--out", ecs_out, "report JSON (default: stdout)");
  ecs_cmd->add_option("--user-scores", ecs_users, "per-user CSV");

  // rwc
  std::string rwc_edges, rwc_part, rwc_out;
  std::size_t rwc_walks = 10000, rwc_endpoints = 0;
  std::uint64_t rwc_seed = 0;
  auto* rwc_cmd = app.add_subcommand("rwc", "random walk controversy");
  rwc_cmd->add_option("--edges", rwc_edges, "edge list")->required();
  rwc_cmd->add_option("--partition", rwc_part, "CSV user,community with two sides (default: FluidC k=2)");
  rwc_cmd->add_option("--walks", rwc_walks, "walks per side")->capture_default_str();
  rwc_cmd->add_option("--endpoints", rwc_endpoints, "endpoints per side");
  rwc_cmd->add_option("--seed", rwc_seed, "global seed")->capture_default_str();
  rwc_cmd->add_option("--out", rwc_out, "report JSON (default: stdout)");

  // pi
  std::string pi_edges, pi_labels, pi_out;
  double pi_band = 0.0;
  auto* pi_cmd = app.add_subcommand("pi", "polarization index from DeGroot-spread labels");
  pi_cmd->add_option("--edges", pi_edges, "edge list")->required();
  pi_cmd->add_option("--labels", pi_labels, "CSV user,score seeds")->required();
  pi_cmd->add_option("--neutral-band", pi_band, "neutral band half-width")->capture_default_str();
  pi_cmd->add_option("--out", pi_out, "report JSON (default: stdout)");

  // ideology
  std::string id_edges, id_emb, id_labels, id_out, id_dist = "normalized_euclidean_half";
  std::uint64_t id_seed = 0;
  double id_frac = 0.10;
  auto* id_cmd = app.add_subcommand("ideology", "embedding-distance ideology scores");
  id_cmd->add_option("--edges", id_edges, "edge list")->required();
  id_cmd->add_option("--embedding", id_emb, "per-user embedding file")->required();
  id_cmd->add_option("--labels", id_labels, "CSV user,score for evaluation");
  id_cmd->add_option("--seed", id_seed, "global seed")->capture_default_str();
  id_cmd->add_option("--train-frac", id_frac, "fraction of labels held for training")->capture_default_str();
  add_distance_flag(id_cmd, id_dist);
  id_cmd->add_option("--out", id_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*analyze) {
      const RunConfig cfg = finish_run_config(run_cfg, run_raw);
      print_summary(run_analysis(cfg));
    } else if (*ablate) {
      const RunConfig cfg = finish_run_config(abl_cfg, abl_raw);
      const AblationSummary s = run_ablation(cfg);
      std::cout << "with_text:\n";
      print_summary(s.with_text);
      std::cout << "no_text:\n";
      print_summary(s.no_text);
    } else if (*synth_cmd) {
      if (!sbm_spec_file.empty()) {
        synth::SbmSpec from_file = read_sbm_spec(sbm_spec_file);
        auto given = [&](const char* name) { return synth_cmd->get_option(name)->count() > 0; };
        if (given("--n")) from_file.n = sbm.n;
        if (given("--blocks")) from_file.block_fractions = sbm.block_fractions;
        if (given("--p-in")) from_file.p_in = sbm.p_in;
        if (given("--p-out")) from_file.p_out = sbm.p_out;
        if (given("--feature-dim")) from_file.feature_dim = sbm.feature_dim;
        if (given("--separation")) from_file.separation = sbm.separation;
        if (given("--noise")) from_file.noise = sbm.noise;
        if (given("--seed")) from_file.seed = sbm.seed;
        sbm = from_file;
      }
      write_synth_dataset(sbm, sbm_out);
    } else if (*train_cmd) {
      if (!tr_docs.empty()) tr_cfg.docs = tr_docs;
      if (!tr_emb.empty()) tr_cfg.embeddings = tr_emb;
      tr_cfg.train.loss_mode = loss_mode_from(tr_loss);
      tr_cfg.validate();
      const InteractionGraph g = load_edge_list(tr_cfg.edges);
      FeatureBuild fb;
      if (tr_cfg.no_text) {
        fb.features = identity_features(g);
      } else if (tr_cfg.embeddings) {
        fb = mean_pool_import(*tr_cfg.embeddings, g);
      } else {
        fb = hashed_tfidf(read_documents(*tr_cfg.docs), g, {.dimension = tr_cfg.tfidf_dim});
      }
      for (const auto& w : fb.warnings) std::cerr << "notice: " << w << '\n';
      gae::TrainConfig t = tr_cfg.train;
      t.seed = StageSeeds::from(tr_cfg.seed).train;
      const gae::EmbeddingMatrix emb = gae::train(g, fb.features, t);
      write_labeled_matrix(tr_out, g.ids(), emb.z, format_for_path(tr_out));
      std::cout << "epochs " << emb.epochs_run << "  loss " << csv::format_double(emb.initial_loss) << " -> "
                << csv::format_double(emb.final_loss) << '\n';
    } else if (*ecs_cmd) {
      require_file(ecs_edges, "edge list");
      require_file(ecs_emb, "embedding file");
      const InteractionGraph g = load_edge_list(ecs_edges);
      const Eigen::MatrixXd z = aligned_embedding(ecs_emb, g);
      const Partition omega = ecs_part.empty() ? louvain(g, ecs_res, StageSeeds::from(ecs_seed).louvain)
                                               : read_partition_csv(ecs_part, g);
      const EcsReport report =
          ecs(omega, z, {.mode = distance_from(ecs_dist), .size_weighted = ecs_weighted});
      for (const auto& w : report.warnings) std::cerr << "notice: " << w << '\n';
      ordered_json j{{"seed", ecs_seed}};
      j.update(ecs_report_json(report));
      emit(j, ecs_out);
      if (!ecs_users.empty()) {
        std::ostringstream out;
        write_user_scores_csv(out, g, omega, report);
        write_text_file(ecs_users, out.str());
      }
    } else if (*rwc_cmd) {
      require_file(rwc_edges, "edge list");
      const InteractionGraph g = load_edge_list(rwc_edges);
      const StageSeeds seeds = StageSeeds::from(rwc_seed);
      Partition sides;
      if (rwc_part.empty()) {
        const FluidResult f = fluidc(g, 2, seeds.fluidc);
        for (const auto& w : f.warnings) std::cerr << "notice: " << w << '\n';
        sides = f.partition;
      } else {
        sides = read_partition_csv(rwc_part, g);
      }
      RwcConfig rc;
      rc.walks_per_side = rwc_walks;
      rc.seed = seeds.rwc;
      if (rwc_endpoints > 0) rc.endpoints_per_side = rwc_endpoints;
      const RwcResult r = rwc(g, sides, rc);
      for (const auto& w : r.warnings) std::cerr << "notice: " << w << '\n';
      emit(ordered_json{{"seed", rwc_seed},
                        {"rwc", r.rwc},
                        {"p_xx", r.p_xx},
                        {"p_xy", r.p_xy},
                        {"p_yx", r.p_yx},
                        {"p_yy", r.p_yy},
                        {"endpoints_per_side", {r.endpoints_x, r.endpoints_y}},
                        {"walks_discarded", r.walks_discarded},
                        {"unreachable_starts", r.unreachable_starts}},
           rwc_out);
    } else if (*pi_cmd) {
      require_file(pi_edges, "edge list");
      require_file(pi_labels, "label file");
      const InteractionGraph g = load_edge_list(pi_edges);
      const LabelFile labels = read_labels_csv(pi_labels, g);
      for (const auto& w : labels.warnings) std::cerr << "notice: " << w << '\n';
      if (labels.scores.empty()) throw DataError("label file matched no graph users");
      const DeGrootResult spread = degroot_spread(g, labels.scores);
      const PolarizationIndex pi = polarization_index(spread.opinions.x, pi_band);
      for (const auto& w : pi.warnings) std::cerr << "notice: " << w << '\n';
      emit(ordered_json{{"pi", pi.pi},
                        {"a_plus", pi.a_plus},
                        {"a_minus", pi.a_minus},
                        {"gc_plus", pi.gc_plus},
                        {"gc_minus", pi.gc_minus},
                        {"classified", pi.classified},
                        {"degroot_iterations", spread.iterations},
                        {"degroot_converged", spread.converged}},
           pi_out);
    } else if (*id_cmd) {
      require_file(id_edges, "edge list");
      require_file(id_emb, "embedding file");
      const InteractionGraph g = load_edge_list(id_edges);
      const Eigen::MatrixXd z = aligned_embedding(id_emb, g);
      const DistanceMode mode = distance_from(id_dist);
      const StageSeeds seeds = StageSeeds::from(id_seed);
      const Eigen::MatrixXd points = mode == DistanceMode::kNormalizedHalf ? normalized_rows(z) : z;
      const TwoClusters clusters = kmeans2(points, {.seed = seeds.kmeans});
      const std::vector<double> scores = ideology_scores(EmbeddingSpace(z, mode), clusters);
      std::error_code ec;
      fs::create_directories(id_out, ec);
      if (ec) throw ConfigError("cannot create output directory " + id_out);
      std::ostringstream out;
      out << "user,ideology\n";
      for (NodeIndex v = 0; v < g.num_nodes(); ++v) {
        out << csv::quote(g.id(v)) << ',' << csv::format_double(scores[v]) << '\n';
      }
      write_text_file(fs::path(id_out) / "ideology.csv", out.str());
      if (!id_labels.empty()) {
        require_file(id_labels, "label file");
        const LabelFile labels = read_labels_csv(id_labels, g);
        for (const auto& w : labels.warnings) std::cerr << "notice: " << w << '\n';
        const LabelSplit split = split_labels(labels.scores, seeds.split, id_frac);
        const IdeologyReport ir = evaluate_ideology(scores, labels.scores, split);
        const ordered_json j{{"seed", id_seed},       {"mae", ir.mae},         {"mse", ir.mse},
                             {"order", ir.order},     {"n_train", ir.n_train}, {"n_eval", ir.n_eval}};
        write_text_file(fs::path(id_out) / "ideology_report.json", j.dump(2) + "\n");
        std::cout << "mae " << csv::format_double(ir.mae) << "  mse " << csv::format_double(ir.mse) << '\n';
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
