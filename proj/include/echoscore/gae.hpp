#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "echoscore/features.hpp"
#include "echoscore/graph.hpp"

namespace echoscore::gae {

// Graph autoencoder: Z = Ahat * ReLU(Ahat * X * W0) * W1, decoded as
// sigmoid(Z Z^T) and trained against A + I with a class-balanced BCE.

struct EncoderParams {
  Eigen::MatrixXd w0;  // f x h
  Eigen::MatrixXd w1;  // h x d

  std::size_t hidden() const noexcept { return static_cast<std::size_t>(w0.cols()); }
  std::size_t embedding_dim() const noexcept { return static_cast<std::size_t>(w1.cols()); }
};

/// Glorot-uniform initialization from a seeded engine.
EncoderParams glorot_init(std::size_t features, std::size_t hidden, std::size_t dim,
                          std::uint64_t seed);

enum class LossMode {
  kAuto,     // full below the memory guard, sampled above it
  kFull,     // every ordered pair
  kSampled,  // all positives + negative_ratio x uniformly drawn negatives, redrawn each epoch
};

struct TrainConfig {
  std::size_t dim = 32;
  std::size_t hidden = 64;
  std::size_t epochs = 300;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  std::size_t patience = 30;
  double plateau_tolerance = 1e-5;
  LossMode loss_mode = LossMode::kAuto;
  std::size_t full_loss_node_limit = 20000;
  std::size_t negative_ratio = 5;

  /// Throws ConfigError on the first violated constraint.
  void validate() const;
};

struct EmbeddingMatrix {
  Eigen::MatrixXd z;  // n x d
  std::size_t epochs_run = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::uint64_t seed = 0;
  bool sampled_loss = false;
  std::vector<double> loss_history;  // loss at the start of each epoch
};

/// Forward pass; throws DataError on shape mismatch.
Eigen::MatrixXd encode(const SparseMatrix& ahat, const FeatureMatrix& x, const EncoderParams& params);

/// logistic(<z_u, z_v>)
double decode_pair(const Eigen::MatrixXd& z, NodeIndex u, NodeIndex v);
/// Dense n x n reconstruction; intended for small graphs and diagnostics.
Eigen::MatrixXd decode(const Eigen::MatrixXd& z);

/// The pairs the reconstruction loss is evaluated on.
///
/// Full targets cover all n^2 ordered pairs with A + I as positives and
/// positives up-weighted by (n^2 - m') / m'. The loss is the weighted mean, which
/// equals the average of the mean positive BCE and the mean negative BCE.
/// Sampled targets keep all m' positives and a drawn list of negative ordered
/// pairs, combined the same way.
class ReconstructionTargets {
 public:
  static ReconstructionTargets full(const InteractionGraph& g);
  static ReconstructionTargets sampled(const InteractionGraph& g, std::size_t negative_ratio,
                                       std::mt19937_64& rng);

  bool is_sampled() const noexcept { return sampled_; }
  const InteractionGraph& graph() const noexcept { return *graph_; }
  std::size_t positive_pairs() const noexcept;
  double pos_weight() const noexcept;
  const std::vector<Edge>& negatives() const noexcept { return negatives_; }

 private:
  const InteractionGraph* graph_ = nullptr;
  bool sampled_ = false;
  std::vector<Edge> negatives_;
};

struct LossAndGradients {
  double loss = 0.0;
  Eigen::MatrixXd grad_w0;
  Eigen::MatrixXd grad_w1;
};

LossAndGradients loss_and_gradients(const EncoderParams& params, const SparseMatrix& ahat,
                                    const FeatureMatrix& x, const ReconstructionTargets& targets);

/// Full-batch Adam on the reconstruction loss. Deterministic per cfg.seed.
EmbeddingMatrix train(const InteractionGraph& g, const FeatureMatrix& x, const TrainConfig& cfg);

/// Ranking AUC of decoded scores, edges vs. non-edges over unordered pairs u < v.
double reconstruction_auc(const Eigen::MatrixXd& z, const InteractionGraph& g);

}  // namespace echoscore::gae
