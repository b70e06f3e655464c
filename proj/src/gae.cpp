#include "echoscore/gae.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "echoscore/error.hpp"
#include "echoscore/seed.hpp"

namespace echoscore::gae {
namespace {

constexpr Eigen::Index kRowBlock = 128;

struct Forward {
  Eigen::MatrixXd pre;     // Ahat X W0
  Eigen::MatrixXd mixed;   // Ahat ReLU(pre)
  Eigen::MatrixXd z;
};

void check_shapes(const SparseMatrix& ahat, const FeatureMatrix& x, const EncoderParams& p) {
  if (static_cast<std::size_t>(ahat.rows()) != x.rows() || ahat.rows() != ahat.cols()) {
    throw DataError("propagation matrix is " + std::to_string(ahat.rows()) + "x" + std::to_string(ahat.cols()) +
                    " but features have " + std::to_string(x.rows()) + " rows");
  }
  if (static_cast<std::size_t>(p.w0.rows()) != x.cols()) {
    throw DataError("W0 has " + std::to_string(p.w0.rows()) + " rows, features have " + std::to_string(x.cols()) +
                    " columns");
  }
  if (p.w1.rows() != p.w0.cols()) throw DataError("W1 rows do not match W0 columns");
}

Forward forward(const SparseMatrix& ahat, const FeatureMatrix& x, const EncoderParams& p) {
  check_shapes(ahat, x, p);
  Forward f;
  f.pre = ahat * x.multiply(p.w0);
  f.mixed = ahat * f.pre.cwiseMax(0.0);
  f.z = f.mixed * p.w1;
  return f;
}

// Returns -log(sigmoid(s)) for positives or -log(1 - sigmoid(s)) for negatives,
// and writes sigmoid(s) to `prob`.
inline double bce_term(double s, bool positive, double& prob) {
  const double e = std::exp(-std::abs(s));
  const double log_term = std::log1p(e);
  prob = s >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
  return positive ? std::max(-s, 0.0) + log_term : std::max(s, 0.0) + log_term;
}

// dL/dZ and the loss over the configured pairs.
double reconstruction_gradient(const Eigen::MatrixXd& z, const ReconstructionTargets& targets, Eigen::MatrixXd& grad_z) {
  const InteractionGraph& g = targets.graph();
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  grad_z = Eigen::MatrixXd::Zero(z.rows(), z.cols());
  const double positives = static_cast<double>(targets.positive_pairs());

  if (targets.is_sampled()) {
    const auto& negs = targets.negatives();
    const double neg_count = static_cast<double>(std::max<std::size_t>(negs.size(), 1));
    double pos_sum = 0.0, neg_sum = 0.0;
    auto accumulate = [&](NodeIndex i, NodeIndex j, bool positive, double coef_scale, double& sum) {
      const double s = z.row(i).dot(z.row(j));
      double prob = 0.0;
      sum += bce_term(s, positive, prob);
      const double coef = coef_scale * (prob - (positive ? 1.0 : 0.0));
      if (i == j) {
        grad_z.row(i) += 2.0 * coef * z.row(i);
      } else {
        grad_z.row(i) += coef * z.row(j);
        grad_z.row(j) += coef * z.row(i);
      }
    };
    const double pos_scale = 0.5 / positives;
    const double neg_scale = 0.5 / neg_count;
    for (NodeIndex i = 0; i < n; ++i) {
      accumulate(i, i, true, pos_scale, pos_sum);
      for (NodeIndex j : g.neighbors(i)) accumulate(i, j, true, pos_scale, pos_sum);
    }
    for (const auto& [i, j] : negs) accumulate(i, j, false, neg_scale, neg_sum);
    return 0.5 * pos_sum / positives + (negs.empty() ? 0.0 : 0.5 * neg_sum / neg_count);
  }

  const double pos_weight = targets.pos_weight();
  const double total = static_cast<double>(n) * static_cast<double>(n);
  const double normalizer = pos_weight * positives + (total - positives);
  const double w_pos = pos_weight / normalizer;
  const double w_neg = 1.0 / normalizer;

  double loss = 0.0;
  Eigen::MatrixXd scores;
  Eigen::MatrixXd coef;
  for (Eigen::Index b0 = 0; b0 < n; b0 += kRowBlock) {
    const Eigen::Index rows = std::min(kRowBlock, n - b0);
    scores.noalias() = z.middleRows(b0, rows) * z.transpose();
    coef.resize(rows, n);
    double block_loss = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto i = static_cast<NodeIndex>(b0 + r);
      const auto nbrs = g.neighbors(i);
      std::size_t k = 0;
      double pos_sum = 0.0, neg_sum = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        bool positive = static_cast<NodeIndex>(j) == i;
        if (k < nbrs.size() && nbrs[k] == static_cast<NodeIndex>(j)) {
          positive = true;
          ++k;
        }
        double prob = 0.0;
        const double term = bce_term(scores(r, j), positive, prob);
        if (positive) {
          pos_sum += term;
          coef(r, j) = w_pos * (prob - 1.0);
        } else {
          neg_sum += term;
          coef(r, j) = w_neg * prob;
        }
      }
      block_loss += w_pos * pos_sum + w_neg * neg_sum;
    }
    loss += block_loss;
    // G is symmetric, so dL/dZ = (G + G^T) Z = 2 G Z row block by row block.
    grad_z.middleRows(b0, rows).noalias() = 2.0 * coef * z;
  }
  return loss;
}

LossAndGradients backward(const Forward& f, const EncoderParams& p, const SparseMatrix& ahat, const FeatureMatrix& x,
                          const ReconstructionTargets& targets) {
  LossAndGradients out;
  Eigen::MatrixXd grad_z;
  out.loss = reconstruction_gradient(f.z, targets, grad_z);
  out.grad_w1.noalias() = f.mixed.transpose() * grad_z;
  Eigen::MatrixXd grad_hidden = ahat * (grad_z * p.w1.transpose());
  grad_hidden.array() *= (f.pre.array() > 0.0).cast<double>();
  out.grad_w0 = x.transpose_multiply(ahat * grad_hidden);
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (dim < 2) throw ConfigError("embedding dimension must be at least 2");
  if (hidden < dim) throw ConfigError("hidden width must be at least the embedding dimension");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must be in [0, 1)");
  if (!(adam_epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
  if (negative_ratio < 1) throw ConfigError("negative ratio must be at least 1");
}

EncoderParams glorot_init(std::size_t features, std::size_t hidden, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto fill = [&rng](std::size_t rows, std::size_t cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = dist(rng);
    }
    return m;
  };
  EncoderParams p;
  p.w0 = fill(features, hidden);
  p.w1 = fill(hidden, dim);
  return p;
}

Eigen::MatrixXd encode(const SparseMatrix& ahat, const FeatureMatrix& x, const EncoderParams& params) {
  return forward(ahat, x, params).z;
}

double decode_pair(const Eigen::MatrixXd& z, NodeIndex u, NodeIndex v) {
  return 1.0 / (1.0 + std::exp(-z.row(u).dot(z.row(v))));
}

Eigen::MatrixXd decode(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd gram = z * z.transpose();
  return gram.unaryExpr([](double s) { return 1.0 / (1.0 + std::exp(-s)); });
}

ReconstructionTargets ReconstructionTargets::full(const InteractionGraph& g) {
  ReconstructionTargets t;
  t.graph_ = &g;
  return t;
}

ReconstructionTargets ReconstructionTargets::sampled(const InteractionGraph& g, std::size_t negative_ratio,
                                                     std::mt19937_64& rng) {
  ReconstructionTargets t;
  t.graph_ = &g;
  t.sampled_ = true;
  const std::size_t n = g.num_nodes();
  const std::size_t positives = t.positive_pairs();
  const double total = static_cast<double>(n) * static_cast<double>(n);
  if (static_cast<double>(positives) >= total) return t;  // nothing negative to draw

  std::uniform_int_distribution<NodeIndex> pick(0, static_cast<NodeIndex>(n - 1));
  const std::size_t wanted = negative_ratio * positives;
  t.negatives_.reserve(wanted);
  while (t.negatives_.size() < wanted) {
    const NodeIndex i = pick(rng);
    const NodeIndex j = pick(rng);
    if (i == j) continue;
    const auto nbrs = g.neighbors(i);
    if (std::binary_search(nbrs.begin(), nbrs.end(), j)) continue;
    t.negatives_.emplace_back(i, j);
  }
  return t;
}

std::size_t ReconstructionTargets::positive_pairs() const noexcept {
  return 2 * graph_->num_edges() + graph_->num_nodes();
}

double ReconstructionTargets::pos_weight() const noexcept {
  const double n = static_cast<double>(graph_->num_nodes());
  const double pos = static_cast<double>(positive_pairs());
  const double neg = n * n - pos;
  return neg > 0.0 ? neg / pos : 1.0;
}

LossAndGradients loss_and_gradients(const EncoderParams& params, const SparseMatrix& ahat, const FeatureMatrix& x,
                                    const ReconstructionTargets& targets) {
  return backward(forward(ahat, x, params), params, ahat, x, targets);
}

EmbeddingMatrix train(const InteractionGraph& g, const FeatureMatrix& x, const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t n = g.num_nodes();
  if (n == 0) throw DataError("cannot train on an empty graph");
  if (x.rows() != n) throw DataError("feature rows do not match graph nodes");

  bool sampled = cfg.loss_mode == LossMode::kSampled;
  if (n > cfg.full_loss_node_limit) {
    if (cfg.loss_mode == LossMode::kFull) {
      throw ConfigError("full reconstruction loss over " + std::to_string(n) + "^2 pairs exceeds the " +
                        std::to_string(cfg.full_loss_node_limit) + "-node guard; use the sampled loss mode");
    }
    sampled = true;
  }

  const SparseMatrix ahat = propagation_matrix(g);
  EncoderParams params = glorot_init(x.cols(), cfg.hidden, cfg.dim, cfg.seed);
  Eigen::MatrixXd m0 = Eigen::MatrixXd::Zero(params.w0.rows(), params.w0.cols());
  Eigen::MatrixXd v0 = m0;
  Eigen::MatrixXd m1 = Eigen::MatrixXd::Zero(params.w1.rows(), params.w1.cols());
  Eigen::MatrixXd v1 = m1;

  std::mt19937_64 negative_rng(stream_seed(cfg.seed, 1));
  ReconstructionTargets targets = ReconstructionTargets::full(g);

  EmbeddingMatrix result;
  result.seed = cfg.seed;
  result.sampled_loss = sampled;
  double previous = std::numeric_limits<double>::infinity();
  std::size_t flat = 0;
  double beta1_power = 1.0, beta2_power = 1.0;

  auto adam_step = [&](Eigen::MatrixXd& w, Eigen::MatrixXd& m, Eigen::MatrixXd& v, const Eigen::MatrixXd& grad) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
    const double step = cfg.learning_rate / (1.0 - beta1_power);
    const double v_scale = 1.0 / (1.0 - beta2_power);
    w.array() -= step * m.array() / ((v.array() * v_scale).sqrt() + cfg.adam_epsilon);
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (sampled) targets = ReconstructionTargets::sampled(g, cfg.negative_ratio, negative_rng);
    const LossAndGradients lg = loss_and_gradients(params, ahat, x, targets);
    if (!std::isfinite(lg.loss) || !lg.grad_w0.allFinite() || !lg.grad_w1.allFinite()) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch + 1) +
                         " (non-finite loss); try a smaller learning rate");
    }
    result.loss_history.push_back(lg.loss);

    beta1_power *= cfg.beta1;
    beta2_power *= cfg.beta2;
    adam_step(params.w0, m0, v0, lg.grad_w0);
    adam_step(params.w1, m1, v1, lg.grad_w1);
    result.epochs_run = epoch + 1;

    // Plateau: per-epoch change below tolerance for `patience` epochs running.
    flat = std::abs(previous - lg.loss) < cfg.plateau_tolerance ? flat + 1 : 0;
    previous = lg.loss;
    if (flat >= cfg.patience) break;
  }

  const Forward f = forward(ahat, x, params);
  if (!f.z.allFinite()) throw NumericError("training produced non-finite embeddings; try a smaller learning rate");
  Eigen::MatrixXd unused;
  result.final_loss = reconstruction_gradient(f.z, targets, unused);
  result.initial_loss = result.loss_history.front();
  result.z = f.z;
  return result;
}

double reconstruction_auc(const Eigen::MatrixXd& z, const InteractionGraph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<std::pair<double, bool>> scored;
  scored.reserve(n * (n - 1) / 2);
  for (NodeIndex u = 0; u < n; ++u) {
    const auto nbrs = g.neighbors(u);
    std::size_t k = 0;
    while (k < nbrs.size() && nbrs[k] <= u) ++k;
    for (NodeIndex v = u + 1; v < n; ++v) {
      bool edge = false;
      if (k < nbrs.size() && nbrs[k] == v) {
        edge = true;
        ++k;
      }
      scored.emplace_back(z.row(u).dot(z.row(v)), edge);
    }
  }
  const double positives = static_cast<double>(g.num_edges());
  const double negatives = static_cast<double>(scored.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) throw DataError("AUC needs both edges and non-edges");

  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < scored.size();) {
    std::size_t j = i;
    std::size_t pos_in_tie = 0;
    while (j < scored.size() && scored[j].first == scored[i].first) pos_in_tie += scored[j++].second ? 1 : 0;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    rank_sum += avg_rank * static_cast<double>(pos_in_tie);
    i = j;
  }
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

}  // namespace echoscore::gae
