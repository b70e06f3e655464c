#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "echoscore/baselines.hpp"
#include "echoscore/communities.hpp"
#include "echoscore/ecs.hpp"

namespace echoscore {

struct KMeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iter = 100;
  std::uint64_t seed = 0;
};

struct TwoClusters {
  std::vector<std::uint8_t> cluster;  // 0 or 1 per row
  std::array<std::size_t, 2> sizes{};
  double inertia = 0.0;

  Partition as_partition() const;
};

/// Lloyd's algorithm with k = 2 and D^2-sampled seeding; keeps the restart with
/// the lowest inertia. Throws DataError when all rows coincide.
TwoClusters kmeans2(const Eigen::MatrixXd& points, const KMeansOptions& options = {});

/// I(u) = (1/|w1|) sum_{v in w1, v != u} dist(u, v) - (1/|w2|) sum_{v in w2, v != u} dist(u, v)
/// where w1 is cluster 0 and w2 is cluster 1.
std::vector<double> ideology_scores(const EmbeddingSpace& space, const TwoClusters& clusters);

struct LabelSplit {
  std::vector<NodeIndex> train;
  std::vector<NodeIndex> eval;
};

/// Deterministic shuffle of the labeled nodes; the first round(train_frac * N) train.
LabelSplit split_labels(const NodeScores& labels, std::uint64_t seed, double train_frac = 0.10);

struct IdeologyReport {
  int order = 1;  // +1: cluster 0 first; -1: swapped (scores negated)
  double mae = 0.0;
  double mse = 0.0;
  double mae_forward = 0.0, mae_swapped = 0.0;
  double mse_forward = 0.0, mse_swapped = 0.0;
  std::size_t n_train = 0;
  std::size_t n_eval = 0;
};

/// Scores the validation nodes under both cluster orders. Reported MAE and MSE
/// are each the minimum over the two orders; `order` is the MAE-minimizing one.
IdeologyReport evaluate_ideology(const std::vector<double>& predictions, const NodeScores& labels,
                                 const LabelSplit& split);
IdeologyReport evaluate_ideology(const std::vector<double>& predictions, const NodeScores& labels,
                                 std::uint64_t split_seed, double train_frac = 0.10);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count_pred = 0;
  std::size_t count_label = 0;
};

/// Width-0.1 bins over [-1, 1] of sign-aligned predictions vs labels on `nodes`.
std::vector<HistogramBin> ideology_histogram(const std::vector<double>& predictions, int order,
                                             const NodeScores& labels,
                                             const std::vector<NodeIndex>& nodes);

/// CSV `bin_lo,bin_hi,count_pred,count_label`.
void write_histogram_csv(std::ostream& out, const std::vector<HistogramBin>& bins);

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace echoscore
