#include "echoscore/ideology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "echoscore/csv.hpp"
#include "echoscore/error.hpp"

namespace echoscore {

Partition TwoClusters::as_partition() const {
  return Partition::from_assignment({cluster.begin(), cluster.end()});
}

namespace {

struct LloydRun {
  std::vector<std::uint8_t> cluster;
  double inertia = 0.0;
};

LloydRun lloyd(const Eigen::MatrixXd& x, Eigen::RowVectorXd c0, Eigen::RowVectorXd c1, std::size_t max_iter) {
  const auto n = x.rows();
  LloydRun run;
  run.cluster.assign(static_cast<std::size_t>(n), 2);  // 2 = unassigned
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d0 = (x.row(i) - c0).squaredNorm();
      const double d1 = (x.row(i) - c1).squaredNorm();
      const std::uint8_t c = d1 < d0 ? 1 : 0;
      if (run.cluster[static_cast<std::size_t>(i)] != c) {
        run.cluster[static_cast<std::size_t>(i)] = c;
        changed = true;
      }
    }
    std::size_t n1 = static_cast<std::size_t>(std::count(run.cluster.begin(), run.cluster.end(), 1));
    if (n1 == 0 || n1 == static_cast<std::size_t>(n)) {
      // Move the point farthest from the surviving center into the empty cluster.
      const std::uint8_t empty = n1 == 0 ? 1 : 0;
      const Eigen::RowVectorXd& keep = empty == 1 ? c0 : c1;
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = (x.row(i) - keep).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      run.cluster[static_cast<std::size_t>(far)] = empty;
      changed = true;
    }
    Eigen::RowVectorXd sum0 = Eigen::RowVectorXd::Zero(x.cols()), sum1 = sum0;
    std::size_t n0 = 0;
    n1 = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (run.cluster[static_cast<std::size_t>(i)] == 0) {
        sum0 += x.row(i);
        ++n0;
      } else {
        sum1 += x.row(i);
        ++n1;
      }
    }
    c0 = sum0 / static_cast<double>(n0);
    c1 = sum1 / static_cast<double>(n1);
    if (!changed) break;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    run.inertia += (x.row(i) - (run.cluster[static_cast<std::size_t>(i)] == 0 ? c0 : c1)).squaredNorm();
  }
  return run;
}

}  // namespace

TwoClusters kmeans2(const Eigen::MatrixXd& points, const KMeansOptions& options) {
  const auto n = points.rows();
  if (n < 2) throw DataError("two-way clustering needs at least two points");
  if (options.restarts < 1 || options.max_iter < 1) throw ConfigError("k-means restarts and iterations must be positive");
  bool distinct = false;
  for (Eigen::Index i = 1; i < n && !distinct; ++i) distinct = points.row(i) != points.row(0);
  if (!distinct) throw DataError("clustering degenerate: all points identical");

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LloydRun best;
  best.inertia = std::numeric_limits<double>::infinity();
  std::vector<double> d2(static_cast<std::size_t>(n));

  for (std::size_t r = 0; r < options.restarts; ++r) {
    const Eigen::Index first = pick(rng);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] = (points.row(i) - points.row(first)).squaredNorm();
      total += d2[static_cast<std::size_t>(i)];
    }
    // D^2 sampling of the second center.
    double target = unit(rng) * total;
    Eigen::Index second = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      target -= d2[static_cast<std::size_t>(i)];
      if (target < 0.0 && d2[static_cast<std::size_t>(i)] > 0.0) {
        second = i;
        break;
      }
    }
    if (d2[static_cast<std::size_t>(second)] == 0.0) {
      second = static_cast<Eigen::Index>(std::max_element(d2.begin(), d2.end()) - d2.begin());
    }
    LloydRun run = lloyd(points, points.row(first), points.row(second), options.max_iter);
    if (run.inertia < best.inertia) best = std::move(run);
  }

  TwoClusters out;
  // Canonical labels: row 0 is always in cluster 0.
  if (best.cluster[0] == 1) {
    for (auto& c : best.cluster) c = static_cast<std::uint8_t>(1 - c);
  }
  out.cluster = std::move(best.cluster);
  out.inertia = best.inertia;
  for (auto c : out.cluster) ++out.sizes[c];
  return out;
}

std::vector<double> ideology_scores(const EmbeddingSpace& space, const TwoClusters& clusters) {
  if (clusters.cluster.size() != space.size()) throw DataError("cluster assignment does not match embedding rows");
  if (clusters.sizes[0] == 0 || clusters.sizes[1] == 0) throw DataError("both clusters must be nonempty");
  const Eigen::MatrixXd sums = space.community_distance_sums(clusters.as_partition());
  std::vector<double> scores(space.size());
  const double size0 = static_cast<double>(clusters.sizes[0]);
  const double size1 = static_cast<double>(clusters.sizes[1]);
  for (Eigen::Index u = 0; u < sums.rows(); ++u) scores[static_cast<std::size_t>(u)] = sums(u, 0) / size0 - sums(u, 1) / size1;
  return scores;
}

LabelSplit split_labels(const NodeScores& labels, std::uint64_t seed, double train_frac) {
  if (!(train_frac >= 0.0 && train_frac < 1.0)) throw ConfigError("train fraction must be in [0, 1)");
  std::vector<NodeIndex> nodes;
  nodes.reserve(labels.size());
  for (const auto& [v, score] : labels) nodes.push_back(v);
  std::mt19937_64 rng(seed);
  std::shuffle(nodes.begin(), nodes.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(nodes.size())));
  LabelSplit split;
  split.train.assign(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.eval.assign(nodes.begin() + static_cast<std::ptrdiff_t>(n_train), nodes.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.eval.begin(), split.eval.end());
  return split;
}

IdeologyReport evaluate_ideology(const std::vector<double>& predictions, const NodeScores& labels,
                                 const LabelSplit& split) {
  if (labels.size() < 10) {
    throw DataError("ideology evaluation needs at least 10 labeled users (got " + std::to_string(labels.size()) + ")");
  }
  if (split.eval.empty()) throw DataError("validation set is empty");
  std::vector<double> forward, swapped, truth;
  for (NodeIndex v : split.eval) {
    const double p = predictions.at(v);
    forward.push_back(p);
    swapped.push_back(-p);
    truth.push_back(labels.at(v));
  }
  IdeologyReport report;
  report.mae_forward = mean_absolute_error(forward, truth);
  report.mae_swapped = mean_absolute_error(swapped, truth);
  report.mse_forward = mean_squared_error(forward, truth);
  report.mse_swapped = mean_squared_error(swapped, truth);
  report.order = report.mae_forward <= report.mae_swapped ? 1 : -1;
  report.mae = std::min(report.mae_forward, report.mae_swapped);
  report.mse = std::min(report.mse_forward, report.mse_swapped);
  report.n_train = split.train.size();
  report.n_eval = split.eval.size();
  return report;
}

IdeologyReport evaluate_ideology(const std::vector<double>& predictions, const NodeScores& labels,
                                 std::uint64_t split_seed, double train_frac) {
  return evaluate_ideology(predictions, labels, split_labels(labels, split_seed, train_frac));
}

std::vector<HistogramBin> ideology_histogram(const std::vector<double>& predictions, int order,
                                             const NodeScores& labels, const std::vector<NodeIndex>& nodes) {
  constexpr int kBins = 20;
  std::vector<HistogramBin> bins(kBins);
  for (int b = 0; b < kBins; ++b) {
    bins[b].lo = static_cast<double>(b - 10) / 10.0;
    bins[b].hi = static_cast<double>(b - 9) / 10.0;
  }
  auto bin_of = [](double v) {
    const int b = static_cast<int>(std::floor((v + 1.0) * 10.0));
    return std::clamp(b, 0, kBins - 1);
  };
  for (NodeIndex v : nodes) {
    ++bins[bin_of(order * predictions.at(v))].count_pred;
    ++bins[bin_of(labels.at(v))].count_label;
  }
  return bins;
}

void write_histogram_csv(std::ostream& out, const std::vector<HistogramBin>& bins) {
  out << "bin_lo,bin_hi,count_pred,count_label\n";
  for (const auto& b : bins) {
    out << csv::format_double(b.lo) << ',' << csv::format_double(b.hi) << ',' << b.count_pred << ',' << b.count_label
        << '\n';
  }
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw DataError("correlation needs two equal series of length >= 2");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace echoscore
