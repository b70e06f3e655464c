#include "echoscore/ecs.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include "echoscore/csv.hpp"
#include "echoscore/error.hpp"

namespace echoscore {
namespace {

constexpr Eigen::Index kTile = 64;

void require_two_communities(const Partition& omega) {
  if (omega.num_communities() < 2) throw DataError("ECS undefined for one community");
}

void require_cover(const Partition& omega, const EmbeddingSpace& space) {
  if (omega.num_nodes() != space.size()) {
    throw DataError("partition covers " + std::to_string(omega.num_nodes()) + " users but embedding has " +
                    std::to_string(space.size()) + " rows");
  }
}

}  // namespace

std::string_view to_string(DistanceMode mode) {
  return mode == DistanceMode::kRaw ? "euclidean" : "normalized_euclidean_half";
}

Eigen::MatrixXd normalized_rows(const Eigen::MatrixXd& z, std::size_t* zero_rows) {
  Eigen::MatrixXd out = z;
  std::size_t zeros = 0;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm > 0.0) {
      out.row(i) /= norm;
    } else {
      ++zeros;
    }
  }
  if (zero_rows) *zero_rows = zeros;
  return out;
}

EmbeddingSpace::EmbeddingSpace(const Eigen::MatrixXd& z, DistanceMode mode) : mode_(mode) {
  if (!z.allFinite()) throw DataError("embedding contains non-finite values");
  if (mode == DistanceMode::kNormalizedHalf) {
    columns_ = normalized_rows(z, &zero_rows_).transpose();
  } else {
    columns_ = z.transpose();
  }
}

double EmbeddingSpace::distance(NodeIndex u, NodeIndex v) const {
  const double d = (columns_.col(u) - columns_.col(v)).norm();
  return mode_ == DistanceMode::kNormalizedHalf ? 0.5 * d : d;
}

Eigen::MatrixXd EmbeddingSpace::community_distance_sums(const Partition& p) const {
  const auto n = static_cast<Eigen::Index>(size());
  if (static_cast<std::size_t>(n) != p.num_nodes()) throw DataError("partition does not match embedding rows");
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(p.num_communities()));
  const auto& comm = p.assignment();
  for (Eigen::Index bi = 0; bi < n; bi += kTile) {
    const Eigen::Index ei = std::min(bi + kTile, n);
    for (Eigen::Index bj = bi; bj < n; bj += kTile) {
      const Eigen::Index ej = std::min(bj + kTile, n);
      for (Eigen::Index i = bi; i < ei; ++i) {
        const auto ci = static_cast<Eigen::Index>(comm[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = std::max(bj, i + 1); j < ej; ++j) {
          const double d = distance(static_cast<NodeIndex>(i), static_cast<NodeIndex>(j));
          sums(i, static_cast<Eigen::Index>(comm[static_cast<std::size_t>(j)])) += d;
          sums(j, ci) += d;
        }
      }
    }
  }
  return sums;
}

double pair_distance(const Eigen::MatrixXd& z, NodeIndex u, NodeIndex v, DistanceMode mode) {
  if (u >= z.rows() || v >= z.rows()) throw std::out_of_range("embedding row out of range");
  if (mode == DistanceMode::kRaw) return (z.row(u) - z.row(v)).norm();
  auto unit = [&](NodeIndex i) -> Eigen::RowVectorXd {
    const double norm = z.row(i).norm();
    return norm > 0.0 ? Eigen::RowVectorXd(z.row(i) / norm) : Eigen::RowVectorXd::Zero(z.cols());
  };
  return 0.5 * (unit(u) - unit(v)).norm();
}

double cohesion(NodeIndex u, std::span<const NodeIndex> community, const EmbeddingSpace& space) {
  if (std::find(community.begin(), community.end(), u) == community.end()) {
    throw DataError("user " + std::to_string(u) + " is not a member of the community");
  }
  double sum = 0.0;
  for (NodeIndex v : community) {
    if (v != u) sum += space.distance(u, v);
  }
  return sum / static_cast<double>(community.size());
}

Separation separation(NodeIndex u, const Partition& omega, const EmbeddingSpace& space) {
  require_two_communities(omega);
  require_cover(omega, space);
  std::vector<double> sums(omega.num_communities(), 0.0);
  for (NodeIndex v = 0; v < omega.num_nodes(); ++v) {
    if (v != u) sums[omega.community_of(v)] += space.distance(u, v);
  }
  const CommunityId own = omega.community_of(u);
  Separation best{std::numeric_limits<double>::infinity(), 0};
  for (CommunityId c = 0; c < sums.size(); ++c) {
    if (c == own) continue;
    const double avg = sums[c] / static_cast<double>(omega.sizes()[c]);
    if (avg < best.value) best = {avg, c};
  }
  return best;
}

double ecs_term(double lambda, double delta) noexcept {
  const double top = std::max(delta, lambda);
  if (top == 0.0) return 0.5;
  return (top + delta - lambda) / (2.0 * top);
}

double ecs_star(CommunityId community, const Partition& omega, const EmbeddingSpace& space) {
  require_two_communities(omega);
  require_cover(omega, space);
  if (community >= omega.num_communities()) throw std::out_of_range("community id out of range");
  const Eigen::MatrixXd sums = space.community_distance_sums(omega);
  double total = 0.0;
  for (NodeIndex u = 0; u < omega.num_nodes(); ++u) {
    if (omega.community_of(u) != community) continue;
    const double lambda = sums(u, community) / static_cast<double>(omega.sizes()[community]);
    double delta = std::numeric_limits<double>::infinity();
    for (CommunityId c = 0; c < omega.num_communities(); ++c) {
      if (c != community) delta = std::min(delta, sums(u, c) / static_cast<double>(omega.sizes()[c]));
    }
    total += ecs_term(lambda, delta);
  }
  return total / static_cast<double>(omega.sizes()[community]);
}

EcsReport ecs(const Partition& omega, const Eigen::MatrixXd& z, const EcsOptions& options) {
  require_two_communities(omega);
  const EmbeddingSpace space(z, options.mode);
  require_cover(omega, space);

  const Eigen::MatrixXd sums = space.community_distance_sums(omega);
  const std::size_t m = omega.num_communities();
  EcsReport report;
  report.mode = options.mode;
  report.zero_norm_rows = space.zero_rows();
  report.users.resize(omega.num_nodes());
  std::vector<double> community_sum(m, 0.0);

  for (NodeIndex u = 0; u < omega.num_nodes(); ++u) {
    const CommunityId own = omega.community_of(u);
    UserScore& s = report.users[u];
    s.lambda = sums(u, own) / static_cast<double>(omega.sizes()[own]);
    s.delta = std::numeric_limits<double>::infinity();
    for (CommunityId c = 0; c < m; ++c) {
      if (c == own) continue;
      const double avg = sums(u, c) / static_cast<double>(omega.sizes()[c]);
      if (avg < s.delta) {
        s.delta = avg;
        s.nearest_other = c;
      }
    }
    s.degenerate = std::max(s.lambda, s.delta) == 0.0;
    s.term = ecs_term(s.lambda, s.delta);
    if (s.degenerate) ++report.degenerate_users;
    community_sum[own] += s.term;
  }

  double total = 0.0, weighted = 0.0;
  for (CommunityId c = 0; c < m; ++c) {
    const auto size = omega.sizes()[c];
    const double star = community_sum[c] / static_cast<double>(size);
    report.communities.push_back({c, size, star});
    total += star;
    weighted += star * static_cast<double>(size);
  }
  report.ecs = total / static_cast<double>(m);
  if (options.size_weighted) report.ecs_size_weighted = weighted / static_cast<double>(omega.num_nodes());

  if (report.zero_norm_rows > 0) {
    report.warnings.push_back(std::to_string(report.zero_norm_rows) +
                              " embedding row(s) have zero norm and sit at the origin after normalization");
  }
  if (report.degenerate_users > 0) {
    report.warnings.push_back(std::to_string(report.degenerate_users) +
                              " user(s) have zero cohesion and separation; their term is 0.5");
  }
  return report;
}

void write_user_scores_csv(std::ostream& out, const InteractionGraph& g, const Partition& omega,
                           const EcsReport& report) {
  out << "user,community,lambda,delta,term\n";
  for (NodeIndex u = 0; u < omega.num_nodes(); ++u) {
    const auto& s = report.users[u];
    out << csv::quote(g.id(u)) << ',' << omega.community_of(u) << ',' << csv::format_double(s.lambda) << ','
        << csv::format_double(s.delta) << ',' << csv::format_double(s.term) << '\n';
  }
}

}  // namespace echoscore
