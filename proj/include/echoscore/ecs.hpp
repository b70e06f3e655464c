#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "echoscore/communities.hpp"
#include "echoscore/graph.hpp"

namespace echoscore {

enum class DistanceMode {
  kNormalizedHalf,  // ||z_u/|z_u| - z_v/|z_v||| / 2, in [0, 1]
  kRaw,             // plain Euclidean
};

std::string_view to_string(DistanceMode mode);

/// Copy of Z with nonzero rows scaled to unit length; zero rows stay zero.
Eigen::MatrixXd normalized_rows(const Eigen::MatrixXd& z, std::size_t* zero_rows = nullptr);

/// Embedding rows prepared for a distance convention.
class EmbeddingSpace {
 public:
  EmbeddingSpace(const Eigen::MatrixXd& z, DistanceMode mode);

  std::size_t size() const noexcept { return static_cast<std::size_t>(columns_.cols()); }
  DistanceMode mode() const noexcept { return mode_; }
  std::size_t zero_rows() const noexcept { return zero_rows_; }
  double distance(NodeIndex u, NodeIndex v) const;

  /// sums(u, c) = sum of dist(u, v) over v in community c, v != u.
  /// Exact pairwise evaluation, tiled for cache reuse.
  Eigen::MatrixXd community_distance_sums(const Partition& p) const;

 private:
  Eigen::MatrixXd columns_;  // d x n, one point per column
  DistanceMode mode_;
  std::size_t zero_rows_ = 0;
};

double pair_distance(const Eigen::MatrixXd& z, NodeIndex u, NodeIndex v,
                     DistanceMode mode = DistanceMode::kNormalizedHalf);

/// lambda_u = (1/|w|) sum_{v in w, v != u} dist(u, v). Throws if u is not in w.
double cohesion(NodeIndex u, std::span<const NodeIndex> community, const EmbeddingSpace& space);

struct Separation {
  double value = 0.0;
  CommunityId nearest = 0;
};

/// Delta_u = min over communities w not containing u of (1/|w|) sum_{v in w} dist(u, v).
Separation separation(NodeIndex u, const Partition& omega, const EmbeddingSpace& space);

/// (max(D, L) + D - L) / (2 max(D, L)); 0.5 when both are zero.
double ecs_term(double lambda, double delta) noexcept;

double ecs_star(CommunityId community, const Partition& omega, const EmbeddingSpace& space);

struct UserScore {
  double lambda = 0.0;
  double delta = 0.0;
  double term = 0.0;
  CommunityId nearest_other = 0;
  bool degenerate = false;
};

struct CommunityScore {
  CommunityId id = 0;
  std::size_t size = 0;
  double ecs_star = 0.0;
};

struct EcsOptions {
  DistanceMode mode = DistanceMode::kNormalizedHalf;
  bool size_weighted = false;
};

struct EcsReport {
  double ecs = 0.0;                         // unweighted mean over communities
  std::optional<double> ecs_size_weighted;  // only with EcsOptions::size_weighted
  std::vector<CommunityScore> communities;
  std::vector<UserScore> users;
  std::size_t degenerate_users = 0;
  std::size_t zero_norm_rows = 0;
  DistanceMode mode = DistanceMode::kNormalizedHalf;
  std::vector<std::string> warnings;
};

/// Graph-level score. Throws DataError for fewer than two communities.
EcsReport ecs(const Partition& omega, const Eigen::MatrixXd& z, const EcsOptions& options = {});

/// CSV `user,community,lambda,delta,term`.
void write_user_scores_csv(std::ostream& out, const InteractionGraph& g, const Partition& omega,
                           const EcsReport& report);

}  // namespace echoscore
