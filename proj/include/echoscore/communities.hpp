#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "echoscore/graph.hpp"

namespace echoscore {

using CommunityId = std::uint32_t;

/// Disjoint cover of the nodes with dense community ids 0..M-1.
class Partition {
 public:
  Partition() = default;

  /// Relabels arbitrary labels densely in order of first appearance.
  static Partition from_labels(std::span<const std::int64_t> labels);
  /// Requires ids already dense; throws DataError otherwise.
  static Partition from_assignment(std::vector<CommunityId> assignment);

  std::size_t num_nodes() const noexcept { return assignment_.size(); }
  std::size_t num_communities() const noexcept { return sizes_.size(); }
  CommunityId community_of(NodeIndex v) const { return assignment_.at(v); }
  const std::vector<CommunityId>& assignment() const noexcept { return assignment_; }
  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
  std::vector<std::vector<NodeIndex>> members() const;

 private:
  std::vector<CommunityId> assignment_;
  std::vector<std::size_t> sizes_;
};

/// Newman-Girvan modularity sum_c [ e_c/m - resolution * (deg_c / 2m)^2 ].
double modularity(const InteractionGraph& g, const Partition& p, double resolution = 1.0);

struct LouvainResult {
  Partition partition;
  std::vector<double> level_modularity;  // after each aggregation level
};

/// Two-phase Louvain. Node order is reshuffled by `seed` every sweep; ties keep
/// the current community.
LouvainResult louvain_levels(const InteractionGraph& g, double resolution = 1.0, std::uint64_t seed = 0);
Partition louvain(const InteractionGraph& g, double resolution = 1.0, std::uint64_t seed = 0);

struct FluidResult {
  Partition partition;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

/// Fluid communities with k communities on the largest connected component.
/// Nodes outside it are put in community 0 with a warning.
FluidResult fluidc(const InteractionGraph& g, std::size_t k = 2, std::uint64_t seed = 0,
                   std::size_t max_iter = 100);

/// CSV `user,community`.
void write_partition_csv(std::ostream& out, const InteractionGraph& g, const Partition& p);
Partition read_partition_csv(const std::filesystem::path& path, const InteractionGraph& g);
Partition parse_partition_csv(std::istream& in, const InteractionGraph& g,
                              const std::string& source_name = "<stream>");

}  // namespace echoscore
