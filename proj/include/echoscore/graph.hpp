#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

namespace echoscore {

using NodeIndex = std::uint32_t;
using Edge = std::pair<NodeIndex, NodeIndex>;

/// Undirected, unweighted simple graph in CSR form with an external-ID map.
///
/// Construction drops self-loops and collapses duplicate or reversed edges, so
/// the adjacency is always symmetric and each neighbor list is sorted.
class InteractionGraph {
 public:
  InteractionGraph() = default;

  /// Builds a graph over `num_nodes` dense indices. `ids` may be empty, in which
  /// case node i is named by its decimal index.
  static InteractionGraph from_edges(std::size_t num_nodes, std::span<const Edge> edges,
                                     std::vector<std::string> ids = {});

  std::size_t num_nodes() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const noexcept { return columns_.size() / 2; }

  std::size_t degree(NodeIndex v) const;
  std::span<const NodeIndex> neighbors(NodeIndex v) const;
  std::size_t max_degree() const noexcept;

  const std::string& id(NodeIndex v) const;
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::optional<NodeIndex> index_of(std::string_view id) const;

  /// Each undirected edge once, as (u, v) with u < v, in CSR order.
  std::vector<Edge> edge_list() const;

  /// Component label per node (labels dense, ordered by smallest member).
  std::vector<NodeIndex> connected_components() const;

  /// Relabels node i as perm[i]; IDs travel with their nodes.
  InteractionGraph permuted(std::span<const NodeIndex> perm) const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeIndex> columns_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, NodeIndex> index_;
};

/// Parses "src dst" lines (tab or whitespace separated, '#' comments, blank lines
/// skipped). Node indices follow first appearance.
InteractionGraph parse_edge_list(std::istream& in, const std::string& source_name = "<stream>");
InteractionGraph load_edge_list(const std::filesystem::path& path);
void write_edge_list(std::ostream& out, const InteractionGraph& g);

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// D^-1/2 (A + I) D^-1/2 where D is the degree matrix of A + I.
SparseMatrix propagation_matrix(const InteractionGraph& g);

}  // namespace echoscore
