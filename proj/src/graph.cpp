#include "echoscore/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "echoscore/error.hpp"

namespace echoscore {

InteractionGraph InteractionGraph::from_edges(std::size_t num_nodes, std::span<const Edge> edges,
                                              std::vector<std::string> ids) {
  if (!ids.empty() && ids.size() != num_nodes) {
    throw DataError("node ID table has " + std::to_string(ids.size()) + " entries for " +
                    std::to_string(num_nodes) + " nodes");
  }
  if (ids.empty()) {
    ids.reserve(num_nodes);
    for (std::size_t i = 0; i < num_nodes; ++i) ids.push_back(std::to_string(i));
  }

  InteractionGraph g;
  std::vector<std::size_t> counts(num_nodes + 1, 0);
  for (const auto& [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes) throw std::out_of_range("edge endpoint out of range");
    if (u == v) continue;
    ++counts[u + 1];
    ++counts[v + 1];
  }
  for (std::size_t i = 0; i < num_nodes; ++i) counts[i + 1] += counts[i];

  std::vector<NodeIndex> cols(counts[num_nodes]);
  std::vector<std::size_t> cursor(counts.begin(), counts.end() - 1);
  for (const auto& [u, v] : edges) {
    if (u == v) continue;
    cols[cursor[u]++] = v;
    cols[cursor[v]++] = u;
  }

  // Sort and dedupe each row, compacting in place.
  g.offsets_.assign(num_nodes + 1, 0);
  std::size_t write = 0;
  for (std::size_t i = 0; i < num_nodes; ++i) {
    auto first = cols.begin() + static_cast<std::ptrdiff_t>(counts[i]);
    auto last = cols.begin() + static_cast<std::ptrdiff_t>(counts[i + 1]);
    std::sort(first, last);
    last = std::unique(first, last);
    for (auto it = first; it != last; ++it) cols[write++] = *it;
    g.offsets_[i + 1] = write;
  }
  cols.resize(write);
  g.columns_ = std::move(cols);

  g.ids_ = std::move(ids);
  g.index_.reserve(g.ids_.size());
  for (std::size_t i = 0; i < g.ids_.size(); ++i) {
    if (!g.index_.emplace(g.ids_[i], static_cast<NodeIndex>(i)).second) {
      throw DataError("duplicate node ID '" + g.ids_[i] + "'");
    }
  }
  return g;
}

std::size_t InteractionGraph::degree(NodeIndex v) const {
  if (v >= num_nodes()) throw std::out_of_range("node index " + std::to_string(v) + " out of range");
  return offsets_[v + 1] - offsets_[v];
}

std::span<const NodeIndex> InteractionGraph::neighbors(NodeIndex v) const {
  if (v >= num_nodes()) throw std::out_of_range("node index " + std::to_string(v) + " out of range");
  return {columns_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

std::size_t InteractionGraph::max_degree() const noexcept {
  std::size_t best = 0;
  for (std::size_t i = 0; i + 1 < offsets_.size(); ++i) best = std::max(best, offsets_[i + 1] - offsets_[i]);
  return best;
}

const std::string& InteractionGraph::id(NodeIndex v) const { return ids_.at(v); }

std::optional<NodeIndex> InteractionGraph::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<Edge> InteractionGraph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeIndex u = 0; u < num_nodes(); ++u) {
    for (NodeIndex v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

std::vector<NodeIndex> InteractionGraph::connected_components() const {
  constexpr NodeIndex kUnset = static_cast<NodeIndex>(-1);
  std::vector<NodeIndex> label(num_nodes(), kUnset);
  std::vector<NodeIndex> stack;
  NodeIndex next = 0;
  for (NodeIndex s = 0; s < num_nodes(); ++s) {
    if (label[s] != kUnset) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      NodeIndex u = stack.back();
      stack.pop_back();
      for (NodeIndex v : neighbors(u)) {
        if (label[v] == kUnset) {
          label[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  return label;
}

InteractionGraph InteractionGraph::permuted(std::span<const NodeIndex> perm) const {
  if (perm.size() != num_nodes()) throw std::invalid_argument("permutation size mismatch");
  std::vector<std::string> ids(num_nodes());
  for (std::size_t i = 0; i < num_nodes(); ++i) ids.at(perm[i]) = ids_[i];
  std::vector<Edge> edges;
  edges.reserve(num_edges());
  for (const auto& [u, v] : edge_list()) edges.emplace_back(perm[u], perm[v]);
  return from_edges(num_nodes(), edges, std::move(ids));
}

InteractionGraph parse_edge_list(std::istream& in, const std::string& source_name) {
  std::vector<std::string> ids;
  std::unordered_map<std::string, NodeIndex> index;
  std::vector<Edge> edges;
  auto intern = [&](const std::string& token) {
    auto [it, inserted] = index.emplace(token, static_cast<NodeIndex>(ids.size()));
    if (inserted) ids.push_back(token);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  std::size_t data_lines = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;

    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a >> b)) throw ParseError(source_name, line_no, "expected two node IDs");
    if (fields >> extra) throw ParseError(source_name, line_no, "expected two node IDs, found more");
    ++data_lines;
    const NodeIndex u = intern(a);
    const NodeIndex v = intern(b);
    edges.emplace_back(u, v);
  }
  if (data_lines == 0) throw DataError(source_name + ": edge list is empty");
  const std::size_t n = ids.size();
  return InteractionGraph::from_edges(n, edges, std::move(ids));
}

InteractionGraph load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list " + path.string());
  return parse_edge_list(in, path.string());
}

void write_edge_list(std::ostream& out, const InteractionGraph& g) {
  for (const auto& [u, v] : g.edge_list()) out << g.id(u) << '\t' << g.id(v) << '\n';
}

SparseMatrix propagation_matrix(const InteractionGraph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> inv_sqrt(n);
  for (NodeIndex i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));

  SparseMatrix ahat(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  ahat.reserve(Eigen::VectorXi::NullaryExpr(static_cast<Eigen::Index>(n), [&](Eigen::Index i) {
    return static_cast<int>(g.degree(static_cast<NodeIndex>(i)) + 1);
  }));
  for (NodeIndex i = 0; i < n; ++i) {
    // Neighbor lists are sorted, so the diagonal slots in between.
    bool diagonal_done = false;
    for (NodeIndex j : g.neighbors(i)) {
      if (!diagonal_done && j > i) {
        ahat.insert(i, i) = inv_sqrt[i] * inv_sqrt[i];
        diagonal_done = true;
      }
      ahat.insert(i, j) = inv_sqrt[i] * inv_sqrt[j];
    }
    if (!diagonal_done) ahat.insert(i, i) = inv_sqrt[i] * inv_sqrt[i];
  }
  ahat.makeCompressed();
  return ahat;
}

}  // namespace echoscore
