#include "echoscore/communities.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>

#include "echoscore/csv.hpp"
#include "echoscore/error.hpp"

namespace echoscore {

Partition Partition::from_labels(std::span<const std::int64_t> labels) {
  std::unordered_map<std::int64_t, CommunityId> dense;
  std::vector<CommunityId> assignment;
  assignment.reserve(labels.size());
  for (auto label : labels) {
    auto [it, inserted] = dense.emplace(label, static_cast<CommunityId>(dense.size()));
    assignment.push_back(it->second);
  }
  return from_assignment(std::move(assignment));
}

Partition Partition::from_assignment(std::vector<CommunityId> assignment) {
  Partition p;
  for (CommunityId c : assignment) {
    if (c >= p.sizes_.size()) p.sizes_.resize(c + 1, 0);
    ++p.sizes_[c];
  }
  for (std::size_t c = 0; c < p.sizes_.size(); ++c) {
    if (p.sizes_[c] == 0) throw DataError("community ids are not dense: id " + std::to_string(c) + " is empty");
  }
  p.assignment_ = std::move(assignment);
  return p;
}

std::vector<std::vector<NodeIndex>> Partition::members() const {
  std::vector<std::vector<NodeIndex>> out(sizes_.size());
  for (std::size_t c = 0; c < sizes_.size(); ++c) out[c].reserve(sizes_[c]);
  for (NodeIndex v = 0; v < assignment_.size(); ++v) out[assignment_[v]].push_back(v);
  return out;
}

double modularity(const InteractionGraph& g, const Partition& p, double resolution) {
  if (p.num_nodes() != g.num_nodes()) throw DataError("partition does not cover the graph");
  const double m = static_cast<double>(g.num_edges());
  if (m == 0.0) throw DataError("modularity is undefined for a graph without edges");
  std::vector<double> internal(p.num_communities(), 0.0);
  std::vector<double> degree(p.num_communities(), 0.0);
  for (NodeIndex u = 0; u < g.num_nodes(); ++u) {
    const CommunityId cu = p.community_of(u);
    degree[cu] += static_cast<double>(g.degree(u));
    for (NodeIndex v : g.neighbors(u)) {
      if (u < v && p.community_of(v) == cu) internal[cu] += 1.0;
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < internal.size(); ++c) {
    const double share = degree[c] / (2.0 * m);
    q += internal[c] / m - resolution * share * share;
  }
  return q;
}

namespace {

// Symmetric weighted graph; adjacency rows hold (neighbor, weight) including a
// diagonal entry for self-loop weight after aggregation.
struct WeightedGraph {
  std::vector<std::vector<std::pair<NodeIndex, double>>> adj;
  std::vector<double> strength;
  double total = 0.0;  // sum of all ordered weights (2m for a simple graph)

  std::size_t size() const { return adj.size(); }
};

WeightedGraph from_graph(const InteractionGraph& g) {
  WeightedGraph w;
  w.adj.resize(g.num_nodes());
  w.strength.resize(g.num_nodes());
  for (NodeIndex u = 0; u < g.num_nodes(); ++u) {
    for (NodeIndex v : g.neighbors(u)) w.adj[u].emplace_back(v, 1.0);
    w.strength[u] = static_cast<double>(g.degree(u));
    w.total += w.strength[u];
  }
  return w;
}

double weighted_modularity(const WeightedGraph& w, const std::vector<NodeIndex>& comm, std::size_t num_comm,
                           double resolution) {
  std::vector<double> in(num_comm, 0.0), tot(num_comm, 0.0);
  for (NodeIndex i = 0; i < w.size(); ++i) {
    tot[comm[i]] += w.strength[i];
    for (const auto& [j, wt] : w.adj[i]) {
      if (comm[j] == comm[i]) in[comm[i]] += wt;
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < num_comm; ++c) q += in[c] / w.total - resolution * (tot[c] / w.total) * (tot[c] / w.total);
  return q;
}

// One round of local moves. Returns true if any node changed community.
bool local_moves(const WeightedGraph& w, std::vector<NodeIndex>& comm, double resolution, std::mt19937_64& rng) {
  const std::size_t n = w.size();
  std::vector<double> tot(n, 0.0);
  for (NodeIndex i = 0; i < n; ++i) tot[comm[i]] += w.strength[i];

  std::vector<double> link(n, 0.0);
  std::vector<NodeIndex> touched;
  std::vector<NodeIndex> order(n);
  std::iota(order.begin(), order.end(), 0);
  bool moved_any = false;
  constexpr double kMinGain = 1e-10;

  while (true) {
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t moves = 0;
    for (NodeIndex i : order) {
      const NodeIndex current = comm[i];
      const double k_i = w.strength[i];
      touched.clear();
      for (const auto& [j, wt] : w.adj[i]) {
        if (j == i) continue;
        const NodeIndex c = comm[j];
        if (link[c] == 0.0) touched.push_back(c);
        link[c] += wt;
      }
      tot[current] -= k_i;
      NodeIndex best = current;
      double best_gain = link[current] - resolution * k_i * tot[current] / w.total;
      for (NodeIndex c : touched) {
        const double gain = link[c] - resolution * k_i * tot[c] / w.total;
        if (gain > best_gain + kMinGain) {
          best_gain = gain;
          best = c;
        }
      }
      tot[best] += k_i;
      comm[i] = best;
      if (best != current) ++moves;
      for (NodeIndex c : touched) link[c] = 0.0;
    }
    if (moves == 0) break;
    moved_any = true;
  }
  return moved_any;
}

// Relabels comm densely in order of first appearance; returns the count.
std::size_t renumber(std::vector<NodeIndex>& comm) {
  constexpr NodeIndex kUnset = static_cast<NodeIndex>(-1);
  std::vector<NodeIndex> map(comm.size(), kUnset);
  NodeIndex next = 0;
  for (auto& c : comm) {
    if (map[c] == kUnset) map[c] = next++;
    c = map[c];
  }
  return next;
}

WeightedGraph aggregate(const WeightedGraph& w, const std::vector<NodeIndex>& comm, std::size_t num_comm) {
  WeightedGraph out;
  out.adj.resize(num_comm);
  out.strength.assign(num_comm, 0.0);
  out.total = w.total;
  std::vector<std::vector<NodeIndex>> groups(num_comm);
  for (NodeIndex i = 0; i < w.size(); ++i) groups[comm[i]].push_back(i);

  std::vector<double> acc(num_comm, 0.0);
  std::vector<NodeIndex> touched;
  for (NodeIndex c = 0; c < num_comm; ++c) {
    touched.clear();
    for (NodeIndex i : groups[c]) {
      out.strength[c] += w.strength[i];
      for (const auto& [j, wt] : w.adj[i]) {
        const NodeIndex d = comm[j];
        if (acc[d] == 0.0) touched.push_back(d);
        acc[d] += wt;
      }
    }
    std::sort(touched.begin(), touched.end());
    for (NodeIndex d : touched) {
      out.adj[c].emplace_back(d, acc[d]);
      acc[d] = 0.0;
    }
  }
  return out;
}

}  // namespace

LouvainResult louvain_levels(const InteractionGraph& g, double resolution, std::uint64_t seed) {
  if (g.num_nodes() == 0) throw DataError("Louvain needs a nonempty graph");
  if (!(resolution > 0.0)) throw ConfigError("Louvain resolution must be positive");

  const std::size_t n = g.num_nodes();
  std::vector<NodeIndex> node_comm(n);
  std::iota(node_comm.begin(), node_comm.end(), 0);
  LouvainResult result;
  if (g.num_edges() == 0) {
    result.partition = Partition::from_assignment({node_comm.begin(), node_comm.end()});
    return result;
  }

  std::mt19937_64 rng(seed);
  WeightedGraph w = from_graph(g);
  result.level_modularity.push_back(weighted_modularity(w, node_comm, n, resolution));

  while (true) {
    std::vector<NodeIndex> comm(w.size());
    std::iota(comm.begin(), comm.end(), 0);
    if (!local_moves(w, comm, resolution, rng)) break;
    const std::size_t num_comm = renumber(comm);
    for (auto& c : node_comm) c = comm[c];
    const double q = weighted_modularity(w, comm, num_comm, resolution);
    if (q < result.level_modularity.back() - 1e-12) {
      throw std::logic_error("Louvain level decreased modularity");
    }
    result.level_modularity.push_back(q);
    if (num_comm == w.size()) break;
    w = aggregate(w, comm, num_comm);
  }
  renumber(node_comm);
  result.partition = Partition::from_assignment({node_comm.begin(), node_comm.end()});
  return result;
}

Partition louvain(const InteractionGraph& g, double resolution, std::uint64_t seed) {
  return louvain_levels(g, resolution, seed).partition;
}

FluidResult fluidc(const InteractionGraph& g, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
  const std::size_t n = g.num_nodes();
  if (k == 0) throw ConfigError("FluidC needs k >= 1");
  if (k > n) throw DataError("FluidC k=" + std::to_string(k) + " exceeds node count " + std::to_string(n));

  FluidResult result;
  const auto component = g.connected_components();
  std::vector<std::size_t> comp_size;
  for (NodeIndex c : component) {
    if (c >= comp_size.size()) comp_size.resize(c + 1, 0);
    ++comp_size[c];
  }
  const auto largest = static_cast<NodeIndex>(std::max_element(comp_size.begin(), comp_size.end()) - comp_size.begin());
  std::vector<NodeIndex> nodes;
  for (NodeIndex v = 0; v < n; ++v) {
    if (component[v] == largest) nodes.push_back(v);
  }
  if (k > nodes.size()) {
    throw DataError("FluidC k=" + std::to_string(k) + " exceeds largest component size " + std::to_string(nodes.size()));
  }
  if (nodes.size() < n) {
    result.warnings.push_back("graph is disconnected; FluidC ran on the largest component (" +
                              std::to_string(nodes.size()) + " of " + std::to_string(n) +
                              " nodes) and assigned the rest to community 0");
  }

  constexpr CommunityId kNone = static_cast<CommunityId>(-1);
  std::vector<CommunityId> comm(n, kNone);
  std::vector<std::size_t> size(k, 0);
  std::vector<double> density(k, 0.0);
  std::mt19937_64 rng(seed);

  std::vector<NodeIndex> order = nodes;
  std::shuffle(order.begin(), order.end(), rng);
  for (CommunityId c = 0; c < k; ++c) {
    comm[order[c]] = c;
    size[c] = 1;
    density[c] = 1.0;
  }

  std::vector<double> score(k, 0.0);
  std::vector<CommunityId> best;
  constexpr double kTie = 1e-9;
  while (result.iterations < max_iter) {
    ++result.iterations;
    std::shuffle(order.begin(), order.end(), rng);
    bool changed = false;
    for (NodeIndex v : order) {
      std::fill(score.begin(), score.end(), 0.0);
      bool any = false;
      if (comm[v] != kNone) {
        score[comm[v]] += density[comm[v]];
        any = true;
      }
      for (NodeIndex u : g.neighbors(v)) {
        if (comm[u] != kNone) {
          score[comm[u]] += density[comm[u]];
          any = true;
        }
      }
      if (!any) continue;
      const double top = *std::max_element(score.begin(), score.end());
      best.clear();
      for (CommunityId c = 0; c < k; ++c) {
        if (score[c] >= top - kTie) best.push_back(c);
      }
      if (comm[v] != kNone && std::find(best.begin(), best.end(), comm[v]) != best.end()) continue;
      std::uniform_int_distribution<std::size_t> pick(0, best.size() - 1);
      const CommunityId next = best[pick(rng)];
      if (comm[v] != kNone) {
        --size[comm[v]];
        density[comm[v]] = 1.0 / static_cast<double>(size[comm[v]]);
      }
      comm[v] = next;
      ++size[next];
      density[next] = 1.0 / static_cast<double>(size[next]);
      changed = true;
    }
    if (!changed) {
      result.converged = true;
      break;
    }
  }

  // Nodes the propagation never reached (only possible when max_iter cuts it
  // short) join the community of their nearest assigned node.
  std::vector<NodeIndex> frontier;
  for (NodeIndex v : nodes) {
    if (comm[v] != kNone) frontier.push_back(v);
  }
  std::size_t late = 0;
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    const NodeIndex u = frontier[head];
    for (NodeIndex v : g.neighbors(u)) {
      if (comm[v] == kNone) {
        comm[v] = comm[u];
        frontier.push_back(v);
        ++late;
      }
    }
  }
  if (late > 0) {
    result.warnings.push_back(std::to_string(late) + " node(s) unreached after " + std::to_string(max_iter) +
                              " FluidC iterations were assigned to the nearest community");
  }
  if (!result.converged) {
    result.warnings.push_back("FluidC did not converge within " + std::to_string(max_iter) + " iterations");
  }
  for (auto& c : comm) {
    if (c == kNone) c = 0;
  }
  result.partition = Partition::from_assignment(std::move(comm));
  return result;
}

void write_partition_csv(std::ostream& out, const InteractionGraph& g, const Partition& p) {
  out << "user,community\n";
  for (NodeIndex v = 0; v < g.num_nodes(); ++v) out << csv::quote(g.id(v)) << ',' << p.community_of(v) << '\n';
}

Partition parse_partition_csv(std::istream& in, const InteractionGraph& g, const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source_name + ": empty partition file");
  const auto header = csv::split_line(line);
  if (header.size() != 2 || header[0] != "user" || header[1] != "community") {
    throw ParseError(source_name, 1, "expected header 'user,community'");
  }
  constexpr std::int64_t kMissing = std::numeric_limits<std::int64_t>::min();
  std::vector<std::int64_t> labels(g.num_nodes(), kMissing);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split_line(line);
    if (fields.size() != 2) throw ParseError(source_name, line_no, "expected 2 fields");
    const auto idx = g.index_of(fields[0]);
    if (!idx) throw ParseError(source_name, line_no, "user '" + fields[0] + "' is not in the graph");
    std::int64_t label = 0;
    auto [ptr, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), label);
    if (ec != std::errc{} || ptr != fields[1].data() + fields[1].size() || label == kMissing) {
      throw ParseError(source_name, line_no, "community must be an integer");
    }
    if (labels[*idx] != kMissing) throw ParseError(source_name, line_no, "user '" + fields[0] + "' listed twice");
    labels[*idx] = label;
  }
  for (NodeIndex v = 0; v < g.num_nodes(); ++v) {
    if (labels[v] == kMissing) throw DataError(source_name + ": user '" + g.id(v) + "' has no community");
  }
  return Partition::from_labels(labels);
}

Partition read_partition_csv(const std::filesystem::path& path, const InteractionGraph& g) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open partition file " + path.string());
  return parse_partition_csv(in, g, path.string());
}

}  // namespace echoscore
