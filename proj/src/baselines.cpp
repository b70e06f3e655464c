#include "echoscore/baselines.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include "echoscore/csv.hpp"
#include "echoscore/error.hpp"
#include "echoscore/seed.hpp"

namespace echoscore {

DeGrootResult degroot_spread(const InteractionGraph& g, const NodeScores& seeds, double epsilon, std::size_t max_iter) {
  if (seeds.empty()) throw DataError("DeGroot spread needs at least one seed");
  if (!(epsilon > 0.0)) throw ConfigError("DeGroot epsilon must be positive");
  const std::size_t n = g.num_nodes();
  DeGrootResult result;
  auto& x = result.opinions.x;
  auto& is_seed = result.opinions.seed;
  x.assign(n, 0.0);
  is_seed.assign(n, false);
  for (const auto& [v, value] : seeds) {
    if (v >= n) throw std::out_of_range("seed node out of range");
    if (!(value >= -1.0 && value <= 1.0)) throw DataError("seed value outside [-1, 1]");
    x[v] = value;
    is_seed[v] = true;
  }

  std::vector<double> next(n);
  while (result.iterations < max_iter) {
    double change = 0.0;
    for (NodeIndex u = 0; u < n; ++u) {
      const auto nbrs = g.neighbors(u);
      if (is_seed[u] || nbrs.empty()) {
        next[u] = x[u];
        continue;
      }
      double sum = 0.0;
      for (NodeIndex v : nbrs) sum += x[v];
      next[u] = sum / static_cast<double>(nbrs.size());
      change = std::max(change, std::abs(next[u] - x[u]));
    }
    x.swap(next);
    ++result.iterations;
    result.last_change = change;
    if (change < epsilon) {
      result.converged = true;
      break;
    }
  }
  return result;
}

double degroot_residual(const InteractionGraph& g, const OpinionVector& x) {
  double worst = 0.0;
  for (NodeIndex u = 0; u < g.num_nodes(); ++u) {
    const auto nbrs = g.neighbors(u);
    if (x.seed[u] || nbrs.empty()) continue;
    double sum = 0.0;
    for (NodeIndex v : nbrs) sum += x.x[v];
    worst = std::max(worst, std::abs(x.x[u] - sum / static_cast<double>(nbrs.size())));
  }
  return worst;
}

PolarizationIndex polarization_index(const std::vector<double>& x, double neutral_band) {
  if (x.empty()) throw DataError("polarization index needs at least one opinion");
  if (!(neutral_band >= 0.0)) throw ConfigError("neutral band must be nonnegative");
  PolarizationIndex out;
  std::size_t n_plus = 0, n_minus = 0;
  double sum_plus = 0.0, sum_minus = 0.0;
  for (double v : x) {
    if (v > neutral_band) {
      ++n_plus;
      sum_plus += v;
    } else if (v < -neutral_band) {
      ++n_minus;
      sum_minus += v;
    }
  }
  out.classified = n_plus + n_minus;
  if (out.classified == 0) {
    out.warnings.push_back("all opinions fall inside the neutral band; polarization index is 0");
    return out;
  }
  const double total = static_cast<double>(out.classified);
  out.a_plus = static_cast<double>(n_plus) / total;
  out.a_minus = static_cast<double>(n_minus) / total;
  if (n_plus == 0 || n_minus == 0) return out;
  out.gc_plus = sum_plus / static_cast<double>(n_plus);
  out.gc_minus = sum_minus / static_cast<double>(n_minus);
  const double d = std::abs(out.gc_plus - out.gc_minus) / 2.0;
  out.pi = (1.0 - std::abs(out.a_plus - out.a_minus)) * d;
  return out;
}

void RwcConfig::validate() const {
  if (endpoints_per_side && *endpoints_per_side < 1) throw ConfigError("RWC needs at least one endpoint per side");
  if (walks_per_side < 1000) throw ConfigError("RWC needs at least 1000 walks per side");
  if (max_steps < 1) throw ConfigError("RWC step guard must be positive");
}

RwcResult rwc(const InteractionGraph& g, const Partition& sides, const RwcConfig& cfg) {
  cfg.validate();
  if (sides.num_communities() != 2) throw DataError("RWC needs a partition into exactly two sides");
  if (sides.num_nodes() != g.num_nodes()) throw DataError("partition does not cover the graph");
  const std::size_t n = g.num_nodes();

  constexpr int kFree = -1;
  std::vector<int> endpoint_side(n, kFree);
  const auto members = sides.members();
  RwcResult result;
  for (int s = 0; s < 2; ++s) {
    std::vector<NodeIndex> candidates;
    for (NodeIndex v : members[s]) {
      if (g.degree(v) > 0) candidates.push_back(v);
    }
    const std::size_t default_k = std::max<std::size_t>(
        10, static_cast<std::size_t>(std::ceil(0.01 * static_cast<double>(members[s].size()))));
    const std::size_t k = cfg.endpoints_per_side.value_or(default_k);
    if (candidates.size() < k) {
      throw DataError("RWC side " + std::to_string(s) + " has " + std::to_string(candidates.size()) +
                      " non-isolated nodes, fewer than the " + std::to_string(k) + " endpoints required");
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](NodeIndex a, NodeIndex b) { return g.degree(a) > g.degree(b); });
    for (std::size_t i = 0; i < k; ++i) endpoint_side[candidates[i]] = s;
    (s == 0 ? result.endpoints_x : result.endpoints_y) = k;
  }

  // Walks from nodes with no path to any endpoint can never be absorbed.
  std::vector<bool> reachable(n, false);
  std::vector<NodeIndex> queue;
  for (NodeIndex v = 0; v < n; ++v) {
    if (endpoint_side[v] != kFree) {
      reachable[v] = true;
      queue.push_back(v);
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (NodeIndex v : g.neighbors(queue[head])) {
      if (!reachable[v]) {
        reachable[v] = true;
        queue.push_back(v);
      }
    }
  }

  double absorbed[2][2] = {{0, 0}, {0, 0}};
  std::size_t kept[2] = {0, 0};
  for (int s = 0; s < 2; ++s) {
    std::vector<NodeIndex> starts;
    for (NodeIndex v : members[s]) {
      if (g.degree(v) == 0 || endpoint_side[v] != kFree) continue;
      if (!reachable[v]) {
        ++result.unreachable_starts;
        continue;
      }
      starts.push_back(v);
    }
    if (starts.empty()) {
      throw DataError("RWC side " + std::to_string(s) + " has no non-endpoint start nodes; lower the endpoint count");
    }
    const std::uint64_t side_seed = stream_seed(cfg.seed, static_cast<std::uint64_t>(s));
    std::uniform_int_distribution<std::size_t> pick_start(0, starts.size() - 1);
    for (std::size_t w = 0; w < cfg.walks_per_side; ++w) {
      std::mt19937_64 rng(stream_seed(side_seed, w));
      NodeIndex cur = starts[pick_start(rng)];
      std::size_t steps = 0;
      while (endpoint_side[cur] == kFree && steps < cfg.max_steps) {
        const auto nbrs = g.neighbors(cur);
        std::uniform_int_distribution<std::size_t> pick(0, nbrs.size() - 1);
        cur = nbrs[pick(rng)];
        ++steps;
      }
      if (endpoint_side[cur] == kFree) {
        ++result.walks_discarded;
        continue;
      }
      absorbed[s][endpoint_side[cur]] += 1.0;
      ++kept[s];
    }
    if (kept[s] == 0) throw NumericError("every RWC walk from side " + std::to_string(s) + " hit the step guard");
  }

  if (result.unreachable_starts > 0) {
    result.warnings.push_back(std::to_string(result.unreachable_starts) +
                              " node(s) cannot reach any endpoint and were excluded as walk starts");
  }
  const double total_walks = 2.0 * static_cast<double>(cfg.walks_per_side);
  if (static_cast<double>(result.walks_discarded) > 0.01 * total_walks) {
    result.warnings.push_back(std::to_string(result.walks_discarded) + " walks exceeded the " +
                              std::to_string(cfg.max_steps) + "-step guard and were discarded");
  }
  result.p_xx = absorbed[0][0] / static_cast<double>(kept[0]);
  result.p_xy = absorbed[0][1] / static_cast<double>(kept[0]);
  result.p_yx = absorbed[1][0] / static_cast<double>(kept[1]);
  result.p_yy = absorbed[1][1] / static_cast<double>(kept[1]);
  result.rwc = result.p_xx * result.p_yy - result.p_xy * result.p_yx;
  return result;
}

double mean_absolute_error(const std::vector<double>& pred, const std::vector<double>& truth) {
  if (pred.size() != truth.size() || pred.empty()) throw DataError("error metrics need equal, nonempty inputs");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - truth[i]);
  return s / static_cast<double>(pred.size());
}

double mean_squared_error(const std::vector<double>& pred, const std::vector<double>& truth) {
  if (pred.size() != truth.size() || pred.empty()) throw DataError("error metrics need equal, nonempty inputs");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return s / static_cast<double>(pred.size());
}

IdeologyErrors degroot_ideology_baseline(const InteractionGraph& g, const NodeScores& train_labels,
                                         const std::vector<NodeIndex>& eval_nodes, const NodeScores& eval_labels) {
  if (eval_nodes.empty()) throw DataError("evaluation set is empty");
  for (NodeIndex v : eval_nodes) {
    if (train_labels.count(v)) throw DataError("training and evaluation sets overlap");
  }
  const auto spread = degroot_spread(g, train_labels);
  IdeologyErrors out;
  out.nodes = eval_nodes;
  std::vector<double> truth;
  for (NodeIndex v : eval_nodes) {
    out.predictions.push_back(spread.opinions.x.at(v));
    truth.push_back(eval_labels.at(v));
  }
  out.mae = mean_absolute_error(out.predictions, truth);
  out.mse = mean_squared_error(out.predictions, truth);
  return out;
}

LabelFile parse_labels_csv(std::istream& in, const InteractionGraph& g, const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source_name + ": empty label file");
  const auto header = csv::split_line(line);
  if (header.size() != 2 || header[0] != "user" || header[1] != "score") {
    throw ParseError(source_name, 1, "expected header 'user,score'");
  }
  LabelFile out;
  std::size_t unknown = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split_line(line);
    if (fields.size() != 2) throw ParseError(source_name, line_no, "expected 2 fields");
    double score = 0.0;
    auto [ptr, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), score);
    if (ec != std::errc{} || ptr != fields[1].data() + fields[1].size()) {
      throw ParseError(source_name, line_no, "score is not a number");
    }
    if (!(score >= -1.0 && score <= 1.0)) throw ParseError(source_name, line_no, "score outside [-1, 1]");
    const auto idx = g.index_of(fields[0]);
    if (!idx) {
      ++unknown;
      continue;
    }
    if (!out.scores.emplace(*idx, score).second) {
      throw ParseError(source_name, line_no, "user '" + fields[0] + "' labeled twice");
    }
  }
  if (unknown > 0) out.warnings.push_back(std::to_string(unknown) + " labeled user(s) not in graph were skipped");
  return out;
}

LabelFile read_labels_csv(const std::filesystem::path& path, const InteractionGraph& g) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file " + path.string());
  return parse_labels_csv(in, g, path.string());
}

void write_labels_csv(std::ostream& out, const InteractionGraph& g, const NodeScores& labels) {
  out << "user,score\n";
  for (const auto& [v, score] : labels) out << csv::quote(g.id(v)) << ',' << csv::format_double(score) << '\n';
}

}  // namespace echoscore
