#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "echoscore/communities.hpp"
#include "echoscore/graph.hpp"

namespace echoscore {

/// Known opinion/ideology scores in [-1, 1], keyed by dense node index.
using NodeScores = std::map<NodeIndex, double>;

struct OpinionVector {
  std::vector<double> x;
  std::vector<bool> seed;
};

struct DeGrootResult {
  OpinionVector opinions;
  std::size_t iterations = 0;
  bool converged = false;
  double last_change = 0.0;  // max |x(t+1) - x(t)| at the final iteration
};

/// Synchronous neighbor averaging with clamped seeds. Free nodes start at 0.
DeGrootResult degroot_spread(const InteractionGraph& g, const NodeScores& seeds, double epsilon = 1e-6,
                             std::size_t max_iter = 1000);

/// max over free nodes with neighbors of |x_u - mean_{v in N(u)} x_v|.
double degroot_residual(const InteractionGraph& g, const OpinionVector& x);

struct PolarizationIndex {
  double pi = 0.0;
  double a_plus = 0.0;   // share of classified population above the band
  double a_minus = 0.0;  // share below
  double gc_plus = 0.0;  // mean opinion of each side
  double gc_minus = 0.0;
  std::size_t classified = 0;
  std::vector<std::string> warnings;
};

/// (1 - |A+ - A-|) * |gc+ - gc-| / 2 with sides split at +-neutral_band.
PolarizationIndex polarization_index(const std::vector<double>& x, double neutral_band = 0.0);

struct RwcConfig {
  std::optional<std::size_t> endpoints_per_side;  // default max(10, ceil(0.01 * side size))
  std::size_t walks_per_side = 10000;
  std::uint64_t seed = 0;
  std::size_t max_steps = 1000000;

  void validate() const;
};

struct RwcResult {
  double rwc = 0.0;
  double p_xx = 0.0, p_xy = 0.0, p_yx = 0.0, p_yy = 0.0;
  std::size_t endpoints_x = 0, endpoints_y = 0;
  std::size_t walks_discarded = 0;
  std::size_t unreachable_starts = 0;  // non-isolated start candidates with no path to an endpoint
  std::vector<std::string> warnings;
};

/// Random Walk Controversy on a two-way partition, estimated by Monte Carlo.
/// Each walk draws from its own engine seeded by (seed, side, walk index).
RwcResult rwc(const InteractionGraph& g, const Partition& sides, const RwcConfig& cfg = {});

struct IdeologyErrors {
  std::vector<NodeIndex> nodes;
  std::vector<double> predictions;
  double mae = 0.0;
  double mse = 0.0;
};

double mean_absolute_error(const std::vector<double>& pred, const std::vector<double>& truth);
double mean_squared_error(const std::vector<double>& pred, const std::vector<double>& truth);

/// DeGroot spread from the training labels, scored on the evaluation nodes.
IdeologyErrors degroot_ideology_baseline(const InteractionGraph& g, const NodeScores& train_labels,
                                         const std::vector<NodeIndex>& eval_nodes,
                                         const NodeScores& eval_labels);

struct LabelFile {
  NodeScores scores;
  std::vector<std::string> warnings;
};

/// CSV `user,score`; users absent from the graph are skipped with a warning.
LabelFile read_labels_csv(const std::filesystem::path& path, const InteractionGraph& g);
LabelFile parse_labels_csv(std::istream& in, const InteractionGraph& g,
                           const std::string& source_name = "<stream>");
void write_labels_csv(std::ostream& out, const InteractionGraph& g, const NodeScores& labels);

}  // namespace echoscore
