#include "echoscore/synth.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "echoscore/error.hpp"
#include "echoscore/seed.hpp"

namespace echoscore::synth {

void SbmSpec::validate() const {
  if (n < 2) throw ConfigError("SBM needs at least 2 nodes");
  if (block_fractions.empty()) throw ConfigError("SBM needs at least one block");
  double total = 0.0;
  for (double f : block_fractions) {
    if (!(f > 0.0)) throw ConfigError("block fractions must be positive");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("block fractions must sum to 1");
  if (!(p_out >= 0.0 && p_out <= p_in && p_in <= 1.0)) throw ConfigError("need 0 <= p_out <= p_in <= 1");
  if (!(separation >= 0.0 && separation <= std::sqrt(2.0) + 1e-12)) {
    throw ConfigError("feature separation must be in [0, sqrt(2)]");
  }
  if (feature_dim < block_fractions.size() + 1) throw ConfigError("feature dimension must exceed the block count");
  if (!(noise >= 0.0)) throw ConfigError("feature noise must be nonnegative");
}

SbmDataset generate(const SbmSpec& spec) {
  spec.validate();
  const std::size_t blocks = spec.block_fractions.size();
  std::vector<std::size_t> sizes(blocks);
  std::size_t assigned = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    sizes[b] = static_cast<std::size_t>(std::floor(spec.block_fractions[b] * static_cast<double>(spec.n)));
    assigned += sizes[b];
  }
  for (std::size_t b = 0; assigned < spec.n; b = (b + 1) % blocks, ++assigned) ++sizes[b];

  std::vector<CommunityId> block(spec.n);
  for (std::size_t b = 0, v = 0; b < blocks; ++b) {
    for (std::size_t i = 0; i < sizes[b]; ++i) block[v++] = static_cast<CommunityId>(b);
  }

  std::mt19937_64 edge_rng(stream_seed(spec.seed, 0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Edge> edges;
  for (NodeIndex i = 0; i < spec.n; ++i) {
    for (NodeIndex j = i + 1; j < spec.n; ++j) {
      const double p = block[i] == block[j] ? spec.p_in : spec.p_out;
      if (unit(edge_rng) < p) edges.emplace_back(i, j);
    }
  }
  if (edges.empty()) throw DataError("SBM spec produced a graph without edges");

  std::vector<std::string> ids(spec.n);
  for (std::size_t v = 0; v < spec.n; ++v) ids[v] = "u" + std::to_string(v);

  SbmDataset data;
  data.graph = InteractionGraph::from_edges(spec.n, edges, std::move(ids));

  // Block means a*e_last + c*e_b: unit length, pairwise distance c*sqrt(2) = separation.
  const double c = spec.separation / std::sqrt(2.0);
  const double a = std::sqrt(std::max(0.0, 1.0 - c * c));
  const auto f = static_cast<Eigen::Index>(spec.feature_dim);
  std::mt19937_64 feature_rng(stream_seed(spec.seed, 1));
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(spec.n), f);
  for (Eigen::Index v = 0; v < x.rows(); ++v) {
    for (Eigen::Index k = 0; k < f; ++k) x(v, k) = spec.noise * noise(feature_rng);
    x(v, f - 1) += a;
    x(v, static_cast<Eigen::Index>(block[static_cast<std::size_t>(v)])) += c;
  }
  data.features = FeatureMatrix::dense(std::move(x), FeatureProvenance::kImported);
  data.blocks = Partition::from_assignment(block);
  for (NodeIndex v = 0; v < spec.n; ++v) data.labels[v] = block[v] % 2 == 0 ? -1.0 : 1.0;
  return data;
}

}  // namespace echoscore::synth
