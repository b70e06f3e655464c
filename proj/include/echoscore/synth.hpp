#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "echoscore/baselines.hpp"
#include "echoscore/communities.hpp"
#include "echoscore/features.hpp"
#include "echoscore/graph.hpp"

namespace echoscore::synth {

/// Stochastic block model with block-correlated content features.
struct SbmSpec {
  std::size_t n = 1000;
  std::vector<double> block_fractions{0.5, 0.5};
  double p_in = 0.05;
  double p_out = 0.002;
  std::size_t feature_dim = 16;
  double separation = 1.0;  // distance between block feature means, at most sqrt(2)
  double noise = 0.3;       // per-coordinate Gaussian sigma
  std::uint64_t seed = 0;

  void validate() const;
};

struct SbmDataset {
  InteractionGraph graph;
  FeatureMatrix features;
  Partition blocks;
  NodeScores labels;  // -1 for even blocks, +1 for odd blocks
};

/// Deterministic per spec.seed. Block means are unit vectors pairwise `separation`
/// apart; features are mean + noise, then row-normalized.
SbmDataset generate(const SbmSpec& spec);

}  // namespace echoscore::synth
