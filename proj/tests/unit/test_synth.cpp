#include <cmath>

#include <gtest/gtest.h>

#include "echoscore/error.hpp"
#include "echoscore/pca.hpp"
#include "echoscore/synth.hpp"
#include "oracles.hpp"

using namespace echoscore;

TEST(Sbm, DeterministicEdgesGiveCliques) {
  synth::SbmSpec spec;
  spec.n = 10;
  spec.p_in = 1.0;
  spec.p_out = 0.0;
  spec.feature_dim = 4;
  const auto d = synth::generate(spec);
  EXPECT_EQ(d.graph.num_edges(), 20u);
  for (NodeIndex v = 0; v < 10; ++v) {
    EXPECT_EQ(d.graph.degree(v), 4u);
    EXPECT_EQ(d.blocks.community_of(v), v < 5 ? 0u : 1u);
    EXPECT_EQ(d.labels.at(v), v < 5 ? -1.0 : 1.0);
  }
  EXPECT_EQ(d.graph.id(3), "u3");
}

TEST(Sbm, SameSeedSameDataset) {
  synth::SbmSpec spec;
  spec.n = 120;
  spec.seed = 5;
  const auto a = synth::generate(spec);
  const auto b = synth::generate(spec);
  EXPECT_EQ(a.graph.edge_list(), b.graph.edge_list());
  EXPECT_EQ(a.features.values(), b.features.values());
  spec.seed = 6;
  EXPECT_NE(synth::generate(spec).graph.edge_list(), a.graph.edge_list());
}

TEST(Sbm, EqualProbabilitiesShowNoBlockEffect) {
  // Pooled 2x2 table (intra/inter x edge/non-edge) over 20 seeds.
  double intra_e = 0, intra_n = 0, inter_e = 0, inter_n = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    synth::SbmSpec spec;
    spec.n = 100;
    spec.p_in = spec.p_out = 0.05;
    spec.seed = seed;
    const auto d = synth::generate(spec);
    double intra_pairs = 0, inter_pairs = 0, intra_edges = 0, inter_edges = 0;
    for (NodeIndex u = 0; u < 100; ++u) {
      for (NodeIndex v = u + 1; v < 100; ++v) {
        (d.blocks.community_of(u) == d.blocks.community_of(v) ? intra_pairs : inter_pairs) += 1;
      }
    }
    for (const auto& [u, v] : d.graph.edge_list()) {
      (d.blocks.community_of(u) == d.blocks.community_of(v) ? intra_edges : inter_edges) += 1;
    }
    intra_e += intra_edges;
    intra_n += intra_pairs - intra_edges;
    inter_e += inter_edges;
    inter_n += inter_pairs - inter_edges;
  }
  const double total = intra_e + intra_n + inter_e + inter_n;
  const double obs[4] = {intra_e, intra_n, inter_e, inter_n};
  const double rows[2] = {intra_e + intra_n, inter_e + inter_n};
  const double cols[2] = {intra_e + inter_e, intra_n + inter_n};
  double chi2 = 0;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const double expected = rows[r] * cols[c] / total;
      chi2 += (obs[2 * r + c] - expected) * (obs[2 * r + c] - expected) / expected;
    }
  }
  EXPECT_LT(chi2, 6.635);  // 1 dof, alpha 0.01
}

TEST(Sbm, ZeroSeparationFeaturesCarryNoSignal) {
  synth::SbmSpec spec;
  spec.n = 2000;
  spec.separation = 0.0;
  spec.seed = 4;
  const auto d = synth::generate(spec);
  const Eigen::MatrixXd x = d.features.values();
  // Nearest-centroid classifier fit on even rows, scored on odd rows.
  Eigen::RowVectorXd c0 = Eigen::RowVectorXd::Zero(x.cols()), c1 = c0;
  double n0 = 0, n1 = 0;
  for (Eigen::Index v = 0; v < x.rows(); v += 2) {
    if (d.blocks.community_of(static_cast<NodeIndex>(v)) == 0) {
      c0 += x.row(v);
      ++n0;
    } else {
      c1 += x.row(v);
      ++n1;
    }
  }
  c0 /= n0;
  c1 /= n1;
  double correct = 0, total = 0;
  for (Eigen::Index v = 1; v < x.rows(); v += 2) {
    const int guess = (x.row(v) - c0).squaredNorm() < (x.row(v) - c1).squaredNorm() ? 0 : 1;
    correct += guess == static_cast<int>(d.blocks.community_of(static_cast<NodeIndex>(v)));
    ++total;
  }
  EXPECT_NEAR(correct / total, 0.5, 0.06);

  spec.separation = 1.0;
  spec.noise = 0.0;
  const auto clean = synth::generate(spec);
  const Eigen::MatrixXd y = clean.features.values();
  EXPECT_NEAR((y.row(0) - y.row(1999)).norm(), 1.0, 1e-12);
  EXPECT_NEAR(y.row(0).norm(), 1.0, 1e-12);
}

TEST(Sbm, Validation) {
  synth::SbmSpec spec;
  spec.separation = 1.5;
  EXPECT_THROW(synth::generate(spec), ConfigError);
  spec = {};
  spec.block_fractions = {0.5, 0.6};
  EXPECT_THROW(synth::generate(spec), ConfigError);
  spec = {};
  spec.p_out = 0.5;
  EXPECT_THROW(synth::generate(spec), ConfigError);
}

TEST(Pca, RecoversDominantAxis) {
  std::mt19937_64 rng(1);
  Eigen::MatrixXd z = oracle::random_matrix(300, 4, rng, 0.1);
  z.col(2) *= 30.0;
  z.col(0) *= 5.0;
  const Eigen::MatrixXd p = pca_2d(z);
  ASSERT_EQ(p.cols(), 2);
  EXPECT_GT(std::abs(oracle::pearson({p.col(0).data(), p.col(0).data() + 300}, {z.col(2).data(), z.col(2).data() + 300})),
            0.999);
  EXPECT_GT(std::abs(oracle::pearson({p.col(1).data(), p.col(1).data() + 300}, {z.col(0).data(), z.col(0).data() + 300})),
            0.99);
  EXPECT_NEAR(p.col(0).mean(), 0.0, 1e-12);
}
