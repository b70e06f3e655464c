#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "echoscore/communities.hpp"
#include "echoscore/error.hpp"
#include "oracles.hpp"

using namespace echoscore;

namespace {

Partition from_ints(const std::vector<int>& labels) {
  std::vector<std::int64_t> l(labels.begin(), labels.end());
  return Partition::from_labels(l);
}

std::vector<int> as_ints(const Partition& p) {
  return std::vector<int>(p.assignment().begin(), p.assignment().end());
}

// Same grouping, ignoring label names.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    }
  }
  return true;
}

InteractionGraph complete(std::size_t n) {
  std::vector<Edge> edges;
  for (NodeIndex i = 0; i < n; ++i)
    for (NodeIndex j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return InteractionGraph::from_edges(n, edges);
}

}  // namespace

TEST(Partition, DenseRelabelAndValidation) {
  const std::vector<std::int64_t> raw{7, 7, -3, 9, -3};
  const auto p = Partition::from_labels(raw);
  EXPECT_EQ(p.assignment(), (std::vector<CommunityId>{0, 0, 1, 2, 1}));
  EXPECT_EQ(p.sizes(), (std::vector<std::size_t>{2, 2, 1}));
  EXPECT_EQ(p.members()[1], (std::vector<NodeIndex>{2, 4}));
  EXPECT_THROW(Partition::from_assignment({0, 2}), DataError);
}

TEST(Modularity, TrivialValues) {
  const auto two = oracle::clique_pair(5, false);
  std::vector<int> split(10);
  for (int i = 5; i < 10; ++i) split[i] = 1;
  EXPECT_NEAR(modularity(two, from_ints(split)), 0.5, 1e-15);
  EXPECT_NEAR(modularity(complete(6), from_ints(std::vector<int>(6, 0))), 0.0, 1e-15);
  EXPECT_THROW(modularity(InteractionGraph::from_edges(3, std::vector<Edge>{}), from_ints({0, 1, 2})), DataError);
}

TEST(Modularity, MatchesDefinitionalSum) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 10; ++t) {
    const auto g = oracle::random_graph(20, 0.3, rng);
    const auto labels = oracle::random_labels(20, 1 + t % 5, rng);
    for (double gamma : {0.5, 1.0, 2.0}) {
      EXPECT_NEAR(modularity(g, from_ints(labels), gamma),
                  oracle::modularity(oracle::dense_adjacency(g), labels, gamma), 1e-12);
    }
  }
}

TEST(Louvain, BridgedCliquesMatchBruteForceOptimum) {
  const auto g = oracle::clique_pair(5, true);
  std::vector<int> best;
  const double q_best = oracle::best_modularity(oracle::dense_adjacency(g), &best);
  const auto p = louvain(g, 1.0, 0);
  EXPECT_EQ(p.num_communities(), 2u);
  EXPECT_TRUE(same_partition(as_ints(p), best));
  EXPECT_NEAR(modularity(g, p), q_best, 1e-12);
}

TEST(Louvain, CompleteAndEdgelessGraphs) {
  EXPECT_EQ(louvain(complete(6)).num_communities(), 1u);
  const auto empty = InteractionGraph::from_edges(4, std::vector<Edge>{});
  EXPECT_EQ(louvain(empty).num_communities(), 4u);
}

TEST(Louvain, LevelModularityNeverDecreases) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 20; ++t) {
    const auto g = oracle::random_graph(40, 0.08, rng);
    if (g.num_edges() == 0) continue;
    const auto r = louvain_levels(g, 1.0, static_cast<std::uint64_t>(t));
    for (std::size_t i = 1; i < r.level_modularity.size(); ++i) {
      EXPECT_GE(r.level_modularity[i], r.level_modularity[i - 1] - 1e-12);
    }
    EXPECT_NEAR(r.level_modularity.back(), modularity(g, r.partition), 1e-10);
  }
}

TEST(Louvain, NearBruteForceOnSmallRandomGraphs) {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 8; ++t) {
    const auto g = oracle::random_graph(9, 0.35, rng);
    if (g.num_edges() == 0) continue;
    const double best = oracle::best_modularity(oracle::dense_adjacency(g));
    const double got = modularity(g, louvain(g, 1.0, 1));
    EXPECT_LE(got, best + 1e-12);
    EXPECT_GE(got, best - 0.05);
  }
}

TEST(Louvain, DeterministicPerSeed) {
  std::mt19937_64 rng(31);
  const auto g = oracle::random_graph(60, 0.06, rng);
  EXPECT_EQ(louvain(g, 1.0, 5).assignment(), louvain(g, 1.0, 5).assignment());
}

TEST(FluidC, BridgedCliques) {
  const auto g = oracle::clique_pair(10, true);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = fluidc(g, 2, seed);
    EXPECT_EQ(r.partition.num_communities(), 2u);
    std::vector<int> truth(20, 0);
    for (int i = 10; i < 20; ++i) truth[i] = 1;
    EXPECT_TRUE(same_partition(as_ints(r.partition), truth)) << "seed " << seed;
    EXPECT_TRUE(r.converged);
  }
}

TEST(FluidC, SmallCases) {
  const auto path = InteractionGraph::from_edges(2, std::vector<Edge>{{0, 1}});
  const auto r = fluidc(path, 2, 0);
  EXPECT_NE(r.partition.community_of(0), r.partition.community_of(1));
  const auto one = fluidc(oracle::clique_pair(4, true), 1, 0);
  EXPECT_EQ(one.partition.num_communities(), 1u);
  EXPECT_THROW(fluidc(path, 3, 0), DataError);
  EXPECT_THROW(fluidc(path, 0, 0), ConfigError);
}

TEST(FluidC, NodesOutsideLargestComponentWarn) {
  std::vector<Edge> edges{{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}};
  const auto g = InteractionGraph::from_edges(7, edges);
  const auto r = fluidc(g, 2, 0);
  EXPECT_EQ(r.partition.num_nodes(), 7u);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(PartitionCsv, RoundTripAndErrors) {
  const auto g = oracle::clique_pair(3, true);
  const auto p = from_ints({0, 0, 0, 1, 1, 1});
  std::ostringstream out;
  write_partition_csv(out, g, p);
  std::istringstream in(out.str());
  EXPECT_EQ(parse_partition_csv(in, g, "x").assignment(), p.assignment());

  std::istringstream missing("user,community\n0,0\n");
  EXPECT_THROW(parse_partition_csv(missing, g, "x"), DataError);
  std::istringstream header("id,c\n");
  EXPECT_THROW(parse_partition_csv(header, g, "x"), DataError);
}
