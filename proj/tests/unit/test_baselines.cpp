#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "echoscore/baselines.hpp"
#include "echoscore/error.hpp"
#include "echoscore/synth.hpp"
#include "oracles.hpp"

using namespace echoscore;

namespace {

Partition halves(std::size_t k) {
  std::vector<std::int64_t> l(2 * k, 0);
  for (std::size_t i = k; i < 2 * k; ++i) l[i] = 1;
  return Partition::from_labels(l);
}

InteractionGraph complete(std::size_t n) {
  std::vector<Edge> edges;
  for (NodeIndex i = 0; i < n; ++i)
    for (NodeIndex j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return InteractionGraph::from_edges(n, edges);
}

}  // namespace

TEST(DeGroot, PathSymmetry) {
  const auto g = InteractionGraph::from_edges(3, std::vector<Edge>{{0, 1}, {1, 2}});
  const auto r = degroot_spread(g, {{0, 1.0}, {2, -1.0}});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.opinions.x[1], 0.0, 1e-12);
  EXPECT_EQ(r.opinions.x[0], 1.0);
  EXPECT_TRUE(r.opinions.seed[0]);
  EXPECT_FALSE(r.opinions.seed[1]);
}

TEST(DeGroot, ConsensusAndStar) {
  std::mt19937_64 rng(3);
  const auto g = oracle::clique_pair(6, true);
  const auto r = degroot_spread(g, {{0, 1.0}, {9, 1.0}});
  for (double v : r.opinions.x) EXPECT_NEAR(v, 1.0, 1e-5);

  const auto star = InteractionGraph::from_edges(5, std::vector<Edge>{{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const auto s = degroot_spread(star, {{0, 1.0}}, 1e-6, 1);
  for (double v : s.opinions.x) EXPECT_EQ(v, 1.0);
}

TEST(DeGroot, ResidualSmallOnConnectedGraphs) {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int t = 0; t < 30; ++t) {
    const auto g = oracle::random_graph(30, 0.15, rng);
    const auto comp = g.connected_components();
    if (*std::max_element(comp.begin(), comp.end()) != 0) continue;
    ++checked;
    const auto r = degroot_spread(g, {{0, 1.0}, {1, -1.0}, {2, 0.3}});
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iterations, 1000u);
    EXPECT_LT(degroot_residual(g, r.opinions), 1e-6);
  }
  EXPECT_GT(checked, 5);
}

TEST(DeGroot, Errors) {
  const auto g = oracle::clique_pair(3, true);
  EXPECT_THROW(degroot_spread(g, {}), DataError);
  EXPECT_THROW(degroot_spread(g, {{0, 2.0}}), DataError);
}

TEST(PolarizationIndex, ClosedForms) {
  EXPECT_DOUBLE_EQ(polarization_index({1, 1, -1, -1}).pi, 1.0);
  EXPECT_DOUBLE_EQ(polarization_index({0.7, 0.7, 0.7}).pi, 0.0);
  EXPECT_DOUBLE_EQ(polarization_index({1, 1, 1, -1}).pi, 0.5);
  const auto banded = polarization_index({0.05, -0.05, 1, -1}, 0.1);
  EXPECT_EQ(banded.classified, 2u);
  EXPECT_DOUBLE_EQ(banded.pi, 1.0);
}

TEST(Rwc, DisconnectedCliquesAbsorbOnTheirSide) {
  const auto g = oracle::clique_pair(10, false);
  RwcConfig cfg;
  cfg.endpoints_per_side = 3;
  const auto r = rwc(g, halves(10), cfg);
  EXPECT_EQ(r.rwc, 1.0);
  EXPECT_EQ(r.p_xx, 1.0);
  EXPECT_EQ(r.p_yy, 1.0);
}

TEST(Rwc, RandomlyHalvedCompleteGraphNearZero) {
  const auto g = complete(40);
  std::mt19937_64 rng(13);
  std::vector<int> labels = oracle::random_labels(40, 2, rng);
  std::vector<std::int64_t> l(labels.begin(), labels.end());
  RwcConfig cfg;
  cfg.seed = 99;
  const auto r = rwc(g, Partition::from_labels(l), cfg);
  EXPECT_LT(std::abs(r.rwc), 0.1);
  EXPECT_NEAR(r.p_xx + r.p_xy, 1.0, 1e-12);
}

TEST(Rwc, Barbell) {
  const auto g = oracle::clique_pair(10, true);
  RwcConfig cfg;
  cfg.endpoints_per_side = 3;
  EXPECT_GT(rwc(g, halves(10), cfg).rwc, 0.6);
}

TEST(Rwc, DeterministicAndValidated) {
  const auto g = oracle::clique_pair(10, true);
  RwcConfig cfg;
  cfg.endpoints_per_side = 2;
  cfg.seed = 4;
  EXPECT_EQ(rwc(g, halves(10), cfg).rwc, rwc(g, halves(10), cfg).rwc);
  cfg.walks_per_side = 10;
  EXPECT_THROW(cfg.validate(), ConfigError);
  RwcConfig whole;  // default endpoint count covers each 10-node side
  EXPECT_THROW(rwc(g, halves(10), whole), DataError);
}

TEST(Rwc, UnreachableStartsExcluded) {
  // Side X: triangle 0-1-2 plus an isolated pair 3-4 that cannot reach it.
  std::vector<Edge> edges{{0, 1}, {1, 2}, {2, 0}, {3, 4}, {5, 6}, {6, 7}, {7, 5}, {2, 5}};
  const auto g = InteractionGraph::from_edges(8, edges);
  const std::vector<std::int64_t> l{0, 0, 0, 0, 0, 1, 1, 1};
  RwcConfig cfg;
  cfg.endpoints_per_side = 1;
  const auto r = rwc(g, Partition::from_labels(l), cfg);
  EXPECT_EQ(r.unreachable_starts, 2u);
  EXPECT_TRUE(std::isfinite(r.rwc));
}

TEST(ErrorMetrics, Definitions) {
  EXPECT_DOUBLE_EQ(mean_absolute_error({0, 0, 0, 0}, {1, -1, 1, -1}), 1.0);
  EXPECT_DOUBLE_EQ(mean_squared_error({0, 0, 0, 0}, {1, -1, 1, -1}), 1.0);
  EXPECT_DOUBLE_EQ(mean_squared_error({0.5}, {-0.5}), 1.0);
  EXPECT_THROW(mean_absolute_error({}, {}), DataError);
}

TEST(DeGrootBaseline, NeighborOfSeedInheritsLabel) {
  const auto g = InteractionGraph::from_edges(2, std::vector<Edge>{{0, 1}});
  const auto r = degroot_ideology_baseline(g, {{0, 1.0}}, {1}, {{1, 1.0}});
  EXPECT_EQ(r.predictions[0], 1.0);
  EXPECT_EQ(r.mae, 0.0);
  EXPECT_THROW(degroot_ideology_baseline(g, {{0, 1.0}}, {0}, {{0, 1.0}}), DataError);
}

TEST(DeGrootBaseline, SmallLabeledSbm) {
  synth::SbmSpec spec;
  spec.n = 200;
  spec.p_in = 0.1;
  spec.p_out = 0.005;
  spec.seed = 2;
  const auto data = synth::generate(spec);
  NodeScores train;
  std::vector<NodeIndex> eval;
  for (const auto& [v, y] : data.labels) {
    if (v % 5 == 0) train[v] = y;
    else eval.push_back(v);
  }
  EXPECT_LT(degroot_ideology_baseline(data.graph, train, eval, data.labels).mae, 0.3);
}

TEST(LabelsCsv, ParseWarnAndReject) {
  const auto g = oracle::clique_pair(2, true);
  std::istringstream ok("user,score\n0,1\n3,-0.5\nghost,1\n");
  const auto lf = parse_labels_csv(ok, g);
  EXPECT_EQ(lf.scores.size(), 2u);
  EXPECT_EQ(lf.scores.at(3), -0.5);
  EXPECT_EQ(lf.warnings.size(), 1u);

  std::istringstream range("user,score\n0,1.5\n");
  EXPECT_THROW(parse_labels_csv(range, g), ParseError);
  std::istringstream twice("user,score\n0,1\n0,1\n");
  EXPECT_THROW(parse_labels_csv(twice, g), ParseError);

  std::ostringstream out;
  write_labels_csv(out, g, lf.scores);
  std::istringstream back(out.str());
  EXPECT_EQ(parse_labels_csv(back, g).scores, lf.scores);
}
