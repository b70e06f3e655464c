#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "echoscore/ecs.hpp"
#include "echoscore/error.hpp"
#include "oracles.hpp"

using namespace echoscore;

namespace {

Partition from_ints(const std::vector<int>& labels) {
  std::vector<std::int64_t> l(labels.begin(), labels.end());
  return Partition::from_labels(l);
}

Eigen::MatrixXd column(std::initializer_list<double> v) {
  Eigen::MatrixXd z(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) z(i++, 0) = x;
  return z;
}

// Labels 0..m-1 in first-appearance order so they match Partition ids.
std::vector<int> canonical(std::vector<int> labels) {
  std::vector<int> map(labels.size() + 1, -1);
  int next = 0;
  for (auto& l : labels) {
    if (map[static_cast<std::size_t>(l)] < 0) map[static_cast<std::size_t>(l)] = next++;
    l = map[static_cast<std::size_t>(l)];
  }
  return labels;
}

}  // namespace

TEST(Distance, NormalizedHalfValues) {
  Eigen::MatrixXd z(4, 2);
  z << 3, 0, 1, 0, -2, 0, 0, 5;
  EXPECT_DOUBLE_EQ(pair_distance(z, 0, 1), 0.0);
  EXPECT_DOUBLE_EQ(pair_distance(z, 0, 2), 1.0);
  EXPECT_NEAR(pair_distance(z, 0, 3), std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(pair_distance(z, 0, 2, DistanceMode::kRaw), 5.0);
}

TEST(Cohesion, DivisorIsCommunitySize) {
  const EmbeddingSpace space(column({0.0, 0.4, 5.0}), DistanceMode::kRaw);
  const std::vector<NodeIndex> pair{0, 1}, single{2};
  EXPECT_DOUBLE_EQ(cohesion(0, pair, space), 0.2);
  EXPECT_DOUBLE_EQ(cohesion(2, single, space), 0.0);
  EXPECT_THROW(cohesion(2, pair, space), DataError);
}

TEST(Separation, OneCandidateAndMinimum) {
  const EmbeddingSpace two(column({0.0, 0.6, 1.0}), DistanceMode::kRaw);
  const auto s2 = separation(0, from_ints({0, 1, 1}), two);
  EXPECT_DOUBLE_EQ(s2.value, 0.8);
  const EmbeddingSpace three(column({0.0, 0.9, 0.3}), DistanceMode::kRaw);
  const auto s3 = separation(0, from_ints({0, 1, 2}), three);
  EXPECT_DOUBLE_EQ(s3.value, 0.3);
  EXPECT_EQ(s3.nearest, 2u);
  EXPECT_THROW(separation(0, from_ints({0, 0, 0}), three), DataError);
}

TEST(Separation, MatchesExhaustiveLoop) {
  std::mt19937_64 rng(41);
  const auto labels = oracle::random_labels(30, 4, rng);
  const Eigen::MatrixXd z = oracle::random_matrix(30, 5, rng);
  const auto omega = from_ints(labels);
  const auto want = oracle::direct_ecs(canonical(labels), z, oracle::Distance::kNormalizedHalf);
  const EmbeddingSpace space(z, DistanceMode::kNormalizedHalf);
  for (NodeIndex u = 0; u < 30; ++u) {
    EXPECT_NEAR(separation(u, omega, space).value, want.delta[u], 1e-12);
    EXPECT_NEAR(cohesion(u, omega.members()[omega.community_of(u)], space), want.lambda[u], 1e-12);
  }
}

TEST(EcsTerm, Conventions) {
  EXPECT_DOUBLE_EQ(ecs_term(0.0, 0.7), 1.0);
  EXPECT_DOUBLE_EQ(ecs_term(0.4, 0.4), 0.5);
  EXPECT_DOUBLE_EQ(ecs_term(0.0, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(ecs_term(0.7, 0.0), 0.0);
}

TEST(Ecs, OneDimensionalExample) {
  const Eigen::MatrixXd z = column({0.0, 0.2, 1.0, 1.2});
  const auto report = ecs(from_ints({0, 0, 1, 1}), z, {.mode = DistanceMode::kRaw});
  const auto want = oracle::direct_ecs({0, 0, 1, 1}, z, oracle::Distance::kRaw);
  ASSERT_EQ(report.users.size(), 4u);
  for (std::size_t u = 0; u < 4; ++u) EXPECT_NEAR(report.users[u].term, want.term[u], 1e-15);
  // 2.1/2.2 and 1.7/1.8
  EXPECT_NEAR(report.users[0].term, 0.9545, 5e-5);
  EXPECT_NEAR(report.users[1].term, 0.9444, 5e-5);
  EXPECT_NEAR(report.users[2].term, 0.9444, 5e-5);
  EXPECT_NEAR(report.users[3].term, 0.9545, 5e-5);
  EXPECT_NEAR(report.communities[0].ecs_star, 0.9495, 5e-5);
  EXPECT_NEAR(report.ecs, 0.9495, 5e-5);
  EXPECT_NEAR(ecs_star(0, from_ints({0, 0, 1, 1}), EmbeddingSpace(z, DistanceMode::kRaw)), want.community_star[0], 1e-15);
}

TEST(Ecs, TrivialValues) {
  // Identical points inside each community, communities apart.
  Eigen::MatrixXd z(6, 2);
  z << 1, 0, 1, 0, -1, 0, -1, 0, 0, 1, 0, 1;
  EXPECT_EQ(ecs(from_ints({0, 0, 1, 1, 2, 2}), z).ecs, 1.0);

  const auto same = ecs(from_ints({0, 0, 1, 1}), Eigen::MatrixXd::Ones(4, 3));
  EXPECT_EQ(same.ecs, 0.5);
  EXPECT_EQ(same.degenerate_users, 4u);
  for (const auto& u : same.users) EXPECT_EQ(u.term, 0.5);

  EXPECT_THROW(ecs(from_ints({0, 0, 0}), Eigen::MatrixXd::Ones(3, 2)), DataError);
}

TEST(Ecs, OnlyDegenerateUsersGetHalf) {
  // A and B sit on one point, C elsewhere: A and B users have lambda = delta = 0.
  const Eigen::MatrixXd z = column({0.0, 0.0, 0.0, 0.0, 3.0, 3.0});
  const auto report = ecs(from_ints({0, 0, 1, 1, 2, 2}), z, {.mode = DistanceMode::kRaw});
  EXPECT_EQ(report.degenerate_users, 4u);
  for (std::size_t u = 0; u < 4; ++u) {
    EXPECT_TRUE(report.users[u].degenerate);
    EXPECT_EQ(report.users[u].term, 0.5);
  }
  for (std::size_t u = 4; u < 6; ++u) {
    EXPECT_FALSE(report.users[u].degenerate);
    EXPECT_EQ(report.users[u].term, 1.0);
  }
}

TEST(Ecs, SilhouetteAndDirectOracleProperty) {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + rng() % 199;
    const std::size_t d = 1 + rng() % 8;
    const int m = 2 + static_cast<int>(rng() % 4);
    if (n < static_cast<std::size_t>(m)) continue;
    const auto labels = canonical(oracle::random_labels(n, m, rng));
    const Eigen::MatrixXd z = oracle::random_matrix(n, d, rng, 0.1 + static_cast<double>(rng() % 100));
    for (auto [mode, omode] : {std::pair{DistanceMode::kRaw, oracle::Distance::kRaw},
                               std::pair{DistanceMode::kNormalizedHalf, oracle::Distance::kNormalizedHalf}}) {
      const auto report = ecs(from_ints(labels), z, {.mode = mode});
      const auto want = oracle::direct_ecs(labels, z, omode);
      EXPECT_NEAR(report.ecs, want.ecs, 1e-12);
      EXPECT_GE(report.ecs, 0.0);
      EXPECT_LE(report.ecs, 1.0);
      for (std::size_t u = 0; u < n; ++u) {
        EXPECT_NEAR(report.users[u].term, oracle::silhouette_shifted(labels, z, u, omode), 1e-12);
        EXPECT_GE(report.users[u].term, 0.0);
        EXPECT_LE(report.users[u].term, 1.0);
      }
    }
  }
}

TEST(Ecs, ScaleInvariantInRawMode) {
  std::mt19937_64 rng(7);
  const auto labels = canonical(oracle::random_labels(60, 3, rng));
  const Eigen::MatrixXd z = oracle::random_matrix(60, 4, rng);
  const double base = ecs(from_ints(labels), z, {.mode = DistanceMode::kRaw}).ecs;
  for (double c : {1e-3, 1.0, 1e3}) {
    EXPECT_NEAR(ecs(from_ints(labels), c * z, {.mode = DistanceMode::kRaw}).ecs, base, 1e-9);
  }
}

TEST(Ecs, SizeWeightedVariant) {
  Eigen::MatrixXd z = column({0.0, 0.2, 1.0, 1.2, 1.1});
  const auto report = ecs(from_ints({0, 0, 1, 1, 1}), z, {.mode = DistanceMode::kRaw, .size_weighted = true});
  ASSERT_TRUE(report.ecs_size_weighted.has_value());
  const double want = (2 * report.communities[0].ecs_star + 3 * report.communities[1].ecs_star) / 5.0;
  EXPECT_NEAR(*report.ecs_size_weighted, want, 1e-15);
  EXPECT_FALSE(ecs(from_ints({0, 0, 1, 1, 1}), z).ecs_size_weighted.has_value());
}

TEST(Ecs, ZeroRowsCountedAndWarned) {
  Eigen::MatrixXd z(4, 2);
  z << 0, 0, 1, 0, 0, 1, 0, 2;
  const auto report = ecs(from_ints({0, 0, 1, 1}), z);
  EXPECT_EQ(report.zero_norm_rows, 1u);
  EXPECT_FALSE(report.warnings.empty());
}

TEST(Ecs, UserCsvSchema) {
  const auto g = oracle::clique_pair(2, true);
  const Eigen::MatrixXd z = column({0.0, 0.2, 1.0, 1.2});
  const auto omega = from_ints({0, 0, 1, 1});
  std::ostringstream out;
  write_user_scores_csv(out, g, omega, ecs(omega, z, {.mode = DistanceMode::kRaw}));
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "user,community,lambda,delta,term");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}
