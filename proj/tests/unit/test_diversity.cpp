#include <gtest/gtest.h>

#include <random>

#include "mmzero/diversity.hpp"
#include "support/test_data.hpp"

using namespace mmzero;

TEST(Bleu, MatchesOracle) {
  const auto j = testkit::oracle("text_diversity");
  for (const auto& p : j.at("bleu")) {
    const auto c = p.at("candidate").get<std::string>();
    const auto r = p.at("reference").get<std::string>();
    EXPECT_NEAR(bleu(c, r), p.at("bleu").get<double>(), 1e-12) << c << " | " << r;
  }
}

TEST(Bleu, Trivial) {
  EXPECT_DOUBLE_EQ(bleu("the red chart", "the red chart"), 1.0);
  EXPECT_DOUBLE_EQ(bleu("aaa bbb", "ccc ddd"), 0.0);
  EXPECT_DOUBLE_EQ(bleu("", "x"), 0.0);
}

TEST(DistanceMatrix, MatchesOracle) {
  const auto j = testkit::oracle("text_diversity");
  for (const auto& b : j.at("batches")) {
    const auto texts = b.at("texts").get<std::vector<std::string>>();
    const auto d = distance_matrix(texts);
    const auto& expect = b.at("distances");
    ASSERT_EQ(d.size(), texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
      EXPECT_EQ(d(i, i), 0.0);
      for (std::size_t k = 0; k < texts.size(); ++k) {
        EXPECT_NEAR(d(i, k), expect[i][k].get<double>(), 1e-12);
        EXPECT_EQ(d(i, k), d(k, i));
      }
    }
  }
}

TEST(DistanceMatrix, DuplicatePair) {
  const std::vector<std::string> t{"a bar chart of sales", "a bar chart of sales", "a map of rivers"};
  const auto d = distance_matrix(t);
  EXPECT_EQ(d(0, 1), 0.0);
  EXPECT_GT(d(0, 2), 0.0);
  EXPECT_GT(d(1, 2), 0.0);
}

// Brute-force oracle: every tie-breaking merge order gives the recorded set.
TEST(Agglomerate, MatchesBruteForceOracle) {
  const auto j = testkit::oracle("text_diversity");
  for (const auto& b : j.at("batches")) {
    const auto texts = b.at("texts").get<std::vector<std::string>>();
    const auto c = agglomerate(distance_matrix(texts), b.at("threshold").get<double>());
    const auto allowed = b.at("assignments").get<std::vector<std::vector<std::size_t>>>();
    EXPECT_NE(std::find(allowed.begin(), allowed.end(), c.assignment), allowed.end()) << texts.front();
    EXPECT_EQ(c.k, *std::max_element(c.assignment.begin(), c.assignment.end()) + 1);
  }
}

TEST(Agglomerate, TieGoesToSmallestPair) {
  DistanceMatrix d(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = i + 1; k < 4; ++k) d.set(i, k, 0.9);
  d.set(0, 1, 0.3);
  d.set(2, 3, 0.3);
  const auto c = agglomerate(d, 0.5);
  EXPECT_EQ(c.assignment, (std::vector<std::size_t>{0, 0, 1, 1}));
}

TEST(Agglomerate, ThresholdInclusive) {
  DistanceMatrix d(2);
  d.set(0, 1, 0.7);
  EXPECT_EQ(agglomerate(d, 0.7).k, 1u);
  d.set(0, 1, 0.7000001);
  EXPECT_EQ(agglomerate(d, 0.7).k, 2u);
}

TEST(ClusterShares, Example) {
  Clustering c{{0, 1, 0, 1, 0}, 2};
  EXPECT_EQ(cluster_shares(c), (std::vector<double>{0.6, 0.4, 0.6, 0.4, 0.6}));
}

TEST(ClusterShares, RandomProperties) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 20;
    const std::size_t k = 1 + rng() % n;
    Clustering c;
    c.k = k;
    for (std::size_t i = 0; i < n; ++i) c.assignment.push_back(i < k ? i : rng() % k);
    const auto s = cluster_shares(c);
    ASSERT_EQ(s.size(), n);
    double per_cluster_sum = 0;
    std::vector<bool> seen(k, false);
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_GE(s[i], 1.0 / static_cast<double>(n) - 1e-15);
      ASSERT_LE(s[i], 1.0);
      if (!seen[c.assignment[i]]) {
        seen[c.assignment[i]] = true;
        per_cluster_sum += s[i];
      }
    }
    ASSERT_NEAR(per_cluster_sum, 1.0, 1e-12);
    double total = 0;
    for (double x : s) total += 1.0 / (x * static_cast<double>(n));
    ASSERT_NEAR(total, static_cast<double>(k), 1e-9);
  }
}

TEST(DistanceMatrix, Csv) {
  DistanceMatrix d(2);
  d.set(0, 1, 0.25);
  const auto csv = distance_matrix_csv(d);
  EXPECT_NE(csv.find("0.25"), std::string::npos);
}
