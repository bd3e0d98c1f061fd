#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "mmzero/grpo.hpp"
#include "mmzero/toy_policy.hpp"
#include "support/test_data.hpp"

using namespace mmzero;

TEST(GroupAdvantages, MatchesOracle) {
  const GrpoConfig cfg;
  const auto oracle_json = testkit::oracle("rewards_grpo");
  for (const auto& g : oracle_json.at("advantages")) {
    const auto r = g.at("rewards").get<std::vector<double>>();
    const auto a = group_advantages(r, cfg);
    const auto expect = g.at("advantages").get<std::vector<double>>();
    ASSERT_EQ(a.size(), expect.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], expect[i], 1e-12);
  }
}

TEST(GroupAdvantages, Examples) {
  const GrpoConfig cfg;
  EXPECT_EQ(group_advantages(std::vector<double>{1, 1, 1, 1}, cfg), (std::vector<double>{0, 0, 0, 0}));
  const auto a = group_advantages(std::vector<double>{1, 0}, cfg);
  EXPECT_NEAR(a[0], 1.0, 1e-5);
  EXPECT_NEAR(a[1], -1.0, 1e-5);
  EXPECT_EQ(group_advantages(std::vector<double>{3.5}, cfg), std::vector<double>{0});
}

TEST(GroupAdvantages, RandomGroups) {
  const GrpoConfig cfg;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1.5);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 2 + rng() % 15;
    std::vector<double> r(n);
    for (auto& x : r) x = (rng() % 4 == 0) ? std::round(u(rng)) : u(rng);
    const auto a = group_advantages(r, cfg);
    const double mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
    ASSERT_NEAR(mean, 0.0, 1e-9);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        if (r[i] < r[k]) {
          ASSERT_LT(a[i], a[k]);
        }
        if (r[i] == r[k]) {
          ASSERT_EQ(a[i], a[k]);
        }
      }
    // Shift invariance.
    std::vector<double> shifted(r);
    for (auto& x : shifted) x += 0.25;
    const auto b = group_advantages(shifted, cfg);
    for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(a[i], b[i], 1e-9);
    // Constant group.
    const auto z = group_advantages(std::vector<double>(n, r[0]), cfg);
    for (double x : z) ASSERT_EQ(x, 0.0);
  }
}

TEST(GrpoLoss, MatchesOracle) {
  const GrpoConfig base;
  const auto oracle_json = testkit::oracle("rewards_grpo");
  for (const auto& c : oracle_json.at("loss")) {
    RolloutGroup g{"p", c.at("rewards").get<std::vector<double>>(), c.at("old").get<std::vector<double>>()};
    GrpoConfig cfg = base;
    cfg.kl_beta = c.at("beta").get<double>();
    const auto kl = c.at("kl").get<std::vector<double>>();
    EXPECT_NEAR(grpo_loss(g, c.at("new").get<std::vector<double>>(), kl, cfg), c.at("loss").get<double>(), 1e-12);
  }
}

TEST(GrpoLoss, ClipBranch) {
  // Rewards {1, 0} give advantages close to {+1, -1}; response 0 has ratio 2.
  const GrpoConfig cfg;
  RolloutGroup g{"p", {1, 0}, {0, 0}};
  const auto a = group_advantages(g.rewards, cfg);
  const double loss = grpo_loss(g, std::vector<double>{std::log(2.0), 0.0}, {}, cfg);
  EXPECT_NEAR(loss, -(1.2 * a[0] + 1.0 * a[1]) / 2, 1e-12);
  const auto grad = grpo_loss_logprob_grad(g, std::vector<double>{std::log(2.0), 0.0}, cfg);
  EXPECT_EQ(grad[0], 0.0);
  EXPECT_NEAR(grad[1], -a[1] / 2, 1e-12);
}

TEST(GrpoLoss, PermutationInvariant) {
  const GrpoConfig cfg;
  RolloutGroup g{"p", {0.1, 0.9, 0.5}, {-1, -2, -3}};
  RolloutGroup h{"p", {0.5, 0.1, 0.9}, {-3, -1, -2}};
  EXPECT_NEAR(grpo_loss(g, std::vector<double>{-0.9, -2.3, -2.8}, {}, cfg),
              grpo_loss(h, std::vector<double>{-2.8, -0.9, -2.3}, {}, cfg), 1e-14);
}

TEST(GrpoLoss, RejectsHugeRatio) {
  const GrpoConfig cfg;
  RolloutGroup g{"p", {1, 0}, {0, 0}};
  EXPECT_THROW(grpo_loss(g, std::vector<double>{60.0, 0.0}, {}, cfg), NonFiniteError);
  EXPECT_THROW(grpo_loss(g, std::vector<double>{0.0}, {}, cfg), UsageError);
}

TEST(GrpoConfig, Validate) {
  GrpoConfig c;
  c.clip_eps = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = GrpoConfig{};
  c.eps_norm = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(ToyPolicy, GradientCheckBothRegimes) {
  std::size_t active = 0, inactive = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = toy_policy_check(seed);
    EXPECT_LT(r.max_rel_grad_error, 1e-4) << seed;
    active += r.clip_active;
    inactive += r.clip_inactive;
  }
  EXPECT_GT(active, 0u);
  EXPECT_GT(inactive, 0u);
}

// At theta = theta_old the surrogate gradient is the REINFORCE-with-baseline
// gradient -(1/N) sum A_i grad log pi(y_i).
TEST(ToyPolicy, MatchesReinforceAtBehaviourPolicy) {
  std::mt19937_64 rng(5);
  toy::SoftmaxPolicy pi(5, 3);
  std::normal_distribution<double> nd(0, 1);
  for (auto& x : pi.logits()) x = nd(rng);
  const GrpoConfig cfg;
  std::vector<toy::Sequence> ys;
  RolloutGroup g{"toy", {}, {}};
  for (int i = 0; i < 6; ++i) {
    ys.push_back(pi.sample(rng));
    g.rewards.push_back(static_cast<double>(ys.back()[0] % 3));
    g.logprobs_old.push_back(pi.log_prob(ys.back()));
  }
  const auto dl = grpo_loss_logprob_grad(g, g.logprobs_old, cfg);
  const auto adv = group_advantages(g.rewards, cfg);
  std::vector<double> surrogate(pi.parameter_count(), 0.0), reinforce(pi.parameter_count(), 0.0);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const auto gl = pi.grad_log_prob(ys[i]);
    for (std::size_t p = 0; p < gl.size(); ++p) {
      surrogate[p] += dl[i] * gl[p];
      reinforce[p] -= adv[i] * gl[p] / static_cast<double>(ys.size());
    }
  }
  for (std::size_t p = 0; p < surrogate.size(); ++p) EXPECT_NEAR(surrogate[p], reinforce[p], 1e-12);
}

TEST(ToyPolicy, ConstantRewardsGiveZeroGradient) {
  const GrpoConfig cfg;
  RolloutGroup g{"c", {0.7, 0.7, 0.7}, {-1, -2, -1.5}};
  for (double d : grpo_loss_logprob_grad(g, std::vector<double>{-0.9, -2.2, -1.5}, cfg)) EXPECT_EQ(d, 0.0);
}
