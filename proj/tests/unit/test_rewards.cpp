#include <gtest/gtest.h>

#include <random>

#include "mmzero/rewards.hpp"
#include "support/test_data.hpp"

using namespace mmzero;

namespace {

std::vector<Vote> votes(const nlohmann::json& j) {
  std::vector<Vote> out;
  for (const auto& x : j) out.push_back(x.is_null() ? Vote{} : Vote{normalize(x.get<std::string>())});
  return out;
}

ImageEvidence evidence(bool ok, const nlohmann::json& easy, const nlohmann::json& hard) {
  ImageEvidence e;
  e.status = ok ? RenderStatus::ok : RenderStatus::render_error;
  if (ok) {
    e.easy_votes = votes(easy);
    e.hard_votes = votes(hard);
  }
  return e;
}

Proposal valid_proposal(std::string easy_answer = "5") {
  Proposal p;
  p.caption = "c";
  p.easy_question = "e";
  p.easy_answer = std::move(easy_answer);
  p.hard_question = "h";
  return p;
}

}  // namespace

TEST(Difficulty, GridExact) {
  for (int i = 0; i <= 1000; ++i) {
    const double c = i / 1000.0;
    EXPECT_NEAR(difficulty_from_consistency(c), std::min(c, 1 - c), 1e-12);
    EXPECT_NEAR(difficulty_from_consistency(c), difficulty_from_consistency(1 - c), 1e-12);
  }
  EXPECT_EQ(difficulty_from_consistency(0.5), 0.5);
}

TEST(Difficulty, MatchesOracle) {
  const auto oracle_json = testkit::oracle("rewards_grpo");
  for (const auto& d : oracle_json.at("difficulty")) {
    EXPECT_NEAR(difficulty(evidence(true, nlohmann::json::array({"x"}), d.at("hard_votes"))), d.at("value").get<double>(),
                1e-12);
  }
}

TEST(Solvability, Examples) {
  const auto e = evidence(true, {"3", "3", "4", nullptr, "3.0"}, {"1"});
  EXPECT_DOUBLE_EQ(solvability(e, "3"), 0.6);
  EXPECT_DOUBLE_EQ(solvability(evidence(true, {"1", "1", "1", "1", "1"}, {"1"}), "1"), 1.0);
  EXPECT_DOUBLE_EQ(solvability(evidence(true, {"2", "2"}, {"1"}), "1"), 0.0);
  EXPECT_THROW(solvability(evidence(false, {}, {}), "1"), NotRenderedError);
  EXPECT_THROW(difficulty(evidence(false, {}, {})), NotRenderedError);
}

TEST(EasyHardPenalty, Examples) {
  const RewardConfig cfg;
  EXPECT_EQ(easy_hard_penalty(std::vector<double>{0.2, 0.3}, cfg), 0.0);
  EXPECT_DOUBLE_EQ(easy_hard_penalty(std::vector<double>{0.1, 0.1}, cfg), -0.3);
  EXPECT_DOUBLE_EQ(easy_hard_penalty(std::vector<double>{}, cfg), -0.3);
  EXPECT_EQ(easy_hard_penalty(std::vector<double>{0.15}, cfg), 0.0);
  EXPECT_DOUBLE_EQ(easy_hard_penalty(std::vector<double>{0.1499999}, cfg), -0.3);
}

TEST(ContentTypePenalty, MatchesOracle) {
  const RewardConfig cfg;
  EXPECT_DOUBLE_EQ(content_type_penalty(1.0, cfg), -0.15);
  EXPECT_DOUBLE_EQ(content_type_penalty(0.75, cfg), -0.075);
  EXPECT_EQ(content_type_penalty(0.5, cfg), 0.0);
  const auto oracle_json = testkit::oracle("rewards_grpo");
  for (const auto& d : oracle_json.at("content_type")) {
    EXPECT_NEAR(content_type_penalty(d.at("f_t").get<double>(), cfg), d.at("value").get<double>(), 1e-12);
  }
}

TEST(DiversityAdjustment, MatchesOracleAndClips) {
  const RewardConfig cfg;
  const auto oracle_json = testkit::oracle("rewards_grpo");
  for (const auto& d : oracle_json.at("diversity")) {
    EXPECT_NEAR(diversity_adjustment(d.at("s_cap"), d.at("s_eq"), d.at("s_hq"), d.at("m").get<std::size_t>(), cfg),
                d.at("value").get<double>(), 1e-12);
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 10000; ++i) {
    const std::size_t m = 1 + rng() % 30;
    const double lo = 1.0 / static_cast<double>(m);
    const double v = diversity_adjustment(lo + (1 - lo) * u(rng), lo + (1 - lo) * u(rng), lo + (1 - lo) * u(rng), m, cfg);
    ASSERT_GE(v, -0.5);
    ASSERT_LE(v, 0.0);
  }
  // Clip is symmetric when raw goes negative (shares below 1/M cannot occur in a batch).
  EXPECT_DOUBLE_EQ(diversity_adjustment(0, 0, 0, 100, cfg), 0.5);
  EXPECT_DOUBLE_EQ(diversity_adjustment(1, 1, 1, 4, cfg), -0.5);
}

TEST(ProposerReward, MatchesOracle) {
  const RewardConfig cfg;
  const auto oracle_json = testkit::oracle("rewards_grpo");
  for (const auto& c : oracle_json.at("proposer")) {
    std::vector<ImageEvidence> ev;
    for (const auto& im : c.at("images")) ev.push_back(evidence(im.at("ok"), im.at("easy"), im.at("hard")));
    const auto& ctx = c.at("context");
    const BatchContext bc{ctx.at("f_t"), ctx.at("s_cap"), ctx.at("s_eq"), ctx.at("s_hq"), ctx.at("m")};
    const auto b = proposer_reward(valid_proposal(c.at("gold")), ev, bc, cfg);
    const auto name = c.at("name").get<std::string>();
    EXPECT_TRUE(b.format_valid);
    EXPECT_NEAR(b.base, c.at("base").get<double>(), 1e-12) << name;
    EXPECT_NEAR(b.r_eh, c.at("r_eh").get<double>(), 1e-12) << name;
    EXPECT_NEAR(b.r_ct, c.at("r_ct").get<double>(), 1e-12) << name;
    EXPECT_NEAR(b.r_div, c.at("r_div").get<double>(), 1e-12) << name;
    EXPECT_NEAR(b.total, c.at("total").get<double>(), 1e-12) << name;
    EXPECT_EQ(b.per_image.size(), ev.size());
  }
}

TEST(ProposerReward, InvalidFormatIsMinusOne) {
  const auto b = proposer_reward(FormatError{FormatError::Kind::missing_tag, "caption"}, {}, {}, RewardConfig{});
  EXPECT_FALSE(b.format_valid);
  EXPECT_EQ(b.total, -1.0);
  EXPECT_EQ(b.base, 0.0);
  EXPECT_EQ(b.r_eh, 0.0);
  EXPECT_TRUE(b.per_image.empty());
}

TEST(ProposerReward, MoreFailuresNeverRaiseBase) {
  const RewardConfig cfg;
  std::vector<ImageEvidence> ev(5, evidence(true, {"5", "5", "5", "4", "4"}, {"1", "1", "2", "2", "3"}));
  double prev = 10;
  for (std::size_t fail = 0; fail <= ev.size(); ++fail) {
    if (fail > 0) ev[fail - 1] = evidence(false, {}, {});
    const auto b = proposer_reward(valid_proposal(), ev, BatchContext{0.2, 0.2, 0.2, 0.2, 5}, cfg);
    EXPECT_LE(b.base, prev);
    prev = b.base;
  }
}

TEST(ProposerReward, InvalidConfig) {
  RewardConfig cfg;
  cfg.phi = 1.0;
  EXPECT_THROW(proposer_reward(valid_proposal(), std::vector<ImageEvidence>{evidence(false, {}, {})},
                               BatchContext{}, cfg),
               ConfigError);
}

TEST(CoderReward, MatchesOracle) {
  const RewardConfig cfg;
  const auto oracle_json = testkit::oracle("rewards_grpo");
  for (const auto& c : oracle_json.at("coder")) {
    ImageEvidence e;
    e.status = parse_render_status(c.at("status").get<std::string>());
    if (e.rendered()) {
      e.easy_votes = votes(c.at("easy"));
      e.hard_votes = votes(c.at("hard"));
    }
    EXPECT_NEAR(coder_reward(e, c.at("gold").get<std::string>(), cfg).total, c.at("value").get<double>(), 1e-12)
        << c.at("status");
  }
}

TEST(RewardConfig, JsonRoundTrip) {
  RewardConfig c;
  c.alpha = 0.8;
  nlohmann::json j = c;
  const auto back = j.get<RewardConfig>();
  EXPECT_EQ(back.alpha, 0.8);
  EXPECT_EQ(back.lambda_div, 0.5);
}
