#include <gtest/gtest.h>

#include <functional>
#include <map>

#include "mmzero/answer.hpp"
#include "mmzero/rewards.hpp"

using namespace mmzero;

namespace {

Vote v(const char* s) { return normalize(s); }

}  // namespace

TEST(ExtractBoxed, Examples) {
  EXPECT_EQ(extract_boxed("<think>...</think> \\boxed{42}")->raw, "42");
  EXPECT_FALSE(extract_boxed("no box here").has_value());
  EXPECT_EQ(extract_boxed("\\boxed{Q1} then \\boxed{Q2}")->raw, "Q2");
  EXPECT_EQ(extract_boxed("\\boxed{\\frac{1}{2}}")->raw, "\\frac{1}{2}");
  EXPECT_FALSE(extract_boxed("\\boxed{1} and \\boxed{2").has_value());
  EXPECT_FALSE(extract_boxed("\\boxed{  }").has_value());
}

TEST(Normalize, Examples) {
  const auto a = normalize("14.0");
  EXPECT_EQ(a.normalized, "14.0");
  ASSERT_TRUE(a.numeric);
  EXPECT_EQ(*a.numeric, 14.0);
  EXPECT_TRUE(answers_equal(a, normalize("14")));
  EXPECT_EQ(normalize("  Blue.").normalized, "blue");
  EXPECT_TRUE(answers_equal(normalize("A."), normalize("A")));
  EXPECT_EQ(normalize("\"New   York\"").normalized, "new york");
  EXPECT_EQ(*normalize("$1,234.5$").numeric, 1234.5);
  EXPECT_EQ(*normalize("-7").numeric, -7.0);
  EXPECT_EQ(*normalize("+0.25").numeric, 0.25);
  EXPECT_EQ(*normalize("45%").numeric, 45.0);
  EXPECT_FALSE(normalize("1,23").numeric.has_value());
  EXPECT_FALSE(normalize("12 apples").numeric.has_value());
}

TEST(AnswersEqual, Examples) {
  EXPECT_TRUE(answers_equal(normalize("0.5"), normalize("0.50")));
  EXPECT_TRUE(answers_equal(normalize("q1"), normalize("Q1")));
  EXPECT_FALSE(answers_equal(normalize("blue"), normalize("red")));
  EXPECT_TRUE(answers_equal(normalize("1000000000"), normalize("1000000000.5")));
  EXPECT_FALSE(answers_equal(normalize("1"), normalize("1.0001")));
}

TEST(AnswersEqual, ReflexiveAndSymmetric) {
  const char* xs[] = {"1", "1.0", "a", "A.", "-3", "3", "1,000", "1000", "x y", "X  Y"};
  for (const char* a : xs) {
    EXPECT_TRUE(answers_equal(normalize(a), normalize(a)));
    for (const char* b : xs) EXPECT_EQ(answers_equal(normalize(a), normalize(b)), answers_equal(normalize(b), normalize(a)));
  }
}

TEST(MajorityVote, Examples) {
  const std::vector<Vote> a{v("7"), v("7"), v("9"), v("7"), v("9")};
  auto r = majority_vote(a);
  EXPECT_EQ(r.silver->raw, "7");
  EXPECT_DOUBLE_EQ(r.consistency, 0.6);
  EXPECT_EQ(r.total, 5u);

  r = majority_vote(std::vector<Vote>{v("x"), v("x"), v("x")});
  EXPECT_EQ(r.silver->raw, "x");
  EXPECT_DOUBLE_EQ(r.consistency, 1.0);

  r = majority_vote(std::vector<Vote>{v("a"), v("b")});
  EXPECT_EQ(r.silver->raw, "a");
  EXPECT_DOUBLE_EQ(r.consistency, 0.5);

  r = majority_vote(std::vector<Vote>{std::nullopt, std::nullopt});
  EXPECT_TRUE(r.all_failed());
  EXPECT_DOUBLE_EQ(r.consistency, 0.0);

  // Numeric classes merge: 14 and 14.0 vote together.
  r = majority_vote(std::vector<Vote>{v("3"), v("14"), v("14.0"), std::nullopt});
  EXPECT_EQ(r.silver->raw, "14");
  EXPECT_DOUBLE_EQ(r.consistency, 0.5);

  EXPECT_THROW(majority_vote(std::vector<Vote>{}), UsageError);
}

// Every sequence of length 1..6 over {a, b, c, no-answer} against a direct tally.
TEST(MajorityVote, ExhaustiveSmallAlphabet) {
  const char* alphabet[] = {"a", "b", "c"};
  std::size_t checked = 0;
  for (int len = 1; len <= 6; ++len) {
    int combos = 1;
    for (int i = 0; i < len; ++i) combos *= 4;
    for (int code = 0; code < combos; ++code) {
      std::vector<int> seq;
      std::vector<Vote> votes;
      for (int i = 0, c = code; i < len; ++i, c /= 4) {
        seq.push_back(c % 4);
        votes.push_back(c % 4 == 3 ? Vote{} : v(alphabet[c % 4]));
      }
      int counts[3] = {0, 0, 0};
      int first_seen[3] = {99, 99, 99};
      for (int i = 0; i < len; ++i) {
        if (seq[i] == 3) continue;
        ++counts[seq[i]];
        first_seen[seq[i]] = std::min(first_seen[seq[i]], i);
      }
      int best = -1;
      for (int s = 0; s < 3; ++s) {
        if (counts[s] == 0) continue;
        if (best < 0 || counts[s] > counts[best] || (counts[s] == counts[best] && first_seen[s] < first_seen[best])) best = s;
      }
      const auto r = majority_vote(votes);
      ASSERT_EQ(r.total, static_cast<std::size_t>(len));
      if (best < 0) {
        ASSERT_TRUE(r.all_failed());
        ASSERT_EQ(r.consistency, 0.0);
      } else {
        ASSERT_EQ(r.silver->normalized, alphabet[best]);
        ASSERT_DOUBLE_EQ(r.consistency, static_cast<double>(counts[best]) / len);
      }
      ++checked;
    }
  }
  EXPECT_EQ(checked, 4u + 16 + 64 + 256 + 1024 + 4096);
}

TEST(SolverFormat, Examples) {
  EXPECT_TRUE(check_solver_format("<think>steps</think>\\boxed{3}"));
  EXPECT_TRUE(check_solver_format("  \n<think>steps</think>\n\\boxed{3}  \n"));
  EXPECT_FALSE(check_solver_format("\\boxed{3}"));
  EXPECT_FALSE(check_solver_format("<think></think>\\boxed{3}"));
  EXPECT_FALSE(check_solver_format("<think>a</think><think>b</think>\\boxed{3}"));
  EXPECT_FALSE(check_solver_format("\\boxed{3}<think>late</think>"));
}

TEST(SolverReward, FourValues) {
  const RewardConfig cfg;
  const auto silver = normalize("12");
  EXPECT_DOUBLE_EQ(solver_reward("<think>x</think>\\boxed{12}", silver, cfg), 1.0);
  EXPECT_DOUBLE_EQ(solver_reward("\\boxed{12.0}", silver, cfg), 0.9);
  EXPECT_DOUBLE_EQ(solver_reward("<think>x</think>\\boxed{13}", silver, cfg), 0.1);
  EXPECT_DOUBLE_EQ(solver_reward("twelve", silver, cfg), 0.0);
}
