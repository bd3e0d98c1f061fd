#include <gtest/gtest.h>

#include "mmzero/prompt_template.hpp"
#include "mmzero/proposal.hpp"
#include "support/test_data.hpp"

using namespace mmzero;

namespace {

const char* kWellFormed = R"(Sure, here it is.
<content_type>data_chart</content_type>
<caption>  A bar chart of monthly sales in 2021 </caption>
<easy_question>What is the title?</easy_question>
<easy_answer>Sales 2021</easy_answer>
<hard_question>Which month had the largest increase?</hard_question>
<hard_answer>March</hard_answer>
Thanks!)";

FormatError::Kind error_kind(const ProposalParse& p) { return std::get<FormatError>(p).kind; }

}  // namespace

TEST(ParseProposal, WellFormedWithProse) {
  const auto p = parse_proposal(kWellFormed);
  ASSERT_TRUE(std::holds_alternative<Proposal>(p));
  const auto& v = std::get<Proposal>(p);
  EXPECT_EQ(v.content_type, ContentType::data_chart);
  EXPECT_EQ(v.caption, "A bar chart of monthly sales in 2021");
  EXPECT_EQ(v.easy_answer, "Sales 2021");
  EXPECT_EQ(v.hard_answer, "March");
  EXPECT_EQ(v.raw, kWellFormed);
}

TEST(ParseProposal, EmptyIsMissingTag) { EXPECT_EQ(error_kind(parse_proposal("")), FormatError::Kind::missing_tag); }

TEST(ParseProposal, UnknownContentType) {
  std::string s = kWellFormed;
  s.replace(s.find("data_chart"), 10, "chart");
  EXPECT_EQ(error_kind(parse_proposal(s)), FormatError::Kind::bad_content_type);
}

TEST(ParseProposal, ContentTypeIsCaseSensitive) {
  std::string s = kWellFormed;
  s.replace(s.find("data_chart"), 10, "Data_Chart");
  EXPECT_EQ(error_kind(parse_proposal(s)), FormatError::Kind::bad_content_type);
}

TEST(ParseProposal, DuplicateTag) {
  std::string s = std::string(kWellFormed) + "<caption>again</caption>";
  const auto p = parse_proposal(s);
  EXPECT_EQ(error_kind(p), FormatError::Kind::duplicate_tag);
  EXPECT_EQ(std::get<FormatError>(p).tag, "caption");
}

TEST(ParseProposal, EmptyField) {
  std::string s = kWellFormed;
  s.replace(s.find("What is the title?"), 18, "   ");
  EXPECT_EQ(error_kind(parse_proposal(s)), FormatError::Kind::empty_field);
}

TEST(ParseProposal, HardAnswerRequired) {
  std::string s = kWellFormed;
  s.erase(s.find("<hard_answer>"), std::string("<hard_answer>March</hard_answer>").size());
  const auto p = parse_proposal(s);
  EXPECT_EQ(error_kind(p), FormatError::Kind::missing_tag);
  EXPECT_EQ(std::get<FormatError>(p).tag, "hard_answer");
}

TEST(ParseProposal, UppercaseTagIsNotMatched) {
  std::string s = kWellFormed;
  s.replace(s.find("<caption>"), 9, "<CAPTION>");
  s.replace(s.find("</caption>"), 10, "</CAPTION>");
  EXPECT_EQ(error_kind(parse_proposal(s)), FormatError::Kind::missing_tag);
}

TEST(ParseProposal, RoundTripEveryContentType) {
  for (ContentType t : kAllContentTypes) {
    Proposal p;
    p.content_type = t;
    p.caption = "cap";
    p.easy_question = "eq?";
    p.easy_answer = "1";
    p.hard_question = "hq?";
    p.hard_answer = "2";
    const auto back = parse_proposal(serialize_proposal(p));
    ASSERT_TRUE(std::holds_alternative<Proposal>(back)) << to_string(t);
    EXPECT_TRUE(std::get<Proposal>(back).same_fields(p));
    EXPECT_TRUE(proposal_from_json(proposal_to_json(std::get<Proposal>(back))).same_fields(p));
  }
}

TEST(ParseProposal, NeverPartial) {
  // Random tag soup either parses fully or fails.
  const char* tags[] = {"content_type", "caption", "easy_question", "easy_answer", "hard_question", "hard_answer"};
  std::uint64_t x = 12345;
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s;
    for (int k = 0; k < 8; ++k) {
      x = x * 6364136223846793005ULL + 1442695040888963407ULL;
      const auto tag = tags[(x >> 33) % 6];
      const auto body = ((x >> 20) % 4 == 0) ? std::string(" ") : ((x >> 40) % 2 ? "geometry" : "text");
      s += "<" + std::string(tag) + ">" + body + "</" + tag + ">";
    }
    const auto p = parse_proposal(s);
    if (const auto* v = std::get_if<Proposal>(&p)) {
      EXPECT_FALSE(v->caption.empty());
      EXPECT_FALSE(v->easy_question.empty());
      EXPECT_FALSE(v->easy_answer.empty());
      EXPECT_FALSE(v->hard_question.empty());
    }
  }
}

TEST(PromptTemplate, SingleSubstitution) {
  EXPECT_EQ(render_prompt({"t", "Q: {{content}}"}, {{"content", "x"}}), "Q: x");
  EXPECT_EQ(render_prompt({"t", "Q: {{ content | trim }}!"}, {{"content", "  x \n"}}), "Q: x!");
}

TEST(PromptTemplate, NoPlaceholders) {
  EXPECT_EQ(render_prompt({"t", "plain { text }"}, {}), "plain { text }");
}

TEST(PromptTemplate, Unbound) {
  try {
    render_prompt({"t", "{{ a }} {{ b }}"}, {{"a", "1"}});
    FAIL();
  } catch (const UnboundPlaceholder& e) {
    EXPECT_EQ(e.name(), "b");
  }
}

TEST(PromptTemplate, DefaultTemplates) {
  EXPECT_EQ(default_template(Role::proposer).placeholders(), std::vector<std::string>{"content"});
  EXPECT_EQ(default_template(Role::coder).placeholders(), std::vector<std::string>{"content"});
  EXPECT_EQ(default_template(Role::judge).placeholders(),
            (std::vector<std::string>{"question", "gold", "model_answer"}));
  const auto solver = render_prompt(default_template(Role::solver),
                                    {{"question", "How many bars?"}, {"image", std::string(kImageSentinel)}});
  EXPECT_NE(solver.find("<image>"), std::string::npos);
  EXPECT_NE(solver.find("\\boxed{}"), std::string::npos);
  EXPECT_NE(solver.find("How many bars?"), std::string::npos);
  EXPECT_NE(default_template(Role::proposer).body.find("data_chart"), std::string::npos);
}

TEST(PromptTemplate, HashIsStableAndSensitive) {
  PromptTemplate a{"a", "x {{ y }}"};
  PromptTemplate b{"b", "x {{ y }}"};
  PromptTemplate c{"a", "x {{ y }} "};
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), c.hash());
}

TEST(TemplateSet, DirectoryOverridesSomeRoles) {
  const auto dir = testkit::scratch_dir("templates");
  std::ofstream(dir / "coder.tmpl") << "Draw: {{ content | trim }}";
  const auto set = TemplateSet::load(dir);
  EXPECT_EQ(set.get(Role::coder).body, "Draw: {{ content | trim }}");
  EXPECT_EQ(set.get(Role::solver).body, default_template(Role::solver).body);
}

TEST(Roles, ParseAndPrint) {
  for (Role r : {Role::proposer, Role::coder, Role::solver, Role::judge}) EXPECT_EQ(parse_role(to_string(r)), r);
  EXPECT_THROW(parse_role("critic"), ConfigError);
}
