#include "mmzero/prompt_template.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "text_util.hpp"

namespace mmzero {

namespace {

constexpr std::string_view kProposerBody =
    R"(Role: You are an expert Visual Content Designer who creates rich, complex data visualizations and diagram specifications using SVG. Your goal is to design visualizations that are visually interesting, data-dense, and require genuine reasoning to interpret.

Input: {{ content | trim }}

Output --- exactly six XML blocks and nothing else:
<content_type>exactly one of: data_chart, diagram, geometry, timeline, map, table, other</content_type>
<caption>a rich, detailed specification</caption>
<easy_question>a simple question directly readable from the image</easy_question>
<easy_answer>the answer</easy_answer>
<hard_question>a challenging reasoning question</hard_question>
<hard_answer>the answer</hard_answer>

Complexity requirements for captions --- include at least three of: multiple data series, annotations, secondary panel, colors/markers, derived values, non-trivial patterns, geometric constructions.

Hard question constraints: Must require multi-step reasoning; must force the reader to extract at least one value from the visualization (do not state all values in the question).

Answer format: single number, word, or short phrase (e.g. "42", "Q1", "blue").
)";

constexpr std::string_view kCoderBody =
    R"(Input: {{ content | trim }}

You are an SVG code generator for data visualizations. You will be given a chart description (caption) and questions with short answers.

Critical: The rendered image must contain the data needed to answer the Easy Question with the exact Easy Answer provided.

Write raw SVG markup (starting with <svg ...>). Do not write Python code.

SVG guidelines: use viewBox; use <text> for labels; font-size >= 12px; distinct colors; self-contained. Wrap your SVG in ```svg ... ``` code fences.
)";

constexpr std::string_view kSolverBody =
    R"({{ question | trim }}
{{ image }}
Look at the image carefully and answer the question. First, think step by step inside <think> ... </think> tags. Then, give your final answer inside \boxed{} as a single number, single word, or short phrase only (e.g. \boxed{42}, \boxed{blue}, \boxed{Q1}) --- no units, no full sentences.
)";

constexpr std::string_view kJudgeBody =
    R"(System: You are an answer correctness judge. Given a question, the gold (correct) answer, and the model's answer, determine if the model's answer is correct: equivalent to the gold answer or semantically the same. Consider numeric equality (e.g. 14 vs 14.0), option equivalence (A vs A.), and paraphrases. Answer with exactly one word: Yes or No.

Question: {{ question }}

Gold answer: {{ gold }}

Model answer: {{ model_answer }}

Is the model answer correct? Answer with exactly one word: Yes or No.
)";

struct Placeholder {
  std::size_t begin;  // offset of "{{"
  std::size_t end;    // one past "}}"
  std::string name;
};

// Yields placeholders in body order. A "{{" without a matching "}}" is literal
// text.
std::vector<Placeholder> scan_placeholders(std::string_view body) {
  std::vector<Placeholder> out;
  std::size_t pos = 0;
  while ((pos = body.find("{{", pos)) != std::string_view::npos) {
    const std::size_t close = body.find("}}", pos + 2);
    if (close == std::string_view::npos) break;
    std::string_view inner = body.substr(pos + 2, close - pos - 2);
    std::string_view name = inner;
    if (const auto bar = inner.find('|'); bar != std::string_view::npos) {
      name = inner.substr(0, bar);
      const auto filter = detail::trim(inner.substr(bar + 1));
      if (filter != "trim") {
        throw TemplateError("unsupported template filter: " + std::string(filter));
      }
    }
    name = detail::trim(name);
    if (name.empty()) throw TemplateError("empty placeholder name");
    out.push_back({pos, close + 2, std::string(name)});
    pos = close + 2;
  }
  return out;
}

}  // namespace

std::string_view to_string(Role r) {
  switch (r) {
    case Role::proposer: return "proposer";
    case Role::coder: return "coder";
    case Role::solver: return "solver";
    case Role::judge: return "judge";
  }
  return "proposer";
}

Role parse_role(std::string_view s) {
  for (auto r : {Role::proposer, Role::coder, Role::solver, Role::judge}) {
    if (to_string(r) == s) return r;
  }
  throw ConfigError("unknown role: " + std::string(s));
}

std::vector<std::string> PromptTemplate::placeholders() const {
  std::vector<std::string> names;
  for (auto& p : scan_placeholders(body)) {
    if (std::find(names.begin(), names.end(), p.name) == names.end()) names.push_back(p.name);
  }
  return names;
}

std::string PromptTemplate::hash() const { return detail::hex64(detail::fnv1a(body)); }

std::string render_prompt(const PromptTemplate& tmpl, const Bindings& bindings) {
  const auto holes = scan_placeholders(tmpl.body);
  std::string out;
  out.reserve(tmpl.body.size());
  std::size_t cursor = 0;
  for (const auto& h : holes) {
    auto it = bindings.find(h.name);
    if (it == bindings.end()) throw UnboundPlaceholder(h.name);
    out.append(tmpl.body, cursor, h.begin - cursor);
    out += detail::trim(it->second);
    cursor = h.end;
  }
  out.append(tmpl.body, cursor, std::string::npos);
  return out;
}

PromptTemplate default_template(Role role) {
  switch (role) {
    case Role::proposer: return {"proposer", std::string(kProposerBody)};
    case Role::coder: return {"coder", std::string(kCoderBody)};
    case Role::solver: return {"solver", std::string(kSolverBody)};
    case Role::judge: return {"judge", std::string(kJudgeBody)};
  }
  throw TemplateError("no template for role");
}

TemplateSet::TemplateSet() {
  for (auto r : {Role::proposer, Role::coder, Role::solver, Role::judge}) templates_[r] = default_template(r);
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
  TemplateSet set;
  for (auto r : {Role::proposer, Role::coder, Role::solver, Role::judge}) {
    const auto path = dir / (std::string(to_string(r)) + ".tmpl");
    std::ifstream in(path, std::ios::binary);
    if (!in) continue;
    std::ostringstream ss;
    ss << in.rdbuf();
    PromptTemplate t{std::string(to_string(r)), ss.str()};
    t.placeholders();  // validates syntax up front
    set.set(r, std::move(t));
  }
  return set;
}

const PromptTemplate& TemplateSet::get(Role role) const { return templates_.at(role); }

void TemplateSet::set(Role role, PromptTemplate tmpl) { templates_[role] = std::move(tmpl); }

}  // namespace mmzero
