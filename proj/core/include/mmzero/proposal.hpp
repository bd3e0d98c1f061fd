#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

namespace mmzero {

enum class ContentType { data_chart, diagram, geometry, timeline, map, table, other };

inline constexpr ContentType kAllContentTypes[] = {
    ContentType::data_chart, ContentType::diagram, ContentType::geometry, ContentType::timeline,
    ContentType::map,        ContentType::table,   ContentType::other};

std::string_view to_string(ContentType t);
// Exact, case-sensitive match against the seven allowed tags.
std::optional<ContentType> parse_content_type(std::string_view s);

// A parsed Proposer output. Text fields are stored trimmed. hard_answer is
// persisted for audit but never used as a reward target.
struct Proposal {
  ContentType content_type = ContentType::other;
  std::string caption;
  std::string easy_question;
  std::string easy_answer;
  std::string hard_question;
  std::optional<std::string> hard_answer;
  std::string raw;

  // Field equality, ignoring `raw`.
  bool same_fields(const Proposal& other) const;
};

struct FormatError {
  enum class Kind { missing_tag, duplicate_tag, empty_field, bad_content_type };
  Kind kind;
  std::string tag;

  std::string message() const;
};

std::string_view to_string(FormatError::Kind k);

using ProposalParse = std::variant<Proposal, FormatError>;

// Six blocks: content_type, caption, easy_question, easy_answer, hard_question,
// hard_answer. Each must appear exactly once; prose around the tags is ignored.
ProposalParse parse_proposal(std::string_view raw);

// Renders the six XML blocks in template order.
std::string serialize_proposal(const Proposal& p);

nlohmann::json proposal_to_json(const Proposal& p);
Proposal proposal_from_json(const nlohmann::json& j);

}  // namespace mmzero
