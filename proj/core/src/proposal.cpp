#include "mmzero/proposal.hpp"

#include <array>

#include "mmzero/error.hpp"
#include "text_util.hpp"

namespace mmzero {

namespace {

constexpr std::array<std::string_view, 6> kTags = {"content_type",  "caption",       "easy_question",
                                                   "easy_answer",   "hard_question", "hard_answer"};

struct TagScan {
  std::size_t count = 0;
  std::string_view body;
  bool closed = false;
};

TagScan scan_tag(std::string_view raw, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  TagScan scan;
  std::size_t pos = raw.find(open);
  if (pos == std::string_view::npos) return scan;
  const std::size_t body_start = pos + open.size();
  const std::size_t end = raw.find(close, body_start);
  if (end != std::string_view::npos) {
    scan.closed = true;
    scan.body = raw.substr(body_start, end - body_start);
  }
  while (pos != std::string_view::npos) {
    ++scan.count;
    pos = raw.find(open, pos + open.size());
  }
  return scan;
}

}  // namespace

std::string_view to_string(ContentType t) {
  switch (t) {
    case ContentType::data_chart: return "data_chart";
    case ContentType::diagram: return "diagram";
    case ContentType::geometry: return "geometry";
    case ContentType::timeline: return "timeline";
    case ContentType::map: return "map";
    case ContentType::table: return "table";
    case ContentType::other: return "other";
  }
  return "other";
}

std::optional<ContentType> parse_content_type(std::string_view s) {
  for (auto t : kAllContentTypes) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

bool Proposal::same_fields(const Proposal& o) const {
  return content_type == o.content_type && caption == o.caption && easy_question == o.easy_question &&
         easy_answer == o.easy_answer && hard_question == o.hard_question && hard_answer == o.hard_answer;
}

std::string_view to_string(FormatError::Kind k) {
  switch (k) {
    case FormatError::Kind::missing_tag: return "missing_tag";
    case FormatError::Kind::duplicate_tag: return "duplicate_tag";
    case FormatError::Kind::empty_field: return "empty_field";
    case FormatError::Kind::bad_content_type: return "bad_content_type";
  }
  return "unknown";
}

std::string FormatError::message() const {
  return std::string(to_string(kind)) + " <" + tag + ">";
}

ProposalParse parse_proposal(std::string_view raw) {
  std::array<std::string, 6> fields;
  for (std::size_t i = 0; i < kTags.size(); ++i) {
    const auto scan = scan_tag(raw, kTags[i]);
    if (scan.count == 0 || !scan.closed) {
      return FormatError{FormatError::Kind::missing_tag, std::string(kTags[i])};
    }
    if (scan.count > 1) return FormatError{FormatError::Kind::duplicate_tag, std::string(kTags[i])};
    const auto body = detail::trim(scan.body);
    if (body.empty()) return FormatError{FormatError::Kind::empty_field, std::string(kTags[i])};
    fields[i] = std::string(body);
  }
  const auto type = parse_content_type(fields[0]);
  if (!type) return FormatError{FormatError::Kind::bad_content_type, "content_type"};

  Proposal p;
  p.content_type = *type;
  p.caption = std::move(fields[1]);
  p.easy_question = std::move(fields[2]);
  p.easy_answer = std::move(fields[3]);
  p.hard_question = std::move(fields[4]);
  p.hard_answer = std::move(fields[5]);
  p.raw = std::string(raw);
  return p;
}

std::string serialize_proposal(const Proposal& p) {
  std::string out;
  auto block = [&out](std::string_view tag, std::string_view body) {
    out += '<';
    out += tag;
    out += '>';
    out += body;
    out += "</";
    out += tag;
    out += ">\n";
  };
  block("content_type", to_string(p.content_type));
  block("caption", p.caption);
  block("easy_question", p.easy_question);
  block("easy_answer", p.easy_answer);
  block("hard_question", p.hard_question);
  block("hard_answer", p.hard_answer.value_or(""));
  return out;
}

nlohmann::json proposal_to_json(const Proposal& p) {
  nlohmann::json j;
  j["content_type"] = std::string(to_string(p.content_type));
  j["caption"] = p.caption;
  j["easy_question"] = p.easy_question;
  j["easy_answer"] = p.easy_answer;
  j["hard_question"] = p.hard_question;
  j["hard_answer"] = p.hard_answer ? nlohmann::json(*p.hard_answer) : nlohmann::json(nullptr);
  j["raw"] = p.raw;
  return j;
}

Proposal proposal_from_json(const nlohmann::json& j) {
  Proposal p;
  const auto type = parse_content_type(j.at("content_type").get<std::string>());
  if (!type) throw Error("proposal record has unknown content_type");
  p.content_type = *type;
  p.caption = j.at("caption").get<std::string>();
  p.easy_question = j.at("easy_question").get<std::string>();
  p.easy_answer = j.at("easy_answer").get<std::string>();
  p.hard_question = j.at("hard_question").get<std::string>();
  if (j.contains("hard_answer") && !j["hard_answer"].is_null()) {
    p.hard_answer = j["hard_answer"].get<std::string>();
  }
  p.raw = j.value("raw", std::string());
  return p;
}

}  // namespace mmzero
