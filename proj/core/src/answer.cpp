#include "mmzero/answer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <vector>

#include "mmzero/error.hpp"
#include "text_util.hpp"

namespace mmzero {

namespace {

constexpr std::string_view kBoxed = "\\boxed{";

std::optional<std::string_view> boxed_body_at(std::string_view s, std::size_t pos) {
  std::size_t depth = 1;
  const std::size_t start = pos + kBoxed.size();
  for (std::size_t i = start; i < s.size(); ++i) {
    if (s[i] == '{') {
      ++depth;
    } else if (s[i] == '}') {
      if (--depth == 0) return s.substr(start, i - start);
    }
  }
  return std::nullopt;
}

std::optional<double> parse_number(const std::string& s) {
  static const std::regex kNumber(R"(^[+-]?((\d{1,3}(,\d{3})+|\d+)(\.\d*)?|\.\d+)$)");
  if (!std::regex_match(s, kNumber)) return std::nullopt;
  std::string digits;
  digits.reserve(s.size());
  for (char c : s) {
    if (c != ',') digits += c;
  }
  char* end = nullptr;
  const double v = std::strtod(digits.c_str(), &end);
  if (end != digits.c_str() + digits.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string_view strip_pair(std::string_view s, char open, char close) {
  if (s.size() >= 2 && s.front() == open && s.back() == close) return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

ExtractedAnswer normalize(std::string_view raw) {
  std::string_view s = detail::trim(raw);
  s = strip_pair(s, '"', '"');
  s = strip_pair(s, '\'', '\'');
  s = detail::trim(s);
  if (!s.empty() && s.back() == '.') s.remove_suffix(1);
  s = detail::trim(s);
  if (!s.empty() && s.front() == '$') s.remove_prefix(1);
  if (!s.empty() && s.back() == '$') s.remove_suffix(1);
  if (!s.empty() && s.back() == '%') s.remove_suffix(1);
  s = detail::trim(s);

  std::string collapsed;
  bool pending_space = false;
  for (char c : s) {
    if (detail::is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !collapsed.empty()) collapsed += ' ';
    pending_space = false;
    collapsed += c;
  }

  ExtractedAnswer a;
  a.raw = std::string(raw);
  a.normalized = detail::ascii_lower(collapsed);
  a.numeric = parse_number(a.normalized);
  return a;
}

Vote extract_boxed(std::string_view response) {
  const std::size_t pos = response.rfind(kBoxed);
  if (pos == std::string_view::npos) return std::nullopt;
  const auto body = boxed_body_at(response, pos);
  if (!body) return std::nullopt;
  auto answer = normalize(*body);
  if (answer.normalized.empty()) return std::nullopt;
  return answer;
}

bool answers_equal(const ExtractedAnswer& a, const ExtractedAnswer& b) {
  if (a.numeric && b.numeric) {
    const double x = *a.numeric;
    const double y = *b.numeric;
    return std::abs(x - y) <= 1e-9 * std::max({1.0, std::abs(x), std::abs(y)});
  }
  return a.normalized == b.normalized;
}

VoteResult majority_vote(std::span<const Vote> votes) {
  if (votes.empty()) throw UsageError("majority_vote requires at least one vote");

  struct Class {
    const ExtractedAnswer* representative;
    std::size_t count;
  };
  std::vector<Class> classes;
  for (const auto& v : votes) {
    if (!v) continue;
    auto it = std::find_if(classes.begin(), classes.end(),
                           [&](const Class& c) { return answers_equal(*c.representative, *v); });
    if (it == classes.end()) {
      classes.push_back({&*v, 1});
    } else {
      ++it->count;
    }
  }

  VoteResult result;
  result.total = votes.size();
  const Class* best = nullptr;
  for (const auto& c : classes) {
    result.tally[c.representative->normalized] += c.count;
    if (best == nullptr || c.count > best->count) best = &c;
  }
  if (best != nullptr) {
    result.silver = *best->representative;
    result.consistency = static_cast<double>(best->count) / static_cast<double>(votes.size());
  }
  return result;
}

bool check_solver_format(std::string_view response) {
  const std::string_view s = detail::trim(response);
  constexpr std::string_view kOpen = "<think>";
  constexpr std::string_view kClose = "</think>";
  const std::size_t open = s.find(kOpen);
  const std::size_t close = s.find(kClose);
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) return false;
  if (s.find(kOpen, open + kOpen.size()) != std::string_view::npos) return false;
  if (s.find(kClose, close + kClose.size()) != std::string_view::npos) return false;
  const auto reasoning = s.substr(open + kOpen.size(), close - open - kOpen.size());
  if (detail::trim(reasoning).empty()) return false;

  const auto tail = s.substr(close + kClose.size());
  std::size_t pos = tail.find(kBoxed);
  while (pos != std::string_view::npos) {
    if (boxed_body_at(tail, pos)) return true;
    pos = tail.find(kBoxed, pos + kBoxed.size());
  }
  return false;
}

}  // namespace mmzero
