#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace mmzero {

struct ExtractedAnswer {
  std::string raw;
  std::string normalized;
  std::optional<double> numeric;

  bool operator==(const ExtractedAnswer&) const = default;
};

// nullopt stands for "no answer": a vote that counts toward K but can never win.
using Vote = std::optional<ExtractedAnswer>;

// Trim, strip one layer of quotes / `$` / `%` / trailing period, case-fold,
// collapse inner whitespace, then try a numeric parse (sign, decimals,
// comma thousand separators).
ExtractedAnswer normalize(std::string_view raw);

// Content of the last `\boxed{...}` with balanced braces. nullopt if there is
// none, the last one is unbalanced, or it normalizes to nothing.
Vote extract_boxed(std::string_view response);

// Numeric comparison with relative tolerance 1e-9 when both sides parse as
// numbers, normalized string identity otherwise.
bool answers_equal(const ExtractedAnswer& a, const ExtractedAnswer& b);

struct VoteResult {
  std::optional<ExtractedAnswer> silver;  // empty when every vote is a no-answer
  double consistency = 0.0;               // |silver class| / total
  std::map<std::string, std::size_t> tally;
  std::size_t total = 0;

  bool all_failed() const { return !silver.has_value(); }
};

// Mode over answers_equal classes; ties go to the class seen first. No-answer
// votes count in the denominator only. Throws UsageError on an empty list.
VoteResult majority_vote(std::span<const Vote> votes);

// `<think>non-empty</think>` exactly once, followed by a `\boxed{...}`.
bool check_solver_format(std::string_view response);

}  // namespace mmzero
