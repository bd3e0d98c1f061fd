#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mmzero/error.hpp"

namespace mmzero {

enum class Role { proposer, coder, solver, judge };

std::string_view to_string(Role r);
Role parse_role(std::string_view s);

// Body text with `{{ name }}` or `{{ name | trim }}` placeholders.
struct PromptTemplate {
  std::string name;
  std::string body;

  // Placeholder names in order of first appearance.
  std::vector<std::string> placeholders() const;
  // Stable hex digest of the body, used in request fingerprints.
  std::string hash() const;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

class UnboundPlaceholder : public TemplateError {
 public:
  explicit UnboundPlaceholder(std::string name)
      : TemplateError("unbound placeholder: " + name), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

using Bindings = std::map<std::string, std::string>;

// Substitutes every placeholder with its binding, whitespace-trimmed. All other
// bytes of the body are copied through unchanged.
std::string render_prompt(const PromptTemplate& tmpl, const Bindings& bindings);

// Built-in templates for each role.
PromptTemplate default_template(Role role);

// One template per role. Files named `<role>.tmpl` in the directory override the
// built-in defaults; missing files keep the defaults.
class TemplateSet {
 public:
  TemplateSet();
  static TemplateSet load(const std::filesystem::path& dir);

  const PromptTemplate& get(Role role) const;
  void set(Role role, PromptTemplate tmpl);

 private:
  std::map<Role, PromptTemplate> templates_;
};

// Literal inserted where the Solver prompt references the attached image.
inline constexpr std::string_view kImageSentinel = "<image>";

}  // namespace mmzero
