#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "svg/geometry.hpp"

namespace mmzero::svg {

struct Node {
  bool is_text = false;
  std::string name;  // element local name (prefix stripped); empty for text
  std::string text;  // character data for text nodes
  std::map<std::string, std::string> attrs;
  std::vector<std::unique_ptr<Node>> children;
  const Node* parent = nullptr;

  const std::string* attr(std::string_view key) const {
    auto it = attrs.find(std::string(key));
    return it == attrs.end() ? nullptr : &it->second;
  }
};

struct XmlSyntaxError {
  std::string message;
};

struct CssRule {
  struct Compound {
    std::string tag;  // empty or "*" matches any element
    std::string id;
    std::vector<std::string> classes;
  };
  // Compounds from outermost to the subject; adjacent entries are joined by a
  // descendant (or child, when child_of_previous is set) combinator.
  std::vector<Compound> compounds;
  std::vector<bool> child_of_previous;
  std::map<std::string, std::string> declarations;
  int specificity = 0;
  std::size_t order = 0;
};

struct Document {
  std::unique_ptr<Node> root;
  std::map<std::string, const Node*> by_id;
  std::vector<CssRule> css;

  const Node* find(std::string_view id) const {
    auto it = by_id.find(std::string(id));
    return it == by_id.end() ? nullptr : it->second;
  }
};

// Strict well-formedness via expat; throws XmlSyntaxError or RenderTimeout.
Document parse_document(std::string_view markup, Deadline& deadline);

// Parses "a:b; c:d" declarations.
std::map<std::string, std::string> parse_declarations(std::string_view text);

// Declared properties for an element: presentation attributes, then matching
// stylesheet rules by specificity and order, then the style attribute.
std::map<std::string, std::string> declared_properties(const Document& doc, const Node& node);

}  // namespace mmzero::svg
