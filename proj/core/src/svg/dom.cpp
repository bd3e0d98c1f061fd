#include "svg/dom.hpp"

#include <expat.h>

#include <algorithm>
#include <optional>
#include <set>

#include "text_util.hpp"

namespace mmzero::svg {

namespace {

std::string local_name(const char* qualified) {
  std::string_view s(qualified);
  if (const auto colon = s.find(':'); colon != std::string_view::npos) s.remove_prefix(colon + 1);
  return std::string(s);
}

struct Builder {
  std::unique_ptr<Node> root;
  std::vector<Node*> stack;
  std::string style_text;
  int style_depth = 0;
};

void on_start(void* user, const XML_Char* name, const XML_Char** atts) {
  auto* b = static_cast<Builder*>(user);
  auto node = std::make_unique<Node>();
  node->name = local_name(name);
  for (int i = 0; atts[i] != nullptr; i += 2) node->attrs[atts[i]] = atts[i + 1];
  Node* raw = node.get();
  if (b->stack.empty()) {
    b->root = std::move(node);
  } else {
    raw->parent = b->stack.back();
    b->stack.back()->children.push_back(std::move(node));
  }
  b->stack.push_back(raw);
  if (raw->name == "style") ++b->style_depth;
}

void on_end(void* user, const XML_Char*) {
  auto* b = static_cast<Builder*>(user);
  if (!b->stack.empty()) {
    if (b->stack.back()->name == "style") --b->style_depth;
    b->stack.pop_back();
  }
}

void on_text(void* user, const XML_Char* s, int len) {
  auto* b = static_cast<Builder*>(user);
  if (b->stack.empty()) return;
  if (b->style_depth > 0) {
    b->style_text.append(s, static_cast<std::size_t>(len));
    return;
  }
  Node* parent = b->stack.back();
  if (!parent->children.empty() && parent->children.back()->is_text) {
    parent->children.back()->text.append(s, static_cast<std::size_t>(len));
    return;
  }
  auto node = std::make_unique<Node>();
  node->is_text = true;
  node->text.assign(s, static_cast<std::size_t>(len));
  node->parent = parent;
  parent->children.push_back(std::move(node));
}

void index_ids(const Node& node, std::map<std::string, const Node*>& by_id) {
  if (node.is_text) return;
  if (const auto* id = node.attr("id")) by_id.emplace(*id, &node);
  for (const auto& c : node.children) index_ids(*c, by_id);
}

std::string strip_comments(std::string_view css) {
  std::string out;
  std::size_t i = 0;
  while (i < css.size()) {
    if (css.compare(i, 2, "/*") == 0) {
      const auto end = css.find("*/", i + 2);
      if (end == std::string_view::npos) break;
      i = end + 2;
    } else {
      out += css[i++];
    }
  }
  return out;
}

std::optional<CssRule::Compound> parse_compound(std::string_view s) {
  CssRule::Compound c;
  std::size_t i = 0;
  auto read_ident = [&]() {
    std::size_t j = i;
    while (j < s.size() && s[j] != '.' && s[j] != '#' && s[j] != ':' && s[j] != '[') ++j;
    std::string id(s.substr(i, j - i));
    i = j;
    return id;
  };
  if (i < s.size() && s[i] != '.' && s[i] != '#') c.tag = read_ident();
  while (i < s.size()) {
    const char kind = s[i++];
    if (kind == '.') {
      c.classes.push_back(read_ident());
    } else if (kind == '#') {
      c.id = read_ident();
    } else {
      return std::nullopt;  // pseudo-classes and attribute selectors are not supported
    }
  }
  return c;
}

std::optional<CssRule> parse_selector(std::string_view sel) {
  CssRule rule;
  std::string spaced;
  for (char c : sel) {
    if (c == '>') {
      spaced += " > ";
    } else {
      spaced += c;
    }
  }
  bool pending_child = false;
  for (const auto& tok : detail::split_whitespace(spaced)) {
    if (tok == ">") {
      pending_child = true;
      continue;
    }
    auto compound = parse_compound(tok);
    if (!compound) return std::nullopt;
    rule.child_of_previous.push_back(pending_child && !rule.compounds.empty());
    rule.compounds.push_back(std::move(*compound));
    pending_child = false;
  }
  if (rule.compounds.empty()) return std::nullopt;
  int ids = 0, classes = 0, types = 0;
  for (const auto& c : rule.compounds) {
    ids += c.id.empty() ? 0 : 1;
    classes += static_cast<int>(c.classes.size());
    types += (c.tag.empty() || c.tag == "*") ? 0 : 1;
  }
  rule.specificity = ids * 10000 + classes * 100 + types;
  return rule;
}

std::vector<CssRule> parse_stylesheet(std::string_view text) {
  const std::string css = strip_comments(text);
  std::vector<CssRule> rules;
  std::size_t i = 0;
  while (i < css.size()) {
    const auto open = css.find('{', i);
    if (open == std::string::npos) break;
    const std::string prelude(detail::trim(std::string_view(css).substr(i, open - i)));
    // Find the matching close brace, skipping nested blocks (@media etc.).
    int depth = 1;
    std::size_t j = open + 1;
    while (j < css.size() && depth > 0) {
      if (css[j] == '{') ++depth;
      if (css[j] == '}') --depth;
      ++j;
    }
    const std::string_view body(css.data() + open + 1, (j > open + 1 ? j - open - 2 : 0));
    i = j;
    if (prelude.empty() || prelude[0] == '@') continue;
    const auto decls = parse_declarations(body);
    std::size_t start = 0;
    while (start <= prelude.size()) {
      auto comma = prelude.find(',', start);
      if (comma == std::string::npos) comma = prelude.size();
      if (auto rule = parse_selector(detail::trim(std::string_view(prelude).substr(start, comma - start)))) {
        rule->declarations = decls;
        rule->order = rules.size();
        rules.push_back(std::move(*rule));
      }
      start = comma + 1;
    }
  }
  return rules;
}

bool matches_compound(const CssRule::Compound& c, const Node& n) {
  if (!c.tag.empty() && c.tag != "*" && c.tag != n.name) return false;
  if (!c.id.empty()) {
    const auto* id = n.attr("id");
    if (!id || *id != c.id) return false;
  }
  if (!c.classes.empty()) {
    const auto* cls = n.attr("class");
    if (!cls) return false;
    const auto have = detail::split_whitespace(*cls);
    for (const auto& want : c.classes) {
      if (std::find(have.begin(), have.end(), want) == have.end()) return false;
    }
  }
  return true;
}

bool matches_from(const CssRule& rule, std::size_t idx, const Node& n) {
  if (!matches_compound(rule.compounds[idx], n)) return false;
  if (idx == 0) return true;
  const Node* anc = n.parent;
  if (rule.child_of_previous[idx]) return anc && matches_from(rule, idx - 1, *anc);
  for (; anc; anc = anc->parent) {
    if (matches_from(rule, idx - 1, *anc)) return true;
  }
  return false;
}

}  // namespace

std::map<std::string, std::string> parse_declarations(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto semi = text.find(';', start);
    if (semi == std::string_view::npos) semi = text.size();
    const auto decl = text.substr(start, semi - start);
    if (const auto colon = decl.find(':'); colon != std::string_view::npos) {
      std::string key = detail::ascii_lower(detail::trim(decl.substr(0, colon)));
      std::string value(detail::trim(decl.substr(colon + 1)));
      if (const auto bang = value.find("!important"); bang != std::string::npos) {
        value = std::string(detail::trim(std::string_view(value).substr(0, bang)));
      }
      if (!key.empty()) out[std::move(key)] = std::move(value);
    }
    start = semi + 1;
  }
  return out;
}

Document parse_document(std::string_view markup, Deadline& deadline) {
  Builder builder;
  XML_Parser parser = XML_ParserCreate(nullptr);
  if (!parser) throw XmlSyntaxError{"cannot create XML parser"};
  XML_SetUserData(parser, &builder);
  XML_SetElementHandler(parser, on_start, on_end);
  XML_SetCharacterDataHandler(parser, on_text);

  constexpr std::size_t kChunk = 1 << 16;
  std::size_t pos = 0;
  std::string error;
  try {
    do {
      deadline.check();
      const std::size_t len = std::min(kChunk, markup.size() - pos);
      const bool last = pos + len >= markup.size();
      if (XML_Parse(parser, markup.data() + pos, static_cast<int>(len), last ? 1 : 0) == XML_STATUS_ERROR) {
        error = std::string(XML_ErrorString(XML_GetErrorCode(parser))) + " at line " +
                std::to_string(XML_GetCurrentLineNumber(parser));
        break;
      }
      pos += len;
    } while (pos < markup.size());
  } catch (...) {
    XML_ParserFree(parser);
    throw;
  }
  XML_ParserFree(parser);
  if (!error.empty()) throw XmlSyntaxError{error};
  if (!builder.root) throw XmlSyntaxError{"no root element"};

  Document doc;
  doc.root = std::move(builder.root);
  index_ids(*doc.root, doc.by_id);
  doc.css = parse_stylesheet(builder.style_text);
  return doc;
}

std::map<std::string, std::string> declared_properties(const Document& doc, const Node& node) {
  static const std::set<std::string> kNonPresentation = {"id", "class", "style", "d", "x", "y", "width", "height",
                                                         "cx", "cy", "r", "rx", "ry", "x1", "y1", "x2", "y2",
                                                         "points", "viewBox", "href", "xlink:href"};
  std::map<std::string, std::string> props;
  for (const auto& [k, v] : node.attrs) {
    if (!kNonPresentation.count(k)) props[k] = v;
  }
  std::vector<const CssRule*> matched;
  for (const auto& rule : doc.css) {
    if (matches_from(rule, rule.compounds.size() - 1, node)) matched.push_back(&rule);
  }
  std::stable_sort(matched.begin(), matched.end(), [](const CssRule* a, const CssRule* b) {
    return a->specificity != b->specificity ? a->specificity < b->specificity : a->order < b->order;
  });
  for (const auto* rule : matched) {
    for (const auto& [k, v] : rule->declarations) props[k] = v;
  }
  if (const auto* style = node.attr("style")) {
    for (auto& [k, v] : parse_declarations(*style)) props[k] = v;
  }
  return props;
}

}  // namespace mmzero::svg
