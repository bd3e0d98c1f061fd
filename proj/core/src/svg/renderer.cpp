#include "svg/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>

#include "svg/color.hpp"
#include "svg/font.hpp"
#include "svg/path.hpp"
#include "svg/raster.hpp"
#include "svg/stroke.hpp"
#include "text_util.hpp"

namespace mmzero::svg {

namespace {

constexpr int kMaxUseDepth = 16;

struct PaintSpec {
  enum class Kind { none, color, current, url } kind = Kind::none;
  Rgba color;
  std::string ref;
  Kind fallback_kind = Kind::none;
  Rgba fallback;
};

PaintSpec black() {
  PaintSpec p;
  p.kind = PaintSpec::Kind::color;
  p.color = {0, 0, 0, 1};
  return p;
}

struct Style {
  PaintSpec fill = black();
  PaintSpec stroke;
  double fill_opacity = 1;
  double stroke_opacity = 1;
  double stroke_width = 1;
  FillRule fill_rule = FillRule::nonzero;
  LineCap cap = LineCap::butt;
  LineJoin join = LineJoin::miter;
  double miter_limit = 4;
  std::vector<double> dashes;
  double dash_offset = 0;
  double font_size = 16;
  std::string text_anchor = "start";
  std::string baseline;
  bool bold = false;
  bool visible = true;
  Rgba current_color{0, 0, 0, 1};
  double opacity = 1;  // accumulated group opacity (not inherited in CSS terms)
};

std::optional<double> parse_number(std::string_view s) {
  s = detail::trim(s);
  if (s.empty()) return std::nullopt;
  const std::string str(s);
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (end == str.c_str() || !std::isfinite(v)) return std::nullopt;
  return v;
}

enum class Axis { x, y, other };

// Lengths with absolute units, em/ex, and percentages of the viewport.
std::optional<double> parse_length(std::string_view s, Axis axis, double vw, double vh, double font_size) {
  s = detail::trim(s);
  if (s.empty()) return std::nullopt;
  const std::string str(s);
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (end == str.c_str() || !std::isfinite(v)) return std::nullopt;
  const std::string unit = detail::ascii_lower(detail::trim(std::string_view(end)));
  if (unit.empty() || unit == "px") return v;
  if (unit == "pt") return v * 96.0 / 72.0;
  if (unit == "pc") return v * 16.0;
  if (unit == "mm") return v * 96.0 / 25.4;
  if (unit == "cm") return v * 96.0 / 2.54;
  if (unit == "in") return v * 96.0;
  if (unit == "em") return v * font_size;
  if (unit == "ex") return v * font_size / 2;
  if (unit == "%") {
    const double ref = axis == Axis::x ? vw : axis == Axis::y ? vh : std::hypot(vw, vh) / std::sqrt(2.0);
    return v / 100.0 * ref;
  }
  return std::nullopt;
}

Affine parse_transform(std::string_view s) {
  Affine m;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (detail::is_space(s[i]) || s[i] == ',')) ++i;
    const std::size_t name_start = i;
    while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
    const std::string name(s.substr(name_start, i - name_start));
    while (i < s.size() && detail::is_space(s[i])) ++i;
    if (name.empty() || i >= s.size() || s[i] != '(') break;
    const auto close = s.find(')', i);
    if (close == std::string_view::npos) break;
    const auto args = parse_number_list(s.substr(i + 1, close - i - 1));
    i = close + 1;
    Affine t;
    if (name == "matrix" && args.size() == 6) {
      t = {args[0], args[1], args[2], args[3], args[4], args[5]};
    } else if (name == "translate" && !args.empty()) {
      t = Affine::translate(args[0], args.size() > 1 ? args[1] : 0);
    } else if (name == "scale" && !args.empty()) {
      t = Affine::scale(args[0], args.size() > 1 ? args[1] : args[0]);
    } else if (name == "rotate" && !args.empty()) {
      t = Affine::rotate_degrees(args[0]);
      if (args.size() >= 3) t = Affine::translate(args[1], args[2]) * t * Affine::translate(-args[1], -args[2]);
    } else if (name == "skewX" && args.size() == 1) {
      t = {1, 0, std::tan(args[0] * M_PI / 180), 1, 0, 0};
    } else if (name == "skewY" && args.size() == 1) {
      t = {1, std::tan(args[0] * M_PI / 180), 0, 1, 0, 0};
    } else {
      break;
    }
    m = m * t;
  }
  return m;
}

std::optional<PaintSpec> parse_paint(std::string_view s) {
  s = detail::trim(s);
  if (s.empty()) return std::nullopt;
  PaintSpec p;
  if (s == "none") return p;
  if (s == "currentColor" || s == "currentcolor") {
    p.kind = PaintSpec::Kind::current;
    return p;
  }
  if (s.substr(0, 4) == "url(") {
    const auto close = s.find(')');
    if (close == std::string_view::npos) return std::nullopt;
    std::string_view ref = detail::trim(s.substr(4, close - 4));
    if (ref.size() >= 2 && (ref.front() == '"' || ref.front() == '\'')) ref = ref.substr(1, ref.size() - 2);
    if (!ref.empty() && ref.front() == '#') ref.remove_prefix(1);
    p.kind = PaintSpec::Kind::url;
    p.ref = std::string(ref);
    const auto rest = detail::trim(s.substr(close + 1));
    if (!rest.empty()) {
      if (auto fb = parse_color(rest)) {
        p.fallback_kind = PaintSpec::Kind::color;
        p.fallback = *fb;
      } else if (rest == "currentColor") {
        p.fallback_kind = PaintSpec::Kind::current;
      }
    }
    return p;
  }
  if (auto c = parse_color(s)) {
    p.kind = PaintSpec::Kind::color;
    p.color = *c;
    return p;
  }
  return std::nullopt;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

std::optional<double> parse_opacity(std::string_view s) {
  s = detail::trim(s);
  if (!s.empty() && s.back() == '%') {
    if (auto v = parse_number(s.substr(0, s.size() - 1))) return clamp01(*v / 100);
    return std::nullopt;
  }
  if (auto v = parse_number(s)) return clamp01(*v);
  return std::nullopt;
}

struct BBox {
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  void add(Point p) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  bool valid() const { return x1 >= x0 && y1 >= y0; }
};

class Renderer {
 public:
  Renderer(const Document& doc, const Viewport& vp, Deadline& deadline)
      : doc_(doc), vp_(vp), deadline_(deadline), canvas_(vp.width, vp.height, 255) {
    vw_ = vp.exact_width;
    vh_ = vp.exact_height;
    if (const auto* vb = doc.root->attr("viewBox")) {
      const auto nums = parse_number_list(*vb);
      if (nums.size() == 4 && nums[2] > 0 && nums[3] > 0) {
        vw_ = nums[2];
        vh_ = nums[3];
      }
    }
  }

  RgbImage run() {
    Style root_style;
    draw_children(*doc_.root, vp_.root, apply_style(*doc_.root, root_style), 0);
    return std::move(canvas_);
  }

 private:
  Style apply_style(const Node& node, const Style& parent) {
    Style s = parent;
    const auto props = declared_properties(doc_, node);
    auto get = [&](const char* key) -> const std::string* {
      auto it = props.find(key);
      if (it == props.end() || detail::trim(it->second) == "inherit") return nullptr;
      return &it->second;
    };
    if (const auto* v = get("color")) {
      if (auto c = parse_color(*v)) s.current_color = *c;
    }
    if (const auto* v = get("font-size")) {
      const std::string lowered = detail::ascii_lower(detail::trim(*v));
      if (!lowered.empty() && lowered.back() == '%') {
        if (auto n = parse_number(std::string_view(lowered).substr(0, lowered.size() - 1))) {
          s.font_size = parent.font_size * *n / 100;
        }
      } else if (auto len = parse_length(*v, Axis::other, vw_, vh_, parent.font_size)) {
        s.font_size = *len;
      }
    }
    if (const auto* v = get("fill")) {
      if (auto p = parse_paint(*v)) s.fill = *p;
    }
    if (const auto* v = get("stroke")) {
      if (auto p = parse_paint(*v)) s.stroke = *p;
    }
    if (const auto* v = get("fill-opacity")) {
      if (auto o = parse_opacity(*v)) s.fill_opacity = *o;
    }
    if (const auto* v = get("stroke-opacity")) {
      if (auto o = parse_opacity(*v)) s.stroke_opacity = *o;
    }
    if (const auto* v = get("stroke-width")) {
      if (auto w = parse_length(*v, Axis::other, vw_, vh_, s.font_size); w && *w >= 0) s.stroke_width = *w;
    }
    if (const auto* v = get("fill-rule")) s.fill_rule = detail::trim(*v) == "evenodd" ? FillRule::evenodd : FillRule::nonzero;
    if (const auto* v = get("stroke-linecap")) {
      const auto t = detail::trim(*v);
      s.cap = t == "round" ? LineCap::round : t == "square" ? LineCap::square : LineCap::butt;
    }
    if (const auto* v = get("stroke-linejoin")) {
      const auto t = detail::trim(*v);
      s.join = t == "round" ? LineJoin::round : t == "bevel" ? LineJoin::bevel : LineJoin::miter;
    }
    if (const auto* v = get("stroke-miterlimit")) {
      if (auto m = parse_number(*v); m && *m >= 1) s.miter_limit = *m;
    }
    if (const auto* v = get("stroke-dasharray")) {
      if (detail::trim(*v) == "none") {
        s.dashes.clear();
      } else {
        s.dashes.clear();
        std::string cleaned = *v;
        std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
        for (const auto& tok : detail::split_whitespace(cleaned)) {
          if (auto len = parse_length(tok, Axis::other, vw_, vh_, s.font_size)) s.dashes.push_back(*len);
        }
      }
    }
    if (const auto* v = get("stroke-dashoffset")) {
      if (auto len = parse_length(*v, Axis::other, vw_, vh_, s.font_size)) s.dash_offset = *len;
    }
    if (const auto* v = get("text-anchor")) s.text_anchor = std::string(detail::trim(*v));
    if (const auto* v = get("dominant-baseline")) s.baseline = std::string(detail::trim(*v));
    if (const auto* v = get("alignment-baseline")) s.baseline = std::string(detail::trim(*v));
    if (const auto* v = get("font-weight")) {
      const auto t = detail::trim(*v);
      if (t == "bold" || t == "bolder") {
        s.bold = true;
      } else if (t == "normal" || t == "lighter") {
        s.bold = false;
      } else if (auto n = parse_number(t)) {
        s.bold = *n >= 600;
      }
    }
    if (const auto* v = get("visibility")) {
      const auto t = detail::trim(*v);
      s.visible = !(t == "hidden" || t == "collapse");
    }
    if (const auto* v = get("opacity")) {
      if (auto o = parse_opacity(*v)) s.opacity = parent.opacity * *o;
    }
    return s;
  }

  bool displayed(const Node& node) {
    const auto props = declared_properties(doc_, node);
    auto it = props.find("display");
    return it == props.end() || detail::trim(it->second) != "none";
  }

  double length_attr(const Node& n, const char* key, Axis axis, const Style& s, double fallback = 0) {
    if (const auto* v = n.attr(key)) {
      if (auto len = parse_length(*v, axis, vw_, vh_, s.font_size)) return *len;
    }
    return fallback;
  }

  void draw_children(const Node& node, const Affine& ctm, const Style& style, int use_depth) {
    for (const auto& child : node.children) {
      if (child->is_text) continue;
      draw_element(*child, ctm, style, use_depth);
    }
  }

  void draw_element(const Node& n, const Affine& parent_ctm, const Style& parent_style, int use_depth) {
    deadline_.check();
    static const char* kSkipped[] = {"defs",   "symbol",   "clipPath", "mask",  "marker", "pattern",
                                     "linearGradient", "radialGradient", "style", "title",  "desc",
                                     "metadata", "filter", "script", "foreignObject", "image"};
    for (const char* skip : kSkipped) {
      if (n.name == skip) return;
    }
    if (!displayed(n)) return;
    const Style style = apply_style(n, parent_style);
    Affine ctm = parent_ctm;
    if (const auto* t = n.attr("transform")) ctm = ctm * parse_transform(*t);

    if (n.name == "g" || n.name == "a" || n.name == "switch") {
      draw_children(n, ctm, style, use_depth);
    } else if (n.name == "svg") {
      draw_nested_svg(n, n, ctm, style, use_depth);
    } else if (n.name == "use") {
      draw_use(n, ctm, style, use_depth);
    } else if (n.name == "text") {
      if (style.visible) draw_text(n, ctm, style);
    } else if (auto path = shape_path(n, style)) {
      if (style.visible) draw_shape(*path, n.name != "line", ctm, style);
    }
  }

  // `sized_by` supplies x/y/width/height: the element itself, or the <use>
  // that instantiates a symbol.
  void draw_nested_svg(const Node& n, const Node& sized_by, const Affine& ctm, const Style& style, int use_depth) {
    const bool symbol = &sized_by != &n;
    const double x = symbol ? 0.0 : length_attr(n, "x", Axis::x, style);
    const double y = symbol ? 0.0 : length_attr(n, "y", Axis::y, style);
    const double w = length_attr(sized_by, "width", Axis::x, style, vw_);
    const double h = length_attr(sized_by, "height", Axis::y, style, vh_);
    Affine inner = ctm * Affine::translate(x, y);
    if (const auto* vb = n.attr("viewBox")) {
      const auto nums = parse_number_list(*vb);
      if (nums.size() == 4 && nums[2] > 0 && nums[3] > 0) {
        const double sx = w / nums[2], sy = h / nums[3];
        const double sc = std::min(sx, sy);
        inner = inner * Affine::translate((w - nums[2] * sc) / 2, (h - nums[3] * sc) / 2) * Affine::scale(sc, sc) *
                Affine::translate(-nums[0], -nums[1]);
      }
    }
    draw_children(n, inner, style, use_depth);
  }

  void draw_use(const Node& n, const Affine& ctm, const Style& style, int use_depth) {
    if (use_depth >= kMaxUseDepth) return;
    const std::string* href = n.attr("href");
    if (!href) href = n.attr("xlink:href");
    if (!href || href->empty() || (*href)[0] != '#') return;
    const Node* target = doc_.find(std::string_view(*href).substr(1));
    if (!target || target == &n) return;
    for (const Node* p = n.parent; p; p = p->parent) {
      if (p == target) return;  // self-referencing cycle
    }
    const Affine moved =
        ctm * Affine::translate(length_attr(n, "x", Axis::x, style), length_attr(n, "y", Axis::y, style));
    if (target->name == "symbol") {
      const Style sym_style = apply_style(*target, style);
      draw_nested_svg(*target, n, moved, sym_style, use_depth + 1);
    } else {
      draw_element(*target, moved, style, use_depth + 1);
    }
  }

  std::optional<Path> shape_path(const Node& n, const Style& s) {
    if (n.name == "rect") {
      const double w = length_attr(n, "width", Axis::x, s);
      const double h = length_attr(n, "height", Axis::y, s);
      if (w <= 0 || h <= 0) return std::nullopt;
      const double rx = length_attr(n, "rx", Axis::x, s, -1);
      const double ry = length_attr(n, "ry", Axis::y, s, -1);
      return rect_path(length_attr(n, "x", Axis::x, s), length_attr(n, "y", Axis::y, s), w, h, rx, ry);
    }
    if (n.name == "circle") {
      const double r = length_attr(n, "r", Axis::other, s);
      if (r <= 0) return std::nullopt;
      return ellipse_path(length_attr(n, "cx", Axis::x, s), length_attr(n, "cy", Axis::y, s), r, r);
    }
    if (n.name == "ellipse") {
      const double rx = length_attr(n, "rx", Axis::x, s);
      const double ry = length_attr(n, "ry", Axis::y, s);
      if (rx <= 0 || ry <= 0) return std::nullopt;
      return ellipse_path(length_attr(n, "cx", Axis::x, s), length_attr(n, "cy", Axis::y, s), rx, ry);
    }
    if (n.name == "line") {
      Path p;
      p.move_to({length_attr(n, "x1", Axis::x, s), length_attr(n, "y1", Axis::y, s)});
      p.line_to({length_attr(n, "x2", Axis::x, s), length_attr(n, "y2", Axis::y, s)});
      return p;
    }
    if (n.name == "polyline" || n.name == "polygon") {
      const auto* pts = n.attr("points");
      if (!pts) return std::nullopt;
      const auto nums = parse_number_list(*pts);
      if (nums.size() < 4) return std::nullopt;
      Path p;
      p.move_to({nums[0], nums[1]});
      for (std::size_t i = 2; i + 1 < nums.size(); i += 2) p.line_to({nums[i], nums[i + 1]});
      if (n.name == "polygon") p.close();
      return p;
    }
    if (n.name == "path") {
      const auto* d = n.attr("d");
      if (!d) return std::nullopt;
      auto p = parse_path_data(*d);
      if (p.empty()) return std::nullopt;
      return p;
    }
    return std::nullopt;
  }

  Polylines to_device(const Polylines& user, const Affine& ctm) {
    Polylines dev = user;
    for (auto& line : dev) {
      for (auto& p : line.points) p = ctm.apply(p);
    }
    return dev;
  }

  // Follows href chains on gradients for attributes and stops.
  const Node* gradient_source(const Node* g, const char* key, bool want_stops) {
    for (int hops = 0; g && hops < 8; ++hops) {
      if (want_stops) {
        for (const auto& c : g->children) {
          if (!c->is_text && c->name == "stop") return g;
        }
      } else if (g->attr(key)) {
        return g;
      }
      const std::string* href = g->attr("href");
      if (!href) href = g->attr("xlink:href");
      if (!href || href->empty() || (*href)[0] != '#') return nullptr;
      g = doc_.find(std::string_view(*href).substr(1));
    }
    return nullptr;
  }

  std::optional<Paint> gradient_paint(const Node& g, const BBox& bbox, const Affine& ctm, const Style& style,
                                      double paint_opacity) {
    const bool linear = g.name == "linearGradient";
    if (!linear && g.name != "radialGradient") return std::nullopt;
    auto attr_of = [&](const char* key) -> const std::string* {
      const Node* src = gradient_source(&g, key, false);
      return src ? src->attr(key) : nullptr;
    };
    const std::string* units_attr = attr_of("gradientUnits");
    const bool user_space = units_attr && *units_attr == "userSpaceOnUse";
    auto coord = [&](const char* key, double def_fraction, Axis axis) {
      const std::string* v = attr_of(key);
      if (!v) return user_space ? def_fraction * (axis == Axis::x ? vw_ : axis == Axis::y ? vh_ : std::hypot(vw_, vh_) / std::sqrt(2.0))
                                : def_fraction;
      const auto t = detail::trim(*v);
      if (!t.empty() && t.back() == '%' && !user_space) {
        return parse_number(t.substr(0, t.size() - 1)).value_or(def_fraction * 100) / 100;
      }
      return parse_length(t, axis, vw_, vh_, style.font_size).value_or(def_fraction);
    };

    Paint paint;
    const Node* stop_src = gradient_source(&g, nullptr, true);
    if (stop_src) {
      double last = 0;
      for (const auto& c : stop_src->children) {
        if (c->is_text || c->name != "stop") continue;
        const auto props = declared_properties(doc_, *c);
        GradientStop stop;
        if (const auto* off = c->attr("offset")) {
          const auto t = detail::trim(*off);
          if (!t.empty() && t.back() == '%') {
            stop.offset = parse_number(t.substr(0, t.size() - 1)).value_or(0) / 100;
          } else {
            stop.offset = parse_number(t).value_or(0);
          }
        }
        stop.offset = std::max(last, clamp01(stop.offset));
        last = stop.offset;
        stop.color = {0, 0, 0, 1};
        if (auto it = props.find("stop-color"); it != props.end()) {
          if (detail::trim(it->second) == "currentColor") {
            stop.color = style.current_color;
          } else if (auto col = parse_color(it->second)) {
            stop.color = *col;
          }
        }
        if (auto it = props.find("stop-opacity"); it != props.end()) {
          if (auto o = parse_opacity(it->second)) stop.color.a *= *o;
        }
        stop.color.a *= paint_opacity;
        paint.stops.push_back(stop);
      }
    }
    if (paint.stops.empty()) return Paint{};  // no stops: paints nothing
    if (paint.stops.size() == 1) {
      paint.kind = Paint::Kind::solid;
      paint.color = paint.stops[0].color;
      return paint;
    }

    Affine to_user;
    if (!user_space) {
      if (!bbox.valid() || bbox.x1 - bbox.x0 <= 0 || bbox.y1 - bbox.y0 <= 0) return Paint{};
      to_user = Affine::translate(bbox.x0, bbox.y0) * Affine::scale(bbox.x1 - bbox.x0, bbox.y1 - bbox.y0);
    }
    if (const auto* gt = attr_of("gradientTransform")) to_user = to_user * parse_transform(*gt);
    paint.device_to_gradient = (ctm * to_user).inverse();
    if (const auto* spread = attr_of("spreadMethod")) {
      if (*spread == "reflect") paint.spread = Paint::Spread::reflect;
      if (*spread == "repeat") paint.spread = Paint::Spread::repeat;
    }
    if (linear) {
      paint.kind = Paint::Kind::linear;
      paint.p1 = {coord("x1", 0, Axis::x), coord("y1", 0, Axis::y)};
      paint.p2 = {coord("x2", 1, Axis::x), coord("y2", 0, Axis::y)};
    } else {
      paint.kind = Paint::Kind::radial;
      paint.p1 = {coord("cx", 0.5, Axis::x), coord("cy", 0.5, Axis::y)};
      paint.radius = coord("r", 0.5, Axis::other);
    }
    return paint;
  }

  Paint resolve_paint(const PaintSpec& spec, double opacity, const BBox& bbox, const Affine& ctm, const Style& style) {
    Paint p;
    auto solid = [&](Rgba c) {
      c.a *= opacity;
      p.kind = Paint::Kind::solid;
      p.color = c;
      return p;
    };
    switch (spec.kind) {
      case PaintSpec::Kind::none: return p;
      case PaintSpec::Kind::color: return solid(spec.color);
      case PaintSpec::Kind::current: return solid(style.current_color);
      case PaintSpec::Kind::url: {
        if (const Node* g = doc_.find(spec.ref)) {
          if (auto gp = gradient_paint(*g, bbox, ctm, style, opacity)) return *gp;
        }
        if (spec.fallback_kind == PaintSpec::Kind::color) return solid(spec.fallback);
        if (spec.fallback_kind == PaintSpec::Kind::current) return solid(style.current_color);
        return p;
      }
    }
    return p;
  }

  void draw_shape(const Path& path, bool fillable, const Affine& ctm, const Style& s) {
    const double scale = std::max(ctm.max_scale(), 1e-6);
    const Polylines flat = flatten(path, scale, deadline_);
    BBox bbox;
    for (const auto& l : flat) {
      for (const auto& p : l.points) bbox.add(p);
    }
    if (fillable && s.fill.kind != PaintSpec::Kind::none) {
      const Paint paint = resolve_paint(s.fill, s.fill_opacity, bbox, ctm, s);
      if (paint.kind != Paint::Kind::none) {
        const auto mask = rasterize(to_device(flat, ctm), s.fill_rule, canvas_.width, canvas_.height, deadline_);
        composite(canvas_, mask, paint, s.opacity, deadline_);
      }
    }
    if (s.stroke.kind != PaintSpec::Kind::none && s.stroke_width > 0) {
      const Paint paint = resolve_paint(s.stroke, s.stroke_opacity, bbox, ctm, s);
      if (paint.kind == Paint::Kind::none) return;
      StrokeStyle st;
      st.width = s.stroke_width;
      st.cap = s.cap;
      st.join = s.join;
      st.miter_limit = s.miter_limit;
      const Polylines lines = s.dashes.empty() ? flat : apply_dashes(flat, s.dashes, s.dash_offset);
      const auto outline = stroke_outline(lines, st, scale, deadline_);
      const auto mask = rasterize(to_device(outline, ctm), FillRule::nonzero, canvas_.width, canvas_.height, deadline_);
      composite(canvas_, mask, paint, s.opacity, deadline_);
    }
  }

  struct TextRun {
    std::string text;
    Style style;
    std::optional<double> x, y;
    double dx = 0, dy = 0;
  };

  void collect_runs(const Node& n, const Style& style, std::vector<TextRun>& runs, bool& last_space, bool root) {
    TextRun pending;
    pending.style = style;
    bool positioned = false;
    if (!root) {
      if (const auto* v = n.attr("x")) {
        if (auto nums = parse_number_list(*v); !nums.empty()) pending.x = nums[0];
      }
      if (const auto* v = n.attr("y")) {
        if (auto nums = parse_number_list(*v); !nums.empty()) pending.y = nums[0];
      }
      positioned = pending.x || pending.y;
    }
    if (const auto* v = n.attr("dx")) {
      if (auto nums = parse_number_list(*v); !nums.empty()) pending.dx = nums[0];
    }
    if (const auto* v = n.attr("dy")) {
      if (auto nums = parse_number_list(*v); !nums.empty()) pending.dy = nums[0];
    }
    bool first = true;
    for (const auto& c : n.children) {
      if (c->is_text) {
        std::string collapsed;
        for (char ch : c->text) {
          const bool sp = detail::is_space(ch);
          if (sp) {
            if (!last_space) collapsed += ' ';
            last_space = true;
          } else {
            collapsed += ch;
            last_space = false;
          }
        }
        if (collapsed.empty()) continue;
        TextRun run;
        run.text = std::move(collapsed);
        run.style = style;
        if (first) {
          run.x = pending.x;
          run.y = pending.y;
          run.dx = pending.dx;
          run.dy = pending.dy;
          first = false;
        }
        runs.push_back(std::move(run));
      } else if (c->name == "tspan" || c->name == "a") {
        if (!displayed(*c)) continue;
        const Style child_style = apply_style(*c, style);
        collect_runs(*c, child_style, runs, last_space, false);
      }
    }
    (void)positioned;
  }

  void draw_text(const Node& n, const Affine& ctm, const Style& style) {
    std::vector<TextRun> runs;
    bool last_space = true;  // drops leading whitespace
    collect_runs(n, style, runs, last_space, true);
    if (runs.empty()) return;
    // Trim trailing whitespace of the element.
    while (!runs.empty()) {
      auto& t = runs.back().text;
      while (!t.empty() && t.back() == ' ') t.pop_back();
      if (!t.empty()) break;
      runs.pop_back();
    }
    if (runs.empty()) return;

    double pen_x = 0, pen_y = 0;
    if (const auto* v = n.attr("x")) {
      if (auto nums = parse_number_list(*v); !nums.empty()) pen_x = nums[0];
    }
    if (const auto* v = n.attr("y")) {
      if (auto nums = parse_number_list(*v); !nums.empty()) pen_y = nums[0];
    }

    // Chunks start at runs with an absolute x; anchors shift whole chunks.
    struct Placed {
      const TextRun* run;
      Point origin;
    };
    std::vector<Placed> placed;
    std::size_t chunk_start = 0;
    double chunk_x0 = pen_x;
    auto finish_chunk = [&](std::size_t end) {
      if (chunk_start >= end) return;
      const std::string& anchor = placed[chunk_start].run->style.text_anchor;
      const double width = pen_x - chunk_x0;
      const double shift = anchor == "middle" ? -width / 2 : anchor == "end" ? -width : 0.0;
      for (std::size_t i = chunk_start; i < end; ++i) placed[i].origin.x += shift;
    };
    for (const auto& run : runs) {
      if (run.x) {
        finish_chunk(placed.size());
        chunk_start = placed.size();
        pen_x = *run.x;
        chunk_x0 = pen_x;
      }
      if (run.y) pen_y = *run.y;
      pen_x += run.dx;
      pen_y += run.dy;
      placed.push_back({&run, {pen_x, pen_y}});
      pen_x += text_advance(run.text, run.style.font_size);
    }
    finish_chunk(placed.size());

    for (const auto& p : placed) {
      const Style& s = p.run->style;
      if (s.fill.kind == PaintSpec::Kind::none) continue;
      Point origin = p.origin;
      const double asc = font_ascent_ratio(), desc = font_descent_ratio();
      if (s.baseline == "middle" || s.baseline == "central") {
        origin.y += (asc - desc) / 2 * s.font_size;
      } else if (s.baseline == "hanging" || s.baseline == "text-before-edge" || s.baseline == "text-top") {
        origin.y += asc * s.font_size;
      } else if (s.baseline == "text-after-edge" || s.baseline == "ideographic" || s.baseline == "text-bottom") {
        origin.y -= desc * s.font_size;
      }
      BBox bbox;
      bbox.add({origin.x, origin.y - asc * s.font_size});
      bbox.add({origin.x + text_advance(p.run->text, s.font_size), origin.y + desc * s.font_size});
      const Paint paint = resolve_paint(s.fill, s.fill_opacity, bbox, ctm, s);
      if (paint.kind == Paint::Kind::none) continue;
      const auto mask =
          text_coverage(p.run->text, origin, s.font_size, ctm, s.bold, canvas_.width, canvas_.height, deadline_);
      composite(canvas_, mask, paint, s.opacity, deadline_);
    }
  }

  const Document& doc_;
  const Viewport& vp_;
  Deadline& deadline_;
  RgbImage canvas_;
  double vw_ = 0;
  double vh_ = 0;
};

}  // namespace

Viewport compute_viewport(const Document& doc) {
  const Node& root = *doc.root;
  std::optional<double> w, h;
  auto abs_length = [](const std::string* v) -> std::optional<double> {
    if (!v) return std::nullopt;
    const auto t = detail::trim(*v);
    if (t.empty() || t.back() == '%' || t == "auto") return std::nullopt;
    return parse_length(t, Axis::other, 0, 0, 16);
  };
  w = abs_length(root.attr("width"));
  h = abs_length(root.attr("height"));

  std::optional<std::array<double, 4>> vb;
  if (const auto* v = root.attr("viewBox")) {
    const auto nums = parse_number_list(*v);
    if (nums.size() == 4) vb = std::array<double, 4>{nums[0], nums[1], nums[2], nums[3]};
  }
  const bool vb_usable = vb && (*vb)[2] > 0 && (*vb)[3] > 0;
  if (vb_usable) {
    if (!w && !h) {
      w = (*vb)[2];
      h = (*vb)[3];
    } else if (!w) {
      w = *h * (*vb)[2] / (*vb)[3];
    } else if (!h) {
      h = *w * (*vb)[3] / (*vb)[2];
    }
  } else if (vb) {
    // A degenerate viewBox collapses the drawing.
    if (!w) w = (*vb)[2];
    if (!h) h = (*vb)[3];
  }
  Viewport vp;
  vp.exact_width = w.value_or(300);
  vp.exact_height = h.value_or(150);
  vp.width = static_cast<int>(std::ceil(vp.exact_width - 1e-6));
  vp.height = static_cast<int>(std::ceil(vp.exact_height - 1e-6));

  if (vb_usable) {
    const auto& box = *vb;
    std::string par = "xMidYMid meet";
    if (const auto* v = root.attr("preserveAspectRatio")) par = *v;
    const auto toks = detail::split_whitespace(par);
    const std::string align = toks.empty() ? "xMidYMid" : toks[0];
    const bool slice = toks.size() > 1 && toks[1] == "slice";
    double sx = vp.exact_width / box[2];
    double sy = vp.exact_height / box[3];
    double tx = 0, ty = 0;
    if (align != "none") {
      const double sc = slice ? std::max(sx, sy) : std::min(sx, sy);
      sx = sy = sc;
      const double extra_x = vp.exact_width - box[2] * sc;
      const double extra_y = vp.exact_height - box[3] * sc;
      if (align.find("xMid") != std::string::npos) tx = extra_x / 2;
      if (align.find("xMax") != std::string::npos) tx = extra_x;
      if (align.find("YMid") != std::string::npos) ty = extra_y / 2;
      if (align.find("YMax") != std::string::npos) ty = extra_y;
    }
    vp.root = Affine::translate(tx, ty) * Affine::scale(sx, sy) * Affine::translate(-box[0], -box[1]);
  }
  return vp;
}

RgbImage draw_document(const Document& doc, const Viewport& vp, Deadline& deadline) {
  if (doc.root->name != "svg") throw RenderFailure{"root element is <" + doc.root->name + ">, not <svg>"};
  Renderer r(doc, vp, deadline);
  return r.run();
}

}  // namespace mmzero::svg
