#include "svg/color.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include "text_util.hpp"

namespace mmzero::svg {

namespace {

struct NamedColor {
  std::string_view name;
  std::uint32_t rgb;
};

// Sorted by name for binary search.
constexpr NamedColor kNamedColors[] = {
    {"aliceblue", 0xf0f8ff},
    {"antiquewhite", 0xfaebd7},
    {"aqua", 0x00ffff},
    {"aquamarine", 0x7fffd4},
    {"azure", 0xf0ffff},
    {"beige", 0xf5f5dc},
    {"bisque", 0xffe4c4},
    {"black", 0x000000},
    {"blanchedalmond", 0xffebcd},
    {"blue", 0x0000ff},
    {"blueviolet", 0x8a2be2},
    {"brown", 0xa52a2a},
    {"burlywood", 0xdeb887},
    {"cadetblue", 0x5f9ea0},
    {"chartreuse", 0x7fff00},
    {"chocolate", 0xd2691e},
    {"coral", 0xff7f50},
    {"cornflowerblue", 0x6495ed},
    {"cornsilk", 0xfff8dc},
    {"crimson", 0xdc143c},
    {"cyan", 0x00ffff},
    {"darkblue", 0x00008b},
    {"darkcyan", 0x008b8b},
    {"darkgoldenrod", 0xb8860b},
    {"darkgray", 0xa9a9a9},
    {"darkgreen", 0x006400},
    {"darkgrey", 0xa9a9a9},
    {"darkkhaki", 0xbdb76b},
    {"darkmagenta", 0x8b008b},
    {"darkolivegreen", 0x556b2f},
    {"darkorange", 0xff8c00},
    {"darkorchid", 0x9932cc},
    {"darkred", 0x8b0000},
    {"darksalmon", 0xe9967a},
    {"darkseagreen", 0x8fbc8f},
    {"darkslateblue", 0x483d8b},
    {"darkslategray", 0x2f4f4f},
    {"darkslategrey", 0x2f4f4f},
    {"darkturquoise", 0x00ced1},
    {"darkviolet", 0x9400d3},
    {"deeppink", 0xff1493},
    {"deepskyblue", 0x00bfff},
    {"dimgray", 0x696969},
    {"dimgrey", 0x696969},
    {"dodgerblue", 0x1e90ff},
    {"firebrick", 0xb22222},
    {"floralwhite", 0xfffaf0},
    {"forestgreen", 0x228b22},
    {"fuchsia", 0xff00ff},
    {"gainsboro", 0xdcdcdc},
    {"ghostwhite", 0xf8f8ff},
    {"gold", 0xffd700},
    {"goldenrod", 0xdaa520},
    {"gray", 0x808080},
    {"green", 0x008000},
    {"greenyellow", 0xadff2f},
    {"grey", 0x808080},
    {"honeydew", 0xf0fff0},
    {"hotpink", 0xff69b4},
    {"indianred", 0xcd5c5c},
    {"indigo", 0x4b0082},
    {"ivory", 0xfffff0},
    {"khaki", 0xf0e68c},
    {"lavender", 0xe6e6fa},
    {"lavenderblush", 0xfff0f5},
    {"lawngreen", 0x7cfc00},
    {"lemonchiffon", 0xfffacd},
    {"lightblue", 0xadd8e6},
    {"lightcoral", 0xf08080},
    {"lightcyan", 0xe0ffff},
    {"lightgoldenrodyellow", 0xfafad2},
    {"lightgray", 0xd3d3d3},
    {"lightgreen", 0x90ee90},
    {"lightgrey", 0xd3d3d3},
    {"lightpink", 0xffb6c1},
    {"lightsalmon", 0xffa07a},
    {"lightseagreen", 0x20b2aa},
    {"lightskyblue", 0x87cefa},
    {"lightslategray", 0x778899},
    {"lightslategrey", 0x778899},
    {"lightsteelblue", 0xb0c4de},
    {"lightyellow", 0xffffe0},
    {"lime", 0x00ff00},
    {"limegreen", 0x32cd32},
    {"linen", 0xfaf0e6},
    {"magenta", 0xff00ff},
    {"maroon", 0x800000},
    {"mediumaquamarine", 0x66cdaa},
    {"mediumblue", 0x0000cd},
    {"mediumorchid", 0xba55d3},
    {"mediumpurple", 0x9370db},
    {"mediumseagreen", 0x3cb371},
    {"mediumslateblue", 0x7b68ee},
    {"mediumspringgreen", 0x00fa9a},
    {"mediumturquoise", 0x48d1cc},
    {"mediumvioletred", 0xc71585},
    {"midnightblue", 0x191970},
    {"mintcream", 0xf5fffa},
    {"mistyrose", 0xffe4e1},
    {"moccasin", 0xffe4b5},
    {"navajowhite", 0xffdead},
    {"navy", 0x000080},
    {"oldlace", 0xfdf5e6},
    {"olive", 0x808000},
    {"olivedrab", 0x6b8e23},
    {"orange", 0xffa500},
    {"orangered", 0xff4500},
    {"orchid", 0xda70d6},
    {"palegoldenrod", 0xeee8aa},
    {"palegreen", 0x98fb98},
    {"paleturquoise", 0xafeeee},
    {"palevioletred", 0xdb7093},
    {"papayawhip", 0xffefd5},
    {"peachpuff", 0xffdab9},
    {"peru", 0xcd853f},
    {"pink", 0xffc0cb},
    {"plum", 0xdda0dd},
    {"powderblue", 0xb0e0e6},
    {"purple", 0x800080},
    {"rebeccapurple", 0x663399},
    {"red", 0xff0000},
    {"rosybrown", 0xbc8f8f},
    {"royalblue", 0x4169e1},
    {"saddlebrown", 0x8b4513},
    {"salmon", 0xfa8072},
    {"sandybrown", 0xf4a460},
    {"seagreen", 0x2e8b57},
    {"seashell", 0xfff5ee},
    {"sienna", 0xa0522d},
    {"silver", 0xc0c0c0},
    {"skyblue", 0x87ceeb},
    {"slateblue", 0x6a5acd},
    {"slategray", 0x708090},
    {"slategrey", 0x708090},
    {"snow", 0xfffafa},
    {"springgreen", 0x00ff7f},
    {"steelblue", 0x4682b4},
    {"tan", 0xd2b48c},
    {"teal", 0x008080},
    {"thistle", 0xd8bfd8},
    {"tomato", 0xff6347},
    {"turquoise", 0x40e0d0},
    {"violet", 0xee82ee},
    {"wheat", 0xf5deb3},
    {"white", 0xffffff},
    {"whitesmoke", 0xf5f5f5},
    {"yellow", 0xffff00},
    {"yellowgreen", 0x9acd32}};

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::optional<Rgba> parse_hex(std::string_view h) {
  std::vector<int> d;
  for (char c : h) {
    const int v = hex_digit(c);
    if (v < 0) return std::nullopt;
    d.push_back(v);
  }
  Rgba out;
  if (d.size() == 3 || d.size() == 4) {
    out.r = (d[0] * 17) / 255.0;
    out.g = (d[1] * 17) / 255.0;
    out.b = (d[2] * 17) / 255.0;
    if (d.size() == 4) out.a = (d[3] * 17) / 255.0;
    return out;
  }
  if (d.size() == 6 || d.size() == 8) {
    out.r = (d[0] * 16 + d[1]) / 255.0;
    out.g = (d[2] * 16 + d[3]) / 255.0;
    out.b = (d[4] * 16 + d[5]) / 255.0;
    if (d.size() == 8) out.a = (d[6] * 16 + d[7]) / 255.0;
    return out;
  }
  return std::nullopt;
}

// Splits "a, b c / d" style argument lists.
std::vector<std::string> split_args(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == '/' || detail::is_space(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::optional<double> component(const std::string& s, double scale) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) return std::nullopt;
  if (*end == '%') return std::clamp(v / 100.0, 0.0, 1.0);
  if (*end != '\0') return std::nullopt;
  return std::clamp(v / scale, 0.0, 1.0);
}

double hue_to_rgb(double p, double q, double t) {
  if (t < 0) t += 1;
  if (t > 1) t -= 1;
  if (t < 1.0 / 6) return p + (q - p) * 6 * t;
  if (t < 0.5) return q;
  if (t < 2.0 / 3) return p + (q - p) * (2.0 / 3 - t) * 6;
  return p;
}

}  // namespace

std::optional<Rgba> parse_color(std::string_view text) {
  const std::string s = detail::ascii_lower(detail::trim(text));
  if (s.empty()) return std::nullopt;
  if (s[0] == '#') return parse_hex(std::string_view(s).substr(1));
  if (s == "transparent") return Rgba{0, 0, 0, 0};

  const auto open = s.find('(');
  if (open != std::string::npos && s.back() == ')') {
    const std::string fn(detail::trim(std::string_view(s).substr(0, open)));
    const auto args = split_args(std::string_view(s).substr(open + 1, s.size() - open - 2));
    if (args.size() < 3 || args.size() > 4) return std::nullopt;
    Rgba out;
    if (fn == "rgb" || fn == "rgba") {
      const auto r = component(args[0], 255.0);
      const auto g = component(args[1], 255.0);
      const auto b = component(args[2], 255.0);
      if (!r || !g || !b) return std::nullopt;
      out = {*r, *g, *b, 1.0};
    } else if (fn == "hsl" || fn == "hsla") {
      char* end = nullptr;
      double h = std::strtod(args[0].c_str(), &end);
      const auto sat = component(args[1], 100.0);
      const auto light = component(args[2], 100.0);
      if (!sat || !light) return std::nullopt;
      h = std::fmod(std::fmod(h, 360.0) + 360.0, 360.0) / 360.0;
      const double l = *light;
      const double q = l < 0.5 ? l * (1 + *sat) : l + *sat - l * *sat;
      const double p = 2 * l - q;
      out = {hue_to_rgb(p, q, h + 1.0 / 3), hue_to_rgb(p, q, h), hue_to_rgb(p, q, h - 1.0 / 3), 1.0};
    } else {
      return std::nullopt;
    }
    if (args.size() == 4) {
      const auto a = component(args[3], 1.0);
      if (!a) return std::nullopt;
      out.a = *a;
    }
    return out;
  }

  const auto it = std::lower_bound(std::begin(kNamedColors), std::end(kNamedColors), s,
                                   [](const NamedColor& c, const std::string& key) { return c.name < key; });
  if (it == std::end(kNamedColors) || it->name != s) return std::nullopt;
  return Rgba{((it->rgb >> 16) & 0xff) / 255.0, ((it->rgb >> 8) & 0xff) / 255.0, (it->rgb & 0xff) / 255.0, 1.0};
}

}  // namespace mmzero::svg
