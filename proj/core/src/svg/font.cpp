#include "svg/font.hpp"

#include <algorithm>
#include <cmath>

namespace mmzero::svg {

namespace {

struct AtlasGlyph {
  char32_t codepoint;
  float advance;
  int left;  // ink offset from the pen position
  int top;   // ink offset from the baseline (negative is above)
  int width;
  int height;
  int offset;  // into kAtlasPixels
};

#include "font_atlas.inc"

const AtlasGlyph& glyph_for(char32_t cp) {
  for (const auto& g : kAtlasGlyphs) {
    if (g.codepoint == cp) return g;
  }
  for (const auto& g : kAtlasGlyphs) {
    if (g.codepoint == U'?') return g;
  }
  return kAtlasGlyphs[0];
}

double sample(const AtlasGlyph& g, double u, double v) {
  // Bilinear sample with texel centres at half-integers; zero outside.
  const double fx = u - 0.5, fy = v - 0.5;
  const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
  const double tx = fx - x0, ty = fy - y0;
  auto texel = [&](int x, int y) -> double {
    if (x < 0 || y < 0 || x >= g.width || y >= g.height) return 0.0;
    return kAtlasPixels[static_cast<std::size_t>(g.offset + y * g.width + x)] / 255.0;
  };
  return (texel(x0, y0) * (1 - tx) + texel(x0 + 1, y0) * tx) * (1 - ty) +
         (texel(x0, y0 + 1) * (1 - tx) + texel(x0 + 1, y0 + 1) * tx) * ty;
}

}  // namespace

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    int extra = 0;
    char32_t cp = 0;
    if (c < 0x80) {
      cp = c;
    } else if ((c & 0xe0) == 0xc0) {
      cp = c & 0x1f;
      extra = 1;
    } else if ((c & 0xf0) == 0xe0) {
      cp = c & 0x0f;
      extra = 2;
    } else if ((c & 0xf8) == 0xf0) {
      cp = c & 0x07;
      extra = 3;
    } else {
      out.push_back(0xfffd);
      ++i;
      continue;
    }
    if (i + static_cast<std::size_t>(extra) >= s.size()) {
      out.push_back(0xfffd);
      break;
    }
    bool ok = true;
    for (int k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((cc & 0xc0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3f);
    }
    if (!ok) {
      out.push_back(0xfffd);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

double font_ascent_ratio() { return static_cast<double>(kAtlasAscent) / kAtlasEmPx; }
double font_descent_ratio() { return static_cast<double>(kAtlasDescent) / kAtlasEmPx; }

double text_advance(std::string_view utf8, double font_size) {
  double adv = 0;
  for (char32_t cp : decode_utf8(utf8)) adv += glyph_for(cp).advance;
  return adv * font_size / kAtlasEmPx;
}

CoverageMask text_coverage(std::string_view utf8, Point origin, double font_size, const Affine& ctm, bool bold,
                           int canvas_w, int canvas_h, Deadline& deadline) {
  CoverageMask mask;
  const auto cps = decode_utf8(utf8);
  if (cps.empty() || font_size <= 0) return mask;
  const double s = font_size / kAtlasEmPx;  // user units per atlas texel

  // Device bounding box of the whole run.
  const double run_w = text_advance(utf8, font_size);
  const Point corners[4] = {ctm.apply(origin + Point{-font_size, -font_size * 1.2}),
                            ctm.apply(origin + Point{run_w + font_size, -font_size * 1.2}),
                            ctm.apply(origin + Point{run_w + font_size, font_size * 0.5}),
                            ctm.apply(origin + Point{-font_size, font_size * 0.5})};
  double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
  for (const auto& c : corners) {
    min_x = std::min(min_x, c.x);
    max_x = std::max(max_x, c.x);
    min_y = std::min(min_y, c.y);
    max_y = std::max(max_y, c.y);
  }
  if (!std::isfinite(min_x) || !std::isfinite(max_x) || !std::isfinite(min_y) || !std::isfinite(max_y)) return mask;
  mask.x0 = std::clamp(static_cast<int>(std::floor(min_x)), 0, canvas_w);
  mask.y0 = std::clamp(static_cast<int>(std::floor(min_y)), 0, canvas_h);
  const int x1 = std::clamp(static_cast<int>(std::ceil(max_x)) + 1, 0, canvas_w);
  const int y1 = std::clamp(static_cast<int>(std::ceil(max_y)) + 1, 0, canvas_h);
  mask.width = x1 - mask.x0;
  mask.height = y1 - mask.y0;
  if (mask.empty()) return mask;
  mask.coverage.assign(static_cast<std::size_t>(mask.width) * static_cast<std::size_t>(mask.height), 0.0f);

  // Device pixels per atlas texel decides how many samples each pixel takes.
  const double dev_per_texel = ctm.max_scale() * s;
  const int grid = std::clamp(static_cast<int>(std::ceil(1.0 / std::max(dev_per_texel, 1e-6))), 1, 6);
  const Affine inv = ctm.inverse();
  const double embolden = bold ? 0.35 : 0.0;

  double pen = origin.x;
  for (char32_t cp : cps) {
    deadline.check();
    const auto& g = glyph_for(cp);
    if (g.width > 0 && g.height > 0) {
      // Glyph box in user space, then in device space.
      const double gx0 = pen + g.left * s, gy0 = origin.y + g.top * s;
      const double gx1 = gx0 + g.width * s, gy1 = gy0 + g.height * s;
      const Point box[4] = {ctm.apply({gx0, gy0}), ctm.apply({gx1, gy0}), ctm.apply({gx1, gy1}), ctm.apply({gx0, gy1})};
      double bx0 = 1e300, by0 = 1e300, bx1 = -1e300, by1 = -1e300;
      for (const auto& c : box) {
        bx0 = std::min(bx0, c.x);
        bx1 = std::max(bx1, c.x);
        by0 = std::min(by0, c.y);
        by1 = std::max(by1, c.y);
      }
      const int px0 = std::max(mask.x0, static_cast<int>(std::floor(bx0)) - 1);
      const int py0 = std::max(mask.y0, static_cast<int>(std::floor(by0)) - 1);
      const int px1 = std::min(x1, static_cast<int>(std::ceil(bx1)) + 1);
      const int py1 = std::min(y1, static_cast<int>(std::ceil(by1)) + 1);
      for (int py = py0; py < py1; ++py) {
        for (int px = px0; px < px1; ++px) {
          double acc = 0;
          for (int sy = 0; sy < grid; ++sy) {
            for (int sx = 0; sx < grid; ++sx) {
              const Point dev{px + (sx + 0.5) / grid, py + (sy + 0.5) / grid};
              const Point user = inv.apply(dev);
              const double u = (user.x - gx0) / s;
              const double v = (user.y - gy0) / s;
              double a = sample(g, u, v);
              if (embolden > 0) a = std::max(a, sample(g, u - embolden * 2, v));
              acc += a;
            }
          }
          acc /= grid * grid;
          if (acc <= 0) continue;
          float& dst = mask.coverage[static_cast<std::size_t>(py - mask.y0) * static_cast<std::size_t>(mask.width) +
                                     static_cast<std::size_t>(px - mask.x0)];
          dst = std::min(1.0f, std::max(dst, static_cast<float>(acc)));
        }
      }
    }
    pen += g.advance * s;
  }
  return mask;
}

}  // namespace mmzero::svg
