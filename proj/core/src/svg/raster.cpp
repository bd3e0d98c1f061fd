#include "svg/raster.hpp"

#include <algorithm>
#include <cmath>

namespace mmzero::svg {

namespace {

constexpr int kSubScanlines = 4;

struct Edge {
  double x0, y0, x1, y1;  // y0 < y1
  int dir;
};

struct Crossing {
  double x;
  int dir;
};

void add_span(std::vector<float>& row, int x_origin, double xa, double xb, float weight) {
  const int w = static_cast<int>(row.size());
  xa = std::max(xa - x_origin, 0.0);
  xb = std::min(xb - x_origin, static_cast<double>(w));
  if (xb <= xa) return;
  const int pa = static_cast<int>(std::floor(xa));
  const int pb = static_cast<int>(std::floor(xb));
  if (pa == pb) {
    row[static_cast<std::size_t>(pa)] += static_cast<float>(xb - xa) * weight;
    return;
  }
  row[static_cast<std::size_t>(pa)] += static_cast<float>(pa + 1 - xa) * weight;
  for (int p = pa + 1; p < pb; ++p) row[static_cast<std::size_t>(p)] += weight;
  if (pb < w) row[static_cast<std::size_t>(pb)] += static_cast<float>(xb - pb) * weight;
}

double lerp(double a, double b, double t) { return a + (b - a) * t; }

}  // namespace

CoverageMask rasterize(const Polylines& polygons, FillRule rule, int canvas_w, int canvas_h, Deadline& deadline) {
  std::vector<Edge> edges;
  double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
  for (const auto& poly : polygons) {
    const auto& pts = poly.points;
    if (pts.size() < 2) continue;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Point a = pts[i];
      const Point b = pts[(i + 1) % pts.size()];
      if (!std::isfinite(a.x) || !std::isfinite(a.y)) continue;
      min_x = std::min(min_x, a.x);
      max_x = std::max(max_x, a.x);
      min_y = std::min(min_y, a.y);
      max_y = std::max(max_y, a.y);
      if (!std::isfinite(b.x) || !std::isfinite(b.y) || a.y == b.y) continue;
      if (a.y < b.y) {
        edges.push_back({a.x, a.y, b.x, b.y, 1});
      } else {
        edges.push_back({b.x, b.y, a.x, a.y, -1});
      }
    }
  }
  CoverageMask mask;
  if (edges.empty()) return mask;
  mask.x0 = std::clamp(static_cast<int>(std::floor(min_x)), 0, canvas_w);
  mask.y0 = std::clamp(static_cast<int>(std::floor(min_y)), 0, canvas_h);
  const int x1 = std::clamp(static_cast<int>(std::ceil(max_x)) + 1, 0, canvas_w);
  const int y1 = std::clamp(static_cast<int>(std::ceil(max_y)) + 1, 0, canvas_h);
  mask.width = x1 - mask.x0;
  mask.height = y1 - mask.y0;
  if (mask.empty()) return mask;
  mask.coverage.assign(static_cast<std::size_t>(mask.width) * static_cast<std::size_t>(mask.height), 0.0f);

  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.y0 < b.y0; });
  std::vector<const Edge*> active;
  std::vector<Crossing> crossings;
  std::vector<float> row(static_cast<std::size_t>(mask.width));
  std::size_t next_edge = 0;
  constexpr float kWeight = 1.0f / kSubScanlines;

  for (int y = mask.y0; y < y1; ++y) {
    deadline.check();
    std::fill(row.begin(), row.end(), 0.0f);
    for (int s = 0; s < kSubScanlines; ++s) {
      const double sy = y + (s + 0.5) / kSubScanlines;
      while (next_edge < edges.size() && edges[next_edge].y0 <= sy) active.push_back(&edges[next_edge++]);
      active.erase(std::remove_if(active.begin(), active.end(), [sy](const Edge* e) { return e->y1 <= sy; }),
                   active.end());
      crossings.clear();
      for (const Edge* e : active) {
        if (e->y0 > sy) continue;
        const double t = (sy - e->y0) / (e->y1 - e->y0);
        crossings.push_back({e->x0 + (e->x1 - e->x0) * t, e->dir});
      }
      if (crossings.size() < 2) continue;
      std::sort(crossings.begin(), crossings.end(), [](const Crossing& a, const Crossing& b) {
        return a.x != b.x ? a.x < b.x : a.dir < b.dir;
      });
      int winding = 0;
      for (std::size_t i = 0; i + 1 < crossings.size(); ++i) {
        winding += crossings[i].dir;
        const bool inside = rule == FillRule::nonzero ? winding != 0 : (winding & 1) != 0;
        if (inside) add_span(row, mask.x0, crossings[i].x, crossings[i + 1].x, kWeight);
      }
    }
    float* dst = mask.coverage.data() + static_cast<std::size_t>(y - mask.y0) * static_cast<std::size_t>(mask.width);
    for (int x = 0; x < mask.width; ++x) dst[x] = std::min(row[static_cast<std::size_t>(x)], 1.0f);
  }
  return mask;
}

Rgba Paint::at(Point device) const {
  if (kind == Kind::solid) return color;
  if (kind == Kind::none || stops.empty()) return {0, 0, 0, 0};
  const Point g = device_to_gradient.apply(device);
  double t = 0;
  if (kind == Kind::linear) {
    const Point d = p2 - p1;
    const double len2 = dot(d, d);
    t = len2 > 0 ? dot(g - p1, d) / len2 : 0.0;
  } else {
    // Focus is ignored: distance from the centre over the radius.
    t = radius > 0 ? length(g - p1) / radius : 0.0;
  }
  switch (spread) {
    case Spread::pad: t = std::clamp(t, 0.0, 1.0); break;
    case Spread::repeat: t = t - std::floor(t); break;
    case Spread::reflect: {
      const double m = std::fmod(std::abs(t), 2.0);
      t = m > 1.0 ? 2.0 - m : m;
      break;
    }
  }
  if (t <= stops.front().offset) return stops.front().color;
  if (t >= stops.back().offset) return stops.back().color;
  for (std::size_t i = 1; i < stops.size(); ++i) {
    if (t <= stops[i].offset) {
      const auto& a = stops[i - 1];
      const auto& b = stops[i];
      const double span = b.offset - a.offset;
      const double u = span > 0 ? (t - a.offset) / span : 1.0;
      return {lerp(a.color.r, b.color.r, u), lerp(a.color.g, b.color.g, u), lerp(a.color.b, b.color.b, u),
              lerp(a.color.a, b.color.a, u)};
    }
  }
  return stops.back().color;
}

void composite(RgbImage& canvas, const CoverageMask& mask, const Paint& paint, double opacity, Deadline& deadline) {
  if (mask.empty() || paint.kind == Paint::Kind::none || opacity <= 0) return;
  const bool solid = paint.kind == Paint::Kind::solid;
  for (int y = mask.y0; y < mask.y0 + mask.height; ++y) {
    deadline.check();
    for (int x = mask.x0; x < mask.x0 + mask.width; ++x) {
      const float cov = mask.at(x, y);
      if (cov <= 0.0f) continue;
      const Rgba c = solid ? paint.color : paint.at({x + 0.5, y + 0.5});
      const double a = std::clamp(cov * c.a * opacity, 0.0, 1.0);
      if (a <= 0) continue;
      std::uint8_t* px = canvas.at(x, y);
      const double src[3] = {c.r * 255.0, c.g * 255.0, c.b * 255.0};
      for (int k = 0; k < 3; ++k) {
        const double v = px[k] + (src[k] - px[k]) * a;
        px[k] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
}

}  // namespace mmzero::svg
