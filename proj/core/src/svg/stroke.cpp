#include "svg/stroke.hpp"

#include <cmath>
#include <numeric>

namespace mmzero::svg {

namespace {

double signed_area(const std::vector<Point>& pts) {
  double a = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) a += cross(pts[i], pts[(i + 1) % pts.size()]);
  return a / 2;
}

void push_oriented(Polylines& out, std::vector<Point> pts) {
  if (pts.size() < 3) return;
  if (signed_area(pts) < 0) std::reverse(pts.begin(), pts.end());
  out.push_back({std::move(pts), true});
}

int circle_segments(double radius, double scale) {
  return std::clamp(static_cast<int>(std::ceil(2 * M_PI * radius * scale / 2.0)), 8, 128);
}

void push_circle(Polylines& out, Point c, double r, double scale) {
  const int n = circle_segments(r, scale);
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = 2 * M_PI * i / n;
    pts.push_back({c.x + r * std::cos(t), c.y + r * std::sin(t)});
  }
  push_oriented(out, std::move(pts));
}

Point unit_normal(Point a, Point b) {
  const Point d = b - a;
  const double len = length(d);
  return {-d.y / len, d.x / len};
}

// Removes consecutive duplicates; a closed polyline also drops a duplicated
// closing point.
std::vector<Point> dedupe(const Polyline& line) {
  std::vector<Point> pts;
  for (const auto& p : line.points) {
    if (pts.empty() || length(p - pts.back()) > 1e-12) pts.push_back(p);
  }
  if (line.closed && pts.size() > 1 && length(pts.front() - pts.back()) <= 1e-12) pts.pop_back();
  return pts;
}

void add_join(Polylines& out, Point prev, Point at, Point next, const StrokeStyle& s, double hw, double scale) {
  const Point n0 = unit_normal(prev, at);
  const Point n1 = unit_normal(at, next);
  const double turn = cross(at - prev, next - at);
  if (std::abs(turn) < 1e-12 && dot(at - prev, next - at) > 0) return;  // collinear
  if (s.join == LineJoin::round) {
    push_circle(out, at, hw, scale);
    return;
  }
  // Outer side is opposite to the turn direction.
  const double side = turn > 0 ? -1.0 : 1.0;
  const Point a = at + n0 * (hw * side);
  const Point b = at + n1 * (hw * side);
  if (s.join == LineJoin::miter) {
    const Point bisector = n0 + n1;
    const double blen = length(bisector);
    if (blen > 1e-12) {
      const double cos_half = blen / 2;  // cos of half the angle between normals
      const double miter_ratio = 1.0 / cos_half;
      if (miter_ratio <= s.miter_limit) {
        const Point tip = at + bisector * (hw * side / (blen * cos_half));
        push_oriented(out, {at, a, tip, b});
        return;
      }
    }
  }
  push_oriented(out, {at, a, b});
}

}  // namespace

Polylines apply_dashes(const Polylines& lines, const std::vector<double>& pattern, double offset) {
  std::vector<double> dash = pattern;
  if (dash.size() % 2 == 1) dash.insert(dash.end(), pattern.begin(), pattern.end());
  const double total = std::accumulate(dash.begin(), dash.end(), 0.0);
  if (dash.empty() || total <= 0 || std::any_of(dash.begin(), dash.end(), [](double d) { return d < 0; })) {
    return lines;
  }
  Polylines out;
  for (const auto& line : lines) {
    std::vector<Point> pts = line.points;
    if (line.closed && !pts.empty()) pts.push_back(pts.front());
    std::size_t idx = 0;
    double into = std::fmod(offset, total);
    if (into < 0) into += total;
    while (into >= dash[idx]) {
      into -= dash[idx];
      idx = (idx + 1) % dash.size();
    }
    double remaining = dash[idx] - into;
    bool on = idx % 2 == 0;
    Polyline cur;
    if (on && !pts.empty()) cur.points.push_back(pts.front());
    for (std::size_t i = 1; i < pts.size(); ++i) {
      Point a = pts[i - 1];
      const Point b = pts[i];
      double seg = length(b - a);
      while (seg > remaining) {
        const Point cut = a + (b - a) * (remaining / seg);
        if (on) {
          cur.points.push_back(cut);
          out.push_back(std::move(cur));
          cur = Polyline{};
        } else {
          cur.points = {cut};
        }
        seg -= remaining;
        a = cut;
        idx = (idx + 1) % dash.size();
        remaining = dash[idx];
        on = !on;
        if (out.size() > 1'000'000) return out;
      }
      remaining -= seg;
      if (on) cur.points.push_back(b);
    }
    if (on && cur.points.size() > 1) out.push_back(std::move(cur));
  }
  return out;
}

Polylines stroke_outline(const Polylines& lines, const StrokeStyle& s, double scale, Deadline& deadline) {
  Polylines out;
  const double hw = s.width / 2;
  if (hw <= 0) return out;
  for (const auto& line : lines) {
    const auto pts = dedupe(line);
    if (pts.empty()) continue;
    if (pts.size() == 1) {
      if (s.cap == LineCap::round) push_circle(out, pts[0], hw, scale);
      if (s.cap == LineCap::square) {
        const Point p = pts[0];
        push_oriented(out, {{p.x - hw, p.y - hw}, {p.x + hw, p.y - hw}, {p.x + hw, p.y + hw}, {p.x - hw, p.y + hw}});
      }
      continue;
    }
    const bool closed = line.closed && pts.size() > 2;
    const std::size_t segs = closed ? pts.size() : pts.size() - 1;
    for (std::size_t i = 0; i < segs; ++i) {
      deadline.tick();
      Point a = pts[i];
      Point b = pts[(i + 1) % pts.size()];
      const Point dir = (b - a) * (1.0 / length(b - a));
      if (!closed && s.cap == LineCap::square) {
        if (i == 0) a = a - dir * hw;
        if (i + 1 == segs) b = b + dir * hw;
      }
      const Point n = unit_normal(a, b) * hw;
      push_oriented(out, {a + n, b + n, b - n, a - n});
    }
    const std::size_t first_join = closed ? 0 : 1;
    const std::size_t last_join = closed ? pts.size() : pts.size() - 1;
    for (std::size_t i = first_join; i < last_join; ++i) {
      deadline.tick();
      const Point prev = pts[(i + pts.size() - 1) % pts.size()];
      const Point next = pts[(i + 1) % pts.size()];
      add_join(out, prev, pts[i], next, s, hw, scale);
    }
    if (!closed && s.cap == LineCap::round) {
      push_circle(out, pts.front(), hw, scale);
      push_circle(out, pts.back(), hw, scale);
    }
  }
  return out;
}

}  // namespace mmzero::svg
