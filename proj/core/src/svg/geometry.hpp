#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

namespace mmzero::svg {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double length(Point a) { return std::hypot(a.x, a.y); }

// Maps (x, y) to (a x + c y + e, b x + d y + f).
struct Affine {
  double a = 1, b = 0, c = 0, d = 1, e = 0, f = 0;

  static Affine translate(double tx, double ty) { return {1, 0, 0, 1, tx, ty}; }
  static Affine scale(double sx, double sy) { return {sx, 0, 0, sy, 0, 0}; }
  static Affine rotate_degrees(double deg) {
    const double r = deg * M_PI / 180.0;
    return {std::cos(r), std::sin(r), -std::sin(r), std::cos(r), 0, 0};
  }

  Point apply(Point p) const { return {a * p.x + c * p.y + e, b * p.x + d * p.y + f}; }

  // (*this) * o : applies o first, then *this.
  Affine operator*(const Affine& o) const {
    return {a * o.a + c * o.b, b * o.a + d * o.b, a * o.c + c * o.d,
            b * o.c + d * o.d, a * o.e + c * o.f + e, b * o.e + d * o.f + f};
  }

  double determinant() const { return a * d - b * c; }

  Affine inverse() const {
    const double det = determinant();
    if (std::abs(det) < 1e-300) return {0, 0, 0, 0, 0, 0};
    const double id = 1.0 / det;
    return {d * id, -b * id, -c * id, a * id, (c * f - d * e) * id, (b * e - a * f) * id};
  }

  // Upper bound on how much a unit length in user space can stretch.
  double max_scale() const { return std::sqrt(std::max(a * a + b * b, c * c + d * d)); }
};

struct Polyline {
  std::vector<Point> points;
  bool closed = false;
};

using Polylines = std::vector<Polyline>;

struct RenderTimeout {};

// Cooperative cancellation point shared by the parsing and raster stages.
class Deadline {
 public:
  explicit Deadline(std::chrono::steady_clock::time_point at) : at_(at) {}

  void check() const {
    if (std::chrono::steady_clock::now() >= at_) throw RenderTimeout{};
  }
  // Checks the clock only every 256 calls.
  void tick() {
    if ((++counter_ & 0xff) == 0) check();
  }

 private:
  std::chrono::steady_clock::time_point at_;
  unsigned counter_ = 0;
};

}  // namespace mmzero::svg
