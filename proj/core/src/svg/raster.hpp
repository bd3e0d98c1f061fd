#pragma once

#include <vector>

#include "mmzero/image.hpp"
#include "svg/color.hpp"
#include "svg/geometry.hpp"

namespace mmzero::svg {

enum class FillRule { nonzero, evenodd };

// Per-pixel coverage in [0, 1] over a clipped bounding box of the canvas.
struct CoverageMask {
  int x0 = 0, y0 = 0, width = 0, height = 0;
  std::vector<float> coverage;

  bool empty() const { return width <= 0 || height <= 0; }
  float at(int x, int y) const {
    return coverage[static_cast<std::size_t>(y - y0) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x - x0)];
  }
};

// Scanline rasterization with four sub-scanlines per pixel row and exact
// horizontal span coverage. Polygons are in device pixels and implicitly closed.
CoverageMask rasterize(const Polylines& polygons, FillRule rule, int canvas_w, int canvas_h, Deadline& deadline);

struct GradientStop {
  double offset = 0;
  Rgba color;
};

struct Paint {
  enum class Kind { none, solid, linear, radial } kind = Kind::none;
  Rgba color;  // solid
  std::vector<GradientStop> stops;
  Affine device_to_gradient;  // maps device pixel centres into gradient space
  Point p1, p2;               // linear: start/end; radial: centre/focus
  double radius = 0;
  enum class Spread { pad, reflect, repeat } spread = Spread::pad;

  Rgba at(Point device) const;
};

// Source-over compositing of paint * coverage * opacity onto an opaque canvas.
void composite(RgbImage& canvas, const CoverageMask& mask, const Paint& paint, double opacity, Deadline& deadline);

}  // namespace mmzero::svg
