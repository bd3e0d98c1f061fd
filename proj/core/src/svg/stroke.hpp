#pragma once

#include <vector>

#include "svg/geometry.hpp"

namespace mmzero::svg {

enum class LineCap { butt, round, square };
enum class LineJoin { miter, round, bevel };

struct StrokeStyle {
  double width = 1.0;
  LineCap cap = LineCap::butt;
  LineJoin join = LineJoin::miter;
  double miter_limit = 4.0;
  std::vector<double> dashes;
  double dash_offset = 0.0;
};

// Splits polylines into dash pieces (open polylines).
Polylines apply_dashes(const Polylines& lines, const std::vector<double>& pattern, double offset);

// Outline of the stroke as a set of positively oriented polygons whose nonzero
// union is the stroked area. `scale` is the user-to-device stretch, used to
// pick the number of segments on round joins and caps.
Polylines stroke_outline(const Polylines& lines, const StrokeStyle& style, double scale, Deadline& deadline);

}  // namespace mmzero::svg
