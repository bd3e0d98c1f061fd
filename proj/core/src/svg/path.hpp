#pragma once

#include <string_view>
#include <vector>

#include "svg/geometry.hpp"

namespace mmzero::svg {

// Absolute path with quadratics and arcs already converted to cubics.
struct PathCommand {
  enum class Kind { move, line, cubic, close } kind;
  Point p1, p2, p3;  // line/move use p3 only
};

class Path {
 public:
  void move_to(Point p) { cmds_.push_back({PathCommand::Kind::move, {}, {}, p}); }
  void line_to(Point p) { cmds_.push_back({PathCommand::Kind::line, {}, {}, p}); }
  void cubic_to(Point a, Point b, Point c) { cmds_.push_back({PathCommand::Kind::cubic, a, b, c}); }
  void close() { cmds_.push_back({PathCommand::Kind::close, {}, {}, {}}); }
  // Appends an SVG elliptical arc from `from` to `to` as cubic segments.
  void arc_to(Point from, double rx, double ry, double x_rot_deg, bool large, bool sweep, Point to);

  const std::vector<PathCommand>& commands() const { return cmds_; }
  bool empty() const { return cmds_.empty(); }

 private:
  std::vector<PathCommand> cmds_;
};

// Parses SVG path data. Stops at the first malformed token and keeps what was
// parsed before it, as renderers commonly do.
Path parse_path_data(std::string_view d);

// Parses a list of numbers separated by whitespace and/or commas.
std::vector<double> parse_number_list(std::string_view s);

Path rect_path(double x, double y, double w, double h, double rx, double ry);
Path ellipse_path(double cx, double cy, double rx, double ry);

// Flattens to polylines in the path's own coordinates. `scale` is the largest
// stretch applied afterwards, used to pick the subdivision count.
Polylines flatten(const Path& path, double scale, Deadline& deadline);

}  // namespace mmzero::svg
