#include "svg/path.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>

namespace mmzero::svg {

namespace {

class Scanner {
 public:
  explicit Scanner(std::string_view s) : s_(s) {}

  void skip_separators() {
    while (i_ < s_.size() && (std::isspace(static_cast<unsigned char>(s_[i_])) || s_[i_] == ',')) ++i_;
  }
  bool at_end() {
    skip_separators();
    return i_ >= s_.size();
  }
  bool at_command() {
    skip_separators();
    return i_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[i_])) && s_[i_] != 'e' && s_[i_] != 'E';
  }
  char command() { return s_[i_++]; }

  bool number(double& out) {
    skip_separators();
    const std::size_t start = i_;
    std::size_t j = i_;
    if (j < s_.size() && (s_[j] == '+' || s_[j] == '-')) ++j;
    bool digits = false;
    while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j, digits = true;
    if (j < s_.size() && s_[j] == '.') {
      ++j;
      while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j, digits = true;
    }
    if (!digits) return false;
    if (j < s_.size() && (s_[j] == 'e' || s_[j] == 'E')) {
      std::size_t k = j + 1;
      if (k < s_.size() && (s_[k] == '+' || s_[k] == '-')) ++k;
      if (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) {
        while (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) ++k;
        j = k;
      }
    }
    const std::string tok(s_.substr(start, j - start));
    out = std::strtod(tok.c_str(), nullptr);
    i_ = j;
    return std::isfinite(out);
  }

  // Arc flags may be written without separators ("a1 1 0 01 5 5").
  bool flag(bool& out) {
    skip_separators();
    if (i_ < s_.size() && (s_[i_] == '0' || s_[i_] == '1')) {
      out = s_[i_++] == '1';
      return true;
    }
    return false;
  }

 private:
  std::string_view s_;
  std::size_t i_ = 0;
};

void flatten_cubic(Point p0, Point p1, Point p2, Point p3, double scale, std::vector<Point>& out) {
  const double len = (length(p1 - p0) + length(p2 - p1) + length(p3 - p2)) * scale;
  const int n = std::clamp(static_cast<int>(std::ceil(std::sqrt(len * 2.0))), 1, 256);
  for (int i = 1; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const double u = 1.0 - t;
    const double b0 = u * u * u, b1 = 3 * u * u * t, b2 = 3 * u * t * t, b3 = t * t * t;
    out.push_back({b0 * p0.x + b1 * p1.x + b2 * p2.x + b3 * p3.x, b0 * p0.y + b1 * p1.y + b2 * p2.y + b3 * p3.y});
  }
}

}  // namespace

void Path::arc_to(Point from, double rx, double ry, double x_rot_deg, bool large, bool sweep, Point to) {
  rx = std::abs(rx);
  ry = std::abs(ry);
  if ((from.x == to.x && from.y == to.y)) return;
  if (rx == 0 || ry == 0) {
    line_to(to);
    return;
  }
  const double phi = x_rot_deg * M_PI / 180.0;
  const double cp = std::cos(phi), sp = std::sin(phi);
  const double dx = (from.x - to.x) / 2, dy = (from.y - to.y) / 2;
  const double x1 = cp * dx + sp * dy;
  const double y1 = -sp * dx + cp * dy;
  const double lambda = (x1 * x1) / (rx * rx) + (y1 * y1) / (ry * ry);
  if (lambda > 1) {
    rx *= std::sqrt(lambda);
    ry *= std::sqrt(lambda);
  }
  const double num = rx * rx * ry * ry - rx * rx * y1 * y1 - ry * ry * x1 * x1;
  const double den = rx * rx * y1 * y1 + ry * ry * x1 * x1;
  double coef = den == 0 ? 0 : std::sqrt(std::max(0.0, num / den));
  if (large == sweep) coef = -coef;
  const double cxp = coef * rx * y1 / ry;
  const double cyp = -coef * ry * x1 / rx;
  const double cx = cp * cxp - sp * cyp + (from.x + to.x) / 2;
  const double cy = sp * cxp + cp * cyp + (from.y + to.y) / 2;

  auto angle = [](double ux, double uy, double vx, double vy) {
    return std::atan2(ux * vy - uy * vx, ux * vx + uy * vy);
  };
  const double theta1 = angle(1, 0, (x1 - cxp) / rx, (y1 - cyp) / ry);
  double dtheta = angle((x1 - cxp) / rx, (y1 - cyp) / ry, (-x1 - cxp) / rx, (-y1 - cyp) / ry);
  if (!sweep && dtheta > 0) dtheta -= 2 * M_PI;
  if (sweep && dtheta < 0) dtheta += 2 * M_PI;

  const int segments = std::max(1, static_cast<int>(std::ceil(std::abs(dtheta) / (M_PI / 2) - 1e-9)));
  const double delta = dtheta / segments;
  const double k = 4.0 / 3.0 * std::tan(delta / 4);
  auto on_ellipse = [&](double t) {
    return Point{cx + rx * std::cos(t) * cp - ry * std::sin(t) * sp, cy + rx * std::cos(t) * sp + ry * std::sin(t) * cp};
  };
  auto derivative = [&](double t) {
    return Point{-rx * std::sin(t) * cp - ry * std::cos(t) * sp, -rx * std::sin(t) * sp + ry * std::cos(t) * cp};
  };
  double t = theta1;
  for (int i = 0; i < segments; ++i) {
    const double t2 = t + delta;
    const Point a = on_ellipse(t), b = on_ellipse(t2);
    const Point c1 = a + derivative(t) * k;
    const Point c2 = b - derivative(t2) * k;
    cubic_to(c1, c2, i + 1 == segments ? to : b);
    t = t2;
  }
}

Path parse_path_data(std::string_view d) {
  Path path;
  Scanner sc(d);
  Point cur, start, last_ctrl;
  char last_cmd = 0;
  char cmd = 0;
  while (!sc.at_end()) {
    if (sc.at_command()) {
      cmd = sc.command();
    } else if (cmd == 0) {
      break;
    } else if (cmd == 'M') {
      cmd = 'L';
    } else if (cmd == 'm') {
      cmd = 'l';
    } else if (cmd == 'Z' || cmd == 'z') {
      break;
    }
    const bool rel = std::islower(static_cast<unsigned char>(cmd));
    const Point base = rel ? cur : Point{};
    double v[7];
    auto read = [&](int n) {
      for (int i = 0; i < n; ++i) {
        if (!sc.number(v[i])) return false;
      }
      return true;
    };
    const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(cmd)));
    bool ok = true;
    switch (up) {
      case 'M':
        if ((ok = read(2))) {
          cur = base + Point{v[0], v[1]};
          start = cur;
          path.move_to(cur);
        }
        break;
      case 'L':
        if ((ok = read(2))) {
          cur = base + Point{v[0], v[1]};
          path.line_to(cur);
        }
        break;
      case 'H':
        if ((ok = read(1))) {
          cur = {rel ? cur.x + v[0] : v[0], cur.y};
          path.line_to(cur);
        }
        break;
      case 'V':
        if ((ok = read(1))) {
          cur = {cur.x, rel ? cur.y + v[0] : v[0]};
          path.line_to(cur);
        }
        break;
      case 'C':
        if ((ok = read(6))) {
          const Point c1 = base + Point{v[0], v[1]}, c2 = base + Point{v[2], v[3]}, p = base + Point{v[4], v[5]};
          path.cubic_to(c1, c2, p);
          last_ctrl = c2;
          cur = p;
        }
        break;
      case 'S':
        if ((ok = read(4))) {
          const char lu = static_cast<char>(std::toupper(static_cast<unsigned char>(last_cmd)));
          const Point c1 = (lu == 'C' || lu == 'S') ? cur * 2 - last_ctrl : cur;
          const Point c2 = base + Point{v[0], v[1]}, p = base + Point{v[2], v[3]};
          path.cubic_to(c1, c2, p);
          last_ctrl = c2;
          cur = p;
        }
        break;
      case 'Q':
        if ((ok = read(4))) {
          const Point q = base + Point{v[0], v[1]}, p = base + Point{v[2], v[3]};
          path.cubic_to(cur + (q - cur) * (2.0 / 3), p + (q - p) * (2.0 / 3), p);
          last_ctrl = q;
          cur = p;
        }
        break;
      case 'T':
        if ((ok = read(2))) {
          const char lu = static_cast<char>(std::toupper(static_cast<unsigned char>(last_cmd)));
          const Point q = (lu == 'Q' || lu == 'T') ? cur * 2 - last_ctrl : cur;
          const Point p = base + Point{v[0], v[1]};
          path.cubic_to(cur + (q - cur) * (2.0 / 3), p + (q - p) * (2.0 / 3), p);
          last_ctrl = q;
          cur = p;
        }
        break;
      case 'A': {
        bool large = false, sweep = false;
        ok = sc.number(v[0]) && sc.number(v[1]) && sc.number(v[2]) && sc.flag(large) && sc.flag(sweep) &&
             sc.number(v[3]) && sc.number(v[4]);
        if (ok) {
          const Point p = base + Point{v[3], v[4]};
          path.arc_to(cur, v[0], v[1], v[2], large, sweep, p);
          cur = p;
        }
        break;
      }
      case 'Z':
        path.close();
        cur = start;
        break;
      default:
        ok = false;
    }
    if (!ok) break;
    last_cmd = cmd;
  }
  return path;
}

std::vector<double> parse_number_list(std::string_view s) {
  std::vector<double> out;
  Scanner sc(s);
  double v;
  while (!sc.at_end() && sc.number(v)) out.push_back(v);
  return out;
}

Path rect_path(double x, double y, double w, double h, double rx, double ry) {
  Path p;
  if (rx <= 0 && ry <= 0) {
    p.move_to({x, y});
    p.line_to({x + w, y});
    p.line_to({x + w, y + h});
    p.line_to({x, y + h});
    p.close();
    return p;
  }
  if (rx <= 0) rx = ry;
  if (ry <= 0) ry = rx;
  rx = std::min(rx, w / 2);
  ry = std::min(ry, h / 2);
  p.move_to({x + rx, y});
  p.line_to({x + w - rx, y});
  p.arc_to({x + w - rx, y}, rx, ry, 0, false, true, {x + w, y + ry});
  p.line_to({x + w, y + h - ry});
  p.arc_to({x + w, y + h - ry}, rx, ry, 0, false, true, {x + w - rx, y + h});
  p.line_to({x + rx, y + h});
  p.arc_to({x + rx, y + h}, rx, ry, 0, false, true, {x, y + h - ry});
  p.line_to({x, y + ry});
  p.arc_to({x, y + ry}, rx, ry, 0, false, true, {x + rx, y});
  p.close();
  return p;
}

Path ellipse_path(double cx, double cy, double rx, double ry) {
  Path p;
  p.move_to({cx + rx, cy});
  p.arc_to({cx + rx, cy}, rx, ry, 0, false, true, {cx - rx, cy});
  p.arc_to({cx - rx, cy}, rx, ry, 0, false, true, {cx + rx, cy});
  p.close();
  return p;
}

Polylines flatten(const Path& path, double scale, Deadline& deadline) {
  Polylines out;
  Point cur, start;
  auto ensure_open = [&]() {
    if (out.empty() || out.back().closed) {
      out.push_back({{cur}, false});
    }
  };
  for (const auto& c : path.commands()) {
    deadline.tick();
    switch (c.kind) {
      case PathCommand::Kind::move:
        cur = start = c.p3;
        out.push_back({{cur}, false});
        break;
      case PathCommand::Kind::line:
        ensure_open();
        out.back().points.push_back(c.p3);
        cur = c.p3;
        break;
      case PathCommand::Kind::cubic:
        ensure_open();
        flatten_cubic(cur, c.p1, c.p2, c.p3, scale, out.back().points);
        cur = c.p3;
        break;
      case PathCommand::Kind::close:
        if (!out.empty() && !out.back().closed) out.back().closed = true;
        cur = start;
        break;
    }
  }
  return out;
}

}  // namespace mmzero::svg
