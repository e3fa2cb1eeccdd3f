#include "hodet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "hodet/errors.hpp"

namespace hodet {

Box::Box(double x0, double y0, double x1, double y1) : x0_(x0), y0_(y0), x1_(x1), y1_(y1) {
  if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(x1) || !std::isfinite(y1) ||
      !(x0 < x1) || !(y0 < y1)) {
    std::ostringstream msg;
    msg << "invalid box (" << x0 << ", " << y0 << ", " << x1 << ", " << y1 << ")";
    throw InvalidBox(msg.str());
  }
}

double Box::shorter_side() const { return std::min(width(), height()); }

bool Box::contains(const Box& other) const {
  return other.x0_ >= x0_ && other.y0_ >= y0_ && other.x1_ <= x1_ && other.y1_ <= y1_;
}

std::ostream& operator<<(std::ostream& os, const Box& b) {
  return os << "(" << b.x0() << ", " << b.y0() << ", " << b.x1() << ", " << b.y1() << ")";
}

double intersection_area(const Box& a, const Box& b) {
  const double w = std::min(a.x1(), b.x1()) - std::max(a.x0(), b.x0());
  const double h = std::min(a.y1(), b.y1()) - std::max(a.y0(), b.y0());
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  if (inter == 0.0) return 0.0;
  return inter / (a.area() + b.area() - inter);
}

std::string_view to_string(HierarchyScheme scheme) {
  return scheme == HierarchyScheme::Overlapped ? "overlapped" : "non-overlapped";
}

HierarchyScheme parse_scheme(std::string_view name) {
  if (name == "overlapped") return HierarchyScheme::Overlapped;
  if (name == "non-overlapped" || name == "nonoverlapped" || name == "non_overlapped") {
    return HierarchyScheme::NonOverlapped;
  }
  throw ConfigError("unknown hierarchy scheme '" + std::string(name) + "'");
}

std::array<Box, kNumChildren> children(const Box& parent, HierarchyScheme scheme) {
  const double x0 = parent.x0(), y0 = parent.y0(), x1 = parent.x1(), y1 = parent.y1();
  const double w = parent.width(), h = parent.height();

  if (scheme == HierarchyScheme::NonOverlapped) {
    const double mx = x0 + 0.5 * w, my = y0 + 0.5 * h;
    const double qx = 0.25 * w, qy = 0.25 * h;
    return {Box(x0, y0, mx, my), Box(mx, y0, x1, my), Box(x0, my, mx, y1), Box(mx, my, x1, y1),
            Box(x0 + qx, y0 + qy, x1 - qx, y1 - qy)};
  }

  const double cw = 0.75 * w, ch = 0.75 * h;
  const double ox = 0.125 * w, oy = 0.125 * h;
  return {Box(x0, y0, x0 + cw, y0 + ch), Box(x1 - cw, y0, x1, y0 + ch),
          Box(x0, y1 - ch, x0 + cw, y1), Box(x1 - cw, y1 - ch, x1, y1),
          Box(x0 + ox, y0 + oy, x1 - ox, y1 - oy)};
}

double child_area_ratio(HierarchyScheme scheme) {
  return scheme == HierarchyScheme::Overlapped ? 9.0 / 16.0 : 0.25;
}

}  // namespace hodet
