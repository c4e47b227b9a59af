#pragma once

#include <algorithm>
#include <cmath>

namespace ssf::tracker {

/// Axis-aligned bounding box, top-left origin, pixel units.
struct Box {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  bool valid() const {
    return w > 0 && h > 0 && std::isfinite(x) && std::isfinite(y) && std::isfinite(w) &&
           std::isfinite(h);
  }
  double area() const { return w * h; }
  bool operator==(const Box&) const = default;
};

/// Intersection over union; 0 for disjoint boxes, 1 for identical ones.
inline double iou(const Box& a, const Box& b) {
  double ix = std::max(a.x, b.x);
  double iy = std::max(a.y, b.y);
  double ix2 = std::min(a.x + a.w, b.x + b.w);
  double iy2 = std::min(a.y + a.h, b.y + b.h);
  double iw = std::max(0.0, ix2 - ix);
  double ih = std::max(0.0, iy2 - iy);
  double inter = iw * ih;
  double uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return inter / uni;
}

}  // namespace ssf::tracker
