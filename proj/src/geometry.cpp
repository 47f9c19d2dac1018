#include "pipefuse/geometry.hpp"

#include <algorithm>

namespace pipefuse {

namespace {

double overlap(double a_lo, double a_hi, double b_lo, double b_hi) {
  return std::max(0.0, std::min(a_hi, b_hi) - std::max(a_lo, b_lo));
}

}  // namespace

bool Box3D::contains(const Box3D& other) const {
  for (int a = 0; a < 3; ++a) {
    if (other.min[a] < min[a] || other.max[a] > max[a]) return false;
  }
  return true;
}

double intersection_area(const Rect2& a, const Rect2& b) {
  return overlap(a.min_x, a.max_x, b.min_x, b.max_x) *
         overlap(a.min_y, a.max_y, b.min_y, b.max_y);
}

double iou_2d(const Rect2& a, const Rect2& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

double intersection_volume(const Box3D& a, const Box3D& b) {
  double v = 1.0;
  for (int ax = 0; ax < 3; ++ax) v *= overlap(a.min[ax], a.max[ax], b.min[ax], b.max[ax]);
  return v;
}

double union_volume(const Box3D& a, const Box3D& b) {
  return a.volume() + b.volume() - intersection_volume(a, b);
}

double iou_3d(const Box3D& a, const Box3D& b) {
  const double inter = intersection_volume(a, b);
  const double uni = a.volume() + b.volume() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

Box3D enclosing_box(const Box3D& a, const Box3D& b) {
  Box3D out;
  for (int ax = 0; ax < 3; ++ax) {
    out.min[ax] = std::min(a.min[ax], b.min[ax]);
    out.max[ax] = std::max(a.max[ax], b.max[ax]);
  }
  return out;
}

double center_distance(const Box3D& a, const Box3D& b) {
  return (a.center() - b.center()).norm();
}

double diou_3d(const Box3D& a, const Box3D& b) {
  const Vec3 diag = enclosing_box(a, b).extent();
  const double c2 = diag.x * diag.x + diag.y * diag.y + diag.z * diag.z;
  if (c2 == 0.0) return 1.0;
  const Vec3 dc = a.center() - b.center();
  const double d2 = dc.x * dc.x + dc.y * dc.y + dc.z * dc.z;
  return iou_3d(a, b) - d2 / c2;
}

}  // namespace pipefuse
