#pragma once

// Axis-aligned box arithmetic in 2D and 3D. Boxes are closed intervals per
// axis; faces that only touch contribute zero area/volume.

#include <array>
#include <cmath>

namespace pipefuse {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

/// Closed interval [lo, hi] on one axis.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct Rect2 {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  bool valid() const { return min_x <= max_x && min_y <= max_y; }
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  double area() const { return width() * height(); }
  friend bool operator==(const Rect2&, const Rect2&) = default;
};

struct Box3D {
  Vec3 min;
  Vec3 max;

  static Box3D from_intervals(Interval x, Interval y, Interval z) {
    return {{x.lo, y.lo, z.lo}, {x.hi, y.hi, z.hi}};
  }

  bool valid() const { return min.x <= max.x && min.y <= max.y && min.z <= max.z; }
  Interval axis(int a) const { return {min[a], max[a]}; }
  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  double volume() const {
    const Vec3 e = extent();
    return e.x * e.y * e.z;
  }
  bool contains(const Box3D& other) const;
  friend bool operator==(const Box3D&, const Box3D&) = default;
};

double intersection_area(const Rect2& a, const Rect2& b);
double iou_2d(const Rect2& a, const Rect2& b);

double intersection_volume(const Box3D& a, const Box3D& b);
double union_volume(const Box3D& a, const Box3D& b);
double iou_3d(const Box3D& a, const Box3D& b);

/// Smallest box containing both inputs.
Box3D enclosing_box(const Box3D& a, const Box3D& b);

double center_distance(const Box3D& a, const Box3D& b);

/// IoU minus squared center distance over squared diagonal of the enclosing
/// box. Two identical point boxes (zero diagonal) score 1.
double diou_3d(const Box3D& a, const Box3D& b);

}  // namespace pipefuse
