#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "pipefuse/geometry.hpp"

using namespace pipefuse;

namespace {

Box3D cube(double x, double y, double z, double s = 1.0) { return {{x, y, z}, {x + s, y + s, z + s}}; }

// Voxel-counting IoU over integer boxes in a 10^3 grid.
double voxel_iou(const Box3D& a, const Box3D& b) {
  long inter = 0, uni = 0;
  for (int x = 0; x < 10; ++x) {
    for (int y = 0; y < 10; ++y) {
      for (int z = 0; z < 10; ++z) {
        const Vec3 c{x + 0.5, y + 0.5, z + 0.5};
        auto inside = [&](const Box3D& box) {
          return c.x > box.min.x && c.x < box.max.x && c.y > box.min.y && c.y < box.max.y && c.z > box.min.z &&
                 c.z < box.max.z;
        };
        const bool ia = inside(a), ib = inside(b);
        inter += ia && ib;
        uni += ia || ib;
      }
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

Box3D random_int_box(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, 10);
  Box3D b;
  for (int a = 0; a < 3; ++a) {
    int lo = d(rng), hi = d(rng);
    if (lo > hi) std::swap(lo, hi);
    b.min[a] = lo;
    b.max[a] = hi;
  }
  return b;
}

}  // namespace

TEST_CASE("iou_2d cases") {
  const Rect2 unit{0, 0, 1, 1};
  CHECK(iou_2d(unit, unit) == 1.0);
  CHECK(iou_2d(unit, {2, 2, 3, 3}) == 0.0);
  CHECK(iou_2d(unit, {0.5, 0, 1.5, 1}) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(iou_2d({0, 0, 0, 0}, {0, 0, 0, 0}) == 0.0);
  CHECK(iou_2d(unit, {1, 0, 2, 1}) == 0.0);
}

TEST_CASE("iou_3d cases") {
  CHECK(iou_3d(cube(0, 0, 0), cube(0, 0, 0)) == 1.0);
  CHECK(iou_3d(cube(0, 0, 0), cube(2, 2, 2)) == 0.0);
  CHECK(std::abs(iou_3d(cube(0, 0, 0), {{0.5, 0, 0}, {1.5, 1, 1}}) - 1.0 / 3.0) < 1e-12);
  CHECK(iou_3d({{1, 1, 1}, {1, 1, 1}}, {{1, 1, 1}, {1, 1, 1}}) == 0.0);
}

TEST_CASE("diou_3d hand cases") {
  CHECK(std::abs(diou_3d(cube(0, 0, 0), cube(0, 0, 0)) - 1.0) < 1e-9);
  CHECK(std::abs(diou_3d(cube(0, 0, 0), cube(2, 2, 2)) - (-12.0 / 27.0)) < 1e-9);
  CHECK(std::abs(diou_3d(cube(0, 0, 0), {{0.5, 0, 0}, {1.5, 1, 1}}) - 0.274510) < 1e-6);
  CHECK(std::abs(diou_3d(cube(0, 0, 0), {{0.5, 0, 0}, {1.5, 1, 1}}) - (1.0 / 3.0 - 0.25 / 4.25)) < 1e-12);
  const Box3D point{{2, 2, 2}, {2, 2, 2}};
  CHECK(diou_3d(point, point) == 1.0);
}

TEST_CASE("enclosing box and center distance") {
  CHECK(enclosing_box(cube(0, 0, 0), cube(0, 0, 0)) == cube(0, 0, 0));
  CHECK(enclosing_box(cube(0, 0, 0), cube(2, 2, 2)) == Box3D{{0, 0, 0}, {3, 3, 3}});
  CHECK(enclosing_box(cube(0, 0, 0), {{0.5, 0, 0}, {1.5, 1, 1}}) == Box3D{{0, 0, 0}, {1.5, 1, 1}});
  CHECK(center_distance(cube(0, 0, 0), cube(0, 0, 0)) == 0.0);
  CHECK(std::abs(center_distance(cube(0, 0, 0), cube(2, 2, 2)) - std::sqrt(12.0)) < 1e-12);
  CHECK(std::abs(center_distance(cube(0, 0, 0), cube(0.5, 0, 0)) - 0.5) < 1e-12);
}

TEST_CASE("voxel oracle on random integer boxes") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Box3D a = random_int_box(rng), b = random_int_box(rng);
    CHECK(iou_3d(a, b) == voxel_iou(a, b));
  }
}

TEST_CASE("symmetry, bounds and containment") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0), s(0.0, 3.0);
  for (int i = 0; i < 2000; ++i) {
    Box3D a, b;
    for (int ax = 0; ax < 3; ++ax) {
      a.min[ax] = u(rng);
      a.max[ax] = a.min[ax] + s(rng);
      b.min[ax] = u(rng);
      b.max[ax] = b.min[ax] + s(rng);
    }
    CHECK(iou_3d(a, b) == iou_3d(b, a));
    CHECK(diou_3d(a, b) == diou_3d(b, a));
    const double iou = iou_3d(a, b);
    CHECK(iou >= 0.0);
    CHECK(iou <= 1.0);
    CHECK(diou_3d(a, b) <= iou);
    CHECK(diou_3d(a, b) > -1.0);
    CHECK(diou_3d(a, a) == 1.0);
    const Box3D e = enclosing_box(a, b);
    CHECK(e.contains(a));
    CHECK(e.contains(b));
    CHECK(e.volume() >= union_volume(a, b) - 1e-12);
  }
}

TEST_CASE("diou decreases along a ray while iou stays zero") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> s(0.2, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Box3D a{{0, 0, 0}, {s(rng), s(rng), s(rng)}};
    const Vec3 size{s(rng), s(rng), s(rng)};
    Vec3 dir{n(rng), n(rng), n(rng)};
    dir = (1.0 / dir.norm()) * dir;
    double prev = 2.0;
    for (double t = 10.0; t < 40.0; t += 1.0) {
      const Vec3 lo = a.center() + t * dir;
      const Box3D b{lo, lo + size};
      REQUIRE(iou_3d(a, b) == 0.0);
      const double d = diou_3d(a, b);
      CHECK(d < prev);
      prev = d;
    }
  }
}
