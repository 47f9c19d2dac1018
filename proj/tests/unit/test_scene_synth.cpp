#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pipefuse/errors.hpp"
#include "pipefuse/scene_synth.hpp"

using namespace pipefuse;

namespace {

double mean_min_true_diou(double sigma, int scenes) {
  double total = 0.0;
  int n = 0;
  for (int s = 0; s < scenes; ++s) {
    const Scene sc = generate_scene(static_cast<std::uint64_t>(s) + 9000, 2);
    const SceneDetections det = perturb_boxes(sc.truth, sigma, static_cast<std::uint64_t>(s));
    for (const auto& p : sc.truth.pipelines) {
      auto find = [](const ViewDetections& v, const std::string& id) {
        for (const auto& b : v.boxes) {
          if (b.id == id) return b;
        }
        FAIL("missing id");
        return ViewBox2D{};
      };
      const auto sc3 = pairwise_diou(lift_boxes(det, find(det.b, p.b.id), find(det.c, p.c.id), find(det.d, p.d.id)));
      total += std::min({sc3.bc, sc3.bd, sc3.cd});
      ++n;
    }
  }
  return total / n;
}

}  // namespace

TEST_CASE("classify_geometry on model-coordinate pipes") {
  auto m = from_model_coordinates;
  const auto v = classify_geometry(m(3.0, 1.3, 0.0), m(3.0, 1.3, 2.0));
  CHECK(v.family == Orientation::Vertical);
  const auto h = classify_geometry(m(2.7, 1.3, 0.0), m(3.3, 1.3, 2.0));
  CHECK(h.family == Orientation::HorizontalInclined);
  CHECK(std::abs(h.angle_deg - 16.70) < 0.01);
  const auto d = classify_geometry(m(3.0, 1.1, 0.0), m(3.0, 1.5, 2.0));
  CHECK(d.family == Orientation::DeeplyInclined);
  CHECK(std::abs(d.angle_deg - 11.31) < 0.01);
  CHECK_THROWS_AS(classify_geometry(m(2.7, 1.1, 0.0), m(3.3, 1.5, 2.0)), ParameterError);
  CHECK_THROWS_AS(classify_geometry({1, 1, 1}, {1, 1, 1}), ParameterError);
}

TEST_CASE("pipeline bounds of a straight pipe") {
  const PipelineSpec p{{3.0, 0.0, 1.3}, {3.0, 2.0, 1.3}, 0.5, Orientation::Vertical};
  const Box3D b = pipeline_bounds(p);
  CHECK(std::abs(b.min.z - 1.05) < 1e-12);
  CHECK(std::abs(b.max.z - 1.55) < 1e-12);
  CHECK(std::abs(b.min.x - 2.75) < 1e-12);
  CHECK(b.min.y == 0.0);
  CHECK(b.max.y == 2.0);
}

TEST_CASE("centerline distance") {
  const PipelineSpec a{{0, 0, 0}, {0, 2, 0}, 0.2, Orientation::Vertical};
  const PipelineSpec b{{1, 0, 0}, {1, 2, 0}, 0.2, Orientation::Vertical};
  CHECK(std::abs(centerline_distance(a, b) - 1.0) < 1e-12);
  const PipelineSpec c{{0.5, 1, -1}, {0.5, 1, 1}, 0.2, Orientation::Vertical};
  CHECK(std::abs(centerline_distance(a, c) - 0.5) < 1e-12);
  CHECK(centerline_distance(a, b) == centerline_distance(b, a));
}

TEST_CASE("generate_scene") {
  CHECK(generate_scene(1, 0).spec.pipelines.empty());
  CHECK(generate_scene(1, 0).truth.pipelines.empty());
  const Scene a = generate_scene(42, 3), b = generate_scene(42, 3);
  CHECK(a.spec == b.spec);
  CHECK(a.truth == b.truth);
  CHECK_FALSE(generate_scene(43, 3).spec == a.spec);
  CHECK_THROWS_AS(generate_scene(1, 2, {0.0, 1.0, 1.0}), ParameterError);
  CHECK_THROWS_AS(generate_scene(1, 60), PlacementError);

  int counts[3] = {0, 0, 0};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Scene s = generate_scene(seed, 1 + seed % 4);
    for (std::size_t k = 0; k < s.spec.pipelines.size(); ++k) {
      const PipelineSpec& p = s.spec.pipelines[k];
      CHECK(classify_geometry(p.p0, p.p1).family == p.family);
      ++counts[variant_of(p.family) - 1];
      const Box3D box = pipeline_bounds(p);
      CHECK(box.min.x >= 0.0);
      CHECK(box.max.x <= s.spec.extents.x);
      CHECK(box.min.y >= 0.0);
      CHECK(box.max.y <= s.spec.extents.y);
      CHECK(box.min.z >= 0.0);
      CHECK(box.max.z <= s.spec.extents.z);
      for (std::size_t j = 0; j < k; ++j) {
        const PipelineSpec& q = s.spec.pipelines[j];
        CHECK(centerline_distance(p, q) > (p.diameter + q.diameter) / 2.0);
      }
    }
  }
  for (int c : counts) CHECK(c > 500);
}

TEST_CASE("project_views") {
  const Scene s = generate_scene(7, 4);
  for (const auto& p : s.truth.pipelines) {
    CHECK(p.b.label.str() == "1-B");
    CHECK(p.c.label.variant == variant_of(p.family));
    CHECK(p.d.label.variant == variant_of(p.family));
    const auto t = lift_boxes(s.truth.detections(), p.b, p.c, p.d);
    const auto sc = pairwise_diou(t);
    CHECK(std::abs(sc.bc - 1.0) < 1e-9);
    CHECK(std::abs(sc.bd - 1.0) < 1e-9);
    CHECK(std::abs(sc.cd - 1.0) < 1e-9);
    for (int a = 0; a < 3; ++a) {
      CHECK(std::abs(t.b.box.min[a] - p.box.min[a]) < 1e-9);
      CHECK(std::abs(t.b.box.max[a] - p.box.max[a]) < 1e-9);
    }
  }
  SceneSpec deep;
  deep.seed = 1;
  deep.pipelines = {{{3.0, 0.0, 1.1}, {3.0, 2.0, 1.5}, 0.5, Orientation::DeeplyInclined}};
  const GroundTruth g = project_views(deep);
  CHECK(g.pipelines[0].b.label.str() == "1-B");
  CHECK(g.pipelines[0].c.label.str() == "3-C");
  CHECK(g.pipelines[0].d.label.str() == "3-D");
  CHECK(std::abs(g.pipelines[0].apex.t0_ns - 26.0) < 1e-9);
}

TEST_CASE("hyperbola and wavelet") {
  CHECK(hyperbola_travel_time_ns(1.0, 2.0, 0.1, 2.0) == doctest::Approx(20.0));
  for (double far : {20.0, 50.0}) {
    const double t = hyperbola_travel_time_ns(0.5, 0.0, 0.1, far);
    CHECK(std::abs(t / ((2.0 / 0.1) * far) - 1.0) < 0.01);
  }
  CHECK(ricker(0.0, 600e6) == 1.0);
  CHECK(ricker(1.0, 600e6) == ricker(-1.0, 600e6));
}

TEST_CASE("render_bscan") {
  SceneSpec empty;
  const Radargram z = render_bscan(empty, 1.0);
  for (double v : z.data()) CHECK(v == 0.0);
  CHECK(z.n_samples() == 600);
  CHECK(z.n_traces() == 301);
  CHECK_THROWS_AS(render_bscan(empty, 5.0), ParameterError);

  for (double d : {0.4, 1.3, 2.2}) {
    SceneSpec s;
    s.pipelines = {{{2.5, 0.2, d}, {2.5, 1.8, d}, 0.3, Orientation::Vertical}};
    const Radargram r = render_bscan(s, 1.0);
    const ApexObservation apex = find_apex(r, s.velocity_m_per_ns);
    CHECK(std::abs(apex.t0_ns - 2.0 * d / s.velocity_m_per_ns) <= r.sample_interval_ns());
    CHECK(std::abs(apex.x0_m - 2.5) <= r.trace_spacing_m());
    CHECK(std::abs(depth_from_apex(apex) - d) <= r.sample_interval_ns() * s.velocity_m_per_ns / 2.0);
  }
}

TEST_CASE("perturb_boxes") {
  const Scene s = generate_scene(5, 3);
  const SceneDetections same = perturb_boxes(s.truth, 0.0, 1);
  const SceneDetections truth = s.truth.detections();
  for (ViewKind v : {ViewKind::BScan, ViewKind::CScan, ViewKind::DScan}) {
    for (std::size_t i = 0; i < truth.view(v).boxes.size(); ++i) {
      CHECK(same.view(v).boxes[i].rect_px == truth.view(v).boxes[i].rect_px);
      CHECK(same.view(v).boxes[i].confidence >= 0.6);
      CHECK(same.view(v).boxes[i].confidence < 1.0);
    }
  }
  CHECK(perturb_boxes(s.truth, 4.0, 9) == perturb_boxes(s.truth, 4.0, 9));
  CHECK_FALSE(perturb_boxes(s.truth, 4.0, 9) == perturb_boxes(s.truth, 4.0, 10));
  CHECK_THROWS_AS(perturb_boxes(s.truth, -1.0, 1), ParameterError);

  const double d0 = mean_min_true_diou(0.0, 200);
  const double d2 = mean_min_true_diou(2.0, 200);
  const double d5 = mean_min_true_diou(5.0, 200);
  const double d10 = mean_min_true_diou(10.0, 200);
  CHECK(d0 > d2);
  CHECK(d2 > d5);
  CHECK(d5 > d10);
}

TEST_CASE("detector model") {
  CHECK(detector_model_for_noise(0.0).edge_sigma_px == 2.0);
  CHECK(detector_model_for_noise(0.1).edge_sigma_px == doctest::Approx(4.0));
  CHECK_THROWS_AS(detector_model_for_noise(-0.1), ParameterError);
  const Scene s = generate_scene(11, 4);
  CHECK(simulate_detector(s.truth, {}, 3) == simulate_detector(s.truth, {}, 3));
  DetectorModel all_partial{0.0, 1.0, 0.5};
  const SceneDetections d = simulate_detector(s.truth, all_partial, 3);
  const SceneDetections t = s.truth.detections();
  for (std::size_t i = 0; i < t.d.boxes.size(); ++i) {
    const double ratio = d.d.boxes[i].rect_px.width() / t.d.boxes[i].rect_px.width();
    CHECK(ratio >= 0.5 - 1e-9);
    CHECK(ratio < 1.0);
    CHECK(d.d.boxes[i].rect_px.min_x >= t.d.boxes[i].rect_px.min_x - 1e-9);
    CHECK(d.d.boxes[i].rect_px.max_x <= t.d.boxes[i].rect_px.max_x + 1e-9);
    CHECK(d.b.boxes[i].rect_px == t.b.boxes[i].rect_px);
  }
  CHECK_THROWS_AS(simulate_detector(s.truth, {2.0, 1.5, 0.5}, 1), ParameterError);
}

TEST_CASE("corpus") {
  const Radargram a = corpus_bscan(1), b = corpus_bscan(1);
  CHECK(a == b);
  CHECK_FALSE(a == corpus_bscan(2));
  CHECK(a.n_samples() == 600);
}
