#include "pipefuse/scene_synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>

#include "pipefuse/errors.hpp"

namespace pipefuse {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

std::string box_id(char view, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%03zu", view, index);
  return buf;
}

Rect2 view_rect_m(const Box3D& box, ViewKind view) {
  const auto axes = view_axes(view);
  return {box.min[axes[0]], box.min[axes[1]], box.max[axes[0]], box.max[axes[1]]};
}

Rect2 meters_to_px(const Rect2& m, ViewKind view, const ViewFrame& frame) {
  const auto axes = view_axes(view);
  const double s0 = frame.span(axes[0]);
  const double s1 = frame.span(axes[1]);
  return denormalize_rect({m.min_x / s0, m.min_y / s1, m.max_x / s0, m.max_y / s1}, frame);
}

// Stamps one point-target hyperbola onto the grid.
void stamp_hyperbola(Radargram& r, double x_center, double depth, double velocity, double amplitude,
                     double wavelet_hz) {
  const double half_width_ns = 2.5e9 / wavelet_hz;
  const double dt = r.sample_interval_ns();
  for (std::size_t i = 0; i < r.n_traces(); ++i) {
    const double x = static_cast<double>(i) * r.trace_spacing_m();
    const double t = hyperbola_travel_time_ns(depth, x_center, velocity, x);
    if (t <= 0.0) continue;
    const double amp = amplitude / t;
    const auto first = static_cast<long>(std::ceil((t - half_width_ns) / dt));
    const auto last = static_cast<long>(std::floor((t + half_width_ns) / dt));
    for (long j = std::max(0L, first); j <= last; ++j) {
      if (j >= static_cast<long>(r.n_samples())) break;
      const auto js = static_cast<std::size_t>(j);
      r.at(i, js) += amp * ricker(r.time_ns(js) - t, wavelet_hz);
    }
  }
}

Radargram empty_bscan(double x_span, const RenderGrid& grid) {
  if (!(grid.trace_spacing_m > 0.0) || !(grid.sample_interval_ns > 0.0) ||
      !(grid.time_window_ns > 0.0) || !(grid.wavelet_hz > 0.0)) {
    throw ParameterError("render grid parameters must be positive");
  }
  const auto n_traces = static_cast<std::size_t>(std::llround(x_span / grid.trace_spacing_m)) + 1;
  const auto n_samples =
      static_cast<std::size_t>(std::llround(grid.time_window_ns / grid.sample_interval_ns));
  return Radargram(n_traces, std::max<std::size_t>(n_samples, 1), grid.trace_spacing_m,
                   grid.sample_interval_ns);
}

}  // namespace

SceneDetections GroundTruth::detections() const {
  SceneDetections out;
  out.scene_id = scene_id;
  out.b.frame = b_frame;
  out.c.frame = c_frame;
  out.d.frame = d_frame;
  for (const PipelineTruth& p : pipelines) {
    out.b.boxes.push_back(p.b);
    out.c.boxes.push_back(p.c);
    out.d.boxes.push_back(p.d);
  }
  auto by_id = [](const ViewBox2D& a, const ViewBox2D& b) { return a.id < b.id; };
  std::sort(out.b.boxes.begin(), out.b.boxes.end(), by_id);
  std::sort(out.c.boxes.begin(), out.c.boxes.end(), by_id);
  std::sort(out.d.boxes.begin(), out.d.boxes.end(), by_id);
  return out;
}

GeometryClass classify_geometry(const Vec3& p0, const Vec3& p1, double tolerance_deg) {
  const Vec3 d = p1 - p0;
  if (d.norm() == 0.0) throw ParameterError("pipeline endpoints coincide");
  const double run = std::abs(d.y);
  const double across = std::atan2(std::abs(d.x), run) * kDegPerRad;
  const double down = std::atan2(std::abs(d.z), run) * kDegPerRad;
  const bool tilted_x = across >= tolerance_deg;
  const bool tilted_z = down >= tolerance_deg;
  if (tilted_x && tilted_z) {
    throw ParameterError("unsupported geometry: pipeline inclined in both x and depth");
  }
  if (tilted_x) return {Orientation::HorizontalInclined, across};
  if (tilted_z) return {Orientation::DeeplyInclined, down};
  return {Orientation::Vertical, std::max(across, down)};
}

Vec3 from_model_coordinates(double x, double depth, double run) { return {x, run, depth}; }

Box3D pipeline_bounds(const PipelineSpec& pipe) {
  const Vec3 d = pipe.p1 - pipe.p0;
  const double len = d.norm();
  if (len == 0.0) throw ParameterError("pipeline endpoints coincide");
  const double r = pipe.diameter / 2.0;
  Box3D box;
  for (int a = 0; a < 3; ++a) {
    const double u = d[a] / len;
    const double half = r * std::sqrt(std::max(0.0, 1.0 - u * u));
    box.min[a] = std::min(pipe.p0[a], pipe.p1[a]) - half;
    box.max[a] = std::max(pipe.p0[a], pipe.p1[a]) + half;
  }
  return box;
}

double centerline_distance(const PipelineSpec& a, const PipelineSpec& b) {
  // Closest points of two segments (clamped parametric solution).
  const Vec3 d1 = a.p1 - a.p0;
  const Vec3 d2 = b.p1 - b.p0;
  const Vec3 r = a.p0 - b.p0;
  const double aa = dot(d1, d1), ee = dot(d2, d2), f = dot(d2, r);
  const double c = dot(d1, r), bb = dot(d1, d2);
  const double denom = aa * ee - bb * bb;
  double s = denom > 1e-15 ? std::clamp((bb * f - c * ee) / denom, 0.0, 1.0) : 0.0;
  double t = (bb * s + f) / ee;
  if (t < 0.0) {
    t = 0.0;
    s = std::clamp(-c / aa, 0.0, 1.0);
  } else if (t > 1.0) {
    t = 1.0;
    s = std::clamp((bb - c) / aa, 0.0, 1.0);
  }
  return ((a.p0 + s * d1) - (b.p0 + t * d2)).norm();
}

namespace {

bool intervals_distinct(const Box3D& a, const Box3D& b, double gap) {
  for (int ax = 0; ax < 3; ++ax) {
    if (std::abs(a.min[ax] - b.min[ax]) + std::abs(a.max[ax] - b.max[ax]) < gap) return false;
  }
  return true;
}

bool views_separable(const Box3D& a, const Box3D& b, double max_iou) {
  for (ViewKind v : {ViewKind::BScan, ViewKind::CScan, ViewKind::DScan}) {
    if (iou_2d(view_rect_m(a, v), view_rect_m(b, v)) > max_iou) return false;
  }
  return true;
}

}  // namespace

Scene generate_scene(std::uint64_t seed, std::size_t n_pipes, const Vec3& extents,
                     const SynthOptions& opt) {
  if (!(extents.x > 0.0) || !(extents.y > 0.0) || !(extents.z > 0.0)) {
    throw ParameterError("scene extents must be positive");
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  Scene scene;
  scene.spec.id = "scene_" + std::to_string(seed);
  scene.spec.extents = extents;
  scene.spec.seed = seed;

  std::vector<Box3D> placed;
  for (std::size_t k = 0; k < n_pipes; ++k) {
    bool ok = false;
    for (int attempt = 0; attempt < opt.max_attempts && !ok; ++attempt) {
      PipelineSpec p;
      p.family = orientation_from_variant(static_cast<int>(rng() % 3) + 1);
      p.diameter = uniform(opt.min_diameter, opt.max_diameter);
      const double r = p.diameter / 2.0;
      const double y0 = uniform(0.05, 0.35) * extents.y;
      const double y1 = uniform(0.65, 0.95) * extents.y;
      const double x0 = uniform(r, extents.x - r);
      const double z0 = uniform(opt.min_cover_m + r, extents.z - r);
      const double sign = (rng() & 1u) ? 1.0 : -1.0;
      p.p0 = {x0, y0, z0};
      p.p1 = {x0, y1, z0};
      if (p.family == Orientation::HorizontalInclined) {
        p.p1.x = x0 + sign * std::tan(uniform(8.0, 25.0) / kDegPerRad) * (y1 - y0);
      } else if (p.family == Orientation::DeeplyInclined) {
        p.p1.z = z0 + sign * std::tan(uniform(5.0, 20.0) / kDegPerRad) * (y1 - y0);
      }
      const Box3D box = pipeline_bounds(p);
      if (box.min.x < 0.0 || box.max.x > extents.x || box.min.y < 0.0 || box.max.y > extents.y ||
          box.min.z < opt.min_cover_m || box.max.z > extents.z) {
        continue;
      }
      ok = true;
      for (std::size_t j = 0; j < placed.size() && ok; ++j) {
        const PipelineSpec& q = scene.spec.pipelines[j];
        ok = centerline_distance(p, q) > r + q.diameter / 2.0 + opt.min_interval_gap &&
             views_separable(box, placed[j], opt.max_view_iou) &&
             intervals_distinct(box, placed[j], opt.min_interval_gap);
      }
      if (ok) {
        scene.spec.pipelines.push_back(p);
        placed.push_back(box);
      }
    }
    if (!ok) {
      throw PlacementError("could not place pipeline " + std::to_string(k + 1) + " of " +
                           std::to_string(n_pipes) + " without overlap (seed " +
                           std::to_string(seed) + ")");
    }
  }
  scene.truth = project_views(scene.spec);
  return scene;
}

GroundTruth project_views(const SceneSpec& scene) {
  GroundTruth gt;
  gt.scene_id = scene.id;
  gt.b_frame = gt.c_frame = gt.d_frame = frame_for_extents(scene.extents);
  const std::size_t n = scene.pipelines.size();

  // Per-view id order is a seeded shuffle of the pipe order.
  std::mt19937_64 rng(scene.seed ^ 0x5bd1e9955bd1e995ULL);
  std::array<std::vector<std::size_t>, 3> rank;
  for (auto& perm : rank) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    perm.assign(n, 0);
    for (std::size_t pos = 0; pos < n; ++pos) perm[order[pos]] = pos;
  }

  for (std::size_t k = 0; k < n; ++k) {
    const PipelineSpec& p = scene.pipelines[k];
    PipelineTruth t;
    t.pipe_index = k;
    t.family = p.family;
    t.box = pipeline_bounds(p);
    const int variant = variant_of(p.family);
    t.b = {box_id('B', rank[0][k]), ClassLabel::make(ViewKind::BScan, 1),
           meters_to_px(view_rect_m(t.box, ViewKind::BScan), ViewKind::BScan, gt.b_frame), 1.0};
    t.c = {box_id('C', rank[1][k]), ClassLabel::make(ViewKind::CScan, variant),
           meters_to_px(view_rect_m(t.box, ViewKind::CScan), ViewKind::CScan, gt.c_frame), 1.0};
    t.d = {box_id('D', rank[2][k]), ClassLabel::make(ViewKind::DScan, variant),
           meters_to_px(view_rect_m(t.box, ViewKind::DScan), ViewKind::DScan, gt.d_frame), 1.0};
    const Vec3 mid = 0.5 * (p.p0 + p.p1);
    t.apex = {mid.x, 2.0 * mid.z / scene.velocity_m_per_ns, scene.velocity_m_per_ns};
    gt.pipelines.push_back(std::move(t));
  }
  return gt;
}

double hyperbola_travel_time_ns(double depth_m, double x_center_m, double velocity_m_per_ns,
                                double x_m) {
  const double dx = x_m - x_center_m;
  return (2.0 / velocity_m_per_ns) * std::sqrt(depth_m * depth_m + dx * dx);
}

double ricker(double tau_ns, double frequency_hz) {
  const double a = std::numbers::pi * frequency_hz * 1e-9 * tau_ns;
  const double a2 = a * a;
  return (1.0 - 2.0 * a2) * std::exp(-a2);
}

Radargram render_bscan(const SceneSpec& scene, double y_station, const RenderGrid& grid) {
  if (y_station < 0.0 || y_station > scene.extents.y) {
    throw ParameterError("B-scan station lies outside the scene");
  }
  Radargram r = empty_bscan(scene.extents.x, grid);
  for (const PipelineSpec& p : scene.pipelines) {
    const double y_lo = std::min(p.p0.y, p.p1.y);
    const double y_hi = std::max(p.p0.y, p.p1.y);
    if (y_station < y_lo || y_station > y_hi || y_hi == y_lo) continue;
    const double s = (y_station - p.p0.y) / (p.p1.y - p.p0.y);
    const Vec3 axis = p.p0 + s * (p.p1 - p.p0);
    stamp_hyperbola(r, axis.x, axis.z, scene.velocity_m_per_ns, 1.0, grid.wavelet_hz);
  }
  return r;
}

ApexObservation find_apex(const Radargram& r, double velocity_m_per_ns) {
  r.validate();
  const auto it = std::max_element(r.data().begin(), r.data().end());
  const auto flat = static_cast<std::size_t>(it - r.data().begin());
  const std::size_t trace = flat / r.n_samples();
  const std::size_t sample = flat % r.n_samples();
  return {static_cast<double>(trace) * r.trace_spacing_m(), r.time_ns(sample), velocity_m_per_ns};
}

namespace {

Rect2 jitter_rect(const Rect2& rect, const ViewFrame& f, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
  auto draw = [&]() { return sigma > 0.0 ? noise(rng) : 0.0; };
  double x1 = rect.min_x + draw();
  double y1 = rect.min_y + draw();
  double x2 = rect.max_x + draw();
  double y2 = rect.max_y + draw();
  x1 = std::clamp(x1, f.origin_x_px, f.origin_x_px + f.width_px);
  x2 = std::clamp(x2, f.origin_x_px, f.origin_x_px + f.width_px);
  y1 = std::clamp(y1, f.origin_y_px, f.origin_y_px + f.height_px);
  y2 = std::clamp(y2, f.origin_y_px, f.origin_y_px + f.height_px);
  return {std::min(x1, x2), std::min(y1, y2), std::max(x1, x2), std::max(y1, y2)};
}

void jitter_view(ViewDetections& vd, double sigma, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> conf(0.6, 1.0);
  for (ViewBox2D& box : vd.boxes) {
    box.rect_px = jitter_rect(box.rect_px, vd.frame, sigma, rng);
    box.confidence = conf(rng);
  }
}

}  // namespace

SceneDetections perturb_boxes(const GroundTruth& truth, double sigma_px, std::uint64_t seed) {
  if (!(sigma_px >= 0.0)) throw ParameterError("box jitter sigma must be non-negative");
  SceneDetections out = truth.detections();
  std::mt19937_64 rng(seed);
  jitter_view(out.b, sigma_px, rng);
  jitter_view(out.c, sigma_px, rng);
  jitter_view(out.d, sigma_px, rng);
  return out;
}

DetectorModel detector_model_for_noise(double image_sigma) {
  if (!(image_sigma >= 0.0)) throw ParameterError("image noise sigma must be non-negative");
  DetectorModel m;
  m.edge_sigma_px = 2.0 + 20.0 * image_sigma;
  return m;
}

SceneDetections simulate_detector(const GroundTruth& truth, const DetectorModel& model,
                                  std::uint64_t seed) {
  if (!(model.partial_dscan_prob >= 0.0 && model.partial_dscan_prob <= 1.0) ||
      !(model.min_partial_fraction > 0.0 && model.min_partial_fraction <= 1.0)) {
    throw ParameterError("detector model probabilities out of range");
  }
  SceneDetections clean = truth.detections();
  std::mt19937_64 rng(seed ^ 0x2545f4914f6cdd1dULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (ViewBox2D& box : clean.d.boxes) {
    if (unit(rng) >= model.partial_dscan_prob) continue;
    const double keep = model.min_partial_fraction + (1.0 - model.min_partial_fraction) * unit(rng);
    const double width = box.rect_px.width();
    const double shift = (1.0 - keep) * width * unit(rng);
    box.rect_px.min_x += shift;
    box.rect_px.max_x = box.rect_px.min_x + keep * width;
  }
  GroundTruth partial = truth;
  for (PipelineTruth& p : partial.pipelines) {
    for (const ViewBox2D& box : clean.d.boxes) {
      if (box.id == p.d.id) p.d = box;
    }
  }
  return perturb_boxes(partial, model.edge_sigma_px, seed);
}

Radargram corpus_bscan(std::uint64_t seed, const CorpusParams& params) {
  Radargram r = empty_bscan(params.x_span_m, params.grid);
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  for (std::size_t k = 0; k < params.n_targets; ++k) {
    const double xc = uniform(0.5, params.x_span_m - 0.5);
    const double depth = uniform(0.3, 2.5);
    stamp_hyperbola(r, xc, depth, params.velocity_m_per_ns, params.target_amplitude,
                    params.grid.wavelet_hz);
  }
  // Direct coupling and a shallow layer: identical on every trace.
  std::vector<double> background(r.n_samples());
  for (std::size_t j = 0; j < r.n_samples(); ++j) {
    const double t = r.time_ns(j);
    background[j] = params.direct_wave_amplitude * (ricker(t - 2.0, params.grid.wavelet_hz) +
                                                    0.5 * ricker(t - 6.0, params.grid.wavelet_hz));
  }
  for (std::size_t i = 0; i < r.n_traces(); ++i) {
    auto tr = r.trace(i);
    for (std::size_t j = 0; j < tr.size(); ++j) {
      tr[j] = (tr[j] + background[j]) * std::exp(-params.attenuation_per_ns * r.time_ns(j));
    }
  }
  return add_gaussian_noise(r, params.noise_sigma, seed ^ 0x9e3779b97f4a7c15ULL);
}

}  // namespace pipefuse
