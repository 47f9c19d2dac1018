#pragma once

// Synthetic pipeline scenes with exact ground truth: straight cylindrical
// pipes running along the transverse (y) axis, their projections onto the
// three GPR views, point-target hyperbola B-scans and detector-like box noise.

#include <cstdint>
#include <string>
#include <vector>

#include "pipefuse/geometry.hpp"
#include "pipefuse/signal_prep.hpp"
#include "pipefuse/view_fusion.hpp"

namespace pipefuse {

struct PipelineSpec {
  Vec3 p0;
  Vec3 p1;
  double diameter = 0.5;
  Orientation family = Orientation::Vertical;
  friend bool operator==(const PipelineSpec&, const PipelineSpec&) = default;
};

/// Scene volume defaults to a 6.0 x 2.0 x 3.0 m box.
struct SceneSpec {
  std::string id = "scene";
  Vec3 extents{6.0, 2.0, 3.0};
  double velocity_m_per_ns = 0.1;
  std::vector<PipelineSpec> pipelines;
  std::uint64_t seed = 0;
  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

struct PipelineTruth {
  std::size_t pipe_index = 0;
  Orientation family = Orientation::Vertical;
  Box3D box;
  ViewBox2D b;
  ViewBox2D c;
  ViewBox2D d;
  ApexObservation apex;
  friend bool operator==(const PipelineTruth&, const PipelineTruth&) = default;
};

struct GroundTruth {
  std::string scene_id;
  ViewFrame b_frame;
  ViewFrame c_frame;
  ViewFrame d_frame;
  std::vector<PipelineTruth> pipelines;

  /// The true boxes as detector output (confidence 1), in id order per view.
  SceneDetections detections() const;
  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Scene {
  SceneSpec spec;
  GroundTruth truth;
};

struct GeometryClass {
  Orientation family = Orientation::Vertical;
  /// Inclination from the pipe run axis (y), degrees; 0 for vertical pipes.
  double angle_deg = 0.0;
};

/// Orientation family from the pipe axis. Pipes run along y; a pipe whose x
/// drifts with y is horizontally inclined, one whose depth z drifts with y is
/// deeply inclined. Throws ParameterError for coincident endpoints and for
/// compound (x and z) inclination.
GeometryClass classify_geometry(const Vec3& p0, const Vec3& p1, double tolerance_deg = 1.0);

/// Converts a point given as (x, depth, run) coordinates into the scene
/// frame (x, y, z).
Vec3 from_model_coordinates(double x, double depth, double run);

/// Exact axis-aligned bounds of the capped cylinder.
Box3D pipeline_bounds(const PipelineSpec& pipe);

/// Shortest distance between the two pipe center lines.
double centerline_distance(const PipelineSpec& a, const PipelineSpec& b);

struct SynthOptions {
  double min_diameter = 0.15;
  double max_diameter = 0.5;
  double min_cover_m = 0.2;
  /// Upper bound on the 2D IoU of two pipes' boxes in any view.
  double max_view_iou = 0.3;
  /// Minimal separation (m) of two pipes' intervals on every scene axis.
  double min_interval_gap = 0.05;
  int max_attempts = 2000;
};

/// Random scene of `n_pipes` pipelines with families drawn uniformly.
/// Deterministic per seed; throws PlacementError when the pipes cannot be
/// placed within the attempt budget.
Scene generate_scene(std::uint64_t seed, std::size_t n_pipes, const Vec3& extents = {6.0, 2.0, 3.0},
                     const SynthOptions& options = {});

/// Ground-truth view boxes of every pipeline. Box ids per view are assigned
/// in a seeded shuffled order so they carry no correspondence information.
GroundTruth project_views(const SceneSpec& scene);

struct RenderGrid {
  double trace_spacing_m = 0.02;
  double sample_interval_ns = 0.1;
  double time_window_ns = 60.0;
  double wavelet_hz = 600e6;
};

/// Two-way time of the point-target hyperbola t(x) = (2/v) sqrt(d^2 + (x-xc)^2).
double hyperbola_travel_time_ns(double depth_m, double x_center_m, double velocity_m_per_ns,
                                double x_m);

double ricker(double tau_ns, double frequency_hz);

/// B-scan along x at transverse station `y_station`. Every pipeline whose axis
/// crosses the station contributes a hyperbola with amplitude 1/t (t in ns)
/// stamped with a Ricker wavelet.
Radargram render_bscan(const SceneSpec& scene, double y_station, const RenderGrid& grid = {});

/// Strongest positive sample of the radargram read as the hyperbola apex.
ApexObservation find_apex(const Radargram& r, double velocity_m_per_ns);

/// Jitters every box edge by N(0, sigma_px^2) pixels and clamps to the frame;
/// confidences are drawn from [0.6, 1.0).
SceneDetections perturb_boxes(const GroundTruth& truth, double sigma_px, std::uint64_t seed);

/// Detector error model used for the threshold study. On top of edge jitter,
/// a D-scan box sometimes covers only part of the pipe run (a transverse
/// slice sees a partial signature): with probability `partial_dscan_prob`
/// its y extent shrinks to a fraction drawn from [min_partial_fraction, 1).
struct DetectorModel {
  double edge_sigma_px = 2.0;
  double partial_dscan_prob = 0.25;
  double min_partial_fraction = 0.2;
};

/// Model for an image-noise standard deviation: the 2 px detector floor plus
/// 20 px of extra edge jitter per unit of image sigma.
DetectorModel detector_model_for_noise(double image_sigma);

SceneDetections simulate_detector(const GroundTruth& truth, const DetectorModel& model,
                                  std::uint64_t seed);

/// Synthetic raw B-scan for preprocessing studies: point-target hyperbolas,
/// a strong laterally constant direct wave, exponential attenuation and
/// additive receiver noise.
struct CorpusParams {
  std::size_t n_targets = 3;
  double target_amplitude = 10.0;
  double direct_wave_amplitude = 30.0;
  double attenuation_per_ns = 0.08;
  double noise_sigma = 0.005;
  double x_span_m = 6.0;
  double velocity_m_per_ns = 0.1;
  RenderGrid grid{};
};

Radargram corpus_bscan(std::uint64_t seed, const CorpusParams& params = {});

}  // namespace pipefuse
