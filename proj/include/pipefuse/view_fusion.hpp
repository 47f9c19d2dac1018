#pragma once

// Multi-view fusion: per-view 2D detections (B/C/D-scan) are normalized into
// the shared scene frame, lifted to 3D boxes by borrowing each view's
// missing axis from a sibling view, and associated into pipeline triples by
// thresholded pairwise 3D-DIoU.
//
// Scene frame axes: x is the survey direction, y the transverse direction and
// z the depth below the surface. B-scan images span (x, z), C-scan images
// span (x, y) and D-scan images span (y, z); in each image the first axis is
// horizontal and the second vertical.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pipefuse/geometry.hpp"

namespace pipefuse {

enum class ViewKind { BScan, CScan, DScan };

enum class Orientation { Vertical, HorizontalInclined, DeeplyInclined };

std::string_view to_string(ViewKind view);
std::string_view to_string(Orientation orientation);
/// Single-letter view code: "B", "C" or "D".
char view_letter(ViewKind view);
ViewKind parse_view(std::string_view text);
Orientation parse_orientation(std::string_view text);

/// Orientation family that maps to label variant n (1, 2, 3).
Orientation orientation_from_variant(int variant);
int variant_of(Orientation orientation);

/// Scene axes spanned by a view: {horizontal image axis, vertical image axis},
/// as indices 0 = x, 1 = y, 2 = z.
std::array<int, 2> view_axes(ViewKind view);

struct ClassLabel {
  ViewKind view = ViewKind::BScan;
  int variant = 1;

  /// Validating constructor: B-scan admits only variant 1, C/D admit 1..3.
  static ClassLabel make(ViewKind view, int variant);
  /// Parses "1-B", "2-C", "3-D".
  static ClassLabel parse(std::string_view text);
  std::string str() const;
  friend bool operator==(const ClassLabel&, const ClassLabel&) = default;
};

/// Placement of a view's main panel inside its source image plus the physical
/// size of the scene volume it covers.
struct ViewFrame {
  double origin_x_px = 0.0;
  double origin_y_px = 0.0;
  double width_px = 1620.0;
  double height_px = 760.0;
  double x_span_m = 30.0;
  double y_span_m = 1.32;
  double z_depth_m = 3.0;

  /// Throws ParameterError when a size or extent is not positive.
  void validate() const;
  /// Physical extent of a scene axis (0 = x, 1 = y, 2 = z).
  double span(int axis) const;
  friend bool operator==(const ViewFrame&, const ViewFrame&) = default;
};

/// Frame with the default pixel geometry covering the given scene extents.
ViewFrame frame_for_extents(const Vec3& extents);

struct ViewBox2D {
  std::string id;
  ClassLabel label;
  Rect2 rect_px;
  double confidence = 1.0;
  friend bool operator==(const ViewBox2D&, const ViewBox2D&) = default;
};

/// Boxes that a clamped normalization tolerates outside the frame, in pixels.
inline constexpr double kFrameClampTolerancePx = 2.0;

/// Maps a pixel box to frame-normalized [0,1]^2 coordinates. Edges up to
/// kFrameClampTolerancePx outside the frame are clamped; anything further out
/// raises OutOfFrameError naming the box.
Rect2 normalize_box(const ViewBox2D& box, const ViewFrame& frame);

/// Inverse of normalize_box for a box that lies inside the frame.
Rect2 denormalize_rect(const Rect2& normalized, const ViewFrame& frame);

/// Normalized view rectangle scaled to meters on the two scene axes the view
/// spans. `first` follows the horizontal image axis, `second` the vertical.
struct ViewIntervals {
  ViewKind view = ViewKind::BScan;
  Interval first;
  Interval second;

  /// Interval on a scene axis; the axis must be one the view spans.
  Interval on_axis(int axis) const;
};

ViewIntervals to_scene_meters(const Rect2& normalized, ViewKind view, const ViewFrame& frame);

enum class LiftedKind { From1B, FromNC, FromND };

struct LiftedBox {
  Box3D box;
  LiftedKind kind = LiftedKind::From1B;
  std::string source_id;
  std::string donor_id;
};

struct LiftedTriple {
  LiftedBox b;
  LiftedBox c;
  LiftedBox d;
};

/// Completes each view box with the axis it lacks: B borrows y from C, C
/// borrows z from D and D borrows x from B.
LiftedTriple lift_to_3d(const ViewIntervals& b, const ViewIntervals& c, const ViewIntervals& d,
                        const std::string& b_id = {}, const std::string& c_id = {},
                        const std::string& d_id = {});

struct PairwiseScores {
  double bc = 0.0;
  double bd = 0.0;
  double cd = 0.0;
};

PairwiseScores pairwise_diou(const LiftedTriple& triple);

/// Orientation group of a (B, C, D) label triple. Throws LabelConflictError
/// for anything other than (1-B, n-C, n-D).
Orientation classify(const ClassLabel& b, const ClassLabel& c, const ClassLabel& d);

struct ApexObservation {
  double x0_m = 0.0;
  double t0_ns = 0.0;
  double velocity_m_per_ns = 0.1;
  friend bool operator==(const ApexObservation&, const ApexObservation&) = default;
};

/// Burial depth by the hyperbola-vertex relation
/// d = (v/2) sqrt((t0/2)^2 - (x0/v)^2). Throws DomainError on a negative
/// radicand.
double depth_eq8(const ApexObservation& obs);

/// Two-way travel-time inversion at the apex, d = v t0 / 2.
double depth_from_apex(const ApexObservation& obs);

enum class PairwiseMode {
  AllPairs,      // B-C, B-D and C-D must all pass
  BScanAnchored  // only B-C and B-D are thresholded
};

std::string_view to_string(PairwiseMode mode);
PairwiseMode parse_pairwise_mode(std::string_view text);

struct MatchConfig {
  double confidence_threshold = 0.5;
  double prediction_iou_threshold = 0.7;
  double matching_diou_threshold = 0.4;
  PairwiseMode pairwise_mode = PairwiseMode::AllPairs;

  /// Confidence and prediction IoU must lie in [0,1]; the matching threshold
  /// must be finite and >= -1 (values above 1 accept nothing).
  void validate() const;
  friend bool operator==(const MatchConfig&, const MatchConfig&) = default;
};

struct ViewDetections {
  ViewFrame frame;
  std::vector<ViewBox2D> boxes;
  friend bool operator==(const ViewDetections&, const ViewDetections&) = default;
};

struct SceneDetections {
  std::string scene_id;
  ViewDetections b;
  ViewDetections c;
  ViewDetections d;

  const ViewDetections& view(ViewKind kind) const;
  ViewDetections& view(ViewKind kind);
  friend bool operator==(const SceneDetections&, const SceneDetections&) = default;
};

struct PipelineDetection {
  Orientation orientation = Orientation::Vertical;
  std::string b_id;
  std::string c_id;
  std::string d_id;
  PairwiseScores scores;
  Box3D fused;
  double depth_m = 0.0;
};

enum class DropReason { LowConfidence, Suppressed, Unmatched };

std::string_view to_string(DropReason reason);

struct UnmatchedBox {
  ViewKind view = ViewKind::BScan;
  std::string id;
  DropReason reason = DropReason::Unmatched;
};

struct MatchResult {
  std::vector<PipelineDetection> detections;
  std::vector<UnmatchedBox> unmatched;
};

/// Lifts the true-layout triple of boxes drawn from one scene and returns the
/// lifted boxes. Boxes are normalized with their own view's frame.
LiftedTriple lift_boxes(const SceneDetections& scene, const ViewBox2D& b, const ViewBox2D& c,
                        const ViewBox2D& d);

/// Full association: confidence filtering, per-label duplicate suppression,
/// enumeration of label-consistent triples, lifting, pairwise 3D-DIoU,
/// thresholding and greedy conflict resolution by descending score sum
/// (ties broken by lexicographic box ids). Output detections are ordered by
/// (b_id, c_id, d_id); unmatched boxes by (view, id).
MatchResult match_triples(const SceneDetections& scene, const MatchConfig& config = {});

}  // namespace pipefuse
