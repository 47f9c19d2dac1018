#include "pipefuse/view_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <utility>

#include "pipefuse/errors.hpp"

namespace pipefuse {

std::string_view to_string(ViewKind view) {
  switch (view) {
    case ViewKind::BScan: return "BScan";
    case ViewKind::CScan: return "CScan";
    case ViewKind::DScan: return "DScan";
  }
  return "?";
}

std::string_view to_string(Orientation orientation) {
  switch (orientation) {
    case Orientation::Vertical: return "Vertical";
    case Orientation::HorizontalInclined: return "HorizontalInclined";
    case Orientation::DeeplyInclined: return "DeeplyInclined";
  }
  return "?";
}

std::string_view to_string(PairwiseMode mode) {
  return mode == PairwiseMode::AllPairs ? "all" : "b-anchored";
}

std::string_view to_string(DropReason reason) {
  switch (reason) {
    case DropReason::LowConfidence: return "low_confidence";
    case DropReason::Suppressed: return "suppressed";
    case DropReason::Unmatched: return "unmatched";
  }
  return "?";
}

char view_letter(ViewKind view) {
  switch (view) {
    case ViewKind::BScan: return 'B';
    case ViewKind::CScan: return 'C';
    case ViewKind::DScan: return 'D';
  }
  return '?';
}

ViewKind parse_view(std::string_view text) {
  if (text == "B" || text == "BScan") return ViewKind::BScan;
  if (text == "C" || text == "CScan") return ViewKind::CScan;
  if (text == "D" || text == "DScan") return ViewKind::DScan;
  throw DataError("unknown view '" + std::string(text) + "'");
}

Orientation parse_orientation(std::string_view text) {
  if (text == "Vertical") return Orientation::Vertical;
  if (text == "HorizontalInclined") return Orientation::HorizontalInclined;
  if (text == "DeeplyInclined") return Orientation::DeeplyInclined;
  throw DataError("unknown orientation '" + std::string(text) + "'");
}

PairwiseMode parse_pairwise_mode(std::string_view text) {
  if (text == "all") return PairwiseMode::AllPairs;
  if (text == "b-anchored") return PairwiseMode::BScanAnchored;
  throw ParameterError("unknown pairwise mode '" + std::string(text) +
                       "' (expected 'all' or 'b-anchored')");
}

Orientation orientation_from_variant(int variant) {
  switch (variant) {
    case 1: return Orientation::Vertical;
    case 2: return Orientation::HorizontalInclined;
    case 3: return Orientation::DeeplyInclined;
  }
  throw ParameterError("label variant must be 1, 2 or 3, got " + std::to_string(variant));
}

int variant_of(Orientation orientation) {
  switch (orientation) {
    case Orientation::Vertical: return 1;
    case Orientation::HorizontalInclined: return 2;
    case Orientation::DeeplyInclined: return 3;
  }
  return 0;
}

std::array<int, 2> view_axes(ViewKind view) {
  switch (view) {
    case ViewKind::BScan: return {0, 2};
    case ViewKind::CScan: return {0, 1};
    case ViewKind::DScan: return {1, 2};
  }
  return {0, 0};
}

ClassLabel ClassLabel::make(ViewKind view, int variant) {
  if (variant < 1 || variant > 3) {
    throw DataError("label variant must be 1, 2 or 3, got " + std::to_string(variant));
  }
  if (view == ViewKind::BScan && variant != 1) {
    throw DataError("B-scan boxes only carry label 1-B, got " + std::to_string(variant) + "-B");
  }
  return {view, variant};
}

ClassLabel ClassLabel::parse(std::string_view text) {
  if (text.size() != 3 || text[1] != '-' || text[0] < '0' || text[0] > '9') {
    throw DataError("malformed label '" + std::string(text) + "' (expected e.g. 2-C)");
  }
  return make(parse_view(text.substr(2, 1)), text[0] - '0');
}

std::string ClassLabel::str() const {
  return std::to_string(variant) + "-" + view_letter(view);
}

void ViewFrame::validate() const {
  if (!(width_px > 0.0) || !(height_px > 0.0)) {
    throw ParameterError("view frame pixel size must be positive");
  }
  if (!(x_span_m > 0.0) || !(y_span_m > 0.0) || !(z_depth_m > 0.0)) {
    throw ParameterError("view frame physical extents must be positive");
  }
}

double ViewFrame::span(int axis) const {
  return axis == 0 ? x_span_m : (axis == 1 ? y_span_m : z_depth_m);
}

ViewFrame frame_for_extents(const Vec3& extents) {
  ViewFrame f;
  f.x_span_m = extents.x;
  f.y_span_m = extents.y;
  f.z_depth_m = extents.z;
  return f;
}

namespace {

double normalize_edge(double edge, double origin, double size, const std::string& id) {
  const double tol = kFrameClampTolerancePx;
  if (!std::isfinite(edge) || edge < origin - tol || edge > origin + size + tol) {
    throw OutOfFrameError(id, "box '" + id + "' lies outside its view frame (edge at " +
                                  std::to_string(edge) + " px)");
  }
  return (std::clamp(edge, origin, origin + size) - origin) / size;
}

}  // namespace

Rect2 normalize_box(const ViewBox2D& box, const ViewFrame& frame) {
  frame.validate();
  if (!box.rect_px.valid()) throw DataError("box '" + box.id + "' has inverted edges");
  return {normalize_edge(box.rect_px.min_x, frame.origin_x_px, frame.width_px, box.id),
          normalize_edge(box.rect_px.min_y, frame.origin_y_px, frame.height_px, box.id),
          normalize_edge(box.rect_px.max_x, frame.origin_x_px, frame.width_px, box.id),
          normalize_edge(box.rect_px.max_y, frame.origin_y_px, frame.height_px, box.id)};
}

Rect2 denormalize_rect(const Rect2& n, const ViewFrame& frame) {
  return {frame.origin_x_px + n.min_x * frame.width_px,
          frame.origin_y_px + n.min_y * frame.height_px,
          frame.origin_x_px + n.max_x * frame.width_px,
          frame.origin_y_px + n.max_y * frame.height_px};
}

Interval ViewIntervals::on_axis(int axis) const {
  const auto axes = view_axes(view);
  if (axes[0] == axis) return first;
  if (axes[1] == axis) return second;
  throw ParameterError(std::string(to_string(view)) + " does not span axis " +
                       std::to_string(axis));
}

ViewIntervals to_scene_meters(const Rect2& n, ViewKind view, const ViewFrame& frame) {
  const auto axes = view_axes(view);
  const double s0 = frame.span(axes[0]);
  const double s1 = frame.span(axes[1]);
  return {view, {n.min_x * s0, n.max_x * s0}, {n.min_y * s1, n.max_y * s1}};
}

LiftedTriple lift_to_3d(const ViewIntervals& b, const ViewIntervals& c, const ViewIntervals& d,
                        const std::string& b_id, const std::string& c_id,
                        const std::string& d_id) {
  if (b.view != ViewKind::BScan || c.view != ViewKind::CScan || d.view != ViewKind::DScan) {
    throw ParameterError("lift_to_3d expects intervals from the B, C and D views in that order");
  }
  LiftedTriple t;
  t.b = {Box3D::from_intervals(b.on_axis(0), c.on_axis(1), b.on_axis(2)), LiftedKind::From1B,
         b_id, c_id};
  t.c = {Box3D::from_intervals(c.on_axis(0), c.on_axis(1), d.on_axis(2)), LiftedKind::FromNC,
         c_id, d_id};
  t.d = {Box3D::from_intervals(b.on_axis(0), d.on_axis(1), d.on_axis(2)), LiftedKind::FromND,
         d_id, b_id};
  return t;
}

PairwiseScores pairwise_diou(const LiftedTriple& t) {
  return {diou_3d(t.b.box, t.c.box), diou_3d(t.b.box, t.d.box), diou_3d(t.c.box, t.d.box)};
}

Orientation classify(const ClassLabel& b, const ClassLabel& c, const ClassLabel& d) {
  if (b.view != ViewKind::BScan || c.view != ViewKind::CScan || d.view != ViewKind::DScan ||
      b.variant != 1 || c.variant != d.variant || c.variant < 1 || c.variant > 3) {
    throw LabelConflictError("labels (" + b.str() + ", " + c.str() + ", " + d.str() +
                             ") do not form an orientation group");
  }
  return orientation_from_variant(c.variant);
}

double depth_eq8(const ApexObservation& obs) {
  const double v = obs.velocity_m_per_ns;
  if (!(v > 0.0)) throw DomainError("wave velocity must be positive");
  const double half_t = obs.t0_ns / 2.0;
  const double lateral = obs.x0_m / v;
  const double radicand = half_t * half_t - lateral * lateral;
  if (radicand < 0.0) {
    throw DomainError("negative radicand: (t0/2)^2 < (x0/v)^2");
  }
  return (v / 2.0) * std::sqrt(radicand);
}

double depth_from_apex(const ApexObservation& obs) {
  return obs.velocity_m_per_ns * obs.t0_ns / 2.0;
}

void MatchConfig::validate() const {
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
    throw ParameterError("confidence threshold must lie in [0, 1]");
  }
  if (!(prediction_iou_threshold >= 0.0 && prediction_iou_threshold <= 1.0)) {
    throw ParameterError("prediction IoU threshold must lie in [0, 1]");
  }
  if (!std::isfinite(matching_diou_threshold) || matching_diou_threshold < -1.0) {
    throw ParameterError("matching 3D-DIoU threshold must be finite and >= -1");
  }
}

const ViewDetections& SceneDetections::view(ViewKind kind) const {
  switch (kind) {
    case ViewKind::BScan: return b;
    case ViewKind::CScan: return c;
    case ViewKind::DScan: return d;
  }
  return b;
}

ViewDetections& SceneDetections::view(ViewKind kind) {
  return const_cast<ViewDetections&>(std::as_const(*this).view(kind));
}

LiftedTriple lift_boxes(const SceneDetections& scene, const ViewBox2D& b, const ViewBox2D& c,
                        const ViewBox2D& d) {
  auto iv = [&](const ViewBox2D& box, ViewKind kind) {
    const ViewFrame& f = scene.view(kind).frame;
    return to_scene_meters(normalize_box(box, f), kind, f);
  };
  return lift_to_3d(iv(b, ViewKind::BScan), iv(c, ViewKind::CScan), iv(d, ViewKind::DScan), b.id,
                    c.id, d.id);
}

namespace {

struct Candidate {
  const ViewBox2D* box = nullptr;
  Rect2 normalized;
  ViewIntervals meters;
};

// Confidence filter and per-label greedy suppression for one view. Survivors
// are returned sorted by id.
std::vector<Candidate> screen_view(const ViewDetections& vd, ViewKind kind,
                                   const MatchConfig& cfg, std::vector<UnmatchedBox>& dropped) {
  std::set<std::string> seen;
  std::vector<Candidate> pool;
  for (const ViewBox2D& box : vd.boxes) {
    if (box.label.view != kind) {
      throw DataError("box '" + box.id + "' labeled " + box.label.str() + " appears in the " +
                      std::string(to_string(kind)) + " list");
    }
    if (!seen.insert(box.id).second) {
      throw DataError("duplicate box id '" + box.id + "' in " + std::string(to_string(kind)));
    }
    const Rect2 n = normalize_box(box, vd.frame);
    if (box.confidence < cfg.confidence_threshold) {
      dropped.push_back({kind, box.id, DropReason::LowConfidence});
      continue;
    }
    pool.push_back({&box, n, to_scene_meters(n, kind, vd.frame)});
  }
  std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
    if (a.box->confidence != b.box->confidence) return a.box->confidence > b.box->confidence;
    return a.box->id < b.box->id;
  });
  std::vector<Candidate> kept;
  for (const Candidate& cand : pool) {
    bool duplicate = false;
    for (const Candidate& k : kept) {
      if (k.box->label == cand.box->label &&
          iou_2d(k.normalized, cand.normalized) > cfg.prediction_iou_threshold) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) {
      dropped.push_back({kind, cand.box->id, DropReason::Suppressed});
    } else {
      kept.push_back(cand);
    }
  }
  std::sort(kept.begin(), kept.end(),
            [](const Candidate& a, const Candidate& b) { return a.box->id < b.box->id; });
  return kept;
}

struct Triple {
  std::size_t bi, ci, di;
  PairwiseScores scores;
  LiftedTriple lifted;
  double rank_score;
};

}  // namespace

MatchResult match_triples(const SceneDetections& scene, const MatchConfig& cfg) {
  cfg.validate();
  MatchResult result;
  const auto bs = screen_view(scene.b, ViewKind::BScan, cfg, result.unmatched);
  const auto cs = screen_view(scene.c, ViewKind::CScan, cfg, result.unmatched);
  const auto ds = screen_view(scene.d, ViewKind::DScan, cfg, result.unmatched);

  std::vector<Triple> qualified;
  for (std::size_t bi = 0; bi < bs.size(); ++bi) {
    for (std::size_t ci = 0; ci < cs.size(); ++ci) {
      for (std::size_t di = 0; di < ds.size(); ++di) {
        if (cs[ci].box->label.variant != ds[di].box->label.variant) continue;
        LiftedTriple lifted = lift_to_3d(bs[bi].meters, cs[ci].meters, ds[di].meters,
                                         bs[bi].box->id, cs[ci].box->id, ds[di].box->id);
        const PairwiseScores s = pairwise_diou(lifted);
        double worst = std::min(s.bc, s.bd);
        double rank = s.bc + s.bd;
        if (cfg.pairwise_mode == PairwiseMode::AllPairs) {
          worst = std::min(worst, s.cd);
          rank += s.cd;
        }
        if (worst >= cfg.matching_diou_threshold) {
          qualified.push_back({bi, ci, di, s, std::move(lifted), rank});
        }
      }
    }
  }

  // Ids are unique per view and each list is id-sorted, so index order is id order.
  std::sort(qualified.begin(), qualified.end(), [](const Triple& a, const Triple& b) {
    if (a.rank_score != b.rank_score) return a.rank_score > b.rank_score;
    return std::tie(a.bi, a.ci, a.di) < std::tie(b.bi, b.ci, b.di);
  });

  std::vector<bool> used_b(bs.size()), used_c(cs.size()), used_d(ds.size());
  for (const Triple& t : qualified) {
    if (used_b[t.bi] || used_c[t.ci] || used_d[t.di]) continue;
    used_b[t.bi] = used_c[t.ci] = used_d[t.di] = true;

    PipelineDetection det;
    det.orientation = classify(bs[t.bi].box->label, cs[t.ci].box->label, ds[t.di].box->label);
    det.b_id = bs[t.bi].box->id;
    det.c_id = cs[t.ci].box->id;
    det.d_id = ds[t.di].box->id;
    det.scores = t.scores;
    for (int a = 0; a < 3; ++a) {
      det.fused.min[a] = (t.lifted.b.box.min[a] + t.lifted.c.box.min[a] + t.lifted.d.box.min[a]) / 3.0;
      det.fused.max[a] = (t.lifted.b.box.max[a] + t.lifted.c.box.max[a] + t.lifted.d.box.max[a]) / 3.0;
    }
    // Point-target model: apex time 2 z_c / v inverts back to the axis depth.
    det.depth_m = det.fused.center().z;
    result.detections.push_back(std::move(det));
  }

  auto leftovers = [&](const std::vector<Candidate>& list, const std::vector<bool>& used,
                       ViewKind kind) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!used[i]) result.unmatched.push_back({kind, list[i].box->id, DropReason::Unmatched});
    }
  };
  leftovers(bs, used_b, ViewKind::BScan);
  leftovers(cs, used_c, ViewKind::CScan);
  leftovers(ds, used_d, ViewKind::DScan);

  std::sort(result.detections.begin(), result.detections.end(),
            [](const PipelineDetection& a, const PipelineDetection& b) {
              return std::tie(a.b_id, a.c_id, a.d_id) < std::tie(b.b_id, b.c_id, b.d_id);
            });
  std::sort(result.unmatched.begin(), result.unmatched.end(),
            [](const UnmatchedBox& a, const UnmatchedBox& b) {
              return std::tie(a.view, a.id) < std::tie(b.view, b.id);
            });
  return result;
}

}  // namespace pipefuse
