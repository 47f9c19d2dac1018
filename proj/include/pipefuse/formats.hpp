#pragma once

// On-disk formats.
//
//  * Detections file (JSON), one per scene:
//      {"scene_id": "...",
//       "views": {"B": {"frame": {...}, "boxes": [{"id", "label", "rect_px": [x1,y1,x2,y2],
//                                                  "confidence"}]}, "C": ..., "D": ...}}
//  * Scene file (JSON): scene spec plus ground truth correspondences.
//  * YOLO scene directory: B.txt, C.txt, D.txt with lines
//      "<class> <cx> <cy> <w> <h> [confidence]" normalized to the image, and
//    classes.json {"classes": ["1-B", "1-C", ...], "views": {"B": {"frame": {...},
//    "image_width_px": W, "image_height_px": H}, ...}}.
//  * Radargram: raw little-endian float32, trace-major, with a JSON sidecar
//    {"n_traces", "n_samples", "trace_spacing_m", "sample_interval_ns"}.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pipefuse/scene_synth.hpp"
#include "pipefuse/signal_prep.hpp"
#include "pipefuse/view_fusion.hpp"

namespace pipefuse::io {

using nlohmann::json;

json to_json(const ViewFrame& f);
ViewFrame frame_from_json(const json& j);

json to_json(const Box3D& b);
Box3D box_from_json(const json& j);

json to_json(const ViewBox2D& b);
ViewBox2D view_box_from_json(const json& j, ViewKind expected_view);

json to_json(const SceneDetections& s);
/// Throws DataError naming any missing view.
SceneDetections detections_from_json(const json& j);

json to_json(const SceneSpec& s);
SceneSpec scene_spec_from_json(const json& j);

json to_json(const GroundTruth& g);
GroundTruth ground_truth_from_json(const json& j);

/// Scene file: {"scene": <SceneSpec>, "truth": <GroundTruth>}.
json scene_file_json(const Scene& scene);
Scene scene_from_json(const json& j);

json to_json(const MatchConfig& c);
/// Overlays any keys present in `j` onto `base`.
MatchConfig match_config_from_json(const json& j, MatchConfig base = {});

json to_json(const PipelineDetection& d);
PipelineDetection detection_from_json(const json& j);
json to_json(const MatchResult& r);

/// Reads a JSON document; parse failures become DataError with the file name
/// and the line of the error.
json read_json_file(const std::filesystem::path& path);
/// Writes `j` with two-space indentation and a trailing newline.
void write_json_file(const std::filesystem::path& path, const json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Loads a YOLO scene directory (see header comment). A missing view file is
/// reported by name.
SceneDetections load_yolo_scene(const std::filesystem::path& dir);

/// Parses one YOLO label file's text for a view. `classes` maps class index to
/// label text; ids are "<view letter>:<line number>".
std::vector<ViewBox2D> parse_yolo(const std::string& text, ViewKind view,
                                  const std::vector<std::string>& classes, double image_width_px,
                                  double image_height_px, const std::string& source_name);

/// Writes `<stem>.f32` and `<stem>.json`.
void write_radargram(const std::filesystem::path& stem, const Radargram& r);
/// Accepts the path of either file of the pair.
Radargram read_radargram(const std::filesystem::path& path);

}  // namespace pipefuse::io
