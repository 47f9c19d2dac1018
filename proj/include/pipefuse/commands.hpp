#pragma once

// Batch commands behind the `pipefuse` executable. Each command is callable
// in-process, writes its files under an output directory and returns the
// main document it wrote.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pipefuse/scene_synth.hpp"
#include "pipefuse/signal_prep.hpp"
#include "pipefuse/view_fusion.hpp"

namespace pipefuse::cli {

using nlohmann::json;
namespace fs = std::filesystem;

struct RunConfig {
  MatchConfig match;
  /// Replaces the frame of every view when set.
  std::optional<ViewFrame> frame;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Loads a JSON config file mirroring RunConfig. Unknown keys raise UsageError.
RunConfig load_run_config(const fs::path& path, RunConfig base = {});
json to_json(const RunConfig& c);

/// Per-scene seed used by `synth`.
std::uint64_t scene_seed(std::uint64_t seed, std::size_t index);

struct SynthArgs {
  std::uint64_t seed = 0;
  std::size_t n_scenes = 1;
  std::size_t n_pipes = 3;
  fs::path out_dir = ".";
  Vec3 extents{6.0, 2.0, 3.0};
  /// Edge jitter (px) applied to the emitted detections; 0 keeps truth boxes.
  double jitter_px = 0.0;
  /// When set, detections come from the detector model at this image sigma.
  std::optional<double> detector_noise;
  bool bscan = false;
};

/// Writes scene_NNNN.scene.json and scene_NNNN.detections.json per scene
/// (plus scene_NNNN.bscan.f32/.json when requested). Returns the list of
/// written scene ids.
std::vector<std::string> cmd_synth(const SynthArgs& args);

struct MatchArgs {
  /// Detections JSON files, scene files, YOLO scene directories or
  /// directories holding *.detections.json.
  std::vector<fs::path> inputs;
  RunConfig config;
  /// Scene files or directories of *.scene.json; enables evaluation.
  std::vector<fs::path> truth;
  fs::path out_dir = ".";
  int threads = 1;
  bool svg = false;
};

/// Runs the matcher on every scene and writes `<out>/report.json`.
json cmd_match(const MatchArgs& args);

/// Collects scenes from the inputs, sorted by scene id. Duplicate ids raise
/// DataError.
std::vector<SceneDetections> collect_detections(const std::vector<fs::path>& inputs);
std::vector<Scene> collect_scenes(const std::vector<fs::path>& inputs);

struct EvalArgs {
  fs::path report;
  std::vector<fs::path> truth;
  fs::path out_dir = ".";
  double diou_threshold = 0.4;
};

/// Scores a report against ground truth and writes `<out>/metrics.json`.
json cmd_eval(const EvalArgs& args);

/// Metrics of matcher output on a set of scenes (the core of cmd_eval).
json evaluate(const std::vector<SceneDetections>& boxes, const std::vector<MatchResult>& results,
              const std::vector<GroundTruth>& truth, double diou_threshold = 0.4);

struct PreprocessArgs {
  /// Radargram (.f32 or .json of the pair); ignored when corpus_size > 0.
  std::optional<fs::path> input;
  std::vector<std::string> steps{"gain", "background", "lowpass"};
  PreprocessParams params;
  bool ablation = false;
  /// Number of synthetic corpus B-scans (seeds seed .. seed+n-1).
  std::size_t corpus_size = 0;
  std::uint64_t seed = 0;
  fs::path out_dir = ".";
};

/// Parses step names; unknown names raise UsageError.
PreprocessSteps parse_steps(const std::vector<std::string>& names);

/// Applies the selected steps and writes the processed radargram plus
/// `<out>/ie_report.json`.
json cmd_preprocess(const PreprocessArgs& args);

struct FootprintArgs {
  double images = 1200;
  double kb_per_image = 250;
  double image_width_px = 1620;
  double image_height_px = 760;
  double length_km = 1.0;
  double point_spacing_m = 0.05;
  double channels = 35;
  double depth_points = 2048;
  double bytes_per_point = 4;
  fs::path out_dir = ".";
};

/// Image versus volume input size; writes `<out>/footprint.json`.
json cmd_footprint(const FootprintArgs& args);

struct BenchArgs {
  std::uint64_t seed = 0;
  std::size_t scenes = 50;
  fs::path out_dir = ".";
};

/// Times the main kernels. Checksums go to `<out>/bench.json`, timings to
/// stderr.
json cmd_bench(const BenchArgs& args);

/// Process exit code for an exception escaping a command: 1 for usage and
/// configuration errors, 2 for data errors.
int exit_code_for(const std::exception& e);

}  // namespace pipefuse::cli
