// pipefuse: batch frontend for multi-view GPR pipeline fusion.
//
// Exit status: 0 success, 1 usage or configuration error, 2 data error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pipefuse/commands.hpp"
#include "pipefuse/errors.hpp"

namespace cli = pipefuse::cli;

namespace {

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

pipefuse::Vec3 parse_extents(const std::string& text) {
  const auto parts = split_csv(text);
  if (parts.size() != 3) throw pipefuse::UsageError("--extents expects x,y,z");
  try {
    return {std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])};
  } catch (const std::exception&) {
    throw pipefuse::UsageError("--extents expects three numbers");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view GPR pipeline detection fusion"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out_dir = ".";
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic scenes with ground truth");
  std::size_t n_scenes = 1, n_pipes = 3;
  double jitter_px = 0.0;
  std::optional<double> detector_noise;
  std::string extents_text = "6,2,3";
  bool bscan = false;
  synth->add_option("--scenes", n_scenes, "Number of scenes");
  synth->add_option("--pipes", n_pipes, "Pipelines per scene");
  synth->add_option("--extents", extents_text, "Scene extents x,y,z in meters");
  synth->add_option("--jitter-px", jitter_px, "Edge jitter of emitted detections");
  synth->add_option("--detector-noise", detector_noise, "Detector model at this image noise sigma");
  synth->add_flag("--bscan", bscan, "Also render a B-scan per scene");

  // match
  auto* match = app.add_subcommand("match", "Associate view detections into pipelines");
  std::vector<std::string> match_inputs, truth_inputs;
  std::optional<double> conf_thr, pred_thr, match_thr;
  std::string pairwise;
  bool svg = false;
  match->add_option("inputs", match_inputs, "Detections files, scene files or directories")->required();
  match->add_option("--truth", truth_inputs, "Scene files or directories for evaluation");
  match->add_option("--confidence", conf_thr, "Confidence threshold");
  match->add_option("--prediction-iou", pred_thr, "Per-view suppression IoU threshold");
  match->add_option("--matching-diou", match_thr, "Matching 3D-DIoU threshold");
  match->add_option("--pairwise", pairwise, "Pairwise mode: all or b-anchored");
  match->add_flag("--svg", svg, "Write an SVG histogram");

  // eval
  auto* eval = app.add_subcommand("eval", "Score a match report against ground truth");
  std::string report_path;
  std::vector<std::string> eval_truth;
  double eval_thr = 0.4;
  eval->add_option("report", report_path, "report.json")->required();
  eval->add_option("truth", eval_truth, "Scene files or directories")->required();
  eval->add_option("--diou-threshold", eval_thr, "Threshold for the pair partition");

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Radargram preprocessing and information entropy");
  std::string pre_input, steps_text = "gain,background,lowpass";
  bool ablation = false;
  std::size_t corpus = 0;
  pipefuse::PreprocessParams params;
  pre->add_option("input", pre_input, "Radargram (.f32 or .json)");
  pre->add_option("--steps", steps_text, "Comma-separated subset of gain,background,lowpass (or none)");
  pre->add_flag("--ablation", ablation, "Evaluate all eight step subsets");
  pre->add_option("--corpus", corpus, "Use N synthetic corpus B-scans instead of an input file");
  pre->add_option("--alpha", params.gain_alpha_per_ns, "Gain exponent per ns");
  pre->add_option("--pass-hz", params.lowpass_pass_hz, "Low-pass passband edge");
  pre->add_option("--stop-hz", params.lowpass_stop_hz, "Low-pass stopband edge");
  pre->add_option("--levels", params.gray_levels, "Gray levels");

  // footprint
  auto* foot = app.add_subcommand("footprint", "Image versus volume input size");
  cli::FootprintArgs fargs;
  foot->add_option("--images", fargs.images);
  foot->add_option("--kb-per-image", fargs.kb_per_image);
  foot->add_option("--width-px", fargs.image_width_px);
  foot->add_option("--height-px", fargs.image_height_px);
  foot->add_option("--length-km", fargs.length_km);
  foot->add_option("--point-spacing-m", fargs.point_spacing_m);
  foot->add_option("--channels", fargs.channels);
  foot->add_option("--depth-points", fargs.depth_points);
  foot->add_option("--bytes-per-point", fargs.bytes_per_point);

  // bench
  auto* bench = app.add_subcommand("bench", "Kernel timings");
  std::size_t bench_scenes = 50;
  bench->add_option("--scenes", bench_scenes);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    cli::RunConfig config;
    if (!config_path.empty()) config = cli::load_run_config(config_path);
    if (seed) config.seed = *seed;
    const std::uint64_t run_seed = config.seed;

    if (*synth) {
      cli::SynthArgs a;
      a.seed = run_seed;
      a.n_scenes = n_scenes;
      a.n_pipes = n_pipes;
      a.out_dir = out_dir;
      a.extents = parse_extents(extents_text);
      a.jitter_px = jitter_px;
      a.detector_noise = detector_noise;
      a.bscan = bscan;
      const auto ids = cli::cmd_synth(a);
      std::cout << "wrote " << ids.size() << " scenes to " << out_dir << "\n";
    } else if (*match) {
      cli::MatchArgs a;
      if (conf_thr) config.match.confidence_threshold = *conf_thr;
      if (pred_thr) config.match.prediction_iou_threshold = *pred_thr;
      if (match_thr) config.match.matching_diou_threshold = *match_thr;
      if (!pairwise.empty()) config.match.pairwise_mode = pipefuse::parse_pairwise_mode(pairwise);
      a.config = config;
      a.inputs.assign(match_inputs.begin(), match_inputs.end());
      a.truth.assign(truth_inputs.begin(), truth_inputs.end());
      a.out_dir = out_dir;
      a.threads = threads;
      a.svg = svg;
      const auto report = cli::cmd_match(a);
      std::cout << report["summary"]["scenes"] << " scenes, " << report["summary"]["detections"]
                << " detections";
      if (report.contains("evaluation")) {
        std::cout << ", precision " << report["evaluation"]["precision"] << ", recall "
                  << report["evaluation"]["recall"];
      }
      std::cout << "\n";
    } else if (*eval) {
      cli::EvalArgs a;
      a.report = report_path;
      a.truth.assign(eval_truth.begin(), eval_truth.end());
      a.out_dir = out_dir;
      a.diou_threshold = eval_thr;
      const auto m = cli::cmd_eval(a);
      std::cout << "precision " << m["precision"] << ", recall " << m["recall"] << "\n";
    } else if (*pre) {
      cli::PreprocessArgs a;
      if (!pre_input.empty()) a.input = pre_input;
      a.steps = split_csv(steps_text);
      a.params = params;
      a.ablation = ablation;
      a.corpus_size = corpus;
      a.seed = run_seed;
      a.out_dir = out_dir;
      const auto r = cli::cmd_preprocess(a);
      std::cout << "IE " << r["ie"] << "\n";
    } else if (*foot) {
      fargs.out_dir = out_dir;
      const auto f = cli::cmd_footprint(fargs);
      std::printf("image pipeline   %.1f MB (%.1f MiB)\n", f["image_pipeline"]["mb"].get<double>(),
                  f["image_pipeline"]["mib"].get<double>());
      std::printf("volume pipeline  %.1f MB (%.2f MiB)\n", f["volume_pipeline"]["mb"].get<double>(),
                  f["volume_pipeline"]["mib"].get<double>());
      std::printf("ratio            %.2f%% decimal/binary, %.2f%% MB over MiB\n",
                  100.0 * f["ratio"]["decimal"].get<double>(),
                  100.0 * f["ratio"]["image_mb_over_volume_mib"].get<double>());
      std::printf("bits reading     %.1f MB, ratio %.2f%%\n", f["bits_per_point_reading"]["mb"].get<double>(),
                  100.0 * f["bits_per_point_reading"]["ratio"].get<double>());
      std::printf("stated           5470 MB, 5.6%%\n");
    } else if (*bench) {
      cli::BenchArgs a;
      a.seed = run_seed;
      a.scenes = bench_scenes;
      a.out_dir = out_dir;
      cli::cmd_bench(a);
    }
  } catch (const std::exception& e) {
    std::cerr << "pipefuse: " << e.what() << "\n";
    return cli::exit_code_for(e);
  }
  return 0;
}
