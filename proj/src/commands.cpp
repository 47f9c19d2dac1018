#include "pipefuse/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "pipefuse/errors.hpp"
#include "pipefuse/formats.hpp"
#include "pipefuse/geometry.hpp"
#include "pipefuse/neural_kernels.hpp"

namespace pipefuse::cli {

namespace {

constexpr int kHistogramBins = 20;

struct Histogram {
  std::array<std::size_t, kHistogramBins> counts{};
  std::size_t total = 0;
  std::size_t above = 0;

  void add(double v, double threshold) {
    const int bin = std::clamp(static_cast<int>(std::floor((v + 1.0) * 10.0)), 0, kHistogramBins - 1);
    ++counts[static_cast<std::size_t>(bin)];
    ++total;
    if (v > threshold) ++above;
  }

  json to_json() const {
    json edges = json::array();
    for (int i = 0; i <= kHistogramBins; ++i) edges.push_back((i - 10) / 10.0);
    return {{"edges", edges}, {"counts", counts}};
  }

  double above_fraction() const { return total ? static_cast<double>(above) / total : 0.0; }
};

struct PairHistograms {
  Histogram bc, bd, cd;

  void add(const PairwiseScores& s, double threshold) {
    bc.add(s.bc, threshold);
    bd.add(s.bd, threshold);
    cd.add(s.cd, threshold);
  }
};

std::string scene_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%04zu", index);
  return buf;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<fs::path> files_with_suffix(const fs::path& dir, const std::string& suffix) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && ends_with(entry.path().filename().string(), suffix)) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void apply_frame(SceneDetections& s, const std::optional<ViewFrame>& frame) {
  if (!frame) return;
  s.b.frame = *frame;
  s.c.frame = *frame;
  s.d.frame = *frame;
}

const char* orientation_key(Orientation o) {
  switch (o) {
    case Orientation::Vertical: return "vertical";
    case Orientation::HorizontalInclined: return "horizontal_inclined";
    case Orientation::DeeplyInclined: return "deeply_inclined";
  }
  return "?";
}

template <typename F>
void parallel_for(std::size_t n, int threads, F&& body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int count = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string histogram_svg(const PairHistograms& h) {
  const int panel_w = 300, panel_h = 200, margin = 30;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 3 * (panel_w + margin) + margin
      << "\" height=\"" << panel_h + 2 * margin + 20 << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  const std::pair<const char*, const Histogram*> panels[] = {{"B-C", &h.bc}, {"B-D", &h.bd}, {"C-D", &h.cd}};
  for (int p = 0; p < 3; ++p) {
    const Histogram& hist = *panels[p].second;
    const int x0 = margin + p * (panel_w + margin);
    const int y0 = margin;
    const std::size_t peak = std::max<std::size_t>(1, *std::max_element(hist.counts.begin(), hist.counts.end()));
    svg << "<text x=\"" << x0 << "\" y=\"" << y0 - 8 << "\">3D-DIoU " << panels[p].first << " (n="
        << hist.total << ")</text>\n";
    svg << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << panel_w << "\" height=\"" << panel_h
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    const double bw = static_cast<double>(panel_w) / kHistogramBins;
    for (int b = 0; b < kHistogramBins; ++b) {
      const double bh = panel_h * static_cast<double>(hist.counts[static_cast<std::size_t>(b)]) / peak;
      svg << "<rect x=\"" << x0 + b * bw << "\" y=\"" << y0 + panel_h - bh << "\" width=\"" << bw
          << "\" height=\"" << bh << "\" fill=\"steelblue\" stroke=\"white\"/>\n";
    }
    svg << "<text x=\"" << x0 << "\" y=\"" << y0 + panel_h + 15 << "\">-1</text>\n";
    svg << "<text x=\"" << x0 + panel_w - 8 << "\" y=\"" << y0 + panel_h + 15 << "\">1</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

void RunConfig::validate() const {
  match.validate();
  if (frame) frame->validate();
}

json to_json(const RunConfig& c) {
  json j = io::to_json(c.match);
  if (c.frame) j["frame"] = io::to_json(*c.frame);
  j["seed"] = c.seed;
  return j;
}

RunConfig load_run_config(const fs::path& path, RunConfig c) {
  json j;
  try {
    j = io::read_json_file(path);
  } catch (const DataError& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  static const std::set<std::string> known{"confidence_threshold", "prediction_iou_threshold",
                                           "matching_diou_threshold", "pairwise_mode", "frame", "seed"};
  if (!j.is_object()) throw UsageError(path.string() + ": configuration must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw UsageError(path.string() + ": unknown config key '" + key + "'");
  }
  try {
    c.match = io::match_config_from_json(j, c.match);
  } catch (const DataError& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
  if (j.contains("frame")) {
    try {
      c.frame = io::frame_from_json(j.at("frame"));
    } catch (const DataError& e) {
      throw UsageError(path.string() + ": " + e.what());
    }
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw UsageError(path.string() + ": seed must be a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  return c;
}

std::uint64_t scene_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::string> cmd_synth(const SynthArgs& args) {
  if (args.jitter_px < 0.0) throw ParameterError("jitter must be non-negative");
  if (args.detector_noise && *args.detector_noise < 0.0) throw ParameterError("detector noise must be non-negative");
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < args.n_scenes; ++i) {
    const std::uint64_t s = scene_seed(args.seed, i);
    Scene scene = generate_scene(s, args.n_pipes, args.extents);
    const std::string name = scene_name(i);
    scene.spec.id = name;
    scene.truth.scene_id = name;

    SceneDetections dets;
    if (args.detector_noise) {
      dets = simulate_detector(scene.truth, detector_model_for_noise(*args.detector_noise), s ^ 0xd1b54a32d192ed03ULL);
    } else if (args.jitter_px > 0.0) {
      dets = perturb_boxes(scene.truth, args.jitter_px, s ^ 0xd1b54a32d192ed03ULL);
    } else {
      dets = scene.truth.detections();
    }
    dets.scene_id = name;

    io::write_json_file(args.out_dir / (name + ".scene.json"), io::scene_file_json(scene));
    io::write_json_file(args.out_dir / (name + ".detections.json"), io::to_json(dets));
    if (args.bscan) {
      io::write_radargram(args.out_dir / (name + ".bscan"), render_bscan(scene.spec, scene.spec.extents.y / 2.0));
    }
    ids.push_back(name);
  }
  return ids;
}

std::vector<SceneDetections> collect_detections(const std::vector<fs::path>& inputs) {
  std::vector<SceneDetections> scenes;
  auto load_file = [&](const fs::path& file) {
    const json j = io::read_json_file(file);
    try {
      if (j.is_object() && j.contains("scene") && j.contains("truth")) {
        scenes.push_back(io::scene_from_json(j).truth.detections());
      } else {
        scenes.push_back(io::detections_from_json(j));
      }
    } catch (const DataError& e) {
      throw DataError(file.string() + ": " + e.what());
    } catch (const json::exception& e) {
      throw DataError(file.string() + ": " + e.what());
    }
  };
  for (const fs::path& in : inputs) {
    if (fs::is_directory(in)) {
      if (fs::exists(in / "classes.json")) {
        scenes.push_back(io::load_yolo_scene(in));
        continue;
      }
      const auto files = files_with_suffix(in, ".detections.json");
      if (files.empty()) throw DataError(in.string() + ": no *.detections.json files or YOLO class map");
      for (const auto& f : files) load_file(f);
    } else if (fs::exists(in)) {
      load_file(in);
    } else {
      throw DataError(in.string() + ": no such file or directory");
    }
  }
  std::sort(scenes.begin(), scenes.end(),
            [](const SceneDetections& a, const SceneDetections& b) { return a.scene_id < b.scene_id; });
  for (std::size_t i = 1; i < scenes.size(); ++i) {
    if (scenes[i].scene_id == scenes[i - 1].scene_id) {
      throw DataError("duplicate scene id '" + scenes[i].scene_id + "' in inputs");
    }
  }
  return scenes;
}

std::vector<Scene> collect_scenes(const std::vector<fs::path>& inputs) {
  std::vector<Scene> scenes;
  auto load_file = [&](const fs::path& file) {
    try {
      scenes.push_back(io::scene_from_json(io::read_json_file(file)));
    } catch (const json::exception& e) {
      throw DataError(file.string() + ": " + e.what());
    } catch (const DataError& e) {
      const std::string what = e.what();
      if (what.rfind(file.string(), 0) == 0) throw;
      throw DataError(file.string() + ": " + what);
    }
  };
  for (const fs::path& in : inputs) {
    if (fs::is_directory(in)) {
      const auto files = files_with_suffix(in, ".scene.json");
      if (files.empty()) throw DataError(in.string() + ": no *.scene.json files");
      for (const auto& f : files) load_file(f);
    } else if (fs::exists(in)) {
      load_file(in);
    } else {
      throw DataError(in.string() + ": no such file or directory");
    }
  }
  std::sort(scenes.begin(), scenes.end(),
            [](const Scene& a, const Scene& b) { return a.truth.scene_id < b.truth.scene_id; });
  for (std::size_t i = 1; i < scenes.size(); ++i) {
    if (scenes[i].truth.scene_id == scenes[i - 1].truth.scene_id) {
      throw DataError("duplicate ground-truth scene id '" + scenes[i].truth.scene_id + "'");
    }
  }
  return scenes;
}

json evaluate(const std::vector<SceneDetections>& boxes, const std::vector<MatchResult>& results,
              const std::vector<GroundTruth>& truth, double threshold) {
  if (boxes.size() != results.size()) throw DataError("report scenes and results differ in count");
  std::map<std::string, const GroundTruth*> by_id;
  for (const GroundTruth& g : truth) by_id[g.scene_id] = &g;
  std::set<std::string> seen;

  std::size_t n_truth = 0, n_det = 0, n_correct = 0, n_skipped = 0;
  std::map<Orientation, std::array<std::size_t, 3>> per_class;  // truth, detected, correct
  for (Orientation o : {Orientation::Vertical, Orientation::HorizontalInclined, Orientation::DeeplyInclined}) {
    per_class[o] = {0, 0, 0};
  }
  PairHistograms pairs;
  json per_scene = json::array();

  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const SceneDetections& s = boxes[i];
    auto it = by_id.find(s.scene_id);
    if (it == by_id.end()) throw DataError("scene id '" + s.scene_id + "' has no ground truth");
    seen.insert(s.scene_id);
    const GroundTruth& g = *it->second;

    std::map<std::tuple<std::string, std::string, std::string>, Orientation> truth_triples;
    for (const PipelineTruth& p : g.pipelines) {
      truth_triples[{p.b.id, p.c.id, p.d.id}] = p.family;
      ++per_class[p.family][0];
    }
    auto has_id = [](const ViewDetections& v, const std::string& id) {
      return std::any_of(v.boxes.begin(), v.boxes.end(), [&](const ViewBox2D& b) { return b.id == id; });
    };
    std::size_t correct = 0;
    for (const PipelineDetection& d : results[i].detections) {
      if (!has_id(s.b, d.b_id) || !has_id(s.c, d.c_id) || !has_id(s.d, d.d_id)) {
        throw DataError("scene '" + s.scene_id + "': detection (" + d.b_id + ", " + d.c_id + ", " + d.d_id +
                        ") references unknown box ids");
      }
      ++per_class[d.orientation][1];
      auto t = truth_triples.find({d.b_id, d.c_id, d.d_id});
      if (t != truth_triples.end() && t->second == d.orientation) {
        ++correct;
        ++per_class[d.orientation][2];
      }
    }

    for (const PipelineTruth& p : g.pipelines) {
      auto find = [](const ViewDetections& v, const std::string& id) -> const ViewBox2D* {
        for (const auto& b : v.boxes) {
          if (b.id == id) return &b;
        }
        return nullptr;
      };
      const ViewBox2D* b = find(s.b, p.b.id);
      const ViewBox2D* c = find(s.c, p.c.id);
      const ViewBox2D* d = find(s.d, p.d.id);
      if (!b || !c || !d) {
        ++n_skipped;
        continue;
      }
      pairs.add(pairwise_diou(lift_boxes(s, *b, *c, *d)), threshold);
    }

    n_truth += g.pipelines.size();
    n_det += results[i].detections.size();
    n_correct += correct;
    per_scene.push_back({{"scene_id", s.scene_id},
                         {"truth", g.pipelines.size()},
                         {"detections", results[i].detections.size()},
                         {"correct", correct}});
  }
  for (const GroundTruth& g : truth) {
    if (!seen.count(g.scene_id)) throw DataError("ground-truth scene id '" + g.scene_id + "' is missing from the report");
  }

  json classes = json::object();
  for (const auto& [o, c] : per_class) {
    classes[orientation_key(o)] = {{"truth", c[0]}, {"detected", c[1]}, {"correct", c[2]}};
  }
  auto pair_json = [&](const Histogram& h) {
    const double above = h.above_fraction();
    return json{{"pairs", h.total},
                {"fraction_le_threshold", h.total ? 1.0 - above : 0.0},
                {"fraction_gt_threshold", above},
                {"histogram", h.to_json()}};
  };
  return {{"scenes", boxes.size()},
          {"truth_pipelines", n_truth},
          {"detections", n_det},
          {"correct", n_correct},
          {"precision", n_det ? static_cast<double>(n_correct) / n_det : 1.0},
          {"recall", n_truth ? static_cast<double>(n_correct) / n_truth : 1.0},
          {"per_class", classes},
          {"diou_threshold", threshold},
          {"true_pairs", {{"bc", pair_json(pairs.bc)}, {"bd", pair_json(pairs.bd)}, {"cd", pair_json(pairs.cd)}}},
          {"true_triples_missing_boxes", n_skipped},
          {"per_scene", per_scene}};
}

json cmd_match(const MatchArgs& args) {
  args.config.validate();
  if (args.inputs.empty()) throw UsageError("match: no inputs given");
  std::vector<SceneDetections> scenes = collect_detections(args.inputs);
  for (auto& s : scenes) apply_frame(s, args.config.frame);

  std::vector<MatchResult> results(scenes.size());
  parallel_for(scenes.size(), args.threads, [&](std::size_t i) {
    try {
      results[i] = match_triples(scenes[i], args.config.match);
    } catch (const OutOfFrameError& e) {
      throw DataError("scene '" + scenes[i].scene_id + "': " + e.what());
    } catch (const DataError& e) {
      throw DataError("scene '" + scenes[i].scene_id + "': " + e.what());
    }
  });

  PairHistograms hist;
  std::size_t n_det = 0, n_unmatched = 0;
  std::array<std::size_t, 3> boxes_in{0, 0, 0};
  std::map<Orientation, std::size_t> per_orientation{
      {Orientation::Vertical, 0}, {Orientation::HorizontalInclined, 0}, {Orientation::DeeplyInclined, 0}};
  std::map<DropReason, std::size_t> per_reason{
      {DropReason::LowConfidence, 0}, {DropReason::Suppressed, 0}, {DropReason::Unmatched, 0}};
  json scene_docs = json::array();
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const double thr = args.config.match.matching_diou_threshold;
    for (const auto& d : results[i].detections) {
      hist.add(d.scores, thr);
      ++per_orientation[d.orientation];
    }
    for (const auto& u : results[i].unmatched) ++per_reason[u.reason];
    n_det += results[i].detections.size();
    n_unmatched += results[i].unmatched.size();
    boxes_in[0] += scenes[i].b.boxes.size();
    boxes_in[1] += scenes[i].c.boxes.size();
    boxes_in[2] += scenes[i].d.boxes.size();
    json r = io::to_json(results[i]);
    scene_docs.push_back({{"scene_id", scenes[i].scene_id},
                          {"detections", r["detections"]},
                          {"unmatched", r["unmatched"]},
                          {"boxes", io::to_json(scenes[i])}});
  }

  json orient = json::object();
  for (const auto& [o, n] : per_orientation) orient[orientation_key(o)] = n;
  json reasons = json::object();
  for (const auto& [r, n] : per_reason) reasons[std::string(to_string(r))] = n;
  json report = {
      {"config", to_json(args.config)},
      {"summary",
       {{"scenes", scenes.size()},
        {"boxes_in", {{"B", boxes_in[0]}, {"C", boxes_in[1]}, {"D", boxes_in[2]}}},
        {"detections", n_det},
        {"unmatched", n_unmatched},
        {"unmatched_by_reason", reasons},
        {"detections_by_orientation", orient}}},
      {"histograms", {{"bc", hist.bc.to_json()}, {"bd", hist.bd.to_json()}, {"cd", hist.cd.to_json()}}},
      {"exceedance",
       {{"threshold", args.config.match.matching_diou_threshold},
        {"bc", hist.bc.above_fraction()},
        {"bd", hist.bd.above_fraction()},
        {"cd", hist.cd.above_fraction()}}},
      {"scenes", scene_docs}};

  if (!args.truth.empty()) {
    std::vector<GroundTruth> truth;
    for (Scene& s : collect_scenes(args.truth)) truth.push_back(std::move(s.truth));
    report["evaluation"] = evaluate(scenes, results, truth, args.config.match.matching_diou_threshold);
  }

  io::write_json_file(args.out_dir / "report.json", report);
  if (args.svg) io::write_text_file(args.out_dir / "diou_histogram.svg", histogram_svg(hist));
  return report;
}

json cmd_eval(const EvalArgs& args) {
  if (args.truth.empty()) throw UsageError("eval: no ground truth given");
  const json report = io::read_json_file(args.report);
  std::vector<SceneDetections> boxes;
  std::vector<MatchResult> results;
  try {
    for (const json& s : report.at("scenes")) {
      SceneDetections sd = io::detections_from_json(s.at("boxes"));
      if (sd.scene_id != s.at("scene_id").get<std::string>()) {
        throw DataError("scene id '" + s.at("scene_id").get<std::string>() + "' disagrees with its boxes");
      }
      MatchResult r;
      for (const json& d : s.at("detections")) r.detections.push_back(io::detection_from_json(d));
      boxes.push_back(std::move(sd));
      results.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw DataError(args.report.string() + ": not a match report (" + e.what() + ")");
  }
  std::vector<GroundTruth> truth;
  for (Scene& s : collect_scenes(args.truth)) truth.push_back(std::move(s.truth));
  json metrics = evaluate(boxes, results, truth, args.diou_threshold);
  io::write_json_file(args.out_dir / "metrics.json", metrics);
  return metrics;
}

PreprocessSteps parse_steps(const std::vector<std::string>& names) {
  PreprocessSteps steps;
  for (const std::string& n : names) {
    if (n == "gain") {
      steps.gain = true;
    } else if (n == "background") {
      steps.background = true;
    } else if (n == "lowpass") {
      steps.lowpass = true;
    } else if (n == "none" || n.empty()) {
    } else {
      throw UsageError("unknown preprocessing step '" + n + "' (expected gain, background, lowpass or none)");
    }
  }
  return steps;
}

json cmd_preprocess(const PreprocessArgs& args) {
  const PreprocessSteps steps = parse_steps(args.steps);
  if (args.params.gray_levels < 2) throw ParameterError("gray levels must be at least 2");

  std::vector<Radargram> inputs;
  json source;
  if (args.corpus_size > 0) {
    for (std::size_t i = 0; i < args.corpus_size; ++i) inputs.push_back(corpus_bscan(args.seed + i));
    source = {{"corpus", args.corpus_size}, {"first_seed", args.seed}};
  } else {
    if (!args.input) throw UsageError("preprocess: an input radargram or --corpus is required");
    inputs.push_back(io::read_radargram(*args.input));
    source = {{"file", args.input->filename().string()}};
  }
  source["n_traces"] = inputs.front().n_traces();
  source["n_samples"] = inputs.front().n_samples();

  auto mean_ie = [&](const PreprocessSteps& st) {
    std::vector<double> ie(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      ie[i] = information_entropy(quantize(run_chain(inputs[i], st, args.params), args.params.gray_levels));
    }
    double sum = 0.0;
    for (double v : ie) sum += v;
    return sum / static_cast<double>(ie.size());
  };
  auto step_names = [](const PreprocessSteps& st) {
    json a = json::array();
    if (st.gain) a.push_back("gain");
    if (st.background) a.push_back("background");
    if (st.lowpass) a.push_back("lowpass");
    return a;
  };

  json report = {{"source", source},
                 {"params",
                  {{"gain_alpha_per_ns", args.params.gain_alpha_per_ns},
                   {"lowpass_pass_hz", args.params.lowpass_pass_hz},
                   {"lowpass_stop_hz", args.params.lowpass_stop_hz},
                   {"gray_levels", args.params.gray_levels}}},
                 {"steps", step_names(steps)},
                 {"ie", mean_ie(steps)}};
  if (args.ablation) {
    json rows = json::array();
    for (int mask = 7; mask >= 0; --mask) {
      const PreprocessSteps st{(mask & 4) != 0, (mask & 2) != 0, (mask & 1) != 0};
      rows.push_back({{"gain", st.gain}, {"background", st.background}, {"lowpass", st.lowpass},
                      {"ie", mean_ie(st)}});
    }
    report["ablation"] = rows;
  }
  if (!args.input || args.corpus_size > 0) {
    io::write_radargram(args.out_dir / "corpus.processed", run_chain(inputs.front(), steps, args.params));
  } else {
    fs::path stem = args.input->filename();
    if (stem.extension() == ".f32" || stem.extension() == ".json") stem.replace_extension();
    io::write_radargram(args.out_dir / (stem.string() + ".processed"), run_chain(inputs.front(), steps, args.params));
  }
  io::write_json_file(args.out_dir / "ie_report.json", report);
  return report;
}

json cmd_footprint(const FootprintArgs& a) {
  for (double v : {a.images, a.kb_per_image, a.image_width_px, a.image_height_px, a.length_km, a.point_spacing_m,
                   a.channels, a.depth_points, a.bytes_per_point}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError("footprint parameters must be positive");
  }
  constexpr double kMB = 1e6;
  constexpr double kMiB = 1024.0 * 1024.0;
  const double image_bytes = a.images * a.kb_per_image * 1000.0;
  const double points = a.length_km * 1000.0 / a.point_spacing_m;
  const double volume_bytes = points * a.channels * a.depth_points * a.bytes_per_point;
  // The same count read as bits per point rather than bytes.
  const double volume_bits_reading = volume_bytes / 8.0;

  json j = {
      {"inputs",
       {{"images", a.images},
        {"kb_per_image", a.kb_per_image},
        {"image_width_px", a.image_width_px},
        {"image_height_px", a.image_height_px},
        {"length_km", a.length_km},
        {"point_spacing_m", a.point_spacing_m},
        {"channels", a.channels},
        {"depth_points", a.depth_points},
        {"bytes_per_point", a.bytes_per_point}}},
      {"image_pipeline", {{"bytes", image_bytes}, {"mb", image_bytes / kMB}, {"mib", image_bytes / kMiB}}},
      {"volume_pipeline",
       {{"points_per_channel", points},
        {"bytes", volume_bytes},
        {"mb", volume_bytes / kMB},
        {"mib", volume_bytes / kMiB}}},
      {"ratio",
       {{"decimal", image_bytes / volume_bytes},
        {"binary", image_bytes / volume_bytes},
        {"image_mb_over_volume_mib", (image_bytes / kMB) / (volume_bytes / kMiB)}}},
      {"bits_per_point_reading",
       {{"bytes", volume_bits_reading},
        {"mb", volume_bits_reading / kMB},
        {"mib", volume_bits_reading / kMiB},
        {"ratio", image_bytes / volume_bits_reading}}},
      {"stated", {{"image_mb", 300.0}, {"volume_mb", 5470.0}, {"ratio", 0.056}}},
      {"note",
       "stated volume of 5470 MB matches bytes per point counted in MiB; with bits per point the volume would be "
       "one eighth as large"}};
  io::write_json_file(a.out_dir / "footprint.json", j);
  return j;
}

json cmd_bench(const BenchArgs& args) {
  using clock = std::chrono::steady_clock;
  auto ms = [](clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };
  json checks = json::object();

  auto t0 = clock::now();
  std::mt19937_64 rng(args.seed);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  double diou_sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    Vec3 a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)};
    Box3D x{a, a + Vec3{1.0, 2.0, 1.5}};
    Box3D y{b, b + Vec3{2.0, 1.0, 1.0}};
    diou_sum += diou_3d(x, y);
  }
  std::cerr << "diou_3d x100000: " << ms(t0) << " ms\n";
  checks["diou_sum"] = diou_sum;

  t0 = clock::now();
  std::size_t detections = 0;
  for (std::size_t i = 0; i < args.scenes; ++i) {
    const Scene s = generate_scene(scene_seed(args.seed, i), 4);
    detections += match_triples(simulate_detector(s.truth, DetectorModel{}, i)).detections.size();
  }
  std::cerr << "synth+detector+match x" << args.scenes << ": " << ms(t0) << " ms\n";
  checks["detections"] = detections;

  t0 = clock::now();
  const Radargram raw = corpus_bscan(args.seed);
  const double ie = information_entropy(quantize(run_chain(raw, {true, true, true}, {})));
  std::cerr << "corpus b-scan + full chain: " << ms(t0) << " ms\n";
  checks["ie_full_chain"] = ie;

  t0 = clock::now();
  nn::TensorHWC x(16, 16, 8);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double& v : x.data()) v = g(rng);
  nn::LinearWeights w1 = nn::LinearWeights::zeros(8, 2 * 2 * 2);
  nn::LinearWeights w2 = nn::LinearWeights::zeros(8, 2 * 2 * 2);
  for (double& v : w1.weight) v = 0.1 * g(rng);
  for (double& v : w2.weight) v = 0.1 * g(rng);
  const nn::TensorHWC up = nn::dysample_upsample(x, w1, w2, 2);
  double up_sum = 0.0;
  for (double v : up.data()) up_sum += v;
  std::cerr << "dysample 16x16x8 -> 32x32: " << ms(t0) << " ms\n";
  checks["dysample_sum"] = up_sum;

  json j = {{"seed", args.seed}, {"scenes", args.scenes}, {"checksums", checks}};
  io::write_json_file(args.out_dir / "bench.json", j);
  return j;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ParameterError*>(&e) ||
      dynamic_cast<const PlacementError*>(&e)) {
    return 1;
  }
  return 2;
}

}  // namespace pipefuse::cli
