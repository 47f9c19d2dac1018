#include "pipefuse/formats.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pipefuse/errors.hpp"

namespace pipefuse::io {

namespace fs = std::filesystem;

namespace {

const json& field(const json& j, const char* key, const char* context) {
  if (!j.is_object() || !j.contains(key)) {
    throw DataError(std::string(context) + ": missing field '" + key + "'");
  }
  return j.at(key);
}

template <typename T>
T get(const json& j, const char* key, const char* context) {
  try {
    return field(j, key, context).get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string(context) + ": field '" + key + "' has the wrong type (" +
                    e.what() + ")");
  }
}

json vec3(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from(const json& j, const char* context) {
  if (!j.is_array() || j.size() != 3) throw DataError(std::string(context) + ": expected [x, y, z]");
  try {
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  } catch (const json::exception&) {
    throw DataError(std::string(context) + ": coordinates must be numbers");
  }
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

json to_json(const ViewFrame& f) {
  return {{"origin_x_px", f.origin_x_px}, {"origin_y_px", f.origin_y_px},
          {"width_px", f.width_px},       {"height_px", f.height_px},
          {"x_span_m", f.x_span_m},       {"y_span_m", f.y_span_m},
          {"z_depth_m", f.z_depth_m}};
}

ViewFrame frame_from_json(const json& j) {
  ViewFrame f;
  if (!j.is_object()) throw DataError("frame must be an object");
  auto opt = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = get<double>(j, key, "frame");
  };
  opt("origin_x_px", f.origin_x_px);
  opt("origin_y_px", f.origin_y_px);
  opt("width_px", f.width_px);
  opt("height_px", f.height_px);
  opt("x_span_m", f.x_span_m);
  opt("y_span_m", f.y_span_m);
  opt("z_depth_m", f.z_depth_m);
  try {
    f.validate();
  } catch (const ParameterError& e) {
    throw DataError(e.what());
  }
  return f;
}

json to_json(const Box3D& b) { return {{"min", vec3(b.min)}, {"max", vec3(b.max)}}; }

Box3D box_from_json(const json& j) {
  return {vec3_from(field(j, "min", "box"), "box.min"), vec3_from(field(j, "max", "box"), "box.max")};
}

json to_json(const ViewBox2D& b) {
  return {{"id", b.id},
          {"label", b.label.str()},
          {"rect_px", {b.rect_px.min_x, b.rect_px.min_y, b.rect_px.max_x, b.rect_px.max_y}},
          {"confidence", b.confidence}};
}

ViewBox2D view_box_from_json(const json& j, ViewKind expected_view) {
  ViewBox2D b;
  b.id = get<std::string>(j, "id", "box");
  const std::string ctx = "box '" + b.id + "'";
  b.label = ClassLabel::parse(get<std::string>(j, "label", ctx.c_str()));
  if (b.label.view != expected_view) {
    throw DataError(ctx + " labeled " + b.label.str() + " is listed under view " +
                    view_letter(expected_view));
  }
  const auto rect = get<std::vector<double>>(j, "rect_px", ctx.c_str());
  if (rect.size() != 4) throw DataError(ctx + ": rect_px needs four numbers");
  b.rect_px = {rect[0], rect[1], rect[2], rect[3]};
  if (!b.rect_px.valid()) throw DataError(ctx + ": rect_px has inverted edges");
  b.confidence = j.contains("confidence") ? get<double>(j, "confidence", ctx.c_str()) : 1.0;
  if (!(b.confidence >= 0.0 && b.confidence <= 1.0)) {
    throw DataError(ctx + ": confidence must lie in [0, 1]");
  }
  return b;
}

json to_json(const SceneDetections& s) {
  json views = json::object();
  for (ViewKind v : {ViewKind::BScan, ViewKind::CScan, ViewKind::DScan}) {
    json boxes = json::array();
    for (const ViewBox2D& b : s.view(v).boxes) boxes.push_back(to_json(b));
    views[std::string(1, view_letter(v))] = {{"frame", to_json(s.view(v).frame)}, {"boxes", boxes}};
  }
  return {{"scene_id", s.scene_id}, {"views", views}};
}

SceneDetections detections_from_json(const json& j) {
  SceneDetections s;
  s.scene_id = get<std::string>(j, "scene_id", "detections");
  const json& views = field(j, "views", "detections");
  for (ViewKind v : {ViewKind::BScan, ViewKind::CScan, ViewKind::DScan}) {
    const std::string key(1, view_letter(v));
    if (!views.is_object() || !views.contains(key)) {
      throw DataError("scene '" + s.scene_id + "' is missing the " + key + "-scan view (" +
                      std::string(to_string(v)) + ")");
    }
    const json& vj = views.at(key);
    ViewDetections& vd = s.view(v);
    if (vj.contains("frame")) vd.frame = frame_from_json(vj.at("frame"));
    const json& boxes = field(vj, "boxes", "view");
    if (!boxes.is_array()) throw DataError("view " + key + ": boxes must be a list");
    for (const json& b : boxes) vd.boxes.push_back(view_box_from_json(b, v));
  }
  return s;
}

json to_json(const SceneSpec& s) {
  json pipes = json::array();
  for (const PipelineSpec& p : s.pipelines) {
    pipes.push_back({{"p0", vec3(p.p0)},
                     {"p1", vec3(p.p1)},
                     {"diameter", p.diameter},
                     {"family", std::string(to_string(p.family))}});
  }
  return {{"id", s.id},
          {"extents", vec3(s.extents)},
          {"velocity_m_per_ns", s.velocity_m_per_ns},
          {"seed", s.seed},
          {"pipelines", pipes}};
}

SceneSpec scene_spec_from_json(const json& j) {
  SceneSpec s;
  s.id = get<std::string>(j, "id", "scene");
  s.extents = vec3_from(field(j, "extents", "scene"), "scene.extents");
  s.velocity_m_per_ns = get<double>(j, "velocity_m_per_ns", "scene");
  s.seed = get<std::uint64_t>(j, "seed", "scene");
  for (const json& p : field(j, "pipelines", "scene")) {
    PipelineSpec ps;
    ps.p0 = vec3_from(field(p, "p0", "pipeline"), "pipeline.p0");
    ps.p1 = vec3_from(field(p, "p1", "pipeline"), "pipeline.p1");
    ps.diameter = get<double>(p, "diameter", "pipeline");
    ps.family = parse_orientation(get<std::string>(p, "family", "pipeline"));
    s.pipelines.push_back(ps);
  }
  return s;
}

json to_json(const GroundTruth& g) {
  json pipes = json::array();
  for (const PipelineTruth& p : g.pipelines) {
    pipes.push_back({{"pipe_index", p.pipe_index},
                     {"family", std::string(to_string(p.family))},
                     {"box", to_json(p.box)},
                     {"b", to_json(p.b)},
                     {"c", to_json(p.c)},
                     {"d", to_json(p.d)},
                     {"apex",
                      {{"x0_m", p.apex.x0_m},
                       {"t0_ns", p.apex.t0_ns},
                       {"velocity_m_per_ns", p.apex.velocity_m_per_ns}}}});
  }
  return {{"scene_id", g.scene_id},
          {"frames", {{"B", to_json(g.b_frame)}, {"C", to_json(g.c_frame)}, {"D", to_json(g.d_frame)}}},
          {"pipelines", pipes}};
}

GroundTruth ground_truth_from_json(const json& j) {
  GroundTruth g;
  g.scene_id = get<std::string>(j, "scene_id", "truth");
  const json& frames = field(j, "frames", "truth");
  g.b_frame = frame_from_json(field(frames, "B", "truth.frames"));
  g.c_frame = frame_from_json(field(frames, "C", "truth.frames"));
  g.d_frame = frame_from_json(field(frames, "D", "truth.frames"));
  for (const json& p : field(j, "pipelines", "truth")) {
    PipelineTruth t;
    t.pipe_index = get<std::size_t>(p, "pipe_index", "truth pipeline");
    t.family = parse_orientation(get<std::string>(p, "family", "truth pipeline"));
    t.box = box_from_json(field(p, "box", "truth pipeline"));
    t.b = view_box_from_json(field(p, "b", "truth pipeline"), ViewKind::BScan);
    t.c = view_box_from_json(field(p, "c", "truth pipeline"), ViewKind::CScan);
    t.d = view_box_from_json(field(p, "d", "truth pipeline"), ViewKind::DScan);
    const json& apex = field(p, "apex", "truth pipeline");
    t.apex = {get<double>(apex, "x0_m", "apex"), get<double>(apex, "t0_ns", "apex"),
              get<double>(apex, "velocity_m_per_ns", "apex")};
    g.pipelines.push_back(std::move(t));
  }
  return g;
}

json scene_file_json(const Scene& scene) {
  return {{"scene", to_json(scene.spec)}, {"truth", to_json(scene.truth)}};
}

Scene scene_from_json(const json& j) {
  return {scene_spec_from_json(field(j, "scene", "scene file")),
          ground_truth_from_json(field(j, "truth", "scene file"))};
}

json to_json(const MatchConfig& c) {
  return {{"confidence_threshold", c.confidence_threshold},
          {"prediction_iou_threshold", c.prediction_iou_threshold},
          {"matching_diou_threshold", c.matching_diou_threshold},
          {"pairwise_mode", std::string(to_string(c.pairwise_mode))}};
}

MatchConfig match_config_from_json(const json& j, MatchConfig c) {
  if (!j.is_object()) throw UsageError("configuration must be a JSON object");
  auto num = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number()) throw UsageError(std::string("config field '") + key + "' must be a number");
    dst = j.at(key).get<double>();
  };
  num("confidence_threshold", c.confidence_threshold);
  num("prediction_iou_threshold", c.prediction_iou_threshold);
  num("matching_diou_threshold", c.matching_diou_threshold);
  if (j.contains("pairwise_mode")) {
    if (!j.at("pairwise_mode").is_string()) throw UsageError("config field 'pairwise_mode' must be a string");
    c.pairwise_mode = parse_pairwise_mode(j.at("pairwise_mode").get<std::string>());
  }
  return c;
}

json to_json(const PipelineDetection& d) {
  return {{"orientation", std::string(to_string(d.orientation))},
          {"b_id", d.b_id},
          {"c_id", d.c_id},
          {"d_id", d.d_id},
          {"scores", {{"bc", d.scores.bc}, {"bd", d.scores.bd}, {"cd", d.scores.cd}}},
          {"fused", to_json(d.fused)},
          {"depth_m", d.depth_m}};
}

PipelineDetection detection_from_json(const json& j) {
  PipelineDetection d;
  d.orientation = parse_orientation(get<std::string>(j, "orientation", "detection"));
  d.b_id = get<std::string>(j, "b_id", "detection");
  d.c_id = get<std::string>(j, "c_id", "detection");
  d.d_id = get<std::string>(j, "d_id", "detection");
  const json& s = field(j, "scores", "detection");
  d.scores = {get<double>(s, "bc", "scores"), get<double>(s, "bd", "scores"),
              get<double>(s, "cd", "scores")};
  d.fused = box_from_json(field(j, "fused", "detection"));
  d.depth_m = get<double>(j, "depth_m", "detection");
  return d;
}

json to_json(const MatchResult& r) {
  json dets = json::array();
  for (const auto& d : r.detections) dets.push_back(to_json(d));
  json un = json::array();
  for (const auto& u : r.unmatched) {
    un.push_back({{"view", std::string(1, view_letter(u.view))},
                  {"id", u.id},
                  {"reason", std::string(to_string(u.reason))}});
  }
  return {{"detections", dets}, {"unmatched", un}};
}

json read_json_file(const fs::path& path) {
  const std::string text = read_all(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw DataError(path.string() + ":" + std::to_string(line) + ": invalid JSON (" + e.what() + ")");
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw DataError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

void write_json_file(const fs::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<ViewBox2D> parse_yolo(const std::string& text, ViewKind view,
                                  const std::vector<std::string>& classes, double image_w,
                                  double image_h, const std::string& source) {
  std::vector<ViewBox2D> boxes;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    long cls = -1;
    double cx, cy, w, h;
    const std::string where = source + ":" + std::to_string(line_no);
    if (!(ls >> cls >> cx >> cy >> w >> h)) {
      throw DataError(where + ": expected '<class> <cx> <cy> <w> <h> [confidence]'");
    }
    double conf = 1.0;
    if (!(ls >> conf)) conf = 1.0;
    if (cls < 0 || static_cast<std::size_t>(cls) >= classes.size()) {
      throw DataError(where + ": class index " + std::to_string(cls) + " not in class map");
    }
    for (double v : {cx, cy, w, h}) {
      if (!(v >= 0.0 && v <= 1.0)) throw DataError(where + ": coordinates must be normalized to [0, 1]");
    }
    if (!(conf >= 0.0 && conf <= 1.0)) throw DataError(where + ": confidence must lie in [0, 1]");
    ViewBox2D b;
    char id[32];
    std::snprintf(id, sizeof id, "%c:%04d", view_letter(view), line_no);
    b.id = id;
    try {
      b.label = ClassLabel::parse(classes[static_cast<std::size_t>(cls)]);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    if (b.label.view != view) {
      throw DataError(where + ": class " + b.label.str() + " does not belong to the " +
                      view_letter(view) + "-scan view");
    }
    b.rect_px = {(cx - w / 2) * image_w, (cy - h / 2) * image_h, (cx + w / 2) * image_w,
                 (cy + h / 2) * image_h};
    b.confidence = conf;
    boxes.push_back(std::move(b));
  }
  return boxes;
}

SceneDetections load_yolo_scene(const fs::path& dir) {
  const fs::path map_path = dir / "classes.json";
  if (!fs::exists(map_path)) throw DataError(dir.string() + ": missing class map classes.json");
  const json map = read_json_file(map_path);
  const auto classes = get<std::vector<std::string>>(map, "classes", map_path.string().c_str());
  SceneDetections s;
  s.scene_id = map.contains("scene_id") ? get<std::string>(map, "scene_id", "class map")
                                        : dir.filename().string();
  for (ViewKind v : {ViewKind::BScan, ViewKind::CScan, ViewKind::DScan}) {
    const std::string letter(1, view_letter(v));
    const fs::path file = dir / (letter + ".txt");
    if (!fs::exists(file)) {
      throw DataError(dir.string() + ": missing " + letter + "-view file " + file.filename().string());
    }
    ViewDetections& vd = s.view(v);
    double image_w = 0.0, image_h = 0.0;
    if (map.contains("views") && map.at("views").contains(letter)) {
      const json& vj = map.at("views").at(letter);
      if (vj.contains("frame")) vd.frame = frame_from_json(vj.at("frame"));
      if (vj.contains("image_width_px")) image_w = get<double>(vj, "image_width_px", "class map view");
      if (vj.contains("image_height_px")) image_h = get<double>(vj, "image_height_px", "class map view");
    }
    if (image_w <= 0.0) image_w = vd.frame.origin_x_px + vd.frame.width_px;
    if (image_h <= 0.0) image_h = vd.frame.origin_y_px + vd.frame.height_px;
    vd.boxes = parse_yolo(read_all(file), v, classes, image_w, image_h, file.string());
  }
  return s;
}

namespace {

fs::path radargram_stem(const fs::path& path) {
  fs::path stem = path;
  if (stem.extension() == ".f32" || stem.extension() == ".json") stem.replace_extension();
  return stem;
}

fs::path with_suffix(const fs::path& stem, const char* suffix) {
  return fs::path(stem.string() + suffix);
}

}  // namespace

void write_radargram(const fs::path& stem_in, const Radargram& r) {
  static_assert(std::endian::native == std::endian::little, "radargram I/O assumes little-endian");
  const fs::path stem = radargram_stem(stem_in);
  std::string bytes(r.data().size() * sizeof(float), '\0');
  for (std::size_t i = 0; i < r.data().size(); ++i) {
    const auto f = static_cast<float>(r.data()[i]);
    std::memcpy(bytes.data() + i * sizeof(float), &f, sizeof(float));
  }
  write_text_file(with_suffix(stem, ".f32"), bytes);
  write_json_file(with_suffix(stem, ".json"), {{"n_traces", r.n_traces()},
                                                {"n_samples", r.n_samples()},
                                                {"trace_spacing_m", r.trace_spacing_m()},
                                                {"sample_interval_ns", r.sample_interval_ns()}});
}

Radargram read_radargram(const fs::path& path) {
  const fs::path stem = radargram_stem(path);
  const fs::path header_path = with_suffix(stem, ".json");
  const json header = read_json_file(header_path);
  const char* ctx = "radargram header";
  const auto n_traces = get<std::size_t>(header, "n_traces", ctx);
  const auto n_samples = get<std::size_t>(header, "n_samples", ctx);
  Radargram r(n_traces, n_samples, get<double>(header, "trace_spacing_m", ctx),
              get<double>(header, "sample_interval_ns", ctx));
  const fs::path data_path = with_suffix(stem, ".f32");
  const std::string bytes = read_all(data_path);
  if (bytes.size() != n_traces * n_samples * sizeof(float)) {
    throw DataError(data_path.string() + ": expected " +
                    std::to_string(n_traces * n_samples * sizeof(float)) + " bytes, found " +
                    std::to_string(bytes.size()));
  }
  for (std::size_t i = 0; i < r.data().size(); ++i) {
    float f;
    std::memcpy(&f, bytes.data() + i * sizeof(float), sizeof(float));
    r.data()[i] = f;
  }
  try {
    r.validate();
  } catch (const Error& e) {
    throw DataError(data_path.string() + ": " + e.what());
  }
  return r;
}

}  // namespace pipefuse::io
