#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pipefuse/commands.hpp"
#include "pipefuse/errors.hpp"
#include "pipefuse/formats.hpp"

using namespace pipefuse;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pipefuse_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "pipefuse_cli_last.log";
  const std::string cmd = std::string("\"") + PIPEFUSE_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = slurp(log);
  return r;
}

json load(const fs::path& p) { return io::read_json_file(p); }

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run("--help").code == 0);
  CHECK(run("").code == 1);
  CHECK(run("frobnicate").code == 1);
  CHECK(run("synth --scenes notanumber").code == 1);
  CHECK(run("match").code == 1);
}

TEST_CASE("synth is deterministic") {
  const fs::path a = scratch("synth_a"), b = scratch("synth_b");
  REQUIRE(run("--seed 5 --out " + a.string() + " synth --scenes 3 --jitter-px 2 --bscan").code == 0);
  REQUIRE(run("--seed 5 --out " + b.string() + " synth --scenes 3 --jitter-px 2 --bscan").code == 0);
  for (const char* f : {"scene_0000.scene.json", "scene_0002.detections.json", "scene_0001.bscan.f32"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const fs::path c = scratch("synth_c");
  REQUIRE(run("--seed 6 --out " + c.string() + " synth --scenes 1 --jitter-px 2").code == 0);
  CHECK(slurp(a / "scene_0000.detections.json") != slurp(c / "scene_0000.detections.json"));

  const fs::path e = scratch("synth_empty");
  REQUIRE(run("--out " + e.string() + " synth --scenes 2 --pipes 0").code == 0);
  const json s = load(e / "scene_0001.scene.json");
  CHECK(s["truth"]["pipelines"].empty());
  CHECK(run("--out " + e.string() + " synth --pipes 80").code == 1);
  CHECK(run("--out " + e.string() + " synth --extents 1,2").code == 1);
}

TEST_CASE("match on ground truth") {
  const fs::path d = scratch("match");
  REQUIRE(run("--seed 9 --out " + d.string() + " synth --scenes 6 --pipes 3").code == 0);
  const fs::path out = d / "out";
  const Run r = run("--threads 2 --out " + out.string() + " match " + d.string() + " --truth " + d.string() + " --svg");
  REQUIRE(r.code == 0);
  const json report = load(out / "report.json");
  CHECK(report["summary"]["scenes"] == 6);
  CHECK(report["summary"]["detections"] == 18);
  CHECK(report["evaluation"]["precision"] == 1.0);
  CHECK(report["evaluation"]["recall"] == 1.0);
  CHECK(fs::exists(out / "diou_histogram.svg"));

  const fs::path strict = d / "strict";
  REQUIRE(run("--out " + strict.string() + " match " + d.string() + " --matching-diou 1.01").code == 0);
  CHECK(load(strict / "report.json")["summary"]["detections"] == 0);
  CHECK(load(strict / "report.json")["summary"]["unmatched"] == 54);

  CHECK(run("--out " + strict.string() + " match " + d.string() + " --pairwise sideways").code == 1);
  CHECK(run("--out " + strict.string() + " match " + d.string() + " --confidence 1.5").code == 1);
}

TEST_CASE("missing view exits with a data error") {
  const fs::path d = scratch("missing");
  REQUIRE(run("--out " + d.string() + " synth --scenes 1").code == 0);
  json j = load(d / "scene_0000.detections.json");
  j["views"].erase("C");
  io::write_json_file(d / "scene_0000.detections.json", j);
  const Run r = run("--out " + (d / "o").string() + " match " + (d / "scene_0000.detections.json").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("C-scan") != std::string::npos);
  CHECK(run("match " + (d / "absent.json").string()).code == 2);
}

TEST_CASE("bad config exits 1") {
  const fs::path d = scratch("config");
  io::write_text_file(d / "bad.json", "{\"matching_diou_threshold\": 0.4, \"colour\": 3}\n");
  io::write_text_file(d / "broken.json", "{\"matching_diou_threshold\": \n");
  io::write_text_file(d / "good.json", "{\"matching_diou_threshold\": 1.01, \"seed\": 3}\n");
  REQUIRE(run("--out " + d.string() + " synth --scenes 1").code == 0);
  const std::string in = (d / "scene_0000.detections.json").string();
  CHECK(run("--config " + (d / "bad.json").string() + " --out " + d.string() + " match " + in).code == 1);
  CHECK(run("--config " + (d / "broken.json").string() + " --out " + d.string() + " match " + in).code == 1);
  CHECK(run("--config " + (d / "absent.json").string() + " match " + in).code == 1);
  REQUIRE(run("--config " + (d / "good.json").string() + " --out " + d.string() + " match " + in).code == 0);
  CHECK(load(d / "report.json")["summary"]["detections"] == 0);
  CHECK(load(d / "report.json")["config"]["matching_diou_threshold"] == 1.01);
}

TEST_CASE("eval") {
  const fs::path d = scratch("eval");
  REQUIRE(run("--seed 21 --out " + d.string() + " synth --scenes 4 --pipes 2").code == 0);
  REQUIRE(run("--out " + d.string() + " match " + d.string()).code == 0);
  REQUIRE(run("--out " + d.string() + " eval " + (d / "report.json").string() + " " + d.string()).code == 0);
  json m = load(d / "metrics.json");
  CHECK(m["recall"] == 1.0);
  CHECK(m["precision"] == 1.0);
  for (const char* p : {"bc", "bd", "cd"}) {
    const double lo = m["true_pairs"][p]["fraction_le_threshold"];
    const double hi = m["true_pairs"][p]["fraction_gt_threshold"];
    CHECK(std::abs(lo + hi - 1.0) < 1e-12);
    CHECK(m["true_pairs"][p]["pairs"] == 8);
  }

  json report = load(d / "report.json");
  std::string& o = report["scenes"][0]["detections"][0]["orientation"].get_ref<std::string&>();
  o = o == "Vertical" ? "HorizontalInclined" : "Vertical";
  io::write_json_file(d / "flipped.json", report);
  REQUIRE(run("--out " + (d / "f").string() + " eval " + (d / "flipped.json").string() + " " + d.string()).code == 0);
  m = load(d / "f" / "metrics.json");
  CHECK(std::abs(m["recall"].get<double>() - 7.0 / 8.0) < 1e-12);

  report = load(d / "report.json");
  report["scenes"][0]["detections"][0]["b_id"] = "B999";
  io::write_json_file(d / "unknown.json", report);
  CHECK(run("--out " + d.string() + " eval " + (d / "unknown.json").string() + " " + d.string()).code == 2);
  fs::remove(d / "scene_0003.scene.json");
  CHECK(run("--out " + d.string() + " eval " + (d / "report.json").string() + " " + d.string()).code == 2);
}

TEST_CASE("preprocess") {
  const fs::path d = scratch("pre");
  CHECK(run("--out " + d.string() + " preprocess --corpus 1 --steps gain,median").code == 1);
  CHECK(run("--out " + d.string() + " preprocess").code == 1);
  REQUIRE(run("--seed 2 --out " + d.string() + " preprocess --corpus 2 --steps none").code == 0);
  const json none = load(d / "ie_report.json");
  CHECK(none["steps"].empty());
  REQUIRE(run("--seed 2 --out " + d.string() + " preprocess --corpus 2 --ablation").code == 0);
  const json full = load(d / "ie_report.json");
  CHECK(full["ablation"].size() == 8);
  CHECK(full["ie"].get<double>() > none["ie"].get<double>());
  CHECK(full["ablation"][7]["ie"] == none["ie"]);

  REQUIRE(run("--out " + d.string() + " synth --scenes 1 --bscan").code == 0);
  const std::string in = (d / "scene_0000.bscan.f32").string();
  REQUIRE(run("--out " + (d / "a").string() + " preprocess " + in).code == 0);
  REQUIRE(run("--out " + (d / "b").string() + " preprocess " + in).code == 0);
  CHECK(slurp(d / "a" / "scene_0000.bscan.processed.f32") == slurp(d / "b" / "scene_0000.bscan.processed.f32"));
  CHECK(slurp(d / "a" / "ie_report.json") == slurp(d / "b" / "ie_report.json"));
  CHECK(run("--out " + d.string() + " preprocess " + (d / "nothing.f32").string()).code == 2);
}

TEST_CASE("footprint") {
  const fs::path d = scratch("foot");
  const Run r = run("--out " + d.string() + " footprint");
  REQUIRE(r.code == 0);
  const json f = load(d / "footprint.json");
  CHECK(f["image_pipeline"]["mb"] == 300.0);
  CHECK(f["volume_pipeline"]["bytes"] == 5734400000.0);
  CHECK(std::abs(f["volume_pipeline"]["mib"].get<double>() - 5468.75) < 1e-9);
  CHECK(std::abs(f["ratio"]["decimal"].get<double>() - 300.0 / 5734.4) < 1e-12);
  CHECK(std::abs(f["ratio"]["image_mb_over_volume_mib"].get<double>() - 300.0 / 5468.75) < 1e-12);
  CHECK(r.output.find("5468.75") != std::string::npos);
  CHECK(run("--out " + d.string() + " footprint --channels 0").code == 1);
}

TEST_CASE("exit code mapping") {
  CHECK(cli::exit_code_for(UsageError("x")) == 1);
  CHECK(cli::exit_code_for(ParameterError("x")) == 1);
  CHECK(cli::exit_code_for(DataError("x")) == 2);
  CHECK(cli::exit_code_for(DomainError("x")) == 2);
}

TEST_CASE("scene seeds") {
  CHECK(cli::scene_seed(1, 0) != cli::scene_seed(1, 1));
  CHECK(cli::scene_seed(1, 0) != cli::scene_seed(2, 0));
  CHECK(cli::scene_seed(4, 7) == cli::scene_seed(4, 7));
}
