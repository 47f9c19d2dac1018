#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pipefuse/commands.hpp"
#include "pipefuse/errors.hpp"
#include "pipefuse/formats.hpp"
#include "pipefuse/geometry.hpp"
#include "pipefuse/scene_synth.hpp"
#include "pipefuse/signal_prep.hpp"
#include "pipefuse/view_fusion.hpp"

namespace py = pybind11;
using namespace pipefuse;
using nlohmann::json;

namespace {

using Triple = std::array<double, 3>;

Box3D make_box(const Triple& lo, const Triple& hi) {
  return {{lo[0], lo[1], lo[2]}, {hi[0], hi[1], hi[2]}};
}

Radargram from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                     double trace_spacing_m, double sample_interval_ns) {
  if (a.ndim() != 2) throw ShapeError("radargram array must be 2-D (traces x samples)");
  Radargram r(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)), trace_spacing_m,
              sample_interval_ns);
  std::copy(a.data(), a.data() + a.size(), r.data().begin());
  return r;
}

py::array_t<double> to_array(const Radargram& r) {
  py::array_t<double> out({r.n_traces(), r.n_samples()});
  std::copy(r.data().begin(), r.data().end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-view GPR pipeline detection fusion";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  static py::exception<ShapeError> shape(m, "ShapeError", base.ptr());
  static py::exception<ParameterError> param(m, "ParameterError", base.ptr());
  static py::exception<DomainError> domain(m, "DomainError", base.ptr());
  static py::exception<DataError> data(m, "DataError", base.ptr());
  static py::exception<UsageError> usage(m, "UsageError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ShapeError& e) {
      py::set_error(shape, e.what());
    } catch (const ParameterError& e) {
      py::set_error(param, e.what());
    } catch (const DomainError& e) {
      py::set_error(domain, e.what());
    } catch (const DataError& e) {
      py::set_error(data, e.what());
    } catch (const UsageError& e) {
      py::set_error(usage, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.def("iou_3d", [](const Triple& a_lo, const Triple& a_hi, const Triple& b_lo, const Triple& b_hi) {
    return iou_3d(make_box(a_lo, a_hi), make_box(b_lo, b_hi));
  }, py::arg("a_min"), py::arg("a_max"), py::arg("b_min"), py::arg("b_max"));
  m.def("diou_3d", [](const Triple& a_lo, const Triple& a_hi, const Triple& b_lo, const Triple& b_hi) {
    return diou_3d(make_box(a_lo, a_hi), make_box(b_lo, b_hi));
  }, py::arg("a_min"), py::arg("a_max"), py::arg("b_min"), py::arg("b_max"));

  m.def("depth_eq8", [](double x0, double t0, double v) { return depth_eq8({x0, t0, v}); },
        py::arg("x0_m"), py::arg("t0_ns"), py::arg("velocity_m_per_ns") = 0.1);
  m.def("depth_from_apex", [](double x0, double t0, double v) { return depth_from_apex({x0, t0, v}); },
        py::arg("x0_m"), py::arg("t0_ns"), py::arg("velocity_m_per_ns") = 0.1);

  m.def("_generate_scene", [](std::uint64_t seed, std::size_t n_pipes) {
    return io::scene_file_json(generate_scene(seed, n_pipes)).dump();
  }, py::arg("seed"), py::arg("n_pipes"));
  m.def("_truth_detections", [](const std::string& scene_text) {
    return io::to_json(io::scene_from_json(json::parse(scene_text)).truth.detections()).dump();
  });
  m.def("_match", [](const std::string& detections_text, const std::string& config_text) {
    const SceneDetections s = io::detections_from_json(json::parse(detections_text));
    const MatchConfig c = io::match_config_from_json(json::parse(config_text));
    return io::to_json(match_triples(s, c)).dump();
  });
  m.def("_footprint", [](const std::string& out_dir) {
    cli::FootprintArgs a;
    a.out_dir = out_dir;
    return cli::cmd_footprint(a).dump();
  });

  m.def("preprocess", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                         const std::vector<std::string>& steps, double trace_spacing_m, double sample_interval_ns,
                         double alpha, double pass_hz, double stop_hz) {
    PreprocessParams p;
    p.gain_alpha_per_ns = alpha;
    p.lowpass_pass_hz = pass_hz;
    p.lowpass_stop_hz = stop_hz;
    return to_array(run_chain(from_array(a, trace_spacing_m, sample_interval_ns), cli::parse_steps(steps), p));
  }, py::arg("radargram"), py::arg("steps"), py::arg("trace_spacing_m") = 0.02, py::arg("sample_interval_ns") = 0.1,
     py::arg("alpha_per_ns") = 0.08, py::arg("pass_hz") = 1.0e9, py::arg("stop_hz") = 1.5e9);
  m.def("information_entropy", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                                  int levels) {
    return information_entropy(quantize(from_array(a, 0.02, 0.1), levels));
  }, py::arg("radargram"), py::arg("levels") = 256);
  m.def("corpus_bscan", [](std::uint64_t seed) { return to_array(corpus_bscan(seed)); }, py::arg("seed"));
}
