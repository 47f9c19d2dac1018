#include "pipefuse/neural_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pipefuse/errors.hpp"

namespace pipefuse::nn {

TensorHWC::TensorHWC(std::size_t h, std::size_t w, std::size_t c, double fill)
    : h_(h), w_(w), c_(c), data_(h * w * c, fill) {}

TensorHWC::TensorHWC(std::size_t h, std::size_t w, std::size_t c, std::vector<double> data)
    : h_(h), w_(w), c_(c), data_(std::move(data)) {
  if (data_.size() != h * w * c) throw ShapeError("tensor data does not match H x W x C");
}

LinearWeights LinearWeights::zeros(std::size_t in, std::size_t out) {
  return {in, out, std::vector<double>(in * out, 0.0), std::vector<double>(out, 0.0)};
}

void LinearWeights::validate() const {
  if (weight.size() != in_features * out_features || bias.size() != out_features) {
    throw ShapeError("linear weights inconsistent with " + std::to_string(in_features) + " x " +
                     std::to_string(out_features));
  }
}

DepthwiseKernel DepthwiseKernel::identity(std::size_t channels) {
  DepthwiseKernel k{channels, std::vector<double>(channels * 9, 0.0)};
  for (std::size_t c = 0; c < channels; ++c) k.taps[c * 9 + 4] = 1.0;
  return k;
}

void DepthwiseKernel::validate() const {
  if (taps.size() != channels * 9) throw ShapeError("depthwise kernel must be C x 3 x 3");
}

namespace {

void require_tensor(const TensorHWC& x) {
  if (x.height() == 0 || x.width() == 0 || x.channels() == 0) {
    throw ShapeError("tensor dimensions must be at least 1");
  }
}

void require_linear(const LinearWeights& w, std::size_t in, std::size_t out, const char* what) {
  w.validate();
  if (w.in_features != in || w.out_features != out) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(in) + " -> " +
                     std::to_string(out) + ", got " + std::to_string(w.in_features) + " -> " +
                     std::to_string(w.out_features));
  }
}

}  // namespace

TensorHWC linear(const TensorHWC& x, const LinearWeights& w) {
  require_tensor(x);
  w.validate();
  if (w.in_features != x.channels()) {
    throw ShapeError("linear layer expects " + std::to_string(w.in_features) +
                     " input channels, tensor has " + std::to_string(x.channels()));
  }
  TensorHWC out(x.height(), x.width(), w.out_features);
  for (std::size_t y = 0; y < x.height(); ++y) {
    for (std::size_t xx = 0; xx < x.width(); ++xx) {
      for (std::size_t o = 0; o < w.out_features; ++o) {
        double acc = w.bias[o];
        for (std::size_t i = 0; i < w.in_features; ++i) acc += x.at(y, xx, i) * w.w(i, o);
        out.at(y, xx, o) = acc;
      }
    }
  }
  return out;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

double gelu(double v) { return 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))); }

TensorHWC dysample_offsets(const TensorHWC& x, const LinearWeights& w1, const LinearWeights& w2,
                           std::size_t scale) {
  require_tensor(x);
  if (scale == 0) throw ShapeError("upsampling factor must be >= 1");
  const std::size_t n_off = 2 * scale * scale;
  require_linear(w1, x.channels(), n_off, "dysample range branch");
  require_linear(w2, x.channels(), n_off, "dysample offset branch");
  const TensorHWC range = linear(x, w1);
  TensorHWC out = linear(x, w2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = 0.5 * sigmoid(range.data()[i]) * out.data()[i];
  }
  return out;
}

TensorHWC grid_sample_bilinear(const TensorHWC& x, const SamplingGrid& grid) {
  require_tensor(x);
  const std::size_t n = grid.height * grid.width;
  if (grid.xs.size() != n || grid.ys.size() != n) throw ShapeError("sampling grid size mismatch");
  const double max_x = static_cast<double>(x.width() - 1);
  const double max_y = static_cast<double>(x.height() - 1);
  TensorHWC out(grid.height, grid.width, x.channels());
  for (std::size_t oy = 0; oy < grid.height; ++oy) {
    for (std::size_t ox = 0; ox < grid.width; ++ox) {
      const std::size_t g = oy * grid.width + ox;
      if (!std::isfinite(grid.xs[g]) || !std::isfinite(grid.ys[g])) {
        throw ParameterError("sampling grid contains non-finite coordinates");
      }
      const double sx = std::clamp(grid.xs[g], 0.0, max_x);
      const double sy = std::clamp(grid.ys[g], 0.0, max_y);
      const auto x0 = static_cast<std::size_t>(std::floor(sx));
      const auto y0 = static_cast<std::size_t>(std::floor(sy));
      const std::size_t x1 = std::min(x0 + 1, x.width() - 1);
      const std::size_t y1 = std::min(y0 + 1, x.height() - 1);
      const double fx = sx - static_cast<double>(x0);
      const double fy = sy - static_cast<double>(y0);
      for (std::size_t c = 0; c < x.channels(); ++c) {
        const double top = (1.0 - fx) * x.at(y0, x0, c) + fx * x.at(y0, x1, c);
        const double bottom = (1.0 - fx) * x.at(y1, x0, c) + fx * x.at(y1, x1, c);
        out.at(oy, ox, c) = (1.0 - fy) * top + fy * bottom;
      }
    }
  }
  return out;
}

TensorHWC pixel_shuffle(const TensorHWC& x, std::size_t s) {
  require_tensor(x);
  if (s == 0 || x.channels() % (s * s) != 0) {
    throw ShapeError("pixel shuffle: channels " + std::to_string(x.channels()) +
                     " not divisible by s^2 = " + std::to_string(s * s));
  }
  const std::size_t c_out = x.channels() / (s * s);
  TensorHWC out(x.height() * s, x.width() * s, c_out);
  for (std::size_t y = 0; y < x.height(); ++y)
    for (std::size_t xx = 0; xx < x.width(); ++xx)
      for (std::size_t c = 0; c < c_out; ++c)
        for (std::size_t i = 0; i < s; ++i)
          for (std::size_t j = 0; j < s; ++j)
            out.at(y * s + i, xx * s + j, c) = x.at(y, xx, c * s * s + i * s + j);
  return out;
}

TensorHWC pixel_unshuffle(const TensorHWC& x, std::size_t s) {
  require_tensor(x);
  if (s == 0 || x.height() % s != 0 || x.width() % s != 0) {
    throw ShapeError("pixel unshuffle: spatial size not divisible by the factor");
  }
  TensorHWC out(x.height() / s, x.width() / s, x.channels() * s * s);
  for (std::size_t y = 0; y < out.height(); ++y)
    for (std::size_t xx = 0; xx < out.width(); ++xx)
      for (std::size_t c = 0; c < x.channels(); ++c)
        for (std::size_t i = 0; i < s; ++i)
          for (std::size_t j = 0; j < s; ++j)
            out.at(y, xx, c * s * s + i * s + j) = x.at(y * s + i, xx * s + j, c);
  return out;
}

SamplingGrid upsample_grid(std::size_t in_height, std::size_t in_width, std::size_t s) {
  if (s == 0) throw ShapeError("upsampling factor must be >= 1");
  SamplingGrid g{in_height * s, in_width * s, {}, {}};
  g.xs.resize(g.height * g.width);
  g.ys.resize(g.height * g.width);
  const double inv = 1.0 / static_cast<double>(s);
  for (std::size_t y = 0; y < g.height; ++y) {
    for (std::size_t x = 0; x < g.width; ++x) {
      g.xs[y * g.width + x] = (static_cast<double>(x) + 0.5) * inv - 0.5;
      g.ys[y * g.width + x] = (static_cast<double>(y) + 0.5) * inv - 0.5;
    }
  }
  return g;
}

TensorHWC dysample_upsample(const TensorHWC& x, const LinearWeights& w1, const LinearWeights& w2,
                            std::size_t s) {
  const TensorHWC offsets = pixel_shuffle(dysample_offsets(x, w1, w2, s), s);
  SamplingGrid grid = upsample_grid(x.height(), x.width(), s);
  for (std::size_t y = 0; y < grid.height; ++y) {
    for (std::size_t xx = 0; xx < grid.width; ++xx) {
      grid.xs[y * grid.width + xx] += offsets.at(y, xx, 0);
      grid.ys[y * grid.width + xx] += offsets.at(y, xx, 1);
    }
  }
  return grid_sample_bilinear(x, grid);
}

TensorHWC depthwise_conv3x3(const TensorHWC& x, const DepthwiseKernel& k) {
  require_tensor(x);
  k.validate();
  if (k.channels != x.channels()) throw ShapeError("depthwise kernel channel count mismatch");
  const auto h = static_cast<long>(x.height());
  const auto w = static_cast<long>(x.width());
  TensorHWC out(x.height(), x.width(), x.channels());
  for (long y = 0; y < h; ++y) {
    for (long xx = 0; xx < w; ++xx) {
      for (std::size_t c = 0; c < x.channels(); ++c) {
        double acc = 0.0;
        for (long ky = -1; ky <= 1; ++ky) {
          for (long kx = -1; kx <= 1; ++kx) {
            const long sy = y + ky;
            const long sx = xx + kx;
            if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
            acc += k.taps[c * 9 + static_cast<std::size_t>((ky + 1) * 3 + (kx + 1))] *
                   x.at(static_cast<std::size_t>(sy), static_cast<std::size_t>(sx), c);
          }
        }
        out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(xx), c) = acc;
      }
    }
  }
  return out;
}

TensorHWC cglu(const TensorHWC& x, const LinearWeights& w1, const LinearWeights& w2,
               const DepthwiseKernel& dk) {
  require_tensor(x);
  require_linear(w1, x.channels(), w1.out_features, "cglu value branch");
  require_linear(w2, x.channels(), w1.out_features, "cglu gate branch");
  if (dk.channels != w1.out_features) throw ShapeError("cglu depthwise kernel channel mismatch");
  TensorHWC value = linear(x, w1);
  const TensorHWC gate = depthwise_conv3x3(linear(x, w2), dk);
  for (std::size_t i = 0; i < value.size(); ++i) value.data()[i] *= gelu(gate.data()[i]);
  return value;
}

WindowTensor unfold(const TensorHWC& v, std::size_t kernel) {
  require_tensor(v);
  if (kernel % 2 == 0) throw ParameterError("window size K must be odd");
  WindowTensor out{v.channels(), v.height(), v.width(), kernel, {}};
  out.data.assign(out.channels * out.positions() * out.window(), 0.0);
  const auto r = static_cast<long>(kernel / 2);
  const auto h = static_cast<long>(v.height());
  const auto w = static_cast<long>(v.width());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      const auto n = static_cast<std::size_t>(y * w + x);
      for (long dy = -r; dy <= r; ++dy) {
        for (long dx = -r; dx <= r; ++dx) {
          const long sy = y + dy, sx = x + dx;
          if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
          const auto m = static_cast<std::size_t>((dy + r) * static_cast<long>(kernel) + (dx + r));
          for (std::size_t c = 0; c < v.channels(); ++c) {
            out.at(c, n, m) = v.at(static_cast<std::size_t>(sy), static_cast<std::size_t>(sx), c);
          }
        }
      }
    }
  }
  return out;
}

TensorHWC fold(const WindowTensor& win) {
  if (win.kernel % 2 == 0) throw ParameterError("window size K must be odd");
  if (win.data.size() != win.channels * win.positions() * win.window()) {
    throw ShapeError("window tensor size mismatch");
  }
  TensorHWC out(win.height, win.width, win.channels);
  const auto r = static_cast<long>(win.kernel / 2);
  const auto h = static_cast<long>(win.height);
  const auto w = static_cast<long>(win.width);
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      const auto n = static_cast<std::size_t>(y * w + x);
      for (long dy = -r; dy <= r; ++dy) {
        for (long dx = -r; dx <= r; ++dx) {
          const long sy = y + dy, sx = x + dx;
          if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
          const auto m = static_cast<std::size_t>((dy + r) * static_cast<long>(win.kernel) + (dx + r));
          for (std::size_t c = 0; c < win.channels; ++c) {
            out.at(static_cast<std::size_t>(sy), static_cast<std::size_t>(sx), c) += win.at(c, n, m);
          }
        }
      }
    }
  }
  return out;
}

OutlookTrace outlook_attention_trace(const TensorHWC& x, const LinearWeights& value,
                                     const LinearWeights& attention, std::size_t kernel) {
  require_tensor(x);
  if (kernel % 2 == 0) throw ParameterError("window size K must be odd");
  const std::size_t k2 = kernel * kernel;
  require_linear(value, x.channels(), x.channels(), "outlook value projection");
  require_linear(attention, x.channels(), k2, "outlook attention projection");

  const TensorHWC v = linear(x, value);
  const TensorHWC logits = linear(x, attention);
  const WindowTensor vw = unfold(v, kernel);
  const std::size_t n_pos = vw.positions();
  const std::size_t c_count = x.channels();

  OutlookTrace trace;
  trace.attention.resize(n_pos * k2);
  for (std::size_t n = 0; n < n_pos; ++n) {
    const double* row = logits.data().data() + n * k2;
    const double peak = *std::max_element(row, row + k2);
    double total = 0.0;
    for (std::size_t m = 0; m < k2; ++m) {
      trace.attention[n * k2 + m] = std::exp(row[m] - peak);
      total += trace.attention[n * k2 + m];
    }
    for (std::size_t m = 0; m < k2; ++m) trace.attention[n * k2 + m] /= total;
  }

  trace.aggregated = TensorHWC(x.height(), x.width(), c_count);
  WindowTensor spread{c_count, x.height(), x.width(), kernel, std::vector<double>(vw.data.size())};
  for (std::size_t c = 0; c < c_count; ++c) {
    for (std::size_t n = 0; n < n_pos; ++n) {
      double acc = 0.0;
      for (std::size_t m = 0; m < k2; ++m) acc += trace.attention[n * k2 + m] * vw.at(c, n, m);
      trace.aggregated.data()[n * c_count + c] = acc;
      for (std::size_t m = 0; m < k2; ++m) spread.at(c, n, m) = acc;
    }
  }
  trace.output = fold(spread);
  return trace;
}

TensorHWC outlook_attention(const TensorHWC& x, const LinearWeights& value,
                            const LinearWeights& attention, std::size_t kernel) {
  return outlook_attention_trace(x, value, attention, kernel).output;
}

WeightStore WeightStore::from_json_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("weights document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("weights document must be a JSON object");
  WeightStore store;
  for (const auto& [name, entry] : doc.items()) {
    if (!entry.is_object() || !entry.contains("shape") || !entry.contains("data")) {
      throw DataError("weights entry '" + name + "' needs 'shape' and 'data'");
    }
    Array a;
    try {
      a.shape = entry.at("shape").get<std::vector<std::size_t>>();
      a.data = entry.at("data").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError("weights entry '" + name + "': " + e.what());
    }
    store.put(name, std::move(a));
  }
  return store;
}

WeightStore WeightStore::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open weights file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

const WeightStore::Array& WeightStore::array(const std::string& name) const {
  const auto it = arrays_.find(name);
  if (it == arrays_.end()) throw DataError("weights file has no array '" + name + "'");
  return it->second;
}

void WeightStore::put(const std::string& name, Array a) {
  std::size_t count = a.shape.empty() ? 0 : 1;
  for (std::size_t d : a.shape) count *= d;
  if (count != a.data.size()) {
    throw ShapeError("array '" + name + "' holds " + std::to_string(a.data.size()) +
                     " values but its shape implies " + std::to_string(count));
  }
  arrays_[name] = std::move(a);
}

LinearWeights WeightStore::linear(const std::string& prefix) const {
  const Array& w = array(prefix + ".weight");
  const Array& b = array(prefix + ".bias");
  if (w.shape.size() != 2 || b.shape.size() != 1 || b.shape[0] != w.shape[1]) {
    throw ShapeError("linear '" + prefix + "' needs weight [in, out] and bias [out]");
  }
  return {w.shape[0], w.shape[1], w.data, b.data};
}

DepthwiseKernel WeightStore::depthwise(const std::string& name) const {
  const Array& a = array(name);
  if (a.shape.size() != 3 || a.shape[1] != 3 || a.shape[2] != 3) {
    throw ShapeError("depthwise kernel '" + name + "' must have shape [C, 3, 3]");
  }
  return {a.shape[0], a.data};
}

std::string WeightStore::to_json_text() const {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [name, a] : arrays_) doc[name] = {{"shape", a.shape}, {"data", a.data}};
  return doc.dump(1);
}

}  // namespace pipefuse::nn
