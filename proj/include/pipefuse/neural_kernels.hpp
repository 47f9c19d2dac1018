#pragma once

// Deterministic forward passes of three feature-map operators: DySample
// dynamic upsampling, the convolutional gated linear unit (CGLU) and outlook
// attention. Weights are supplied by the caller; nothing here trains.
//
// Tensors are H x W x C, row-major with channels fastest.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pipefuse::nn {

class TensorHWC {
 public:
  TensorHWC() = default;
  TensorHWC(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0);
  TensorHWC(std::size_t h, std::size_t w, std::size_t c, std::vector<double> data);

  std::size_t height() const { return h_; }
  std::size_t width() const { return w_; }
  std::size_t channels() const { return c_; }
  std::size_t size() const { return data_.size(); }

  double& at(std::size_t y, std::size_t x, std::size_t c) { return data_[(y * w_ + x) * c_ + c]; }
  double at(std::size_t y, std::size_t x, std::size_t c) const { return data_[(y * w_ + x) * c_ + c]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  friend bool operator==(const TensorHWC&, const TensorHWC&) = default;

 private:
  std::size_t h_ = 0, w_ = 0, c_ = 0;
  std::vector<double> data_;
};

/// y = x W + b with W stored row-major as in_features x out_features.
struct LinearWeights {
  std::size_t in_features = 0;
  std::size_t out_features = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  static LinearWeights zeros(std::size_t in, std::size_t out);
  void validate() const;
  double& w(std::size_t i, std::size_t o) { return weight[i * out_features + o]; }
  double w(std::size_t i, std::size_t o) const { return weight[i * out_features + o]; }
};

/// Per-channel 3x3 kernels, element (c, ky, kx) at c * 9 + ky * 3 + kx.
struct DepthwiseKernel {
  std::size_t channels = 0;
  std::vector<double> taps;

  static DepthwiseKernel identity(std::size_t channels);
  void validate() const;
};

/// Sample coordinates in input pixel space (x = column, y = row) for every
/// output pixel, row-major.
struct SamplingGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> xs;
  std::vector<double> ys;
};

/// Per-pixel affine map over channels.
TensorHWC linear(const TensorHWC& x, const LinearWeights& w);

double sigmoid(double v);
/// Exact GELU, 0.5 x (1 + erf(x / sqrt 2)).
double gelu(double v);

/// Offset field O = 0.5 * sigmoid(linear1(X)) * linear2(X) with 2 s^2 output
/// channels: channels [0, s^2) are x offsets and [s^2, 2 s^2) y offsets of the
/// s x s sub-positions, in pixel-shuffle order.
TensorHWC dysample_offsets(const TensorHWC& x, const LinearWeights& w1, const LinearWeights& w2,
                           std::size_t scale);

/// Bilinear sampling with coordinates clamped to the border.
TensorHWC grid_sample_bilinear(const TensorHWC& x, const SamplingGrid& grid);

/// Depth-to-space: input channel c' * s^2 + i * s + j lands at output
/// (y * s + i, x * s + j, c').
TensorHWC pixel_shuffle(const TensorHWC& x, std::size_t scale);
/// Space-to-depth, the inverse of pixel_shuffle.
TensorHWC pixel_unshuffle(const TensorHWC& x, std::size_t scale);

/// Fixed half-pixel-centered grid of an s-times upsampling:
/// output (Y, X) samples input ((X + 0.5) / s - 0.5, (Y + 0.5) / s - 0.5).
SamplingGrid upsample_grid(std::size_t in_height, std::size_t in_width, std::size_t scale);

/// DySample: static grid plus pixel-shuffled dynamic offsets, then bilinear
/// resampling. Maps H x W x C to sH x sW x C.
TensorHWC dysample_upsample(const TensorHWC& x, const LinearWeights& w1, const LinearWeights& w2,
                            std::size_t scale);

/// Zero-padded 3x3 depthwise convolution (cross-correlation, no bias).
TensorHWC depthwise_conv3x3(const TensorHWC& x, const DepthwiseKernel& k);

/// Linear1(X) * GELU(DWConv(Linear2(X))).
TensorHWC cglu(const TensorHWC& x, const LinearWeights& w1, const LinearWeights& w2,
               const DepthwiseKernel& dk);

/// C x N x K^2 windows; element (c, n, m) at (c * N + n) * K^2 + m, where
/// window offset m = (dy + r) * K + (dx + r) with r = K / 2.
struct WindowTensor {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t kernel = 1;
  std::vector<double> data;

  std::size_t positions() const { return height * width; }
  std::size_t window() const { return kernel * kernel; }
  double& at(std::size_t c, std::size_t n, std::size_t m) {
    return data[(c * positions() + n) * window() + m];
  }
  double at(std::size_t c, std::size_t n, std::size_t m) const {
    return data[(c * positions() + n) * window() + m];
  }
};

/// Zero-padded K x K windows centered at every position. K must be odd.
WindowTensor unfold(const TensorHWC& v, std::size_t kernel);
/// Adjoint of unfold: each window entry is added back onto the cell it came
/// from; entries that fell in the padding are dropped.
TensorHWC fold(const WindowTensor& windows);

struct OutlookTrace {
  std::vector<double> attention;  ///< N x K^2 softmax weights
  TensorHWC aggregated;           ///< per-position weighted window sum, pre-fold
  TensorHWC output;               ///< after fold accumulation
};

/// Outlook attention with per-position K^2 logits (shared across channels):
/// V = value(X), A = softmax(attention(X)), Y_n = sum_m A_nm V[window(n)_m],
/// then every window's Y_n is folded back over the cells it covers.
OutlookTrace outlook_attention_trace(const TensorHWC& x, const LinearWeights& value,
                                     const LinearWeights& attention, std::size_t kernel);
TensorHWC outlook_attention(const TensorHWC& x, const LinearWeights& value,
                            const LinearWeights& attention, std::size_t kernel);

/// Named arrays loaded from a JSON weights document:
/// {"name": {"shape": [d0, d1, ...], "data": [ ...row-major... ]}, ...}
class WeightStore {
 public:
  struct Array {
    std::vector<std::size_t> shape;
    std::vector<double> data;
  };

  /// Parses and validates that every array's data length matches its shape.
  static WeightStore from_json_text(std::string_view text);
  static WeightStore from_file(const std::string& path);

  bool contains(const std::string& name) const { return arrays_.count(name) != 0; }
  const Array& array(const std::string& name) const;
  /// "<prefix>.weight" of shape [in, out] and "<prefix>.bias" of shape [out].
  LinearWeights linear(const std::string& prefix) const;
  /// "<name>" of shape [C, 3, 3].
  DepthwiseKernel depthwise(const std::string& name) const;

  void put(const std::string& name, Array a);
  std::string to_json_text() const;

 private:
  std::map<std::string, Array> arrays_;
};

}  // namespace pipefuse::nn
