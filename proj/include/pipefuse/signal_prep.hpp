#pragma once

// GPR preprocessing chain: selective inverse DFT, mean-trace background
// removal, raised-cosine low-pass, exponential time gain, plus the gray-level
// entropy metric and seeded Gaussian noise injection.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pipefuse {

struct SpectralComponent {
  double frequency_hz = 0.0;
  std::complex<double> amplitude;
};

/// Frequencies must be strictly increasing and at least one component given.
struct SpectralTrace {
  std::vector<SpectralComponent> components;

  void validate() const;
};

struct TimeTrace {
  double sample_interval_ns = 1.0;
  std::vector<std::complex<double>> samples;
};

/// s(t) = sum_k S(f_k) exp(j 2 pi f_k t), evaluated by direct summation at each
/// requested time (seconds).
std::vector<std::complex<double>> isdft(const SpectralTrace& spectrum, std::span<const double> times_s);

/// isdft on the uniform grid t_m = m * dt, m = 0..n-1.
TimeTrace isdft_uniform(const SpectralTrace& spectrum, std::size_t n, double sample_interval_ns);

/// Trace-major grid: value(trace, sample) = data[trace * n_samples + sample].
class Radargram {
 public:
  Radargram() = default;
  Radargram(std::size_t n_traces, std::size_t n_samples, double trace_spacing_m = 0.02,
            double sample_interval_ns = 0.1);

  std::size_t n_traces() const { return n_traces_; }
  std::size_t n_samples() const { return n_samples_; }
  double trace_spacing_m() const { return trace_spacing_m_; }
  double sample_interval_ns() const { return sample_interval_ns_; }
  double time_ns(std::size_t sample) const { return static_cast<double>(sample) * sample_interval_ns_; }

  double& at(std::size_t trace, std::size_t sample) { return data_[trace * n_samples_ + sample]; }
  double at(std::size_t trace, std::size_t sample) const { return data_[trace * n_samples_ + sample]; }

  std::span<double> trace(std::size_t i) { return {data_.data() + i * n_samples_, n_samples_}; }
  std::span<const double> trace(std::size_t i) const {
    return {data_.data() + i * n_samples_, n_samples_};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  /// Throws ParameterError on empty dimensions, non-positive spacing or
  /// non-finite samples.
  void validate() const;

  friend bool operator==(const Radargram&, const Radargram&) = default;

 private:
  std::size_t n_traces_ = 0;
  std::size_t n_samples_ = 0;
  double trace_spacing_m_ = 0.02;
  double sample_interval_ns_ = 0.1;
  std::vector<double> data_;
};

struct GrayImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  int levels = 256;
  std::vector<int> pixels;
};

/// Subtracts the mean trace. Requires at least two traces.
Radargram background_removal(const Radargram& r);

/// Raised-cosine taper of amplitude 1 up to `pass_hz` and 0 from `stop_hz`.
double lowpass_gain(double f_hz, double pass_hz, double stop_hz);

/// Per-trace low-pass applied in the frequency domain with lowpass_gain.
/// Requires 0 <= pass_hz < stop_hz <= Nyquist.
Radargram lowpass_gradual(const Radargram& r, double pass_hz, double stop_hz);

/// Multiplies the sample at time t (ns) by exp(alpha * t). alpha must be >= 0.
Radargram exp_gain(const Radargram& r, double alpha_per_ns);

/// Linear min-max mapping of all samples to levels 0..levels-1 (rounded to
/// nearest). A constant grid maps to level 0.
GrayImage quantize(const Radargram& r, int levels = 256);

/// Shannon entropy in bits of the gray-level histogram.
double information_entropy(const GrayImage& img);

/// Adds i.i.d. N(0, sigma^2) samples drawn from a generator seeded with `seed`.
Radargram add_gaussian_noise(const Radargram& r, double sigma, std::uint64_t seed);

struct PreprocessSteps {
  bool gain = false;
  bool background = false;
  bool lowpass = false;
  friend bool operator==(const PreprocessSteps&, const PreprocessSteps&) = default;
};

struct PreprocessParams {
  double gain_alpha_per_ns = 0.08;
  double lowpass_pass_hz = 1.0e9;
  double lowpass_stop_hz = 1.5e9;
  int gray_levels = 256;
};

/// Applies the selected steps in the fixed order gain, background removal,
/// low-pass.
Radargram run_chain(const Radargram& r, const PreprocessSteps& steps, const PreprocessParams& params);

}  // namespace pipefuse
