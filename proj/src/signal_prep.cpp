#include "pipefuse/signal_prep.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>

#include "pipefuse/errors.hpp"

namespace pipefuse {

void SpectralTrace::validate() const {
  if (components.empty()) throw ParameterError("spectral trace needs at least one component");
  for (std::size_t k = 1; k < components.size(); ++k) {
    if (!(components[k].frequency_hz > components[k - 1].frequency_hz)) {
      throw ParameterError("spectral frequencies must be strictly increasing");
    }
  }
}

std::vector<std::complex<double>> isdft(const SpectralTrace& spectrum,
                                        std::span<const double> times_s) {
  spectrum.validate();
  std::vector<std::complex<double>> out(times_s.size());
  for (std::size_t m = 0; m < times_s.size(); ++m) {
    std::complex<double> acc{0.0, 0.0};
    for (const SpectralComponent& c : spectrum.components) {
      // fmod keeps the phase argument small for large f*t products.
      const double cycles = std::fmod(c.frequency_hz * times_s[m], 1.0);
      acc += c.amplitude * std::polar(1.0, 2.0 * std::numbers::pi * cycles);
    }
    out[m] = acc;
  }
  return out;
}

TimeTrace isdft_uniform(const SpectralTrace& spectrum, std::size_t n, double sample_interval_ns) {
  if (!(sample_interval_ns > 0.0)) throw ParameterError("sample interval must be positive");
  std::vector<double> times(n);
  for (std::size_t m = 0; m < n; ++m) times[m] = static_cast<double>(m) * sample_interval_ns * 1e-9;
  return {sample_interval_ns, isdft(spectrum, times)};
}

Radargram::Radargram(std::size_t n_traces, std::size_t n_samples, double trace_spacing_m,
                     double sample_interval_ns)
    : n_traces_(n_traces),
      n_samples_(n_samples),
      trace_spacing_m_(trace_spacing_m),
      sample_interval_ns_(sample_interval_ns),
      data_(n_traces * n_samples, 0.0) {}

void Radargram::validate() const {
  if (n_traces_ == 0 || n_samples_ == 0) throw ParameterError("radargram must not be empty");
  if (!(trace_spacing_m_ > 0.0) || !(sample_interval_ns_ > 0.0)) {
    throw ParameterError("radargram spacing must be positive");
  }
  if (data_.size() != n_traces_ * n_samples_) throw ShapeError("radargram data size mismatch");
  for (double v : data_) {
    if (!std::isfinite(v)) throw ParameterError("radargram contains non-finite samples");
  }
}

Radargram background_removal(const Radargram& r) {
  r.validate();
  if (r.n_traces() < 2) {
    throw ParameterError("background removal needs at least two traces");
  }
  std::vector<double> mean(r.n_samples(), 0.0);
  for (std::size_t i = 0; i < r.n_traces(); ++i) {
    auto tr = r.trace(i);
    for (std::size_t j = 0; j < tr.size(); ++j) mean[j] += tr[j];
  }
  for (double& m : mean) m /= static_cast<double>(r.n_traces());
  Radargram out = r;
  for (std::size_t i = 0; i < out.n_traces(); ++i) {
    auto tr = out.trace(i);
    for (std::size_t j = 0; j < tr.size(); ++j) tr[j] -= mean[j];
  }
  return out;
}

double lowpass_gain(double f_hz, double pass_hz, double stop_hz) {
  const double f = std::abs(f_hz);
  if (f <= pass_hz) return 1.0;
  if (f >= stop_hz) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (f - pass_hz) / (stop_hz - pass_hz)));
}

namespace {

// FFTW planning is not thread-safe; execution with distinct buffers is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

struct PlanDeleter {
  void operator()(fftw_plan p) const {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};

using PlanPtr = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter>;

}  // namespace

Radargram lowpass_gradual(const Radargram& r, double pass_hz, double stop_hz) {
  r.validate();
  const double fs = 1e9 / r.sample_interval_ns();
  const double nyquist = fs / 2.0;
  if (!(pass_hz >= 0.0) || !(pass_hz < stop_hz) || !(stop_hz <= nyquist)) {
    throw ParameterError("low-pass band must satisfy 0 <= pass < stop <= Nyquist (" +
                         std::to_string(nyquist) + " Hz)");
  }
  const std::size_t n = r.n_samples();
  const std::size_t n_bins = n / 2 + 1;
  std::unique_ptr<double, FftwFree> time(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  std::unique_ptr<fftw_complex, FftwFree> freq(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_bins)));
  PlanPtr forward, inverse;
  {
    std::lock_guard lock(fftw_planner_mutex());
    const int len = static_cast<int>(n);
    forward.reset(fftw_plan_dft_r2c_1d(len, time.get(), freq.get(), FFTW_ESTIMATE));
    inverse.reset(fftw_plan_dft_c2r_1d(len, freq.get(), time.get(), FFTW_ESTIMATE));
  }

  std::vector<double> gain(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    gain[k] = lowpass_gain(static_cast<double>(k) * fs / static_cast<double>(n), pass_hz, stop_hz) /
              static_cast<double>(n);
  }

  Radargram out = r;
  for (std::size_t i = 0; i < out.n_traces(); ++i) {
    auto tr = out.trace(i);
    std::copy(tr.begin(), tr.end(), time.get());
    fftw_execute(forward.get());
    for (std::size_t k = 0; k < n_bins; ++k) {
      freq.get()[k][0] *= gain[k];
      freq.get()[k][1] *= gain[k];
    }
    fftw_execute(inverse.get());
    std::copy(time.get(), time.get() + n, tr.begin());
  }
  return out;
}

Radargram exp_gain(const Radargram& r, double alpha_per_ns) {
  if (!(alpha_per_ns >= 0.0) || !std::isfinite(alpha_per_ns)) {
    throw ParameterError("gain constant alpha must be finite and non-negative");
  }
  Radargram out = r;
  if (alpha_per_ns == 0.0) return out;
  std::vector<double> g(r.n_samples());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = std::exp(alpha_per_ns * r.time_ns(j));
  for (std::size_t i = 0; i < out.n_traces(); ++i) {
    auto tr = out.trace(i);
    for (std::size_t j = 0; j < tr.size(); ++j) tr[j] *= g[j];
  }
  return out;
}

GrayImage quantize(const Radargram& r, int levels) {
  if (levels < 2) throw ParameterError("quantization needs at least two gray levels");
  r.validate();
  GrayImage img{r.n_traces(), r.n_samples(), levels, std::vector<int>(r.data().size(), 0)};
  const auto [lo_it, hi_it] = std::minmax_element(r.data().begin(), r.data().end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (range <= 0.0) return img;
  const double scale = static_cast<double>(levels - 1) / range;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const long q = std::lround((r.data()[i] - lo) * scale);
    img.pixels[i] = static_cast<int>(std::clamp<long>(q, 0, levels - 1));
  }
  return img;
}

double information_entropy(const GrayImage& img) {
  if (img.levels < 2) throw ParameterError("gray image needs at least two levels");
  if (img.pixels.empty()) return 0.0;
  std::vector<std::size_t> hist(static_cast<std::size_t>(img.levels), 0);
  for (int p : img.pixels) {
    if (p < 0 || p >= img.levels) throw ParameterError("gray level out of range");
    ++hist[static_cast<std::size_t>(p)];
  }
  const double total = static_cast<double>(img.pixels.size());
  double ie = 0.0;
  for (std::size_t h : hist) {
    if (h == 0) continue;
    const double p = static_cast<double>(h) / total;
    ie -= p * std::log2(p);
  }
  return ie;
}

Radargram add_gaussian_noise(const Radargram& r, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ParameterError("noise sigma must be non-negative");
  Radargram out = r;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  for (double& v : out.data()) v += normal(rng);
  return out;
}

Radargram run_chain(const Radargram& r, const PreprocessSteps& steps,
                    const PreprocessParams& params) {
  Radargram out = r;
  if (steps.gain) out = exp_gain(out, params.gain_alpha_per_ns);
  if (steps.background) out = background_removal(out);
  if (steps.lowpass) out = lowpass_gradual(out, params.lowpass_pass_hz, params.lowpass_stop_hz);
  return out;
}

}  // namespace pipefuse
