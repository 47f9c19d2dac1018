#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pipefuse/errors.hpp"
#include "pipefuse/scene_synth.hpp"
#include "pipefuse/signal_prep.hpp"

using namespace pipefuse;
using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

namespace {

// Selective forward DFT by direct conjugate summation, 1/M normalized.
SpectralTrace forward_dft(const std::vector<double>& x, double dt_s, const std::vector<double>& freqs) {
  SpectralTrace s;
  for (double f : freqs) {
    cd acc = 0.0;
    for (std::size_t m = 0; m < x.size(); ++m) {
      acc += x[m] * std::exp(cd(0.0, -2.0 * kPi * f * static_cast<double>(m) * dt_s));
    }
    s.components.push_back({f, acc / static_cast<double>(x.size())});
  }
  return s;
}

Radargram tone(std::size_t traces, std::size_t n, double dt_ns, double f_hz, double amp = 1.0) {
  Radargram r(traces, n, 0.02, dt_ns);
  for (std::size_t i = 0; i < traces; ++i) {
    for (std::size_t j = 0; j < n; ++j) r.at(i, j) = amp * std::cos(2.0 * kPi * f_hz * r.time_ns(j) * 1e-9);
  }
  return r;
}

double max_abs(const Radargram& r) {
  double m = 0.0;
  for (double v : r.data()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("isdft basics") {
  SpectralTrace dc{{{0.0, 1.0}}};
  const std::vector<double> ts{0.0, 0.3, 1.7, -2.0};
  for (const cd& v : isdft(dc, ts)) CHECK(std::abs(v - cd(1.0, 0.0)) < 1e-15);
  SpectralTrace unit{{{1.0, 1.0}}};
  const auto s = isdft(unit, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    CHECK(std::abs(s[i] - std::exp(cd(0.0, 2.0 * kPi * ts[i]))) < 1e-12);
  }
  SpectralTrace bad{{{2.0, 1.0}, {1.0, 1.0}}};
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  CHECK_THROWS_AS(SpectralTrace{}.validate(), ParameterError);
}

TEST_CASE("isdft round trip against forward oracle") {
  const std::size_t M = 256;
  const double dt = 0.1e-9;
  std::vector<double> freqs;
  for (int k = 0; k < static_cast<int>(M); ++k) freqs.push_back(k / (M * dt));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  // Band-limited real signal built from a handful of bin-aligned tones.
  std::vector<double> x(M, 0.0);
  for (int k : {3, 11, 40, 97}) {
    const double a = g(rng), ph = g(rng);
    for (std::size_t m = 0; m < M; ++m) x[m] += a * std::cos(2.0 * kPi * k * m / M + ph);
  }
  const SpectralTrace spec = forward_dft(x, dt, freqs);
  const TimeTrace back = isdft_uniform(spec, M, dt * 1e9);
  double err = 0.0;
  for (std::size_t m = 0; m < M; ++m) err = std::max(err, std::abs(back.samples[m] - cd(x[m], 0.0)));
  CHECK(err < 1e-9);
}

TEST_CASE("isdft linearity") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SpectralTrace s1, s2, mix;
  const double a = 0.7, b = -1.3;
  for (int k = 0; k < 20; ++k) {
    const double f = 1e8 * (k + u(rng) * 0.3 + 1.0);
    const cd x(u(rng), u(rng)), y(u(rng), u(rng));
    s1.components.push_back({f, x});
    s2.components.push_back({f, y});
    mix.components.push_back({f, a * x + b * y});
  }
  std::vector<double> ts;
  for (int m = 0; m < 100; ++m) ts.push_back(m * 0.137e-9);
  const auto r1 = isdft(s1, ts), r2 = isdft(s2, ts), rm = isdft(mix, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) CHECK(std::abs(rm[i] - (a * r1[i] + b * r2[i])) < 1e-9);
}

TEST_CASE("background removal") {
  Radargram same(5, 40);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 40; ++j) same.at(i, j) = std::sin(0.3 * j);
  }
  CHECK(max_abs(background_removal(same)) < 1e-15);
  CHECK(max_abs(background_removal(Radargram(3, 10))) == 0.0);
  CHECK_THROWS_AS(background_removal(Radargram(1, 10)), ParameterError);

  // Localized target on one trace keeps (1 - 1/n) of its amplitude.
  const std::size_t n = 20;
  Radargram r = same;
  r = Radargram(n, 40);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 40; ++j) r.at(i, j) = std::sin(0.3 * j);
  }
  r.at(7, 12) += 2.0;
  const Radargram out = background_removal(r);
  CHECK(std::abs(out.at(7, 12) - 2.0 * (1.0 - 1.0 / n)) < 1e-12);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Radargram noisy(17, 33);
  for (double& v : noisy.data()) v = g(rng);
  const Radargram once = background_removal(noisy);
  const Radargram twice = background_removal(once);
  double diff = 0.0;
  for (std::size_t k = 0; k < once.data().size(); ++k) diff = std::max(diff, std::abs(once.data()[k] - twice.data()[k]));
  CHECK(diff < 1e-12);
  for (std::size_t j = 0; j < 33; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 17; ++i) mean += once.at(i, j);
    CHECK(std::abs(mean / 17.0) < 1e-12);
  }
}

TEST_CASE("lowpass taper") {
  CHECK(lowpass_gain(0.0, 1e9, 2e9) == 1.0);
  CHECK(lowpass_gain(1e9, 1e9, 2e9) == 1.0);
  CHECK(std::abs(lowpass_gain(1.5e9, 1e9, 2e9) - 0.5) < 1e-12);
  CHECK(lowpass_gain(2e9, 1e9, 2e9) == 0.0);
  CHECK(lowpass_gain(3e9, 1e9, 2e9) == 0.0);

  // 600 samples at 0.1 ns: 16.67 MHz bins, tones below are periodic over the record.
  Radargram dc(2, 600);
  for (double& v : dc.data()) v = 3.0;
  const Radargram dc_out = lowpass_gradual(dc, 1e9, 1.5e9);
  for (double v : dc_out.data()) CHECK(std::abs(v - 3.0) < 1e-12);

  const Radargram high = tone(2, 600, 0.1, 2.0e9);
  CHECK(max_abs(lowpass_gradual(high, 1e9, 1.5e9)) <= 1e-6);

  const Radargram mid = tone(2, 600, 0.1, 1.25e9);
  CHECK(std::abs(max_abs(lowpass_gradual(mid, 1e9, 1.5e9)) - 0.5) < 0.01);

  CHECK_THROWS_AS(lowpass_gradual(dc, 2e9, 1e9), ParameterError);
  CHECK_THROWS_AS(lowpass_gradual(dc, 1e9, 6e9), ParameterError);
  CHECK_THROWS_AS(lowpass_gradual(dc, -1.0, 1e9), ParameterError);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  Radargram noise(6, 257);
  for (double& v : noise.data()) v = g(rng);
  const Radargram filtered = lowpass_gradual(noise, 0.5e9, 2e9);
  for (std::size_t i = 0; i < 6; ++i) {
    double e_in = 0.0, e_out = 0.0;
    for (std::size_t j = 0; j < 257; ++j) {
      e_in += noise.at(i, j) * noise.at(i, j);
      e_out += filtered.at(i, j) * filtered.at(i, j);
    }
    CHECK(e_out <= e_in);
  }
}

TEST_CASE("exponential gain") {
  Radargram r(2, 50, 0.02, 0.1);
  for (double& v : r.data()) v = 1.5;
  CHECK(exp_gain(r, 0.0) == r);
  Radargram one(1, 2, 0.02, 1.0);
  one.at(0, 1) = 1.0;
  CHECK(std::abs(exp_gain(one, std::log(2.0)).at(0, 1) - 2.0) < 1e-12);
  CHECK_THROWS_AS(exp_gain(r, -0.1), ParameterError);

  const double beta = 0.08;
  Radargram decay(1, 600, 0.02, 0.1);
  for (std::size_t j = 0; j < 600; ++j) decay.at(0, j) = 2.0 * std::exp(-beta * decay.time_ns(j));
  const Radargram flat = exp_gain(decay, beta);
  for (double v : flat.data()) CHECK(std::abs(v / 2.0 - 1.0) < 0.01);
}

TEST_CASE("quantize and entropy") {
  Radargram c(3, 4);
  for (double& v : c.data()) v = 5.0;
  const GrayImage q = quantize(c, 256);
  for (int p : q.pixels) CHECK(p == 0);
  CHECK(information_entropy(q) == 0.0);

  Radargram two(2, 2);
  two.data() = {-1.0, 4.0, 4.0, -1.0};
  const GrayImage q2 = quantize(two, 16);
  CHECK(q2.pixels == std::vector<int>{0, 15, 15, 0});
  CHECK(information_entropy(q2) == doctest::Approx(1.0));

  Radargram ramp(1, 256);
  for (std::size_t j = 0; j < 256; ++j) ramp.at(0, j) = 0.25 * static_cast<double>(j);
  const GrayImage q3 = quantize(ramp, 256);
  for (std::size_t j = 0; j < 256; ++j) CHECK(q3.pixels[j] == static_cast<int>(j));
  CHECK(std::abs(information_entropy(q3) - 8.0) < 1e-12);
  CHECK_THROWS_AS(quantize(ramp, 1), ParameterError);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int levels : {2, 7, 64, 256}) {
    Radargram r(9, 31);
    for (double& v : r.data()) v = g(rng);
    const double ie = information_entropy(quantize(r, levels));
    CHECK(ie >= 0.0);
    CHECK(ie <= std::log2(levels) + 1e-12);
  }
}

TEST_CASE("gaussian noise") {
  Radargram r(3, 7);
  for (double& v : r.data()) v = 0.25;
  CHECK(add_gaussian_noise(r, 0.0, 1) == r);
  CHECK(add_gaussian_noise(r, 0.3, 5) == add_gaussian_noise(r, 0.3, 5));
  CHECK_FALSE(add_gaussian_noise(r, 0.3, 5) == add_gaussian_noise(r, 0.3, 6));
  CHECK_THROWS_AS(add_gaussian_noise(r, -0.1, 1), ParameterError);

  const Radargram big = add_gaussian_noise(Radargram(1000, 1000), 0.1, 42);
  double sum = 0.0, sq = 0.0;
  for (double v : big.data()) {
    sum += v;
    sq += v * v;
  }
  const double n = static_cast<double>(big.data().size());
  const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
  CHECK(std::abs(sd - 0.1) < 0.005);
}

TEST_CASE("chain order and ablation direction") {
  PreprocessParams p;
  const Radargram raw = corpus_bscan(3);
  const Radargram manual = lowpass_gradual(background_removal(exp_gain(raw, p.gain_alpha_per_ns)),
                                           p.lowpass_pass_hz, p.lowpass_stop_hz);
  CHECK(run_chain(raw, {true, true, true}, p) == manual);
  CHECK(run_chain(raw, {}, p) == raw);

  double full = 0.0, no_gain = 0.0, no_bg = 0.0, no_lp = 0.0;
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    const Radargram r = corpus_bscan(static_cast<std::uint64_t>(s));
    auto ie = [&](PreprocessSteps st) { return information_entropy(quantize(run_chain(r, st, p))); };
    full += ie({true, true, true});
    no_gain += ie({false, true, true});
    no_bg += ie({true, false, true});
    no_lp += ie({true, true, false});
  }
  CHECK(full > no_gain);
  CHECK(full > no_bg);
  CHECK(full > no_lp);
}
