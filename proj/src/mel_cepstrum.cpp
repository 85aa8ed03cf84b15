#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "dsu/error.hpp"
#include "dsu/signal_metrics.hpp"

namespace dsu {

namespace {

constexpr double kLogFloor = 1e-10;

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

// FFTW's planner is not thread-safe; executing an existing plan on fresh
// fftw_malloc'd buffers is. FFTW_ESTIMATE keeps the chosen algorithm, and so
// the exact output, identical run to run.
fftw_plan r2c_plan(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  RealBuffer in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  ComplexBuffer out(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))));
  fftw_plan plan =
      fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
  plans.emplace(n, plan);
  return plan;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// num_mels x (fft_size/2 + 1) triangular weights.
std::vector<double> mel_filterbank(std::size_t num_mels, std::size_t fft_size, int sample_rate) {
  const std::size_t bins = fft_size / 2 + 1;
  const double top = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(num_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(num_mels + 1));
  }
  std::vector<double> weights(num_mels * bins, 0.0);
  for (std::size_t m = 0; m < num_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(fft_size);
      double w = 0.0;
      if (f > lo && f <= mid) {
        w = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        w = (hi - f) / (hi - mid);
      }
      weights[m * bins + k] = w;
    }
  }
  return weights;
}

std::vector<double> dct_matrix(std::size_t n, std::size_t count) {
  std::vector<double> basis(count * n);
  for (std::size_t q = 0; q < count; ++q) {
    const double scale = std::sqrt((q == 0 ? 1.0 : 2.0) / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      basis[q * n + i] =
          scale * std::cos(std::numbers::pi * static_cast<double>(q) *
                           (static_cast<double>(i) + 0.5) / static_cast<double>(n));
    }
  }
  return basis;
}

}  // namespace

std::size_t FramingConfig::window_samples(int sample_rate_hz) const {
  return static_cast<std::size_t>(std::lround(window_seconds * sample_rate_hz));
}

std::size_t FramingConfig::hop_samples(int sample_rate_hz) const {
  return static_cast<std::size_t>(std::lround(hop_seconds * sample_rate_hz));
}

std::size_t FramingConfig::resolved_fft_size(int sample_rate_hz) const {
  if (fft_size != 0) return fft_size;
  std::size_t n = 1;
  while (n < window_samples(sample_rate_hz)) n <<= 1;
  return n;
}

void FramingConfig::validate(int sample_rate_hz) const {
  if (sample_rate_hz <= 0) throw Error(ErrorCode::kConfig, "sample rate must be positive");
  if (!(window_seconds > 0.0) || !(hop_seconds > 0.0)) {
    throw Error(ErrorCode::kConfig, "window and hop must be positive");
  }
  if (hop_seconds > window_seconds) {
    throw Error(ErrorCode::kConfig, "hop must not exceed the window");
  }
  if (window_samples(sample_rate_hz) < 2 || hop_samples(sample_rate_hz) < 1) {
    throw Error(ErrorCode::kConfig, "window or hop rounds to too few samples");
  }
  const std::size_t n = resolved_fft_size(sample_rate_hz);
  if ((n & (n - 1)) != 0 || n < window_samples(sample_rate_hz)) {
    throw Error(ErrorCode::kConfig,
                "fft_size must be a power of two holding one window, got " + std::to_string(n));
  }
}

CepstrumMatrix::CepstrumMatrix(std::size_t frames, std::size_t width, std::vector<double> values,
                               int sample_rate_hz)
    : frames_(frames), width_(width), values_(std::move(values)), sample_rate_hz_(sample_rate_hz) {
  if (values_.size() != frames_ * width_) {
    throw Error(ErrorCode::kShape, "cepstrum matrix size does not match frames x width");
  }
}

std::vector<double> dct2_orthonormal(std::span<const double> input, std::size_t count) {
  const std::size_t n = input.size();
  const auto basis = dct_matrix(n, count);
  std::vector<double> out(count, 0.0);
  for (std::size_t q = 0; q < count; ++q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += basis[q * n + i] * input[i];
    out[q] = acc;
  }
  return out;
}

CepstrumMatrix mel_cepstrum(const AudioBuffer& audio, const MelCepstrumOptions& options) {
  audio.validate();
  const int rate = audio.sample_rate_hz;
  options.framing.validate(rate);
  if (options.num_coeffs < 1) throw Error(ErrorCode::kConfig, "num_coeffs must be at least 1");
  if (options.num_mels < options.num_coeffs + 1) {
    throw Error(ErrorCode::kConfig, "num_mels must exceed num_coeffs");
  }
  const std::size_t win = options.framing.window_samples(rate);
  const std::size_t hop = options.framing.hop_samples(rate);
  const std::size_t n_fft = options.framing.resolved_fft_size(rate);
  if (audio.num_samples() < win) {
    throw Error(ErrorCode::kTooShort, "audio has " + std::to_string(audio.num_samples()) +
                                          " samples, shorter than one " + std::to_string(win) +
                                          "-sample window");
  }
  const std::size_t frames = 1 + (audio.num_samples() - win) / hop;
  const std::size_t bins = n_fft / 2 + 1;
  const std::size_t width = options.num_coeffs + 1;
  const std::size_t mels = options.num_mels;

  std::vector<double> window(win);
  for (std::size_t i = 0; i < win; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(win));
  }
  const auto filters = mel_filterbank(mels, n_fft, rate);
  const auto basis = dct_matrix(mels, width);

  fftw_plan plan = r2c_plan(n_fft);
  RealBuffer in(static_cast<double*>(fftw_malloc(sizeof(double) * n_fft)));
  ComplexBuffer out(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
  std::vector<double> magnitude(bins);
  std::vector<double> log_mel(mels);
  std::vector<double> values(frames * width);

  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t start = f * hop;
    for (std::size_t i = 0; i < n_fft; ++i) {
      in[i] = i < win ? audio.samples[start + i] * window[i] : 0.0;
    }
    fftw_execute_dft_r2c(plan, in.get(), out.get());
    for (std::size_t k = 0; k < bins; ++k) magnitude[k] = std::hypot(out[k][0], out[k][1]);
    for (std::size_t m = 0; m < mels; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < bins; ++k) e += filters[m * bins + k] * magnitude[k];
      log_mel[m] = std::log(std::max(e, kLogFloor));
    }
    for (std::size_t q = 0; q < width; ++q) {
      double acc = 0.0;
      for (std::size_t m = 0; m < mels; ++m) acc += basis[q * mels + m] * log_mel[m];
      values[f * width + q] = acc;
    }
  }
  return CepstrumMatrix(frames, width, std::move(values), rate);
}

}  // namespace dsu
