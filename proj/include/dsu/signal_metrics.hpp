#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "dsu/core_model.hpp"
#include "dsu/discretize.hpp"

namespace dsu {

struct FramingConfig {
  double window_seconds = 0.025;
  double hop_seconds = 0.010;
  // 0 picks the smallest power of two holding one window.
  std::size_t fft_size = 0;

  std::size_t window_samples(int sample_rate_hz) const;
  std::size_t hop_samples(int sample_rate_hz) const;
  std::size_t resolved_fft_size(int sample_rate_hz) const;
  void validate(int sample_rate_hz) const;
};

/// frames x (num_coeffs + 1) mel-cepstra; column 0 is the energy term c0.
class CepstrumMatrix {
 public:
  CepstrumMatrix() = default;
  CepstrumMatrix(std::size_t frames, std::size_t width, std::vector<double> values,
                 int sample_rate_hz = 0);

  std::size_t frames() const noexcept { return frames_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t num_coeffs() const noexcept { return width_ == 0 ? 0 : width_ - 1; }
  int sample_rate_hz() const noexcept { return sample_rate_hz_; }

  std::span<const double> frame(std::size_t i) const {
    return {values_.data() + i * width_, width_};
  }
  double operator()(std::size_t i, std::size_t c) const { return values_[i * width_ + c]; }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const CepstrumMatrix&) const = default;

 private:
  std::size_t frames_ = 0;
  std::size_t width_ = 0;
  std::vector<double> values_;
  int sample_rate_hz_ = 0;
};

struct MelCepstrumOptions {
  FramingConfig framing;
  std::size_t num_mels = 80;
  std::size_t num_coeffs = 13;
};

/// Hann-windowed magnitude spectrum -> triangular mel filterbank (HTK mel
/// scale, 0..Nyquist) -> natural log floored at 1e-10 -> orthonormal DCT-II,
/// keeping c0..c_num_coeffs. Frames start at multiples of the hop and are
/// not padded. Throws kTooShort when the audio is shorter than one window.
CepstrumMatrix mel_cepstrum(const AudioBuffer& audio, const MelCepstrumOptions& options = {});

/// Orthonormal DCT-II of `input`, first `count` coefficients.
std::vector<double> dct2_orthonormal(std::span<const double> input, std::size_t count);

/// (i, j) frame pairs, monotone, from (0,0) to (last,last), unit steps.
using AlignmentPath = std::vector<std::pair<std::size_t, std::size_t>>;

struct Alignment {
  AlignmentPath path;
  double cost = 0.0;
};

/// Euclidean distance between two cepstral frames over c1..c_D.
double cepstral_distance(std::span<const double> a, std::span<const double> b);

/// DTW minimizing summed cepstral_distance; ties prefer the diagonal step,
/// then the step along the first sequence.
Alignment dtw_align(const CepstrumMatrix& a, const CepstrumMatrix& b);

/// True when `path` satisfies the AlignmentPath rules for an n x m grid.
bool is_valid_path(const AlignmentPath& path, std::size_t n, std::size_t m);

/// Mean over DTW-aligned frame pairs of (10/ln10) * sqrt(2 * sum_d diff_d^2),
/// c0 excluded. In dB.
double mcd(const CepstrumMatrix& ref, const CepstrumMatrix& syn);

/// (10/ln10) * sqrt(2 * sum_d diff_d^2) for one frame pair.
double mcd_frame(std::span<const double> ref, std::span<const double> syn);

struct PitchOptions {
  double f0_min_hz = 40.0;
  double f0_max_hz = 800.0;
  double hop_seconds = 0.010;
  double voicing_threshold = 0.3;
  // A later autocorrelation peak must beat the earliest strong one by this
  // ratio to be chosen; guards against sub-octave picks on periodic input.
  double octave_ratio = 0.9;
};

/// Normalized-autocorrelation pitch tracker. Frame k is centred on sample
/// k * hop; the signal is zero-padded at both edges. A frame is voiced when
/// the chosen peak's interpolated correlation reaches the voicing threshold.
F0Contour extract_f0(const AudioBuffer& audio, const PitchOptions& options = {});

struct F0RmseResult {
  double value = 0.0;       // RMSE of natural-log F0
  std::size_t pairs = 0;    // mutually voiced aligned pairs
  bool no_overlap = false;  // no mutually voiced pairs; value is 0
};

struct F0RmseOptions {
  MelCepstrumOptions cepstrum;
  PitchOptions pitch;
};

/// Aligns the two signals by DTW on mel-cepstra, then takes the RMSE of
/// log-F0 over aligned pairs where both frames are voiced. Throws
/// kSampleRateMismatch when the rates differ.
F0RmseResult f0_rmse(const AudioBuffer& ref, const AudioBuffer& syn,
                     const F0RmseOptions& options = {});

}  // namespace dsu
