#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dsu {

using Token = std::uint32_t;

/// Mono waveform with amplitudes nominally in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate_hz = 0;

  std::size_t num_samples() const noexcept { return samples.size(); }
  double duration_seconds() const noexcept {
    return sample_rate_hz > 0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
  }

  /// Throws kInvalidRepresentation when the sample rate is non-positive or
  /// the buffer is empty.
  void validate() const;
};

/// One stream of discrete tokens drawn from a codebook of vocab_size entries.
struct UnitStream {
  std::vector<Token> tokens;
  std::uint32_t vocab_size = 1;

  std::size_t size() const noexcept { return tokens.size(); }
  bool operator==(const UnitStream&) const = default;

  /// Throws kInvalidToken on a token outside the vocabulary and
  /// kInvalidRepresentation on vocab_size == 0.
  void validate() const;
};

/// The M parallel streams an utterance was discretized into, plus the
/// duration T/S of the source waveform.
struct DiscreteRepresentation {
  std::vector<UnitStream> streams;
  double duration_seconds = 0.0;

  void validate() const;
};

/// Row-major frame-by-feature matrix.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                double frame_hop_seconds = 0.02);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double frame_hop_seconds() const noexcept { return frame_hop_seconds_; }

  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<const double> values() const noexcept { return values_; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  /// Throws kShape on empty/mismatched dimensions and kInvalidFeature on any
  /// non-finite value.
  void validate() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  double frame_hop_seconds_ = 0.02;
};

/// Fixed-width bit count of a stream: len * log2(vocab_size).
double stream_bits(const UnitStream& stream);

/// Total bits of all streams of a representation.
double total_bits(const DiscreteRepresentation& rep);

/// Bits per second of a representation: sum over streams of
/// N_m * log2|V_m| divided by the source duration.
double bitrate(const DiscreteRepresentation& rep);

/// Pooled corpus bitrate: total bits over total seconds. This is not the mean
/// of per-utterance bitrates.
double corpus_bitrate(std::span<const DiscreteRepresentation> reps);

}  // namespace dsu
