#include "dsu/core_model.hpp"

#include <cmath>
#include <string>

#include "dsu/error.hpp"

namespace dsu {

void AudioBuffer::validate() const {
  if (sample_rate_hz <= 0) {
    throw Error(ErrorCode::kInvalidRepresentation,
                "audio sample rate must be positive, got " + std::to_string(sample_rate_hz));
  }
  if (samples.empty()) {
    throw Error(ErrorCode::kInvalidRepresentation, "audio buffer has no samples");
  }
}

void UnitStream::validate() const {
  if (vocab_size == 0) {
    throw Error(ErrorCode::kInvalidRepresentation, "stream vocab_size must be at least 1");
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] >= vocab_size) {
      throw Error(ErrorCode::kInvalidToken, "token " + std::to_string(tokens[i]) +
                                                " at index " + std::to_string(i) +
                                                " is outside vocabulary of size " +
                                                std::to_string(vocab_size));
    }
  }
}

void DiscreteRepresentation::validate() const {
  if (streams.empty()) {
    throw Error(ErrorCode::kInvalidRepresentation, "representation has no streams");
  }
  if (!(duration_seconds > 0.0) || !std::isfinite(duration_seconds)) {
    throw Error(ErrorCode::kInvalidRepresentation,
                "representation duration must be positive and finite");
  }
  for (const auto& s : streams) s.validate();
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                             double frame_hop_seconds)
    : rows_(rows), cols_(cols), values_(std::move(values)), frame_hop_seconds_(frame_hop_seconds) {
  if (values_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kShape, "feature matrix declares " + std::to_string(rows_) + "x" +
                                       std::to_string(cols_) + " but holds " +
                                       std::to_string(values_.size()) + " values");
  }
}

void FeatureMatrix::validate() const {
  if (rows_ == 0 || cols_ == 0) {
    throw Error(ErrorCode::kShape, "feature matrix must have at least one row and column");
  }
  if (!(frame_hop_seconds_ > 0.0)) {
    throw Error(ErrorCode::kInvalidFeature, "frame hop must be positive");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::kInvalidFeature,
                  "non-finite feature value at row " + std::to_string(i / cols_) + ", column " +
                      std::to_string(i % cols_));
    }
  }
}

double stream_bits(const UnitStream& stream) {
  if (stream.vocab_size == 0) {
    throw Error(ErrorCode::kInvalidRepresentation, "stream vocab_size must be at least 1");
  }
  if (stream.tokens.empty() || stream.vocab_size == 1) return 0.0;
  return static_cast<double>(stream.tokens.size()) * std::log2(static_cast<double>(stream.vocab_size));
}

double total_bits(const DiscreteRepresentation& rep) {
  double bits = 0.0;
  for (const auto& s : rep.streams) bits += stream_bits(s);
  return bits;
}

double bitrate(const DiscreteRepresentation& rep) {
  rep.validate();
  return total_bits(rep) / rep.duration_seconds;
}

double corpus_bitrate(std::span<const DiscreteRepresentation> reps) {
  if (reps.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus bitrate of an empty corpus");
  double bits = 0.0;
  double seconds = 0.0;
  for (const auto& rep : reps) {
    rep.validate();
    bits += total_bits(rep);
    seconds += rep.duration_seconds;
  }
  return bits / seconds;
}

}  // namespace dsu
