#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dsu/core_model.hpp"

namespace dsu {

// ---------------------------------------------------------------------------
// k-means codebooks

class Codebook {
 public:
  Codebook() = default;
  Codebook(std::size_t k, std::size_t dim, std::vector<double> centroids);

  std::size_t k() const noexcept { return k_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> centroid(std::size_t i) const {
    return {centroids_.data() + i * dim_, dim_};
  }
  std::span<const double> values() const noexcept { return centroids_; }

  /// Returns the centroids as a feature matrix, one row per centroid.
  FeatureMatrix as_features(double frame_hop_seconds = 0.02) const;

  bool operator==(const Codebook&) const = default;

 private:
  std::size_t k_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> centroids_;
};

struct KMeansOptions {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  int max_iters = 100;
  double rel_tol = 1e-6;
  // Fraction of rows (chosen with the seed) used for training; 1 uses all.
  double sample_fraction = 1.0;
  // Worker threads for the assignment step. Results do not depend on it.
  int num_threads = 1;
};

struct KMeansResult {
  Codebook codebook;
  // inertia_history[0] is the inertia of the k-means++ seeds; each later
  // entry follows one Lloyd update. Non-increasing by construction.
  std::vector<double> inertia_history;
  int iterations = 0;
  bool converged = false;

  double inertia() const { return inertia_history.empty() ? 0.0 : inertia_history.back(); }
};

/// Draws k seeds from `frames` with k-means++ (D^2 sampling). Throws
/// kInsufficientData if the rows hold fewer than k distinct points.
Codebook kmeans_plus_plus_init(const FeatureMatrix& frames, std::size_t k, std::uint64_t seed);

/// Lloyd's algorithm from k-means++ seeds. Stops once the relative inertia
/// improvement drops below rel_tol or after max_iters updates.
KMeansResult kmeans_train(const FeatureMatrix& frames, const KMeansOptions& options);

/// Row indices selected for training when sample_fraction < 1.
std::vector<std::size_t> kmeans_sample_rows(std::size_t rows, double fraction, std::uint64_t seed);

/// Index of the nearest centroid by squared Euclidean distance, lowest index
/// on ties.
Token nearest_centroid(std::span<const double> frame, const Codebook& codebook);

/// Quantizes every frame to its nearest centroid. The returned stream has
/// vocab_size == codebook.k().
UnitStream quantize(const FeatureMatrix& frames, const Codebook& codebook, int num_threads = 1);

/// Sum of squared distances from each frame to its nearest centroid.
double inertia(const FeatureMatrix& frames, const Codebook& codebook, int num_threads = 1);

// ---------------------------------------------------------------------------
// Run-length dedup

/// Collapses each run of identical adjacent tokens to one token.
UnitStream dedup(const UnitStream& stream);

// ---------------------------------------------------------------------------
// Byte-pair encoding over unit ids

struct BpeMerge {
  Token left = 0;
  Token right = 0;
  Token result = 0;
  bool operator==(const BpeMerge&) const = default;
};

class BpeModel {
 public:
  BpeModel() = default;
  /// Merges must be numbered base_vocab_size, base_vocab_size+1, ... and may
  /// only reference symbols defined before them; throws kInvalidTarget
  /// otherwise.
  BpeModel(std::uint32_t base_vocab_size, std::vector<BpeMerge> merges);

  std::uint32_t base_vocab_size() const noexcept { return base_vocab_size_; }
  std::uint32_t total_vocab_size() const noexcept {
    return base_vocab_size_ + static_cast<std::uint32_t>(merges_.size());
  }
  const std::vector<BpeMerge>& merges() const noexcept { return merges_; }

  /// Base-alphabet expansion of any symbol in the model vocabulary.
  const std::vector<Token>& expansion(Token symbol) const;

  bool operator==(const BpeModel& other) const {
    return base_vocab_size_ == other.base_vocab_size_ && merges_ == other.merges_;
  }

 private:
  std::uint32_t base_vocab_size_ = 0;
  std::vector<BpeMerge> merges_;
  std::vector<std::vector<Token>> expansions_;
};

/// Greedy BPE training. Each round merges the adjacent pair with the highest
/// occurrence count (ties: lower left, then lower right symbol). Occurrences
/// are counted at every adjacent position, and a merge rewrites
/// non-overlapping occurrences left to right. Training stops at target_vocab
/// or when no pair occurs at least twice.
BpeModel bpe_train(std::span<const UnitStream> corpus, std::uint32_t target_vocab);

/// Applies the merges in training order. Throws kInvalidToken on a token
/// outside the base alphabet.
UnitStream bpe_encode(const UnitStream& stream, const BpeModel& model);

/// Expands merged symbols back to the base alphabet. Throws kInvalidToken on
/// a token outside the model vocabulary.
UnitStream bpe_decode(const UnitStream& stream, const BpeModel& model);

// ---------------------------------------------------------------------------
// F0 quantization

struct F0Frame {
  double f0_hz = 0.0;
  bool voiced = false;
};

struct F0Contour {
  std::vector<F0Frame> frames;
  double frame_hop_seconds = 0.01;
  double f0_min_hz = 40.0;
  double f0_max_hz = 800.0;

  std::size_t size() const noexcept { return frames.size(); }
  std::size_t voiced_count() const;
};

/// Size of the quantized F0 alphabet: token 0 for unvoiced frames plus the
/// bins 0..round(f0_max / resolution), each shifted up by one.
std::uint32_t f0_vocab_size(double f0_max_hz, double resolution_hz = 10.0);

/// Voiced frames map to round(f0 / resolution) + 1, unvoiced to 0.
UnitStream quantize_f0(const F0Contour& contour, double resolution_hz = 10.0);

}  // namespace dsu
