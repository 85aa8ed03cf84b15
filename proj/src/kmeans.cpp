#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dsu/discretize.hpp"
#include "dsu/error.hpp"
#include "dsu/parallel.hpp"
#include "random.hpp"

namespace dsu {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    d += diff * diff;
  }
  return d;
}

struct Assignment {
  std::vector<Token> labels;
  std::vector<double> distances;
  double inertia = 0.0;
};

Assignment assign(const FeatureMatrix& frames, std::span<const double> centroids, std::size_t k,
                  int num_threads) {
  const std::size_t dim = frames.cols();
  Assignment out;
  out.labels.resize(frames.rows());
  out.distances.resize(frames.rows());
  parallel_for(frames.rows(), num_threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const auto x = frames.row(r);
      double best = std::numeric_limits<double>::infinity();
      Token best_c = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(x, centroids.subspan(c * dim, dim));
        if (d < best) {
          best = d;
          best_c = static_cast<Token>(c);
        }
      }
      out.labels[r] = best_c;
      out.distances[r] = best;
    }
  });
  // Sequential reduction keeps the sum independent of the thread count.
  for (double d : out.distances) out.inertia += d;
  return out;
}

bool rows_equal(std::span<const double> a, std::span<const double> b) {
  return std::equal(a.begin(), a.end(), b.begin());
}

FeatureMatrix select_rows(const FeatureMatrix& frames, const std::vector<std::size_t>& rows) {
  std::vector<double> values;
  values.reserve(rows.size() * frames.cols());
  for (std::size_t r : rows) {
    const auto row = frames.row(r);
    values.insert(values.end(), row.begin(), row.end());
  }
  return FeatureMatrix(rows.size(), frames.cols(), std::move(values), frames.frame_hop_seconds());
}

// Lloyd update. Clusters left empty, or whose mean collides with an earlier
// centroid, are re-seeded with the points farthest from their new centroid.
std::vector<double> update_centroids(const FeatureMatrix& frames, const Assignment& assignment,
                                     std::size_t k) {
  const std::size_t dim = frames.cols();
  std::vector<double> sums(k * dim, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t r = 0; r < frames.rows(); ++r) {
    const Token c = assignment.labels[r];
    const auto x = frames.row(r);
    for (std::size_t j = 0; j < dim; ++j) sums[c * dim + j] += x[j];
    ++counts[c];
  }
  std::vector<double> centroids(k * dim, 0.0);
  std::vector<bool> vacant(k, false);
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) {
      vacant[c] = true;
      continue;
    }
    for (std::size_t j = 0; j < dim; ++j) {
      centroids[c * dim + j] = sums[c * dim + j] / static_cast<double>(counts[c]);
    }
  }
  auto centroid = [&](std::size_t c) {
    return std::span<const double>(centroids).subspan(c * dim, dim);
  };
  for (std::size_t c = 1; c < k; ++c) {
    if (vacant[c]) continue;
    for (std::size_t p = 0; p < c; ++p) {
      if (!vacant[p] && rows_equal(centroid(c), centroid(p))) {
        vacant[c] = true;
        break;
      }
    }
  }
  if (std::none_of(vacant.begin(), vacant.end(), [](bool v) { return v; })) return centroids;

  std::vector<double> spread(frames.rows(), 0.0);
  for (std::size_t r = 0; r < frames.rows(); ++r) {
    const Token c = assignment.labels[r];
    spread[r] = vacant[c] ? 0.0 : squared_distance(frames.row(r), centroid(c));
  }
  std::vector<std::size_t> order(frames.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return spread[a] > spread[b]; });

  std::size_t next = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (!vacant[c]) continue;
    bool filled = false;
    for (; next < order.size(); ++next) {
      const std::size_t r = order[next];
      const auto x = frames.row(r);
      bool taken = false;
      for (std::size_t p = 0; p < k && !taken; ++p) {
        taken = !vacant[p] && rows_equal(x, centroid(p));
      }
      if (taken) continue;
      std::copy(x.begin(), x.end(), centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
      vacant[c] = false;
      filled = true;
      ++next;
      break;
    }
    if (!filled) {
      throw Error(ErrorCode::kInsufficientData,
                  "cannot keep " + std::to_string(k) + " distinct centroids");
    }
  }
  return centroids;
}

}  // namespace

Codebook::Codebook(std::size_t k, std::size_t dim, std::vector<double> centroids)
    : k_(k), dim_(dim), centroids_(std::move(centroids)) {
  if (k_ == 0 || dim_ == 0 || centroids_.size() != k_ * dim_) {
    throw Error(ErrorCode::kShape, "codebook needs k >= 1, dim >= 1 and k*dim values");
  }
  for (double v : centroids_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidFeature, "non-finite centroid value");
  }
}

FeatureMatrix Codebook::as_features(double frame_hop_seconds) const {
  return FeatureMatrix(k_, dim_, centroids_, frame_hop_seconds);
}

std::vector<std::size_t> kmeans_sample_rows(std::size_t rows, double fraction,
                                            std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw Error(ErrorCode::kConfig, "sample fraction must be in (0, 1]");
  }
  std::vector<std::size_t> index(rows);
  std::iota(index.begin(), index.end(), std::size_t{0});
  if (fraction == 1.0) return index;
  const auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(rows)));
  // Partial Fisher-Yates, then restore row order.
  detail::Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + rng.below(rows - i);
    std::swap(index[i], index[j]);
  }
  index.resize(keep);
  std::sort(index.begin(), index.end());
  return index;
}

Codebook kmeans_plus_plus_init(const FeatureMatrix& frames, std::size_t k, std::uint64_t seed) {
  frames.validate();
  if (k == 0) throw Error(ErrorCode::kConfig, "k must be at least 1");
  if (frames.rows() < k) {
    throw Error(ErrorCode::kInsufficientData, "k-means needs at least k=" + std::to_string(k) +
                                                  " rows, got " + std::to_string(frames.rows()));
  }
  const std::size_t n = frames.rows();
  const std::size_t dim = frames.cols();
  detail::Rng rng(seed);
  std::vector<double> centroids;
  centroids.reserve(k * dim);

  auto add = [&](std::size_t r) {
    const auto x = frames.row(r);
    centroids.insert(centroids.end(), x.begin(), x.end());
  };
  add(rng.below(n));
  std::vector<double> nearest(n);
  for (std::size_t r = 0; r < n; ++r) {
    nearest[r] = squared_distance(frames.row(r), std::span<const double>(centroids));
  }
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : nearest) total += d;
    if (!(total > 0.0)) {
      throw Error(ErrorCode::kInsufficientData,
                  "rows contain fewer than k=" + std::to_string(k) + " distinct points");
    }
    const double target = rng.uniform() * total;
    std::size_t pick = n;
    double cumulative = 0.0;
    std::size_t last_positive = n;
    for (std::size_t r = 0; r < n; ++r) {
      if (nearest[r] <= 0.0) continue;
      last_positive = r;
      cumulative += nearest[r];
      if (cumulative > target) {
        pick = r;
        break;
      }
    }
    if (pick == n) pick = last_positive;
    add(pick);
    const auto newest = std::span<const double>(centroids).subspan(c * dim, dim);
    for (std::size_t r = 0; r < n; ++r) {
      nearest[r] = std::min(nearest[r], squared_distance(frames.row(r), newest));
    }
  }
  return Codebook(k, dim, std::move(centroids));
}

KMeansResult kmeans_train(const FeatureMatrix& input, const KMeansOptions& options) {
  input.validate();
  if (options.k == 0) throw Error(ErrorCode::kConfig, "k must be at least 1");
  if (options.max_iters < 0) throw Error(ErrorCode::kConfig, "max_iters must be non-negative");
  if (!(options.rel_tol >= 0.0)) throw Error(ErrorCode::kConfig, "rel_tol must be non-negative");

  FeatureMatrix sampled;
  const FeatureMatrix* frames = &input;
  if (options.sample_fraction != 1.0) {
    sampled = select_rows(input, kmeans_sample_rows(input.rows(), options.sample_fraction,
                                                    options.seed));
    frames = &sampled;
  }
  const std::size_t k = options.k;
  const Codebook seeds = kmeans_plus_plus_init(*frames, k, options.seed);

  std::vector<double> centroids(seeds.values().begin(), seeds.values().end());
  Assignment current = assign(*frames, centroids, k, options.num_threads);

  KMeansResult result;
  result.inertia_history.push_back(current.inertia);
  for (int iter = 0; iter < options.max_iters; ++iter) {
    if (current.inertia == 0.0) {
      result.converged = true;
      break;
    }
    std::vector<double> updated = update_centroids(*frames, current, k);
    Assignment next = assign(*frames, updated, k, options.num_threads);
    if (!(next.inertia < current.inertia)) {
      // A fixed point, or a rounding-level regression; keep the previous state.
      result.converged = true;
      break;
    }
    const double improvement = (current.inertia - next.inertia) / current.inertia;
    centroids = std::move(updated);
    current = std::move(next);
    result.inertia_history.push_back(current.inertia);
    ++result.iterations;
    if (improvement < options.rel_tol) {
      result.converged = true;
      break;
    }
  }
  result.codebook = Codebook(k, frames->cols(), std::move(centroids));
  return result;
}

Token nearest_centroid(std::span<const double> frame, const Codebook& codebook) {
  if (frame.size() != codebook.dim()) {
    throw Error(ErrorCode::kShape, "frame dimension " + std::to_string(frame.size()) +
                                       " does not match codebook dimension " +
                                       std::to_string(codebook.dim()));
  }
  double best = std::numeric_limits<double>::infinity();
  Token best_c = 0;
  for (std::size_t c = 0; c < codebook.k(); ++c) {
    const double d = squared_distance(frame, codebook.centroid(c));
    if (d < best) {
      best = d;
      best_c = static_cast<Token>(c);
    }
  }
  return best_c;
}

UnitStream quantize(const FeatureMatrix& frames, const Codebook& codebook, int num_threads) {
  if (codebook.k() == 0) throw Error(ErrorCode::kShape, "empty codebook");
  if (frames.cols() != codebook.dim()) {
    throw Error(ErrorCode::kShape, "feature dimension " + std::to_string(frames.cols()) +
                                       " does not match codebook dimension " +
                                       std::to_string(codebook.dim()));
  }
  UnitStream out;
  out.vocab_size = static_cast<std::uint32_t>(codebook.k());
  out.tokens.resize(frames.rows());
  parallel_for(frames.rows(), num_threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) out.tokens[r] = nearest_centroid(frames.row(r), codebook);
  });
  return out;
}

double inertia(const FeatureMatrix& frames, const Codebook& codebook, int num_threads) {
  if (frames.cols() != codebook.dim()) {
    throw Error(ErrorCode::kShape, "feature dimension does not match codebook dimension");
  }
  return assign(frames, codebook.values(), codebook.k(), num_threads).inertia;
}

}  // namespace dsu
