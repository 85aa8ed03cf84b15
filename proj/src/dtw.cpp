#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "dsu/error.hpp"
#include "dsu/signal_metrics.hpp"

namespace dsu {

namespace {

enum Step : std::uint8_t { kDiagonal, kAdvanceA, kAdvanceB, kStart };

void check_pair(const CepstrumMatrix& a, const CepstrumMatrix& b) {
  if (a.frames() == 0 || b.frames() == 0) {
    throw Error(ErrorCode::kShape, "DTW needs at least one frame on each side");
  }
  if (a.width() != b.width()) {
    throw Error(ErrorCode::kShape, "cepstrum widths differ: " + std::to_string(a.width()) +
                                       " vs " + std::to_string(b.width()));
  }
  if (a.width() < 2) throw Error(ErrorCode::kShape, "cepstra need at least c0 and c1");
  if (a.sample_rate_hz() != 0 && b.sample_rate_hz() != 0 &&
      a.sample_rate_hz() != b.sample_rate_hz()) {
    throw Error(ErrorCode::kSampleRateMismatch,
                "cepstra come from different sample rates: " + std::to_string(a.sample_rate_hz()) +
                    " vs " + std::to_string(b.sample_rate_hz()));
  }
}

}  // namespace

double cepstral_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t d = 1; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

Alignment dtw_align(const CepstrumMatrix& a, const CepstrumMatrix& b) {
  check_pair(a, b);
  const std::size_t n = a.frames();
  const std::size_t m = b.frames();
  std::vector<std::uint8_t> steps(n * m);
  std::vector<double> prev(m), cur(m);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = cepstral_distance(a.frame(i), b.frame(j));
      if (i == 0 && j == 0) {
        cur[j] = d;
        steps[0] = kStart;
        continue;
      }
      double best = 0.0;
      Step step = kStart;
      if (i > 0 && j > 0) {
        best = prev[j - 1];
        step = kDiagonal;
      }
      if (i > 0 && (step == kStart || prev[j] < best)) {
        best = prev[j];
        step = kAdvanceA;
      }
      if (j > 0 && (step == kStart || cur[j - 1] < best)) {
        best = cur[j - 1];
        step = kAdvanceB;
      }
      cur[j] = d + best;
      steps[i * m + j] = step;
    }
    std::swap(prev, cur);
  }

  Alignment out;
  out.cost = prev[m - 1];
  std::size_t i = n - 1, j = m - 1;
  out.path.emplace_back(i, j);
  while (i != 0 || j != 0) {
    switch (steps[i * m + j]) {
      case kDiagonal: --i; --j; break;
      case kAdvanceA: --i; break;
      case kAdvanceB: --j; break;
      default: i = 0; j = 0; break;
    }
    out.path.emplace_back(i, j);
  }
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

bool is_valid_path(const AlignmentPath& path, std::size_t n, std::size_t m) {
  if (path.empty() || n == 0 || m == 0) return false;
  if (path.front() != std::pair<std::size_t, std::size_t>{0, 0}) return false;
  if (path.back() != std::pair<std::size_t, std::size_t>{n - 1, m - 1}) return false;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const auto di = path[k].first - path[k - 1].first;
    const auto dj = path[k].second - path[k - 1].second;
    if (path[k].first < path[k - 1].first || path[k].second < path[k - 1].second) return false;
    if (di > 1 || dj > 1 || (di == 0 && dj == 0)) return false;
  }
  return true;
}

double mcd_frame(std::span<const double> ref, std::span<const double> syn) {
  double acc = 0.0;
  for (std::size_t d = 1; d < ref.size(); ++d) {
    const double diff = ref[d] - syn[d];
    acc += diff * diff;
  }
  return 10.0 / std::numbers::ln10 * std::sqrt(2.0 * acc);
}

double mcd(const CepstrumMatrix& ref, const CepstrumMatrix& syn) {
  const Alignment alignment = dtw_align(ref, syn);
  double total = 0.0;
  for (const auto& [i, j] : alignment.path) total += mcd_frame(ref.frame(i), syn.frame(j));
  return total / static_cast<double>(alignment.path.size());
}

}  // namespace dsu
