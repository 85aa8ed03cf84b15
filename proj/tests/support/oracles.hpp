#pragma once

// Reference implementations used to check the library. Each one is written
// for clarity over speed and shares no code with src/.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "dsu/core_model.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

inline std::size_t nearest(const std::vector<double>& x, const Matrix& centroids) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    if (sqdist(x, centroids[c]) < sqdist(x, centroids[best])) best = c;
  }
  return best;
}

struct LloydRun {
  Matrix centroids;
  std::vector<double> inertia;  // one entry per assignment, starting with the seeds
};

// Plain Lloyd from the given seeds. Stops when the relative improvement drops
// below rel_tol, when a step does not improve, or after max_iters updates.
// Fails (returns empty) if a cluster ever goes empty.
inline LloydRun lloyd(const Matrix& points, Matrix centroids, int max_iters, double rel_tol) {
  auto total = [&](const Matrix& c) {
    double s = 0.0;
    for (const auto& p : points) s += sqdist(p, c[nearest(p, c)]);
    return s;
  };
  LloydRun run;
  double current = total(centroids);
  run.inertia.push_back(current);
  for (int it = 0; it < max_iters && current > 0.0; ++it) {
    const std::size_t k = centroids.size(), d = points.front().size();
    Matrix sum(k, std::vector<double>(d, 0.0));
    std::vector<std::size_t> count(k, 0);
    for (const auto& p : points) {
      const std::size_t c = nearest(p, centroids);
      ++count[c];
      for (std::size_t j = 0; j < d; ++j) sum[c][j] += p[j];
    }
    Matrix next = centroids;
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] == 0) return {};
      for (std::size_t j = 0; j < d; ++j) next[c][j] = sum[c][j] / static_cast<double>(count[c]);
    }
    const double after = total(next);
    if (!(after < current)) break;
    const double gain = (current - after) / current;
    centroids = next;
    current = after;
    run.inertia.push_back(current);
    if (gain < rel_tol) break;
  }
  run.centroids = centroids;
  return run;
}

// Greedy BPE, recounting every pair from scratch each round.
struct Merge {
  std::uint32_t left, right, result;
};

inline std::vector<std::uint32_t> apply_merge(const std::vector<std::uint32_t>& s, const Merge& m) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i + 1 < s.size() && s[i] == m.left && s[i + 1] == m.right) {
      out.push_back(m.result);
      ++i;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

inline std::vector<Merge> bpe_train(std::vector<std::vector<std::uint32_t>> corpus, std::uint32_t base,
                                    std::uint32_t target) {
  std::vector<Merge> merges;
  std::uint32_t next = base;
  while (next < target) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> counts;
    for (const auto& s : corpus) {
      for (std::size_t i = 0; i + 1 < s.size(); ++i) ++counts[{s[i], s[i + 1]}];
    }
    // std::map iterates in (left, right) order, so the first maximum wins ties.
    std::pair<std::uint32_t, std::uint32_t> best{};
    std::size_t best_count = 0;
    for (const auto& [pair, n] : counts) {
      if (n > best_count) {
        best = pair;
        best_count = n;
      }
    }
    if (best_count < 2) break;
    const Merge m{best.first, best.second, next++};
    for (auto& s : corpus) s = apply_merge(s, m);
    merges.push_back(m);
  }
  return merges;
}

template <typename T>
std::size_t levenshtein(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
    }
  }
  return d[a.size()][b.size()];
}

inline double cep_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t d = 1; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

// Minimum over every monotone unit-step path of the summed frame distance,
// summed from the start of the path.
inline double dtw_exhaustive(const Matrix& a, const Matrix& b) {
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double acc) {
    acc = acc + cep_distance(a[i], b[j]);
    if (i + 1 == a.size() && j + 1 == b.size()) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < a.size() && j + 1 < b.size()) walk(i + 1, j + 1, acc);
    if (i + 1 < a.size()) walk(i + 1, j, acc);
    if (j + 1 < b.size()) walk(i, j + 1, acc);
  };
  walk(0, 0, 0.0);
  return best;
}

inline std::vector<double> dct2(const std::vector<double>& x, std::size_t count) {
  const double n = static_cast<double>(x.size());
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      s += x[i] * std::cos(std::numbers::pi / n * (static_cast<double>(i) + 0.5) * static_cast<double>(k));
    }
    out[k] = s * std::sqrt((k == 0 ? 1.0 : 2.0) / n);
  }
  return out;
}

inline double mcd_summand(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t d = 1; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return 10.0 / std::log(10.0) * std::sqrt(2.0 * s);
}

// Fractional ranks by sorting: equal values share the mean of their 1-based
// sorted positions.
inline std::vector<double> ranks(const std::vector<double>& values, bool ascending) {
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return ascending ? values[x] < values[y] : values[x] > values[y];
  });
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double mean = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) out[order[t]] = mean;
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic audio

inline dsu::AudioBuffer sine(double hz, int rate, double seconds, double amplitude = 0.5) {
  dsu::AudioBuffer a;
  a.sample_rate_hz = rate;
  a.samples.resize(static_cast<std::size_t>(seconds * rate));
  for (std::size_t n = 0; n < a.samples.size(); ++n) {
    a.samples[n] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(n) / rate);
  }
  return a;
}

inline dsu::AudioBuffer noise(std::uint64_t seed, int rate, double seconds, double amplitude = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  dsu::AudioBuffer a;
  a.sample_rate_hz = rate;
  a.samples.resize(static_cast<std::size_t>(seconds * rate));
  for (auto& s : a.samples) s = u(rng);
  return a;
}

// Speech-like test signal: a glottal pulse train with a gliding pitch, shaped
// by three resonances that move between vowel targets, with unvoiced
// fricative stretches and a little background noise.
inline dsu::AudioBuffer speech_like(std::uint64_t seed, int rate = 16000, double seconds = 1.6) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t n = static_cast<std::size_t>(seconds * rate);
  const double f_start = 90.0 + 160.0 * u(rng);
  const double f_end = f_start * (0.7 + 0.6 * u(rng));
  const double vowels[4][3] = {{730, 1090, 2440}, {270, 2290, 3010}, {300, 870, 2240}, {530, 1840, 2480}};
  const int v0 = static_cast<int>(u(rng) * 4) % 4;
  const int v1 = (v0 + 1 + static_cast<int>(u(rng) * 3)) % 4;
  const double fric_start = 0.55 + 0.15 * u(rng);
  const double fric_len = 0.12 + 0.08 * u(rng);

  std::vector<double> source(n, 0.0);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n);
    const double f0 = f_start + (f_end - f_start) * t + 6.0 * std::sin(2.0 * std::numbers::pi * 5.0 * t * seconds);
    phase += f0 / rate;
    const bool fricative = t >= fric_start && t < fric_start + fric_len;
    if (phase >= 1.0) {
      phase -= 1.0;
      if (!fricative) source[i] = 1.0;
    }
    source[i] += (fricative ? 0.35 : 0.01) * gauss(rng);
  }
  // Cascade of two-pole resonators with time-varying centre frequencies.
  std::vector<double> y = source;
  for (int f = 0; f < 3; ++f) {
    double y1 = 0.0, y2 = 0.0;
    const double bw = 80.0 + 40.0 * f;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(n);
      const double fc = vowels[v0][f] + (vowels[v1][f] - vowels[v0][f]) * t;
      const double r = std::exp(-std::numbers::pi * bw / rate);
      const double a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * fc / rate);
      const double a2 = -r * r;
      const double out = (1.0 - r) * y[i] + a1 * y1 + a2 * y2;
      y2 = y1;
      y1 = out;
      y[i] = out;
    }
  }
  double peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v));
  dsu::AudioBuffer a;
  a.sample_rate_hz = rate;
  a.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Short fades so the edges are not clicks.
    const double edge = std::min(1.0, std::min(i, n - 1 - i) / (0.01 * rate));
    a.samples[i] = 0.8 * edge * y[i] / peak;
  }
  return a;
}

}  // namespace oracle
