#include <algorithm>
#include <cmath>
#include <string>

#include "dsu/error.hpp"
#include "dsu/signal_metrics.hpp"

namespace dsu {

namespace {

constexpr double kSilentEnergy = 1e-10;

struct LagRange {
  std::size_t min_lag;
  std::size_t max_lag;
};

LagRange lag_range(const PitchOptions& o, int rate) {
  if (!(o.f0_min_hz > 0.0) || !(o.f0_min_hz < o.f0_max_hz) || !(o.f0_max_hz < rate / 2.0)) {
    throw Error(ErrorCode::kConfig, "pitch range must satisfy 0 < f0_min < f0_max < rate/2");
  }
  if (!(o.hop_seconds > 0.0)) throw Error(ErrorCode::kConfig, "pitch hop must be positive");
  if (!(o.voicing_threshold >= 0.0 && o.voicing_threshold <= 1.0)) {
    throw Error(ErrorCode::kConfig, "voicing threshold must be in [0, 1]");
  }
  if (!(o.octave_ratio > 0.0 && o.octave_ratio <= 1.0)) {
    throw Error(ErrorCode::kConfig, "octave ratio must be in (0, 1]");
  }
  LagRange r;
  r.min_lag = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(rate / o.f0_max_hz)));
  r.max_lag = static_cast<std::size_t>(std::ceil(rate / o.f0_min_hz));
  return r;
}

}  // namespace

F0Contour extract_f0(const AudioBuffer& audio, const PitchOptions& options) {
  audio.validate();
  const int rate = audio.sample_rate_hz;
  const LagRange lags = lag_range(options, rate);
  const auto hop = static_cast<std::size_t>(std::lround(options.hop_seconds * rate));
  if (hop == 0) throw Error(ErrorCode::kConfig, "pitch hop rounds to zero samples");

  // Correlation over one longest period; lags evaluated one past each end of
  // the search range so every candidate can be interpolated.
  const std::size_t span = lags.max_lag;
  const std::size_t lo = lags.min_lag - 1;
  const std::size_t hi = lags.max_lag + 1;
  const std::size_t reach = span + hi;
  const std::size_t pad = reach;
  std::vector<double> x(audio.num_samples() + 2 * pad, 0.0);
  std::copy(audio.samples.begin(), audio.samples.end(), x.begin() + static_cast<std::ptrdiff_t>(pad));

  F0Contour contour;
  contour.frame_hop_seconds = static_cast<double>(hop) / rate;
  contour.f0_min_hz = options.f0_min_hz;
  contour.f0_max_hz = options.f0_max_hz;
  const std::size_t frames = (audio.num_samples() - 1) / hop + 1;
  contour.frames.resize(frames);

  std::vector<double> r(hi + 1, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t centre = pad + f * hop;
    const std::size_t start = centre - reach / 2;
    const double* seg = x.data() + start;

    double e1 = 0.0;
    for (std::size_t n = 0; n < span; ++n) e1 += seg[n] * seg[n];
    F0Frame& out = contour.frames[f];
    if (e1 <= kSilentEnergy) continue;

    double e2 = 0.0;
    for (std::size_t n = 0; n < span; ++n) e2 += seg[lo + n] * seg[lo + n];
    for (std::size_t lag = lo; lag <= hi; ++lag) {
      if (lag > lo) {
        const double leaving = seg[lag - 1];
        const double entering = seg[lag + span - 1];
        e2 += entering * entering - leaving * leaving;
      }
      double acc = 0.0;
      for (std::size_t n = 0; n < span; ++n) acc += seg[n] * seg[lag + n];
      const double denom = std::sqrt(e1 * std::max(e2, 0.0));
      r[lag] = denom > kSilentEnergy ? acc / denom : 0.0;
    }

    double strongest = -1.0;
    for (std::size_t lag = lags.min_lag; lag <= lags.max_lag; ++lag) {
      if (r[lag] >= r[lag - 1] && r[lag] > r[lag + 1]) strongest = std::max(strongest, r[lag]);
    }
    if (strongest <= 0.0) continue;
    std::size_t pick = 0;
    for (std::size_t lag = lags.min_lag; lag <= lags.max_lag; ++lag) {
      if (r[lag] >= r[lag - 1] && r[lag] > r[lag + 1] && r[lag] >= options.octave_ratio * strongest) {
        pick = lag;
        break;
      }
    }

    const double left = r[pick - 1], mid = r[pick], right = r[pick + 1];
    const double curvature = left - 2.0 * mid + right;
    double shift = 0.0;
    if (curvature < 0.0) shift = std::clamp(0.5 * (left - right) / curvature, -0.5, 0.5);
    const double clarity = std::min(1.0, mid - 0.25 * (left - right) * shift);
    if (clarity < options.voicing_threshold) continue;
    const double f0 = rate / (static_cast<double>(pick) + shift);
    out.voiced = true;
    out.f0_hz = std::clamp(f0, options.f0_min_hz, options.f0_max_hz);
  }
  return contour;
}

F0RmseResult f0_rmse(const AudioBuffer& ref, const AudioBuffer& syn, const F0RmseOptions& options) {
  ref.validate();
  syn.validate();
  if (ref.sample_rate_hz != syn.sample_rate_hz) {
    throw Error(ErrorCode::kSampleRateMismatch,
                "reference is " + std::to_string(ref.sample_rate_hz) + " Hz, synthesis is " +
                    std::to_string(syn.sample_rate_hz) + " Hz");
  }
  const int rate = ref.sample_rate_hz;
  const CepstrumMatrix ref_mc = mel_cepstrum(ref, options.cepstrum);
  const CepstrumMatrix syn_mc = mel_cepstrum(syn, options.cepstrum);
  const Alignment alignment = dtw_align(ref_mc, syn_mc);
  const F0Contour ref_f0 = extract_f0(ref, options.pitch);
  const F0Contour syn_f0 = extract_f0(syn, options.pitch);

  // Cepstral frame i spans [i*hop, i*hop + win); use the pitch frame
  // nearest to its centre.
  const double cep_hop = static_cast<double>(options.cepstrum.framing.hop_samples(rate));
  const double cep_half = static_cast<double>(options.cepstrum.framing.window_samples(rate)) / 2.0;
  const double pitch_hop = ref_f0.frame_hop_seconds * rate;
  auto pitch_index = [&](std::size_t frame, std::size_t count) {
    const double centre = static_cast<double>(frame) * cep_hop + cep_half;
    const auto k = static_cast<std::size_t>(std::lround(centre / pitch_hop));
    return std::min(k, count - 1);
  };

  F0RmseResult result;
  double sum = 0.0;
  for (const auto& [i, j] : alignment.path) {
    const F0Frame& a = ref_f0.frames[pitch_index(i, ref_f0.size())];
    const F0Frame& b = syn_f0.frames[pitch_index(j, syn_f0.size())];
    if (!a.voiced || !b.voiced) continue;
    const double diff = std::log(a.f0_hz) - std::log(b.f0_hz);
    sum += diff * diff;
    ++result.pairs;
  }
  if (result.pairs == 0) {
    result.no_overlap = true;
    return result;
  }
  result.value = std::sqrt(sum / static_cast<double>(result.pairs));
  return result;
}

}  // namespace dsu
