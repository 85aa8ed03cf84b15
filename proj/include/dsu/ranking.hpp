#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dsu {

enum class Track { kAsr, kTtsVocoder, kTtsFull, kSvs };

std::string_view to_string(Track track);
/// Accepts "asr", "tts-vocoder", "tts-full", "svs" (also with underscores,
/// any case). Throws kConfig otherwise.
Track parse_track(std::string_view name);

struct ScoreCard {
  std::string team_id;
  Track track = Track::kAsr;
  std::map<std::string, double> metrics;
  std::optional<int> sampling_rate_hz;

  double metric(const std::string& name) const;
};

enum class Direction { kAscending, kDescending };

enum class TieMode {
  kFractional,   // tied values share the mean of the positions they span
  kCompetition,  // tied values share the best position they span
};

/// Rank of each value, 1 for the best. Throws kInvalidScore on NaN/inf.
std::vector<double> rank_metric(std::span<const double> values, Direction direction,
                                TieMode mode = TieMode::kFractional);

struct RankedMetric {
  std::string name;
  Direction direction;
  std::string label;  // short name used in tiebreak traces, e.g. "R2"
};

struct LeaderboardEntry {
  std::string team_id;
  // Shared by teams whose tie no rule resolves.
  int position = 0;
  std::map<std::string, double> metrics;
  std::map<std::string, double> ranks;
  double average_rank = 0.0;
  bool unresolved_tie = false;
  std::string tiebreak_trace;
  std::optional<int> sampling_rate_hz;
};

struct Leaderboard {
  Track track = Track::kAsr;
  std::string group = "ALL";
  // Metrics averaged into the overall rank, in report order.
  std::vector<RankedMetric> ranked_metrics;
  // Ranked metric names consulted, in order, when average ranks are equal.
  std::vector<std::string> tiebreak_order;
  std::vector<LeaderboardEntry> entries;
};

enum class RateSplit {
  kNever,
  // Split into LOW/HIGH groups only when every card has a sampling rate and
  // the rates fall on both sides of the boundary.
  kAuto,
  kAlways,
};

struct RankOptions {
  TieMode tie_mode = TieMode::kFractional;
  // LOW group is sampling_rate_hz < boundary, HIGH is >= boundary.
  int high_rate_boundary_hz = 48000;
  RateSplit tts_full_split = RateSplit::kAuto;
};

/// Averages R1 (cer_en), R2 (cer_ml) and R3 (bitrate), all ascending. Equal
/// averages are broken by R2, then R1, then R3.
Leaderboard asr_rank(std::span<const ScoreCard> cards, const RankOptions& options = {});

/// Per sampling-rate group, averages rank(utmos, descending) and
/// rank(bitrate, ascending); UTMOS rank breaks ties. Groups with no cards are
/// omitted; LOW comes first.
std::vector<Leaderboard> tts_vocoder_rank(std::span<const ScoreCard> cards,
                                          const RankOptions& options = {});

/// As the vocoder track, split by sampling rate only per options.tts_full_split.
std::vector<Leaderboard> tts_full_rank(std::span<const ScoreCard> cards,
                                       const RankOptions& options = {});

/// Averages rank(mos, descending) and rank(bitrate, ascending); MOS rank
/// breaks ties.
Leaderboard svs_rank(std::span<const ScoreCard> cards, const RankOptions& options = {});

/// Dispatches on `track`; single-leaderboard tracks return one element.
std::vector<Leaderboard> rank_track(Track track, std::span<const ScoreCard> cards,
                                    const RankOptions& options = {});

/// Metric columns a score card of `track` must carry.
std::vector<std::string> required_metrics(Track track);

}  // namespace dsu
