#include "dsu/ranking.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "dsu/error.hpp"

namespace dsu {

namespace {

std::string format_rank(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct TrackSpec {
  std::vector<RankedMetric> metrics;
  std::vector<std::string> tiebreak;
};

TrackSpec track_spec(Track track) {
  switch (track) {
    case Track::kAsr:
      return {{{"cer_en", Direction::kAscending, "R1"},
               {"cer_ml", Direction::kAscending, "R2"},
               {"bitrate", Direction::kAscending, "R3"}},
              {"cer_ml", "cer_en", "bitrate"}};
    case Track::kTtsVocoder:
    case Track::kTtsFull:
      return {{{"utmos", Direction::kDescending, "UTMOS"},
               {"bitrate", Direction::kAscending, "bitrate"}},
              {"utmos"}};
    case Track::kSvs:
      return {{{"mos", Direction::kDescending, "MOS"},
               {"bitrate", Direction::kAscending, "bitrate"}},
              {"mos"}};
  }
  throw Error(ErrorCode::kConfig, "unknown track");
}

void check_cards(std::span<const ScoreCard> cards, Track track, const TrackSpec& spec) {
  std::set<std::string> seen;
  for (const auto& card : cards) {
    if (card.team_id.empty()) throw Error(ErrorCode::kIncompleteCard, "score card without team_id");
    if (!seen.insert(card.team_id).second) {
      throw Error(ErrorCode::kSchema, "duplicate team_id '" + card.team_id + "'");
    }
    if (card.track != track) {
      throw Error(ErrorCode::kSchema, "team '" + card.team_id + "' is scored for track " +
                                          std::string(to_string(card.track)) + ", not " +
                                          std::string(to_string(track)));
    }
    for (const auto& m : spec.metrics) {
      auto it = card.metrics.find(m.name);
      if (it == card.metrics.end()) {
        throw Error(ErrorCode::kIncompleteCard,
                    "team '" + card.team_id + "' is missing metric '" + m.name + "'");
      }
      if (!std::isfinite(it->second)) {
        throw Error(ErrorCode::kInvalidScore,
                    "team '" + card.team_id + "' has non-finite " + m.name);
      }
    }
  }
}

Leaderboard rank_group(std::vector<const ScoreCard*> cards, Track track, std::string group,
                       const RankOptions& options) {
  const TrackSpec spec = track_spec(track);
  Leaderboard board;
  board.track = track;
  board.group = std::move(group);
  board.ranked_metrics = spec.metrics;
  board.tiebreak_order = spec.tiebreak;
  const std::size_t n = cards.size();
  if (n == 0) return board;

  std::map<std::string, std::vector<double>> ranks;
  for (const auto& m : spec.metrics) {
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = cards[i]->metrics.at(m.name);
    ranks[m.name] = rank_metric(values, m.direction, options.tie_mode);
  }
  // Ranks are multiples of 1/2, so their sums compare exactly.
  std::vector<double> rank_sum(n, 0.0);
  for (const auto& m : spec.metrics) {
    for (std::size_t i = 0; i < n; ++i) rank_sum[i] += ranks[m.name][i];
  }

  auto tie_key_equal = [&](std::size_t a, std::size_t b) {
    return std::all_of(spec.tiebreak.begin(), spec.tiebreak.end(), [&](const std::string& name) {
      return ranks[name][a] == ranks[name][b];
    });
  };
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rank_sum[a] != rank_sum[b]) return rank_sum[a] < rank_sum[b];
    for (const auto& name : spec.tiebreak) {
      if (ranks[name][a] != ranks[name][b]) return ranks[name][a] < ranks[name][b];
    }
    return cards[a]->team_id < cards[b]->team_id;
  });

  auto label_of = [&](const std::string& name) {
    for (const auto& m : spec.metrics) {
      if (m.name == name) return m.label == name ? name : m.label + " (" + name + ")";
    }
    return name;
  };
  const double count = static_cast<double>(spec.metrics.size());

  board.entries.resize(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t i = order[pos];
    LeaderboardEntry& e = board.entries[pos];
    e.team_id = cards[i]->team_id;
    e.metrics = cards[i]->metrics;
    e.sampling_rate_hz = cards[i]->sampling_rate_hz;
    for (const auto& m : spec.metrics) e.ranks[m.name] = ranks[m.name][i];
    e.average_rank = rank_sum[i] / count;
    if (pos > 0 && rank_sum[order[pos - 1]] == rank_sum[i] && tie_key_equal(order[pos - 1], i)) {
      e.position = board.entries[pos - 1].position;
      e.unresolved_tie = true;
      board.entries[pos - 1].unresolved_tie = true;
    } else {
      e.position = static_cast<int>(pos) + 1;
    }
  }

  // Traces describe each entry against every other entry with the same
  // average rank.
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t i = order[pos];
    std::string trace;
    std::vector<std::string> peers;
    std::vector<std::string> verdicts;
    for (std::size_t other = 0; other < n; ++other) {
      const std::size_t j = order[other];
      if (other == pos || rank_sum[j] != rank_sum[i]) continue;
      peers.push_back(cards[j]->team_id);
      std::string verdict = "vs " + cards[j]->team_id + ": ";
      bool decided = false;
      for (const auto& name : spec.tiebreak) {
        const double mine = ranks[name][i], theirs = ranks[name][j];
        if (mine == theirs) continue;
        verdict += (mine < theirs ? "ahead" : "behind") + std::string(" by ") + label_of(name) +
                   " rank " + format_rank(mine) + " vs " + format_rank(theirs);
        decided = true;
        break;
      }
      if (!decided) verdict += "unresolved; ordered by team_id";
      verdicts.push_back(verdict);
    }
    if (peers.empty()) continue;
    trace = "average rank " + format_rank(board.entries[pos].average_rank) + " tied with ";
    for (std::size_t p = 0; p < peers.size(); ++p) trace += (p ? ", " : "") + peers[p];
    for (const auto& v : verdicts) trace += "; " + v;
    board.entries[pos].tiebreak_trace = trace;
  }
  return board;
}

std::vector<Leaderboard> split_by_rate(std::span<const ScoreCard> cards, Track track,
                                       const RankOptions& options) {
  std::vector<const ScoreCard*> low, high;
  for (const auto& card : cards) {
    if (!card.sampling_rate_hz || *card.sampling_rate_hz <= 0) {
      throw Error(ErrorCode::kIncompleteCard,
                  "team '" + card.team_id + "' is missing sampling_rate_hz");
    }
    (*card.sampling_rate_hz < options.high_rate_boundary_hz ? low : high).push_back(&card);
  }
  std::vector<Leaderboard> out;
  if (!low.empty()) out.push_back(rank_group(std::move(low), track, "LOW", options));
  if (!high.empty()) out.push_back(rank_group(std::move(high), track, "HIGH", options));
  return out;
}

std::vector<const ScoreCard*> pointers(std::span<const ScoreCard> cards) {
  std::vector<const ScoreCard*> out;
  out.reserve(cards.size());
  for (const auto& c : cards) out.push_back(&c);
  return out;
}

}  // namespace

std::string_view to_string(Track track) {
  switch (track) {
    case Track::kAsr: return "asr";
    case Track::kTtsVocoder: return "tts-vocoder";
    case Track::kTtsFull: return "tts-full";
    case Track::kSvs: return "svs";
  }
  return "unknown";
}

Track parse_track(std::string_view name) {
  std::string key;
  for (char c : name) key.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "asr") return Track::kAsr;
  if (key == "tts-vocoder" || key == "vocoder") return Track::kTtsVocoder;
  if (key == "tts-full" || key == "tts") return Track::kTtsFull;
  if (key == "svs") return Track::kSvs;
  throw Error(ErrorCode::kConfig, "unknown track '" + std::string(name) + "'");
}

double ScoreCard::metric(const std::string& name) const {
  auto it = metrics.find(name);
  if (it == metrics.end()) {
    throw Error(ErrorCode::kIncompleteCard, "team '" + team_id + "' is missing metric '" + name + "'");
  }
  return it->second;
}

std::vector<std::string> required_metrics(Track track) {
  std::vector<std::string> out;
  for (const auto& m : track_spec(track).metrics) out.push_back(m.name);
  return out;
}

std::vector<double> rank_metric(std::span<const double> values, Direction direction, TieMode mode) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::kInvalidScore, "non-finite score at index " + std::to_string(i));
    }
  }
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return direction == Direction::kAscending ? values[a] < values[b] : values[a] > values[b];
  });
  std::vector<double> ranks(n);
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    while (end < n && values[order[end]] == values[order[start]]) ++end;
    const double rank = mode == TieMode::kFractional
                            ? (static_cast<double>(start + 1) + static_cast<double>(end)) / 2.0
                            : static_cast<double>(start + 1);
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = rank;
    start = end;
  }
  return ranks;
}

Leaderboard asr_rank(std::span<const ScoreCard> cards, const RankOptions& options) {
  check_cards(cards, Track::kAsr, track_spec(Track::kAsr));
  return rank_group(pointers(cards), Track::kAsr, "ALL", options);
}

std::vector<Leaderboard> tts_vocoder_rank(std::span<const ScoreCard> cards,
                                          const RankOptions& options) {
  check_cards(cards, Track::kTtsVocoder, track_spec(Track::kTtsVocoder));
  return split_by_rate(cards, Track::kTtsVocoder, options);
}

std::vector<Leaderboard> tts_full_rank(std::span<const ScoreCard> cards, const RankOptions& options) {
  check_cards(cards, Track::kTtsFull, track_spec(Track::kTtsFull));
  bool split = options.tts_full_split == RateSplit::kAlways;
  if (options.tts_full_split == RateSplit::kAuto && !cards.empty()) {
    bool all_rated = true, any_low = false, any_high = false;
    for (const auto& c : cards) {
      if (!c.sampling_rate_hz) {
        all_rated = false;
        break;
      }
      (*c.sampling_rate_hz < options.high_rate_boundary_hz ? any_low : any_high) = true;
    }
    split = all_rated && any_low && any_high;
  }
  if (split) return split_by_rate(cards, Track::kTtsFull, options);
  std::vector<Leaderboard> out;
  if (!cards.empty()) out.push_back(rank_group(pointers(cards), Track::kTtsFull, "ALL", options));
  return out;
}

Leaderboard svs_rank(std::span<const ScoreCard> cards, const RankOptions& options) {
  check_cards(cards, Track::kSvs, track_spec(Track::kSvs));
  return rank_group(pointers(cards), Track::kSvs, "ALL", options);
}

std::vector<Leaderboard> rank_track(Track track, std::span<const ScoreCard> cards,
                                    const RankOptions& options) {
  switch (track) {
    case Track::kAsr: return {asr_rank(cards, options)};
    case Track::kTtsVocoder: return tts_vocoder_rank(cards, options);
    case Track::kTtsFull: return tts_full_rank(cards, options);
    case Track::kSvs: return {svs_rank(cards, options)};
  }
  throw Error(ErrorCode::kConfig, "unknown track");
}

}  // namespace dsu
