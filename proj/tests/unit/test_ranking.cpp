#include <random>

#include "doctest.h"
#include "dsu/error.hpp"
#include "dsu/ranking.hpp"
#include "oracles.hpp"
#include "tables.hpp"

using namespace dsu;
using fixtures::entry;
using fixtures::order;
using Ids = std::vector<std::string>;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("rank_metric examples") {
  const std::vector<double> cer{2.37, 1.91, 2.21, 1.98};
  CHECK(rank_metric(cer, Direction::kAscending) == std::vector<double>{4, 1, 3, 2});
  const std::vector<double> tie{5.0, 5.0};
  CHECK(rank_metric(tie, Direction::kAscending) == std::vector<double>{1.5, 1.5});
  CHECK(rank_metric(tie, Direction::kDescending) == std::vector<double>{1.5, 1.5});
  const std::vector<double> three{1.0, 2.0, 2.0, 2.0, 3.0};
  CHECK(rank_metric(three, Direction::kAscending, TieMode::kCompetition) == std::vector<double>{1, 2, 2, 2, 5});
  const std::vector<double> bad{1.0, std::nan("")};
  CHECK(code_of([&] { rank_metric(bad, Direction::kAscending); }) == ErrorCode::kInvalidScore);
}

TEST_CASE("rank_metric agrees with a sort oracle and keeps the rank sum") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> small(0, 6);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 20;
    std::vector<double> v(n);
    for (auto& x : v) x = trial % 2 ? g(rng) : double(small(rng));
    for (bool asc : {true, false}) {
      const auto got = rank_metric(v, asc ? Direction::kAscending : Direction::kDescending);
      CHECK(got == oracle::ranks(v, asc));
      double sum = 0.0;
      for (double r : got) sum += r;
      CHECK(sum == double(n * (n + 1)) / 2.0);
    }
  }
}

TEST_CASE("asr leaderboard from the published table") {
  const Leaderboard b = asr_rank(fixtures::asr_table());
  CHECK(order(b) == Ids{"S1", "S2", "S3", "B1"});
  CHECK(entry(b, "S1").average_rank == 2.0);
  CHECK(entry(b, "S2").average_rank == 2.0);
  CHECK(entry(b, "S3").average_rank == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
  CHECK(entry(b, "B1").average_rank == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
  CHECK(entry(b, "S1").tiebreak_trace.find("R2") != std::string::npos);
  CHECK(entry(b, "S1").tiebreak_trace.find("ahead") != std::string::npos);
  CHECK(entry(b, "S2").tiebreak_trace.find("R2") != std::string::npos);
  CHECK(entry(b, "S3").tiebreak_trace.empty());
  for (int p = 0; p < 4; ++p) CHECK(b.entries[p].position == p + 1);
  CHECK_FALSE(entry(b, "S1").unresolved_tie);
}

TEST_CASE("asr tiebreak falls through R2 to R1") {
  // A and B share R-hat and R2 is equal; R1 decides.
  std::vector<ScoreCard> cards{
      {"A", Track::kAsr, {{"cer_en", 2.0}, {"cer_ml", 10.0}, {"bitrate", 300.0}}, {}},
      {"B", Track::kAsr, {{"cer_en", 1.0}, {"cer_ml", 10.0}, {"bitrate", 400.0}}, {}},
  };
  const Leaderboard b = asr_rank(cards);
  CHECK(order(b) == Ids{"B", "A"});
  CHECK(entry(b, "B").tiebreak_trace.find("R1") != std::string::npos);
}

TEST_CASE("single cards and identical cards") {
  std::vector<ScoreCard> one{{"X", Track::kAsr, {{"cer_en", 1}, {"cer_ml", 1}, {"bitrate", 1}}, {}}};
  const Leaderboard b = asr_rank(one);
  CHECK(b.entries.at(0).average_rank == 1.0);
  CHECK(b.entries.at(0).position == 1);

  std::vector<ScoreCard> twins{{"Z", Track::kAsr, {{"cer_en", 1}, {"cer_ml", 1}, {"bitrate", 1}}, {}},
                               {"A", Track::kAsr, {{"cer_en", 1}, {"cer_ml", 1}, {"bitrate", 1}}, {}}};
  const Leaderboard t = asr_rank(twins);
  CHECK(order(t) == Ids{"A", "Z"});
  CHECK(t.entries[0].position == t.entries[1].position);
  CHECK(t.entries[0].unresolved_tie);
  CHECK(t.entries[1].unresolved_tie);
  CHECK(t.entries[0].tiebreak_trace.find("unresolved; ordered by team_id") != std::string::npos);

  std::vector<ScoreCard> svs{{"Q", Track::kSvs, {{"mos", 3}, {"bitrate", 9}}, {}},
                             {"P", Track::kSvs, {{"mos", 3}, {"bitrate", 9}}, {}}};
  CHECK(svs_rank(svs).entries[0].unresolved_tie);
  std::vector<ScoreCard> tts{{"Q", Track::kTtsFull, {{"utmos", 3}, {"bitrate", 9}}, {}},
                             {"P", Track::kTtsFull, {{"utmos", 3}, {"bitrate", 9}}, {}}};
  CHECK(tts_full_rank(tts).at(0).entries[1].unresolved_tie);
}

TEST_CASE("vocoder leaderboards split by sampling rate") {
  const auto boards = tts_vocoder_rank(fixtures::vocoder_table());
  REQUIRE(boards.size() == 2);
  const Leaderboard& low = boards[0];
  const Leaderboard& high = boards[1];
  CHECK(low.group == "LOW");
  CHECK(high.group == "HIGH");
  CHECK(order(low) == Ids{"S1", "S2", "B1", "S3"});
  CHECK(entry(low, "S1").average_rank == 1.5);
  CHECK(entry(low, "S2").average_rank == 2.5);
  CHECK(entry(low, "B1").average_rank == 2.5);
  CHECK(entry(low, "S3").average_rank == 3.5);
  CHECK(entry(low, "S2").tiebreak_trace.find("UTMOS") != std::string::npos);
  CHECK(entry(low, "B1").position == 3);

  CHECK(order(high) == Ids{"S4", "S5", "S6"});
  for (const auto& e : high.entries) CHECK(e.average_rank == 2.0);
  CHECK_FALSE(entry(high, "S4").unresolved_tie);
  CHECK(entry(high, "S5").unresolved_tie);
  CHECK(entry(high, "S6").unresolved_tie);
  CHECK(entry(high, "S5").position == entry(high, "S6").position);
  CHECK(entry(high, "S5").tiebreak_trace.find("unresolved") != std::string::npos);
}

TEST_CASE("vocoder boundary is configurable and empty groups are omitted") {
  auto cards = fixtures::vocoder_table();
  RankOptions o;
  o.high_rate_boundary_hz = 24000;
  const auto boards = tts_vocoder_rank(cards, o);
  CHECK(order(boards.at(1)).size() == 4);

  std::vector<ScoreCard> low_only(cards.begin(), cards.begin() + 4);
  const auto one = tts_vocoder_rank(low_only);
  REQUIRE(one.size() == 1);
  CHECK(one[0].group == "LOW");

  cards[0].sampling_rate_hz.reset();
  CHECK(code_of([&] { tts_vocoder_rank(cards); }) == ErrorCode::kIncompleteCard);
}

TEST_CASE("tts full leaderboard") {
  const auto boards = tts_full_rank(fixtures::tts_table());
  REQUIRE(boards.size() == 1);
  const Leaderboard& b = boards[0];
  CHECK(b.group == "ALL");
  CHECK(order(b) == Ids{"S1", "S2", "S3", "B1"});
  CHECK(entry(b, "S1").ranks.at("utmos") == 2.5);
  CHECK(entry(b, "S2").ranks.at("utmos") == 2.5);
  CHECK(entry(b, "S3").ranks.at("utmos") == 1.0);
  CHECK(entry(b, "S1").average_rank == 1.75);
  CHECK(entry(b, "S2").average_rank == 2.25);
  CHECK(entry(b, "S3").average_rank == 2.5);
  CHECK(entry(b, "B1").average_rank == 3.5);
}

TEST_CASE("tts full splits only when rates straddle the boundary") {
  auto cards = fixtures::tts_table();
  for (auto& c : cards) c.sampling_rate_hz = 16000;
  CHECK(tts_full_rank(cards).size() == 1);
  cards[3].sampling_rate_hz = 48000;
  CHECK(tts_full_rank(cards).size() == 2);
  RankOptions never;
  never.tts_full_split = RateSplit::kNever;
  CHECK(tts_full_rank(cards, never).size() == 1);
  RankOptions always;
  always.tts_full_split = RateSplit::kAlways;
  cards[3].sampling_rate_hz = 16000;
  CHECK(tts_full_rank(cards, always).size() == 1);
  CHECK(tts_full_rank(cards, always)[0].group == "LOW");
}

TEST_CASE("svs leaderboard") {
  const Leaderboard b = svs_rank(fixtures::svs_table());
  CHECK(order(b) == Ids{"S1", "S2", "S3", "B1"});
  CHECK(entry(b, "S1").average_rank == 2.0);
  CHECK(entry(b, "S2").average_rank == 2.5);
  CHECK(entry(b, "S3").average_rank == 2.5);
  CHECK(entry(b, "B1").average_rank == 3.0);
  CHECK(entry(b, "S2").tiebreak_trace.find("MOS") != std::string::npos);
  CHECK(entry(b, "S2").position == 2);
  CHECK(entry(b, "S3").position == 3);
}

TEST_CASE("card validation") {
  auto cards = fixtures::asr_table();
  cards[1].metrics.erase("cer_ml");
  CHECK(code_of([&] { asr_rank(cards); }) == ErrorCode::kIncompleteCard);
  cards = fixtures::asr_table();
  cards[2].metrics["bitrate"] = std::numeric_limits<double>::infinity();
  CHECK(code_of([&] { asr_rank(cards); }) == ErrorCode::kInvalidScore);
  cards = fixtures::asr_table();
  cards[2].team_id = "B1";
  CHECK(code_of([&] { asr_rank(cards); }) == ErrorCode::kSchema);
  CHECK(code_of([] { svs_rank(fixtures::asr_table()); }) == ErrorCode::kSchema);
}

TEST_CASE("positions ignore input order and respect improvements") {
  std::mt19937_64 rng(19);
  std::uniform_int_distribution<int> v(0, 5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ScoreCard> cards;
    const int n = 2 + trial % 6;
    for (int t = 0; t < n; ++t) {
      cards.push_back({"T" + std::to_string(t), Track::kAsr,
                       {{"cer_en", double(v(rng))}, {"cer_ml", double(v(rng))}, {"bitrate", double(v(rng))}}, {}});
    }
    const Leaderboard base = asr_rank(cards);
    auto shuffled = cards;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const Leaderboard again = asr_rank(shuffled);
    CHECK(order(base) == order(again));
    for (const auto& c : cards) CHECK(entry(base, c.team_id).position == entry(again, c.team_id).position);

    // Average ranks never decrease down the board, and every tie is explained.
    for (std::size_t i = 1; i < base.entries.size(); ++i) {
      CHECK(base.entries[i - 1].average_rank <= base.entries[i].average_rank);
      if (base.entries[i - 1].average_rank == base.entries[i].average_rank) {
        CHECK_FALSE(base.entries[i - 1].tiebreak_trace.empty());
        CHECK_FALSE(base.entries[i].tiebreak_trace.empty());
      }
    }

    const std::size_t who = static_cast<std::size_t>(trial) % cards.size();
    const char* metric = trial % 3 == 0 ? "cer_en" : trial % 3 == 1 ? "cer_ml" : "bitrate";
    auto better = cards;
    better[who].metrics[metric] -= 1.5;
    const Leaderboard improved = asr_rank(better);
    CHECK(entry(improved, cards[who].team_id).position <= entry(base, cards[who].team_id).position);
  }
}
