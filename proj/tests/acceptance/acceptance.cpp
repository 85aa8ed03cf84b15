// Prints one PASS/FAIL line per acceptance criterion and exits nonzero if
// any check fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dsu/core_model.hpp"
#include "dsu/discretize.hpp"
#include "dsu/harness/wav.hpp"
#include "dsu/ranking.hpp"
#include "dsu/signal_metrics.hpp"
#include "dsu/text_metrics.hpp"
#include "oracles.hpp"
#include "tables.hpp"
#include "tempdir.hpp"

using namespace dsu;

namespace {

using Clock = std::chrono::steady_clock;

// Collects failed checks for one criterion.
struct Criterion {
  int number;
  std::string title;
  std::vector<std::string> failures;
  Clock::time_point start = Clock::now();

  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  double seconds() const { return std::chrono::duration<double>(Clock::now() - start).count(); }
};

int failed = 0;

void report(const Criterion& c, const std::string& detail) {
  const bool ok = c.failures.empty();
  if (!ok) ++failed;
  std::printf("%s %d: %s (%s)\n", ok ? "PASS" : "FAIL", c.number, c.title.c_str(), detail.c_str());
  for (const auto& f : c.failures) std::printf("    - %s\n", f.c_str());
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

UnitStream zeros(std::size_t n, std::uint32_t vocab) { return {std::vector<Token>(n, 0), vocab}; }

void criterion1() {
  Criterion c{1, "bitrate exactness and properties"};
  c.check(near(bitrate({{zeros(100, 2048)}, 2.0}), 100.0 * 11.0 / 2.0, 1e-9), "1 stream, 100 tokens, |V|=2048, 2 s");
  c.check(near(bitrate({{zeros(50, 4), zeros(25, 16)}, 1.0}), 50.0 * 2 + 25.0 * 4, 1e-9), "two-stream example");
  c.check(bitrate({{zeros(0, 500)}, 1.0}) == 0.0, "empty stream");

  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> streams(1, 4), len(0, 400);
  std::uniform_int_distribution<std::uint32_t> vocab(1, 5000);
  std::uniform_real_distribution<double> dur(0.05, 30.0);
  int bad_scale = 0, bad_add = 0;
  for (int t = 0; t < 1000; ++t) {
    DiscreteRepresentation rep{{}, dur(rng)};
    for (int m = streams(rng); m > 0; --m) rep.streams.push_back(zeros(len(rng), vocab(rng)));
    const double b = bitrate(rep);
    DiscreteRepresentation doubled = rep;
    doubled.duration_seconds *= 2.0;
    if (!near(bitrate(doubled), b / 2.0, 1e-9 * std::max(1.0, b))) ++bad_scale;
    double sum = 0.0;
    for (const auto& s : rep.streams) sum += bitrate({{s}, rep.duration_seconds});
    if (!near(sum, b, 1e-9 * std::max(1.0, b))) ++bad_add;
  }
  c.check(bad_scale == 0, std::to_string(bad_scale) + " duration-scaling violations");
  c.check(bad_add == 0, std::to_string(bad_add) + " stream-additivity violations");
  const double s = c.seconds();
  c.check(s < 1.0, "runtime " + fmt("%.3f s", s));
  report(c, "3 examples, 1000 random representations, " + fmt("%.3f s", s));
}

void criterion2() {
  Criterion c{2, "ASR leaderboard reproduces the challenge results"};
  const Leaderboard b = asr_rank(fixtures::asr_table());
  c.check(fixtures::order(b) == std::vector<std::string>{"S1", "S2", "S3", "B1"}, "final order");
  const double expect[] = {2.0, 2.0, 8.0 / 3.0, 10.0 / 3.0};
  for (std::size_t i = 0; i < 4 && i < b.entries.size(); ++i) {
    c.check(near(b.entries[i].average_rank, expect[i], 1e-9),
            b.entries[i].team_id + " average rank " + fmt("%.9f", b.entries[i].average_rank));
  }
  const auto& s1 = fixtures::entry(b, "S1");
  c.check(s1.tiebreak_trace.find("R2") != std::string::npos && s1.tiebreak_trace.find("S2") != std::string::npos,
          "S1 trace records the R2 tiebreak against S2: '" + s1.tiebreak_trace + "'");
  report(c, "order S1 S2 S3 B1; S1 trace: " + s1.tiebreak_trace);
}

void criterion3() {
  Criterion c{3, "SVS leaderboard reproduces the challenge results"};
  const Leaderboard b = svs_rank(fixtures::svs_table());
  c.check(fixtures::order(b) == std::vector<std::string>{"S1", "S2", "S3", "B1"}, "final order");
  const auto& s2 = fixtures::entry(b, "S2");
  const auto& s3 = fixtures::entry(b, "S3");
  c.check(s2.average_rank == s3.average_rank, "S2 and S3 tie on average rank");
  c.check(s2.tiebreak_trace.find("MOS") != std::string::npos && !s2.unresolved_tie,
          "S2 ahead of S3 by MOS: '" + s2.tiebreak_trace + "'");
  report(c, "order S1 S2 S3 B1; S2 trace: " + s2.tiebreak_trace);
}

void criterion4() {
  Criterion c{4, "TTS vocoder grouping by sampling rate"};
  const auto boards = tts_vocoder_rank(fixtures::vocoder_table());
  c.check(boards.size() == 2, "two groups");
  if (boards.size() == 2) {
    const auto& low = boards[0];
    const auto& high = boards[1];
    c.check(low.group == "LOW" && high.group == "HIGH", "group names");
    c.check(fixtures::order(low) == std::vector<std::string>{"S1", "S2", "B1", "S3"}, "LOW order S1 S2 B1 S3");
    const auto& s2 = fixtures::entry(low, "S2");
    const auto& b1 = fixtures::entry(low, "B1");
    c.check(s2.average_rank == b1.average_rank && s2.tiebreak_trace.find("UTMOS") != std::string::npos,
            "S2 ahead of B1 by UTMOS: '" + s2.tiebreak_trace + "'");
    std::vector<std::string> high_ids = fixtures::order(high);
    std::sort(high_ids.begin(), high_ids.end());
    c.check(high_ids == std::vector<std::string>{"S4", "S5", "S6"}, "HIGH members S4 S5 S6");
    const auto& s5 = fixtures::entry(high, "S5");
    const auto& s6 = fixtures::entry(high, "S6");
    c.check(s5.unresolved_tie && s6.unresolved_tie && s5.position == s6.position, "S5-S6 flagged unresolved");
    c.check(!fixtures::entry(high, "S4").unresolved_tie, "S4 not part of the unresolved tie");
    report(c, "LOW S1 S2 B1 S3, HIGH S4 then S5=S6 unresolved");
  } else {
    report(c, "wrong group count");
  }
}

CepstrumMatrix random_cepstrum(std::mt19937_64& rng, std::size_t frames, std::size_t width) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(frames * width);
  for (auto& x : v) x = g(rng);
  return CepstrumMatrix(frames, width, v, 16000);
}

oracle::Matrix rows_of(const CepstrumMatrix& m) {
  oracle::Matrix out;
  for (std::size_t i = 0; i < m.frames(); ++i) out.emplace_back(m.frame(i).begin(), m.frame(i).end());
  return out;
}

void criterion5() {
  Criterion c{5, "DTW equals exhaustive path enumeration"};
  std::mt19937_64 rng(55);
  std::uniform_int_distribution<std::size_t> len(1, 6);
  int mismatches = 0, invalid = 0;
  for (int t = 0; t < 200; ++t) {
    const CepstrumMatrix a = random_cepstrum(rng, len(rng), 14), b = random_cepstrum(rng, len(rng), 14);
    const Alignment al = dtw_align(a, b);
    if (al.cost != oracle::dtw_exhaustive(rows_of(a), rows_of(b))) ++mismatches;
    if (!is_valid_path(al.path, a.frames(), b.frames())) ++invalid;
  }
  c.check(mismatches == 0, std::to_string(mismatches) + " cost mismatches");
  c.check(invalid == 0, std::to_string(invalid) + " invalid paths");
  const double s = c.seconds();
  c.check(s < 10.0, "runtime " + fmt("%.3f s", s));
  report(c, "200 pairs, exact equality, " + fmt("%.3f s", s));
}

void criterion6() {
  Criterion c{6, "k-means properties"};
  std::mt19937_64 rng(66);
  int increases = 0, not_identity = 0, thread_diffs = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t dim = 1 + rng() % 6, k = 2 + rng() % 10, clusters = 1 + rng() % 6;
    const std::size_t rows = k + 20 + rng() % 400;
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> centres(clusters * dim);
    for (auto& x : centres) x = 5.0 * g(rng);
    std::vector<double> v(rows * dim);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t home = rng() % clusters;
      for (std::size_t d = 0; d < dim; ++d) v[r * dim + d] = centres[home * dim + d] + g(rng);
    }
    const FeatureMatrix frames(rows, dim, v);
    KMeansOptions o{.k = k, .seed = static_cast<std::uint64_t>(t), .max_iters = 50, .rel_tol = 1e-9};
    o.num_threads = 1;
    const KMeansResult one = kmeans_train(frames, o);
    o.num_threads = 8;
    const KMeansResult eight = kmeans_train(frames, o);
    for (std::size_t i = 1; i < one.inertia_history.size(); ++i) {
      if (one.inertia_history[i] > one.inertia_history[i - 1]) ++increases;
    }
    if (one.inertia_history != eight.inertia_history || !(one.codebook == eight.codebook)) ++thread_diffs;
    const Codebook& cb = one.codebook;
    std::vector<double> own;
    for (std::size_t i = 0; i < cb.k(); ++i) own.insert(own.end(), cb.centroid(i).begin(), cb.centroid(i).end());
    const UnitStream ids = quantize(FeatureMatrix(cb.k(), cb.dim(), own), cb);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids.tokens[i] != i) {
        ++not_identity;
        break;
      }
    }
  }
  c.check(increases == 0, std::to_string(increases) + " inertia increases");
  c.check(not_identity == 0, std::to_string(not_identity) + " codebooks not quantized to identity");
  c.check(thread_diffs == 0, std::to_string(thread_diffs) + " runs differ between 1 and 8 threads");
  report(c, "100 datasets, 1 vs 8 threads bit-identical");
}

void criterion7() {
  Criterion c{7, "BPE properties"};
  std::mt19937_64 rng(77);
  int roundtrip = 0, lengthened = 0, oversized = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::uint32_t base = 2 + static_cast<std::uint32_t>(rng() % 30);
    const std::uint32_t target = base + static_cast<std::uint32_t>(rng() % 40);
    std::vector<UnitStream> corpus;
    for (int u = 0; u < 1 + int(rng() % 5); ++u) {
      UnitStream s{{}, base};
      // Skewed symbol choice so that frequent pairs exist.
      std::geometric_distribution<int> sym(0.35);
      for (int i = 0; i < int(rng() % 60); ++i) s.tokens.push_back(static_cast<Token>(sym(rng) % base));
      corpus.push_back(s);
    }
    const BpeModel model = bpe_train(corpus, target);
    if (model.total_vocab_size() > target) ++oversized;
    UnitStream probe{{}, base};
    for (int i = 0; i < int(rng() % 80); ++i) probe.tokens.push_back(static_cast<Token>(rng() % base));
    for (const UnitStream& s : {corpus.front(), probe}) {
      const UnitStream enc = bpe_encode(s, model);
      if (!(bpe_decode(enc, model) == s)) ++roundtrip;
      if (enc.size() > s.size()) ++lengthened;
    }
  }
  c.check(roundtrip == 0, std::to_string(roundtrip) + " decode(encode(x)) != x");
  c.check(oversized == 0, std::to_string(oversized) + " models over target vocab");
  c.check(lengthened == 0, std::to_string(lengthened) + " encodings longer than input");
  report(c, "1000 trials, 2000 streams encoded");
}

void criterion8() {
  Criterion c{8, "text metrics"};
  const std::string kitten = "kitten", sitting = "sitting";
  const std::size_t d = edit_distance(std::string_view(kitten), std::string_view(sitting));
  const std::size_t o = oracle::levenshtein(std::vector<char>(kitten.begin(), kitten.end()),
                                            std::vector<char>(sitting.begin(), sitting.end()));
  c.check(d == 3 && o == 3, "kitten/sitting distance " + std::to_string(d) + ", oracle " + std::to_string(o));

  std::mt19937_64 rng(88);
  const std::string alphabet = "abcde fgh";
  auto random_text = [&](std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
    return s;
  };
  int split_bad = 0;
  std::vector<TranscriptPair> same;
  for (int t = 0; t < 200; ++t) {
    std::vector<TranscriptPair> corpus;
    for (int u = 0; u < 2 + int(rng() % 10); ++u) {
      corpus.push_back({"u" + std::to_string(u), "x" + random_text(rng() % 30), random_text(rng() % 30)});
    }
    const std::size_t cut = 1 + rng() % (corpus.size() - 1);
    std::uint64_t e1 = 0, n1 = 0, e2 = 0, n2 = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const ErrorCounts ec = char_errors(corpus[i]);
      (i < cut ? e1 : e2) += ec.errors;
      (i < cut ? n1 : n2) += ec.reference_length;
    }
    const std::span<const TranscriptPair> all(corpus);
    const double whole = cer_corpus(all);
    const double pooled = static_cast<double>(e1 + e2) / static_cast<double>(n1 + n2);
    const double c1 = cer_corpus(all.first(cut)), c2 = cer_corpus(all.subspan(cut));
    const double parts = (c1 * static_cast<double>(n1) + c2 * static_cast<double>(n2)) / static_cast<double>(n1 + n2);
    if (!near(whole, pooled, 1e-12) || !near(whole, parts, 1e-12)) ++split_bad;
    for (const auto& p : corpus) same.push_back({p.utt_id + "-" + std::to_string(t), p.reference, p.reference});
  }
  c.check(split_bad == 0, std::to_string(split_bad) + " split identity violations");
  const double zero = cer_corpus(same);
  c.check(zero == 0.0, "CER of identical corpora " + fmt("%g", zero));
  report(c, "kitten/sitting = 3, 200 random splits, identical CER = 0");
}

void criterion9() {
  Criterion c{9, "signal metrics"};
  TempDir dir;
  int self_bad = 0;
  for (int i = 0; i < 10; ++i) {
    const std::filesystem::path path = dir / ("rec" + std::to_string(i) + ".wav");
    io::write_wav(path, oracle::speech_like(900 + i, i % 2 ? 22050 : 16000, 1.2 + 0.1 * i));
    const AudioBuffer x = io::read_wav(path);
    const CepstrumMatrix cx = mel_cepstrum(x);
    const double m = mcd(cx, cx);
    const F0RmseResult f = f0_rmse(x, x);
    if (m != 0.0 || f.value != 0.0 || f.no_overlap || f.pairs == 0) {
      ++self_bad;
      c.check(false, path.filename().string() + ": mcd " + fmt("%g", m) + ", f0_rmse " + fmt("%g", f.value));
    }
  }

  int tones = 0, tones_bad = 0;
  double worst_fraction = 1.0;
  for (int rate : {16000, 22050, 48000}) {
    for (double hz = 110.0; hz <= 440.0 + 1e-9; hz += 27.5) {
      const F0Contour contour = extract_f0(oracle::sine(hz, rate, 1.0));
      std::size_t voiced = 0, within = 0;
      for (const auto& fr : contour.frames) {
        if (!fr.voiced) continue;
        ++voiced;
        if (std::abs(fr.f0_hz - hz) <= 0.01 * hz) ++within;
      }
      const double fraction = voiced ? static_cast<double>(within) / static_cast<double>(voiced) : 0.0;
      worst_fraction = std::min(worst_fraction, fraction);
      ++tones;
      if (fraction < 0.95 || voiced < contour.size() / 2) {
        ++tones_bad;
        c.check(false, fmt("%.1f Hz", hz) + " at " + std::to_string(rate) + " Hz: " + std::to_string(within) + "/" +
                           std::to_string(voiced) + " voiced frames within 1%");
      }
    }
  }

  const double expected = 0.0574;
  const F0RmseResult r = f0_rmse(oracle::sine(220.0, 16000, 1.0), oracle::sine(233.0, 16000, 1.0));
  c.check(!r.no_overlap && std::abs(r.value - expected) <= 0.1 * expected, "220 vs 233 Hz f0_rmse " + fmt("%.5f", r.value));

  report(c, "10 recordings self-distance 0; " + std::to_string(tones - tones_bad) + "/" + std::to_string(tones) +
                " tones, worst " + fmt("%.3f", worst_fraction) + " of voiced frames within 1%; 220 vs 233 Hz " +
                fmt("%.5f", r.value));
}

void criterion10() {
  std::printf(
      "INFO 10: not reproducible at desk scale: absolute CER (E-Branchformer ASR), UTMOS, MOS, WER (Whisper) and "
      "the absolute MCD/F0 RMSE figures of the challenge leaderboards depend on external neural systems and an "
      "unspecified extraction pipeline; covered instead by criteria 2-9\n");
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  std::printf("%s: %d criteria failed\n", failed ? "FAIL" : "PASS", failed);
  return failed ? 1 : 0;
}
