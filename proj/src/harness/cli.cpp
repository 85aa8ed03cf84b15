#include "dsu/harness/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dsu/core_model.hpp"
#include "dsu/discretize.hpp"
#include "dsu/error.hpp"
#include "dsu/harness/formats.hpp"
#include "dsu/harness/validate.hpp"
#include "dsu/harness/wav.hpp"
#include "dsu/parallel.hpp"
#include "dsu/ranking.hpp"
#include "dsu/signal_metrics.hpp"
#include "dsu/text_metrics.hpp"
#include "json.hpp"

namespace dsu::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

LogLevel log_level_from_env() {
  const char* raw = std::getenv("DSU_LOG");
  if (!raw) return LogLevel::kWarn;
  const std::string v = raw;
  if (v == "error" || v == "0") return LogLevel::kError;
  if (v == "info" || v == "2") return LogLevel::kInfo;
  if (v == "debug" || v == "3") return LogLevel::kDebug;
  return LogLevel::kWarn;
}

struct Context {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
  LogLevel level = LogLevel::kWarn;

  void log(LogLevel at, const std::string& msg) const {
    if (at > level) return;
    static constexpr const char* kNames[] = {"error", "warn", "info", "debug"};
    *err << "dsu: " << kNames[static_cast<int>(at)] << ": " << msg << '\n';
  }

  void summary(const ordered_json& j) const { *out << j.dump() << '\n'; }
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool starts_with_bytes(const fs::path& path, std::string_view magic) {
  std::FILE* f = std::fopen(path.string().c_str(), "rb");
  if (!f) return false;
  char buf[8] = {};
  const std::size_t n = std::fread(buf, 1, magic.size(), f);
  std::fclose(f);
  return n == magic.size() && std::string_view(buf, n) == magic;
}

// A path is either one binary file of the expected kind, named after its
// stem, or a manifest listing such files.
template <typename T, typename Reader>
std::vector<std::pair<std::string, T>> load_many(const fs::path& path, std::string_view magic, Reader read,
                                                 int jobs) {
  std::vector<std::pair<std::string, fs::path>> files;
  if (starts_with_bytes(path, magic)) {
    files.emplace_back(path.stem().string(), path);
  } else {
    for (auto& e : io::read_manifest(path).entries) files.emplace_back(e.utt_id, e.path);
  }
  std::vector<std::pair<std::string, T>> loaded(files.size());
  parallel_for(files.size(), jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) loaded[i] = {files[i].first, read(files[i].second)};
  });
  return loaded;
}

std::vector<std::pair<std::string, FeatureMatrix>> load_features(const fs::path& path, int jobs) {
  return load_many<FeatureMatrix>(path, "DSUF", [](const fs::path& p) { return io::read_feature_file(p); }, jobs);
}

std::vector<std::pair<std::string, AudioBuffer>> load_audio(const fs::path& path, int jobs) {
  return load_many<AudioBuffer>(path, "RIFF", [](const fs::path& p) { return io::read_wav(p); }, jobs);
}

// Pairs two id-keyed lists in the order of `ref`, failing with the ids that
// appear on only one side.
template <typename T>
std::vector<std::pair<const T*, const T*>> pair_by_id(const std::vector<std::pair<std::string, T>>& ref,
                                                      const std::vector<std::pair<std::string, T>>& syn,
                                                      std::vector<std::string>& ids) {
  std::vector<io::TableRow> a, b;
  for (std::size_t i = 0; i < ref.size(); ++i) a.push_back({ref[i].first, std::to_string(i), 0});
  for (std::size_t i = 0; i < syn.size(); ++i) b.push_back({syn[i].first, std::to_string(i), 0});
  // A single file on each side pairs regardless of its name.
  if (ref.size() == 1 && syn.size() == 1) b[0].key = a[0].key;
  std::vector<std::pair<const T*, const T*>> out;
  for (const auto& p : io::pair_transcripts(a, b)) {
    ids.push_back(p.utt_id);
    out.emplace_back(&ref[std::stoul(p.reference)].second, &syn[std::stoul(p.hypothesis)].second);
  }
  return out;
}

FeatureMatrix stack_rows(const std::vector<std::pair<std::string, FeatureMatrix>>& parts) {
  if (parts.empty()) throw Error(ErrorCode::kEmptyCorpus, "feature manifest lists no files");
  const std::size_t cols = parts.front().second.cols();
  std::vector<double> values;
  std::size_t rows = 0;
  for (const auto& [id, m] : parts) {
    if (m.cols() != cols) {
      throw Error(ErrorCode::kShape, "'" + id + "' has " + std::to_string(m.cols()) + " columns, expected " +
                                         std::to_string(cols));
    }
    values.insert(values.end(), m.values().begin(), m.values().end());
    rows += m.rows();
  }
  return FeatureMatrix(rows, cols, std::move(values), parts.front().second.frame_hop_seconds());
}

UnitStream single_stream(const io::UnitRecord& rec) {
  if (rec.streams.size() != 1) {
    throw Error(ErrorCode::kInvalidRepresentation,
                "'" + rec.utt_id + "' has " + std::to_string(rec.streams.size()) + " streams; expected one");
  }
  return rec.streams.front();
}

std::size_t count_tokens(const io::UnitFile& file) {
  std::size_t n = 0;
  for (const auto& r : file.records) {
    for (const auto& s : r.streams) n += s.size();
  }
  return n;
}

// Applies `fn` to every stream of every record, keeping order.
template <typename Fn>
io::UnitFile map_streams(const io::UnitFile& in, Fn fn) {
  std::vector<io::UnitRecord> records;
  records.reserve(in.records.size());
  for (const auto& r : in.records) {
    io::UnitRecord out{r.utt_id, {}};
    for (const auto& s : r.streams) out.streams.push_back(fn(s));
    records.push_back(std::move(out));
  }
  return io::make_unit_file(std::move(records));
}

// ---------------------------------------------------------------------------

void setup_tokenize(CLI::App& app, Context& ctx) {
  auto* tok = app.add_subcommand("tokenize", "Train tokenizers and convert features to units");
  tok->require_subcommand(1);

  {
    auto* cmd = tok->add_subcommand("kmeans-train", "Train a k-means codebook on feature frames");
    auto opt = std::make_shared<KMeansOptions>();
    auto features = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("--features", *features, "FeatureFile or manifest of FeatureFiles")->required();
    cmd->add_option("--k", opt->k, "Number of clusters")->required();
    cmd->add_option("--max-iters", opt->max_iters, "Lloyd iteration cap")->capture_default_str();
    cmd->add_option("--tol", opt->rel_tol, "Relative inertia improvement to stop at")->capture_default_str();
    cmd->add_option("--sample-fraction", opt->sample_fraction, "Fraction of frames used for training")
        ->capture_default_str();
    cmd->add_option("--out", *out, "Codebook output path")->required();
    cmd->callback([=, &ctx] {
      const FeatureMatrix frames = stack_rows(load_features(*features, ctx.jobs));
      KMeansOptions o = *opt;
      o.seed = ctx.seed;
      o.num_threads = ctx.jobs;
      ctx.log(LogLevel::kInfo, "training k=" + std::to_string(o.k) + " on " + std::to_string(frames.rows()) +
                                   " frames");
      const KMeansResult result = kmeans_train(frames, o);
      io::write_codebook(*out, result.codebook);
      ctx.summary({{"command", "kmeans-train"},
                   {"frames", frames.rows()},
                   {"dim", frames.cols()},
                   {"k", result.codebook.k()},
                   {"seed", ctx.seed},
                   {"iterations", result.iterations},
                   {"converged", result.converged},
                   {"inertia", result.inertia()}});
    });
  }
  {
    auto* cmd = tok->add_subcommand("encode", "Quantize feature frames to their nearest centroid");
    auto codebook = std::make_shared<std::string>();
    auto features = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("--codebook", *codebook, "Codebook file")->required();
    cmd->add_option("--features", *features, "FeatureFile or manifest of FeatureFiles")->required();
    cmd->add_option("--out", *out, "UnitFile output path")->required();
    cmd->callback([=, &ctx] {
      const Codebook cb = io::read_codebook(*codebook);
      const auto parts = load_features(*features, ctx.jobs);
      std::vector<io::UnitRecord> records(parts.size());
      parallel_for(parts.size(), ctx.jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) records[i] = {parts[i].first, {quantize(parts[i].second, cb)}};
      });
      const io::UnitFile file = io::make_unit_file(std::move(records));
      io::write_unit_file(*out, file);
      ctx.summary({{"command", "encode"},
                   {"utterances", file.records.size()},
                   {"tokens", count_tokens(file)},
                   {"vocab_size", cb.k()}});
    });
  }
  {
    auto* cmd = tok->add_subcommand("dedup", "Collapse runs of repeated units");
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("--in", *in, "Input UnitFile")->required();
    cmd->add_option("--out", *out, "Output UnitFile")->required();
    cmd->callback([=, &ctx] {
      const io::UnitFile src = io::read_unit_file(*in);
      const io::UnitFile dst = map_streams(src, [](const UnitStream& s) { return dedup(s); });
      io::write_unit_file(*out, dst);
      ctx.summary({{"command", "dedup"},
                   {"utterances", dst.records.size()},
                   {"tokens_in", count_tokens(src)},
                   {"tokens_out", count_tokens(dst)}});
    });
  }
  {
    auto* cmd = tok->add_subcommand("bpe-train", "Learn BPE merges over unit streams");
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto vocab = std::make_shared<std::uint32_t>(0);
    cmd->add_option("--in", *in, "Input UnitFile (single stream)")->required();
    cmd->add_option("--vocab", *vocab, "Target vocabulary size")->required();
    cmd->add_option("--out", *out, "BPE model output path")->required();
    cmd->callback([=, &ctx] {
      const io::UnitFile src = io::read_unit_file(*in);
      std::vector<UnitStream> corpus;
      for (const auto& r : src.records) corpus.push_back(single_stream(r));
      const BpeModel model = bpe_train(corpus, *vocab);
      io::write_bpe_model(*out, model);
      ctx.summary({{"command", "bpe-train"},
                   {"utterances", corpus.size()},
                   {"base_vocab", model.base_vocab_size()},
                   {"merges", model.merges().size()},
                   {"vocab_size", model.total_vocab_size()}});
    });
  }
  for (const bool encode : {true, false}) {
    auto* cmd = tok->add_subcommand(encode ? "bpe-encode" : "bpe-decode",
                                    encode ? "Apply BPE merges" : "Expand BPE symbols to base units");
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto model_path = std::make_shared<std::string>();
    cmd->add_option("--in", *in, "Input UnitFile")->required();
    cmd->add_option("--model", *model_path, "BPE model file")->required();
    cmd->add_option("--out", *out, "Output UnitFile")->required();
    cmd->callback([=, &ctx] {
      const BpeModel model = io::read_bpe_model(*model_path);
      const io::UnitFile src = io::read_unit_file(*in);
      const io::UnitFile dst = map_streams(src, [&](const UnitStream& s) {
        return encode ? bpe_encode(s, model) : bpe_decode(s, model);
      });
      io::write_unit_file(*out, dst);
      ctx.summary({{"command", encode ? "bpe-encode" : "bpe-decode"},
                   {"utterances", dst.records.size()},
                   {"tokens_in", count_tokens(src)},
                   {"tokens_out", count_tokens(dst)},
                   {"vocab_size", dst.vocab_sizes.front()}});
    });
  }
  {
    auto* cmd = tok->add_subcommand("f0-quantize", "Track pitch in WAV files and quantize it to units");
    auto wav = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto resolution = std::make_shared<double>(10.0);
    auto pitch = std::make_shared<PitchOptions>();
    cmd->add_option("--wav", *wav, "WAV file or manifest of WAV files")->required();
    cmd->add_option("--resolution", *resolution, "Bin width in Hz")->capture_default_str();
    cmd->add_option("--f0-min", pitch->f0_min_hz, "Lowest F0 searched")->capture_default_str();
    cmd->add_option("--f0-max", pitch->f0_max_hz, "Highest F0 searched")->capture_default_str();
    cmd->add_option("--hop", pitch->hop_seconds, "Frame hop in seconds")->capture_default_str();
    cmd->add_option("--voicing", pitch->voicing_threshold, "Voicing threshold")->capture_default_str();
    cmd->add_option("--out", *out, "Output UnitFile")->required();
    cmd->callback([=, &ctx] {
      const auto audio = load_audio(*wav, ctx.jobs);
      std::vector<io::UnitRecord> records(audio.size());
      std::vector<std::size_t> voiced(audio.size());
      parallel_for(audio.size(), ctx.jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          const F0Contour contour = extract_f0(audio[i].second, *pitch);
          voiced[i] = contour.voiced_count();
          records[i] = {audio[i].first, {quantize_f0(contour, *resolution)}};
        }
      });
      const io::UnitFile file = io::make_unit_file(std::move(records));
      io::write_unit_file(*out, file);
      std::size_t total_voiced = 0;
      for (auto v : voiced) total_voiced += v;
      ctx.summary({{"command", "f0-quantize"},
                   {"utterances", file.records.size()},
                   {"frames", count_tokens(file)},
                   {"voiced_frames", total_voiced},
                   {"vocab_size", file.vocab_sizes.front()}});
    });
  }
}

// ---------------------------------------------------------------------------

void add_cepstrum_options(CLI::App* cmd, MelCepstrumOptions& o) {
  cmd->add_option("--window", o.framing.window_seconds, "Analysis window in seconds")->capture_default_str();
  cmd->add_option("--frame-hop", o.framing.hop_seconds, "Frame hop in seconds")->capture_default_str();
  cmd->add_option("--mels", o.num_mels, "Mel filters")->capture_default_str();
  cmd->add_option("--coeffs", o.num_coeffs, "Cepstral coefficients after c0")->capture_default_str();
}

void setup_metric(CLI::App& app, Context& ctx) {
  auto* metric = app.add_subcommand("metric", "Compute evaluation metrics");
  metric->require_subcommand(1);

  {
    auto* cmd = metric->add_subcommand("bitrate", "Pooled bits per second of a UnitFile");
    auto units = std::make_shared<std::string>();
    auto durations = std::make_shared<std::string>();
    auto wav = std::make_shared<std::string>();
    auto tsv = std::make_shared<std::string>();
    cmd->add_option("--units", *units, "UnitFile")->required();
    auto* d = cmd->add_option("--durations", *durations, "Duration sidecar (utt_id<TAB>seconds)");
    auto* w = cmd->add_option("--wav", *wav, "WAV manifest; durations come from the audio length");
    d->excludes(w);
    cmd->add_option("--tsv", *tsv, "Per-utterance TSV output");
    cmd->callback([=, &ctx] {
      const io::UnitFile file = io::read_unit_file(*units);
      std::map<std::string, double> seconds;
      if (!durations->empty()) {
        for (const auto& [id, s] : io::read_durations(*durations)) seconds[id] = s;
      } else if (!wav->empty()) {
        for (const auto& [id, a] : load_audio(*wav, ctx.jobs)) seconds[id] = a.duration_seconds();
      } else {
        throw Error(ErrorCode::kConfig, "bitrate needs --durations or --wav to know utterance lengths");
      }
      std::vector<DiscreteRepresentation> reps;
      std::string missing;
      for (const auto& r : file.records) {
        auto it = seconds.find(r.utt_id);
        if (it == seconds.end()) {
          missing += " " + r.utt_id;
          continue;
        }
        reps.push_back({r.streams, it->second});
      }
      if (!missing.empty()) throw Error(ErrorCode::kAlignment, "no duration for utterances:" + missing);
      const double pooled = corpus_bitrate(reps);
      double bits = 0.0, secs = 0.0;
      std::string table = "utt_id\ttokens\tbits\tseconds\tbitrate\n";
      for (std::size_t i = 0; i < reps.size(); ++i) {
        std::size_t tokens = 0;
        for (const auto& s : reps[i].streams) tokens += s.size();
        bits += total_bits(reps[i]);
        secs += reps[i].duration_seconds;
        table += file.records[i].utt_id + "\t" + std::to_string(tokens) + "\t" + fmt(total_bits(reps[i])) + "\t" +
                 fmt(reps[i].duration_seconds) + "\t" + fmt(bitrate(reps[i])) + "\n";
      }
      if (!tsv->empty()) io::write_file_bytes(*tsv, table);
      ctx.summary({{"metric", "bitrate"},
                   {"utterances", reps.size()},
                   {"total_bits", bits},
                   {"total_seconds", secs},
                   {"bitrate", pooled}});
    });
  }
  for (const bool words : {false, true}) {
    auto* cmd = metric->add_subcommand(words ? "wer" : "cer",
                                       words ? "Micro-averaged word error rate" : "Micro-averaged character error rate");
    auto ref = std::make_shared<std::string>();
    auto hyp = std::make_shared<std::string>();
    auto tsv = std::make_shared<std::string>();
    auto no_spaces = std::make_shared<bool>(false);
    cmd->add_option("--ref", *ref, "Reference transcripts (utt_id<TAB>text)")->required();
    cmd->add_option("--hyp", *hyp, "Hypothesis transcripts (utt_id<TAB>text)")->required();
    cmd->add_option("--tsv", *tsv, "Per-utterance TSV output");
    if (!words) cmd->add_flag("--no-spaces", *no_spaces, "Ignore spaces when comparing characters");
    cmd->callback([=, &ctx] {
      const auto pairs = io::pair_transcripts(io::read_transcripts(*ref), io::read_transcripts(*hyp));
      TextOptions options;
      options.count_spaces = !*no_spaces;
      std::vector<ErrorCounts> counts(pairs.size());
      parallel_for(pairs.size(), ctx.jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          counts[i] = words ? word_errors(pairs[i]) : char_errors(pairs[i], options);
        }
      });
      ErrorCounts total;
      std::string table = "utt_id\terrors\treference_length\trate\n";
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        total += counts[i];
        table += pairs[i].utt_id + "\t" + std::to_string(counts[i].errors) + "\t" +
                 std::to_string(counts[i].reference_length) + "\t" +
                 (counts[i].reference_length ? fmt(counts[i].rate()) : std::string("-")) + "\n";
      }
      const double rate = total.rate();
      if (!tsv->empty()) io::write_file_bytes(*tsv, table);
      ctx.summary({{"metric", words ? "wer" : "cer"},
                   {"utterances", pairs.size()},
                   {"errors", total.errors},
                   {"reference_length", total.reference_length},
                   {words ? "wer" : "cer", rate}});
    });
  }
  {
    auto* cmd = metric->add_subcommand("mcd", "Mel cepstral distortion after DTW alignment");
    auto ref = std::make_shared<std::string>();
    auto syn = std::make_shared<std::string>();
    auto tsv = std::make_shared<std::string>();
    auto cep = std::make_shared<MelCepstrumOptions>();
    cmd->add_option("--ref", *ref, "Reference WAV or WAV manifest")->required();
    cmd->add_option("--syn", *syn, "Synthesized WAV or WAV manifest")->required();
    cmd->add_option("--tsv", *tsv, "Per-utterance TSV output");
    add_cepstrum_options(cmd, *cep);
    cmd->callback([=, &ctx] {
      const auto ref_audio = load_audio(*ref, ctx.jobs);
      const auto syn_audio = load_audio(*syn, ctx.jobs);
      std::vector<std::string> ids;
      const auto pairs = pair_by_id(ref_audio, syn_audio, ids);
      struct Row {
        std::size_t ref_frames, syn_frames, path;
        double value;
      };
      std::vector<Row> rows(pairs.size());
      parallel_for(pairs.size(), ctx.jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          if (pairs[i].first->sample_rate_hz != pairs[i].second->sample_rate_hz) {
            throw Error(ErrorCode::kSampleRateMismatch,
                        "'" + ids[i] + "': reference is " + std::to_string(pairs[i].first->sample_rate_hz) +
                            " Hz, synthesis is " + std::to_string(pairs[i].second->sample_rate_hz) + " Hz");
          }
          const CepstrumMatrix a = mel_cepstrum(*pairs[i].first, *cep);
          const CepstrumMatrix b = mel_cepstrum(*pairs[i].second, *cep);
          rows[i] = {a.frames(), b.frames(), dtw_align(a, b).path.size(), mcd(a, b)};
        }
      });
      double sum = 0.0;
      std::string table = "utt_id\tref_frames\tsyn_frames\tpath_length\tmcd_db\n";
      for (std::size_t i = 0; i < rows.size(); ++i) {
        sum += rows[i].value;
        table += ids[i] + "\t" + std::to_string(rows[i].ref_frames) + "\t" + std::to_string(rows[i].syn_frames) +
                 "\t" + std::to_string(rows[i].path) + "\t" + fmt(rows[i].value) + "\n";
      }
      if (rows.empty()) throw Error(ErrorCode::kEmptyCorpus, "no utterance pairs");
      if (!tsv->empty()) io::write_file_bytes(*tsv, table);
      ctx.summary({{"metric", "mcd"}, {"utterances", rows.size()}, {"mcd_db", sum / rows.size()}});
    });
  }
  {
    auto* cmd = metric->add_subcommand("f0rmse", "RMSE of log F0 over DTW-aligned voiced frames");
    auto ref = std::make_shared<std::string>();
    auto syn = std::make_shared<std::string>();
    auto tsv = std::make_shared<std::string>();
    auto opt = std::make_shared<F0RmseOptions>();
    cmd->add_option("--ref", *ref, "Reference WAV or WAV manifest")->required();
    cmd->add_option("--syn", *syn, "Synthesized WAV or WAV manifest")->required();
    cmd->add_option("--tsv", *tsv, "Per-utterance TSV output");
    add_cepstrum_options(cmd, opt->cepstrum);
    cmd->add_option("--f0-min", opt->pitch.f0_min_hz, "Lowest F0 searched")->capture_default_str();
    cmd->add_option("--f0-max", opt->pitch.f0_max_hz, "Highest F0 searched")->capture_default_str();
    cmd->add_option("--voicing", opt->pitch.voicing_threshold, "Voicing threshold")->capture_default_str();
    cmd->callback([=, &ctx] {
      const auto ref_audio = load_audio(*ref, ctx.jobs);
      const auto syn_audio = load_audio(*syn, ctx.jobs);
      std::vector<std::string> ids;
      const auto pairs = pair_by_id(ref_audio, syn_audio, ids);
      std::vector<F0RmseResult> results(pairs.size());
      parallel_for(pairs.size(), ctx.jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) results[i] = f0_rmse(*pairs[i].first, *pairs[i].second, *opt);
      });
      if (results.empty()) throw Error(ErrorCode::kEmptyCorpus, "no utterance pairs");
      double sum = 0.0;
      std::size_t scored = 0;
      std::string table = "utt_id\tvoiced_pairs\tf0_rmse\n";
      for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        table += ids[i] + "\t" + std::to_string(r.pairs) + "\t" + (r.no_overlap ? std::string("-") : fmt(r.value)) +
                 "\n";
        if (r.no_overlap) {
          ctx.log(LogLevel::kWarn, "'" + ids[i] + "' has no mutually voiced frames; excluded from the mean");
          continue;
        }
        sum += r.value;
        ++scored;
      }
      if (!tsv->empty()) io::write_file_bytes(*tsv, table);
      ordered_json j = {{"metric", "f0rmse"}, {"utterances", results.size()}, {"scored", scored}};
      j["f0_rmse"] = scored ? ordered_json(sum / scored) : ordered_json(nullptr);
      ctx.summary(j);
    });
  }
}

// ---------------------------------------------------------------------------

void setup_rank(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand("rank", "Rank teams of one track from a score TSV");
  auto track = std::make_shared<std::string>();
  auto scores = std::make_shared<std::string>();
  auto out_tsv = std::make_shared<std::string>();
  auto out_json = std::make_shared<std::string>();
  auto tie_mode = std::make_shared<std::string>("fractional");
  auto split = std::make_shared<std::string>("auto");
  auto boundary = std::make_shared<int>(48000);
  cmd->add_option("track", *track, "asr, tts-vocoder, tts-full or svs")->required();
  cmd->add_option("--scores", *scores, "Score TSV")->required();
  cmd->add_option("--out-tsv", *out_tsv, "Leaderboard TSV output");
  cmd->add_option("--out-json", *out_json, "Leaderboard JSON output");
  cmd->add_option("--tie-mode", *tie_mode, "Rank ties as fractional or competition")
      ->check(CLI::IsMember({"fractional", "competition"}))
      ->capture_default_str();
  cmd->add_option("--split", *split, "Sampling-rate grouping for tts-full: auto, never or always")
      ->check(CLI::IsMember({"auto", "never", "always"}))
      ->capture_default_str();
  cmd->add_option("--boundary-hz", *boundary, "Lowest sampling rate of the HIGH group")->capture_default_str();
  cmd->callback([=, &ctx] {
    const Track t = parse_track(*track);
    RankOptions options;
    options.tie_mode = *tie_mode == "competition" ? TieMode::kCompetition : TieMode::kFractional;
    options.high_rate_boundary_hz = *boundary;
    options.tts_full_split = *split == "never" ? RateSplit::kNever
                             : *split == "always" ? RateSplit::kAlways
                                                  : RateSplit::kAuto;
    const auto cards = io::read_scores(*scores, t);
    const auto boards = rank_track(t, cards, options);
    if (!out_tsv->empty()) io::write_file_bytes(*out_tsv, io::leaderboards_to_tsv(boards));
    if (!out_json->empty()) io::write_file_bytes(*out_json, io::leaderboards_to_json(boards));
    ctx.log(LogLevel::kInfo, "ranked " + std::to_string(cards.size()) + " teams");
    *ctx.out << io::leaderboards_to_json(boards, -1);
  });
}

void setup_validate(CLI::App& app, Context& ctx, int& status) {
  auto* cmd = app.add_subcommand("validate", "Check a submission directory");
  auto dir = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("dir", *dir, "Submission directory")->required();
  cmd->add_option("--out", *out, "Findings JSON output");
  cmd->callback([=, &ctx, &status] {
    const io::ValidationReport report = io::validate_submission(*dir);
    for (const auto& f : report.findings) {
      ctx.log(f.severity == io::Severity::kError ? LogLevel::kInfo : LogLevel::kDebug, f.to_string());
    }
    if (!out->empty()) io::write_file_bytes(*out, report.to_json());
    *ctx.out << report.to_json(-1);
    status = report.ok() ? 0 : 1;
  });
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  ctx.level = log_level_from_env();
  int status = 0;

  CLI::App app{"Discrete speech unit tokenization, metrics and leaderboards", "dsu"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file");
  app.add_option("--seed", ctx.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--jobs", ctx.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.set_version_flag("--version", "dsu 0.3.0");

  setup_tokenize(app, ctx);
  setup_metric(app, ctx);
  setup_rank(app, ctx);
  setup_validate(app, ctx, status);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  } catch (const FileError& e) {
    err << "dsu: error: " << one_line(e.what()) << " [" << to_string(e.code()) << "]\n";
    return 1;
  } catch (const Error& e) {
    err << "dsu: error: " << one_line(e.what()) << " [" << to_string(e.code()) << "]\n";
    return 1;
  } catch (const std::exception& e) {
    err << "dsu: error: " << one_line(e.what()) << '\n';
    return 1;
  }
  return status;
}

}  // namespace dsu::cli
