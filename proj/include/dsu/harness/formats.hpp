#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsu/core_model.hpp"
#include "dsu/discretize.hpp"
#include "dsu/ranking.hpp"
#include "dsu/text_metrics.hpp"

namespace dsu::io {

enum class Severity { kWarning, kError };

/// One finding against an input file. Used by the validator and by parsers
/// running in collect mode.
struct Diagnostic {
  Severity severity = Severity::kError;
  std::string code;  // e.g. "invalid-token", "unsupported-format"
  std::string file;
  std::optional<std::uint64_t> line;
  std::optional<std::uint64_t> byte_offset;
  std::string utt_id;
  std::string message;

  std::string to_string() const;
};

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::string_view bytes);

// ---------------------------------------------------------------------------
// FeatureFile: "DSUF", u32 version, u32 rows, u32 cols, u32 hop in
// microseconds, then rows*cols little-endian float32, row-major.

inline constexpr std::uint32_t kFeatureFileVersion = 1;

std::string encode_feature_file(const FeatureMatrix& features);
FeatureMatrix decode_feature_file(std::string_view bytes, const std::string& name = "<memory>");
FeatureMatrix read_feature_file(const std::filesystem::path& path);
void write_feature_file(const std::filesystem::path& path, const FeatureMatrix& features);

// ---------------------------------------------------------------------------
// Codebook file: "DSUK", u32 version, u32 k, u32 dim, then k*dim
// little-endian float64, row-major.

inline constexpr std::uint32_t kCodebookFileVersion = 1;

std::string encode_codebook(const Codebook& codebook);
Codebook decode_codebook(std::string_view bytes, const std::string& name = "<memory>");
Codebook read_codebook(const std::filesystem::path& path);
void write_codebook(const std::filesystem::path& path, const Codebook& codebook);

// ---------------------------------------------------------------------------
// BPE model file (text):
//   #dsu-bpe version=1 base_vocab=<n> merges=<m>
//   <left> <right> <result>      (m lines, training order)

std::string encode_bpe_model(const BpeModel& model);
BpeModel decode_bpe_model(std::string_view text, const std::string& name = "<memory>");
BpeModel read_bpe_model(const std::filesystem::path& path);
void write_bpe_model(const std::filesystem::path& path, const BpeModel& model);

// ---------------------------------------------------------------------------
// UnitFile (text):
//   #vocab_size=<k> #streams=<m>
//   utt_id<TAB>tok tok tok ...          when m == 1
//   utt_id@<s><TAB>tok tok ...          s = 1..m when m > 1
// vocab_size may list one size per stream, comma-separated.

struct UnitRecord {
  std::string utt_id;
  std::vector<UnitStream> streams;
};

struct UnitFile {
  std::vector<std::uint32_t> vocab_sizes;  // one per stream
  std::vector<UnitRecord> records;

  std::size_t num_streams() const noexcept { return vocab_sizes.size(); }
  const UnitRecord* find(std::string_view utt_id) const;
};

std::string encode_unit_file(const UnitFile& file);
/// With `diagnostics` set, problems are recorded and parsing continues past
/// bad lines; otherwise the first problem throws FileError.
UnitFile decode_unit_file(std::string_view text, const std::string& name = "<memory>",
                          std::vector<Diagnostic>* diagnostics = nullptr);
UnitFile read_unit_file(const std::filesystem::path& path,
                        std::vector<Diagnostic>* diagnostics = nullptr);
void write_unit_file(const std::filesystem::path& path, const UnitFile& file);

/// Single-stream unit file from (utt_id, stream) pairs sharing a vocab.
UnitFile make_unit_file(std::vector<UnitRecord> records);

// ---------------------------------------------------------------------------
// Two-column "key<TAB>value" tables: manifests, transcripts, durations.

struct TableRow {
  std::string key;
  std::string value;
  std::uint64_t line = 0;
};

/// Blank lines and lines starting with '#' are skipped. Keys must be unique.
std::vector<TableRow> decode_table(std::string_view text, const std::string& name);
std::vector<TableRow> read_table(const std::filesystem::path& path);

struct ManifestEntry {
  std::string utt_id;
  std::filesystem::path path;  // resolved against the manifest's directory
};

struct Manifest {
  std::filesystem::path source;
  std::vector<ManifestEntry> entries;
};

/// Throws FileError when a referenced path does not exist and
/// `require_paths` is set.
Manifest read_manifest(const std::filesystem::path& path, bool require_paths = true);

/// Transcript file: "utt_id<TAB>text".
std::vector<TableRow> read_transcripts(const std::filesystem::path& path);

/// Duration sidecar: "utt_id<TAB>seconds"; values must be positive.
std::vector<std::pair<std::string, double>> read_durations(const std::filesystem::path& path);

/// Pairs reference and hypothesis rows by utt_id in reference order. Throws
/// kAlignment listing ids missing on either side.
std::vector<TranscriptPair> pair_transcripts(const std::vector<TableRow>& ref,
                                             const std::vector<TableRow>& hyp);

// ---------------------------------------------------------------------------
// Score TSV: a header row naming columns, "team_id" first, then one row per
// team. sampling_rate_hz accepts plain Hz or a "k" suffix ("16k", "48kHz").

std::vector<ScoreCard> decode_scores(std::string_view text, Track track,
                                     const std::string& name = "<memory>");
std::vector<ScoreCard> read_scores(const std::filesystem::path& path, Track track);

/// Parses "16000", "16k", "24kHz", "44.1k". Returns nullopt on failure.
std::optional<int> parse_sampling_rate(std::string_view text);

std::string leaderboards_to_tsv(const std::vector<Leaderboard>& boards);
std::string leaderboards_to_json(const std::vector<Leaderboard>& boards, int indent = 2);

}  // namespace dsu::io
