#include "dsu/harness/validate.hpp"

#include <cmath>
#include <map>
#include <set>

#include "dsu/error.hpp"
#include "dsu/harness/wav.hpp"
#include "json.hpp"

namespace dsu::io {

namespace fs = std::filesystem;

namespace {

class Collector {
 public:
  explicit Collector(std::vector<Diagnostic>& out) : out_(out) {}

  void add(Severity severity, ErrorCode code, const fs::path& file, const std::string& message,
           const std::string& utt = {}) {
    out_.push_back({severity, std::string(to_string(code)), file.string(), std::nullopt, std::nullopt, utt, message});
  }

  void add(const FileError& e, const std::string& utt = {}) {
    out_.push_back({Severity::kError, std::string(to_string(e.code())), e.file(), e.line(), e.byte_offset(), utt,
                    e.message()});
  }

  void add(const Error& e, const fs::path& file, const std::string& utt = {}) {
    if (const auto* fe = dynamic_cast<const FileError*>(&e)) {
      add(*fe, utt);
      return;
    }
    add(Severity::kError, e.code(), file, e.what(), utt);
  }

 private:
  std::vector<Diagnostic>& out_;
};

}  // namespace

std::size_t ValidationReport::error_count() const {
  std::size_t n = 0;
  for (const auto& f : findings) n += f.severity == Severity::kError;
  return n;
}

std::size_t ValidationReport::warning_count() const { return findings.size() - error_count(); }

std::string ValidationReport::to_json(int indent) const {
  nlohmann::ordered_json doc;
  doc["directory"] = directory.string();
  doc["ok"] = ok();
  doc["errors"] = error_count();
  doc["warnings"] = warning_count();
  doc["findings"] = nlohmann::ordered_json::array();
  for (const auto& f : findings) {
    nlohmann::ordered_json j;
    j["severity"] = f.severity == Severity::kError ? "error" : "warning";
    j["code"] = f.code;
    j["file"] = f.file;
    if (f.line) j["line"] = *f.line;
    if (f.byte_offset) j["byte_offset"] = *f.byte_offset;
    if (!f.utt_id.empty()) j["utt_id"] = f.utt_id;
    j["message"] = f.message;
    doc["findings"].push_back(std::move(j));
  }
  return doc.dump(indent) + "\n";
}

ValidationReport validate_submission(const fs::path& directory) {
  ValidationReport report;
  report.directory = directory;
  Collector findings(report.findings);

  if (!fs::is_directory(directory)) {
    findings.add(Severity::kError, ErrorCode::kIo, directory, "not a directory");
    return report;
  }
  const fs::path track_path = directory / "track.txt";
  const fs::path units_path = directory / "units.txt";
  const fs::path durations_path = directory / "durations.tsv";
  const fs::path wav_path = directory / "wav.scp";
  const fs::path scores_path = directory / "scores.tsv";
  if (!fs::exists(track_path) && !fs::exists(units_path) && !fs::exists(durations_path) &&
      !fs::exists(wav_path) && !fs::exists(scores_path)) {
    findings.add(Severity::kError, ErrorCode::kIo, directory, "no submission files found");
    return report;
  }

  std::optional<Track> track;
  if (fs::exists(track_path)) {
    try {
      std::string text = read_file_bytes(track_path);
      while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
      track = parse_track(text);
    } catch (const Error& e) {
      findings.add(e, track_path);
    }
  }

  std::optional<UnitFile> units;
  if (fs::exists(units_path)) {
    try {
      std::vector<Diagnostic> parse_findings;
      units = read_unit_file(units_path, &parse_findings);
      report.findings.insert(report.findings.end(), parse_findings.begin(), parse_findings.end());
    } catch (const Error& e) {
      findings.add(e, units_path);
    }
  }

  std::map<std::string, double> durations;
  bool durations_ok = false;
  if (fs::exists(durations_path)) {
    try {
      for (const auto& [id, seconds] : read_durations(durations_path)) durations[id] = seconds;
      durations_ok = true;
    } catch (const Error& e) {
      findings.add(e, durations_path);
    }
  }

  std::map<std::string, double> wav_seconds;
  bool have_wavs = false;
  if (fs::exists(wav_path)) {
    try {
      const Manifest manifest = read_manifest(wav_path, false);
      have_wavs = true;
      for (const auto& entry : manifest.entries) {
        if (!fs::exists(entry.path)) {
          findings.add(Severity::kError, ErrorCode::kIo, wav_path, "missing audio file " + entry.path.string(),
                       entry.utt_id);
          continue;
        }
        try {
          const AudioBuffer audio = read_wav(entry.path);
          wav_seconds[entry.utt_id] = audio.duration_seconds();
        } catch (const Error& e) {
          findings.add(e, entry.path, entry.utt_id);
        }
      }
    } catch (const Error& e) {
      findings.add(e, wav_path);
    }
  }

  if (units) {
    if (!durations_ok && !have_wavs && !fs::exists(durations_path)) {
      findings.add(Severity::kError, ErrorCode::kInsufficientData, units_path,
                   "no duration source: add durations.tsv or wav.scp");
    }
    std::set<std::string> unit_ids;
    for (const auto& rec : units->records) {
      unit_ids.insert(rec.utt_id);
      if (durations_ok && !durations.count(rec.utt_id) && !wav_seconds.count(rec.utt_id)) {
        findings.add(Severity::kError, ErrorCode::kAlignment, durations_path, "no duration for utterance",
                     rec.utt_id);
      } else if (!durations_ok && have_wavs && !wav_seconds.count(rec.utt_id)) {
        findings.add(Severity::kError, ErrorCode::kAlignment, wav_path, "no audio for utterance", rec.utt_id);
      }
    }
    if (durations_ok) {
      for (const auto& [id, seconds] : durations) {
        if (!unit_ids.count(id)) {
          findings.add(Severity::kWarning, ErrorCode::kAlignment, durations_path, "duration for unknown utterance",
                       id);
        }
      }
    }
  }

  // Sidecar durations should agree with the audio they describe.
  for (const auto& [id, seconds] : wav_seconds) {
    auto it = durations.find(id);
    if (it != durations.end() && std::abs(it->second - seconds) > 0.01) {
      findings.add(Severity::kWarning, ErrorCode::kInvalidRepresentation, durations_path,
                   "duration " + std::to_string(it->second) + " s differs from audio length " +
                       std::to_string(seconds) + " s",
                   id);
    }
  }

  if (fs::exists(scores_path)) {
    if (!track) {
      findings.add(Severity::kError, ErrorCode::kSchema, scores_path, "scores.tsv needs track.txt naming the track");
    } else {
      try {
        std::vector<ScoreCard> cards = read_scores(scores_path, *track);
        if (cards.empty()) {
          findings.add(Severity::kError, ErrorCode::kEmptyCorpus, scores_path, "no score rows");
        } else {
          rank_track(*track, cards);
        }
      } catch (const Error& e) {
        findings.add(e, scores_path);
      }
    }
  }
  return report;
}

}  // namespace dsu::io
