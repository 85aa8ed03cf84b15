#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dsu/harness/formats.hpp"

namespace dsu::io {

// Submission directory layout checked by validate_submission. Every file is
// optional, but at least one must be present:
//   track.txt      track name (asr, tts-vocoder, tts-full, svs)
//   units.txt      UnitFile
//   durations.tsv  utt_id<TAB>seconds
//   wav.scp        utt_id<TAB>path to a 16-bit PCM mono WAV
//   scores.tsv     score TSV for the track named in track.txt
struct ValidationReport {
  std::filesystem::path directory;
  std::vector<Diagnostic> findings;

  std::size_t error_count() const;
  std::size_t warning_count() const;
  bool ok() const { return error_count() == 0; }
  std::string to_json(int indent = 2) const;
};

ValidationReport validate_submission(const std::filesystem::path& directory);

}  // namespace dsu::io
