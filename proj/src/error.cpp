#include "dsu/error.hpp"

#include <sstream>

namespace dsu {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidRepresentation: return "invalid-representation";
    case ErrorCode::kEmptyCorpus: return "empty-corpus";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kInvalidFeature: return "invalid-feature";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kInvalidTarget: return "invalid-target";
    case ErrorCode::kInvalidToken: return "invalid-token";
    case ErrorCode::kDegenerateCorpus: return "degenerate-corpus";
    case ErrorCode::kTooShort: return "too-short";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kUnsupportedFormat: return "unsupported-format";
    case ErrorCode::kSampleRateMismatch: return "sample-rate-mismatch";
    case ErrorCode::kInvalidScore: return "invalid-score";
    case ErrorCode::kIncompleteCard: return "incomplete-card";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kAlignment: return "alignment";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

namespace {

std::string format_file_error(const std::string& file, std::optional<std::uint64_t> line,
                              std::optional<std::uint64_t> byte_offset,
                              const std::string& message) {
  std::ostringstream os;
  os << file;
  if (line) os << ":" << *line;
  if (byte_offset) os << ": byte " << *byte_offset;
  os << ": " << message;
  return os.str();
}

}  // namespace

FileError::FileError(ErrorCode code, std::string file, std::optional<std::uint64_t> line,
                     std::optional<std::uint64_t> byte_offset, const std::string& message)
    : Error(code, format_file_error(file, line, byte_offset, message)),
      file_(std::move(file)),
      line_(line),
      byte_offset_(byte_offset),
      message_(message) {}

}  // namespace dsu
