#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dsu {

enum class ErrorCode {
  kInvalidRepresentation,
  kEmptyCorpus,
  kInsufficientData,
  kInvalidFeature,
  kShape,
  kInvalidTarget,
  kInvalidToken,
  kDegenerateCorpus,
  kTooShort,
  kConfig,
  kUnsupportedFormat,
  kSampleRateMismatch,
  kInvalidScore,
  kIncompleteCard,
  kSchema,
  kAlignment,
  kParse,
  kIo,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Error tied to a location in an input file. Exactly one of line/byte_offset
// is normally set; both empty means the whole file.
class FileError : public Error {
 public:
  FileError(ErrorCode code, std::string file, std::optional<std::uint64_t> line,
            std::optional<std::uint64_t> byte_offset, const std::string& message);

  const std::string& file() const noexcept { return file_; }
  std::optional<std::uint64_t> line() const noexcept { return line_; }
  std::optional<std::uint64_t> byte_offset() const noexcept { return byte_offset_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string file_;
  std::optional<std::uint64_t> line_;
  std::optional<std::uint64_t> byte_offset_;
  std::string message_;
};

}  // namespace dsu
