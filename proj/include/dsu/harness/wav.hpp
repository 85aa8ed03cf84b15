#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "dsu/core_model.hpp"

namespace dsu::io {

struct WavInfo {
  std::uint16_t format_tag = 0;  // 1 = PCM, 0xFFFE = extensible
  std::uint16_t channels = 0;
  std::uint32_t sample_rate_hz = 0;
  std::uint16_t bits_per_sample = 0;
  std::uint64_t num_frames = 0;
  std::uint64_t data_offset = 0;
};

/// Reads the RIFF header and fmt chunk without decoding samples. Throws
/// FileError(kParse) on a malformed container.
WavInfo probe_wav(std::string_view bytes, const std::string& name = "<memory>");

/// Decodes 16-bit PCM mono audio to doubles in [-1, 1). Anything else throws
/// FileError(kUnsupportedFormat).
AudioBuffer decode_wav(std::string_view bytes, const std::string& name = "<memory>");
AudioBuffer read_wav(const std::filesystem::path& path);

/// Encodes as 16-bit PCM mono: samples scale by 32768, round to nearest and
/// clip to the int16 range, so decode then encode is lossless.
std::string encode_wav(const AudioBuffer& audio);
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio);

/// Writes an arbitrary 16-bit PCM file with interleaved channels. Exists to
/// produce multi-channel fixtures.
std::string encode_wav_pcm16(std::span<const std::int16_t> interleaved, std::uint16_t channels,
                             std::uint32_t sample_rate_hz);

}  // namespace dsu::io
