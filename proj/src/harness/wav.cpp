#include "dsu/harness/wav.hpp"

#include <algorithm>
#include <cmath>

#include "dsu/error.hpp"
#include "dsu/harness/formats.hpp"

namespace dsu::io {

namespace {

std::uint16_t u16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}

std::uint32_t u32(std::string_view b, std::size_t at) {
  return static_cast<std::uint32_t>(u16(b, at)) | (static_cast<std::uint32_t>(u16(b, at + 2)) << 16);
}

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
  put16(out, static_cast<std::uint16_t>(v & 0xffff));
  put16(out, static_cast<std::uint16_t>(v >> 16));
}

[[noreturn]] void bad(ErrorCode code, const std::string& name, std::uint64_t offset, const std::string& msg) {
  throw FileError(code, name, std::nullopt, offset, msg);
}

constexpr std::uint16_t kPcm = 1;
constexpr std::uint16_t kExtensible = 0xFFFE;

}  // namespace

WavInfo probe_wav(std::string_view bytes, const std::string& name) {
  if (bytes.size() < 12) bad(ErrorCode::kParse, name, bytes.size(), "truncated RIFF header");
  if (bytes.substr(0, 4) != "RIFF") bad(ErrorCode::kParse, name, 0, "missing RIFF magic");
  if (bytes.substr(8, 4) != "WAVE") bad(ErrorCode::kParse, name, 8, "RIFF form type is not WAVE");

  WavInfo info;
  bool have_fmt = false;
  std::size_t at = 12;
  while (at + 8 <= bytes.size()) {
    const std::string_view id = bytes.substr(at, 4);
    const std::uint32_t size = u32(bytes, at + 4);
    const std::size_t body = at + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > bytes.size()) bad(ErrorCode::kParse, name, at, "truncated fmt chunk");
      info.format_tag = u16(bytes, body);
      info.channels = u16(bytes, body + 2);
      info.sample_rate_hz = u32(bytes, body + 4);
      info.bits_per_sample = u16(bytes, body + 14);
      if (info.format_tag == kExtensible && size >= 40) {
        // The first two bytes of the sub-format GUID carry the real tag.
        info.format_tag = u16(bytes, body + 24) == kPcm ? kPcm : kExtensible;
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) bad(ErrorCode::kParse, name, at, "data chunk precedes fmt chunk");
      const std::uint64_t available = std::min<std::uint64_t>(size, bytes.size() - body);
      if (available < size) bad(ErrorCode::kParse, name, at + 4, "data chunk runs past end of file");
      const std::uint32_t frame_bytes = info.channels * ((info.bits_per_sample + 7u) / 8u);
      info.num_frames = frame_bytes ? size / frame_bytes : 0;
      info.data_offset = body;
      return info;
    }
    at = body + size + (size & 1u);
  }
  bad(ErrorCode::kParse, name, at, have_fmt ? "no data chunk" : "no fmt chunk");
}

AudioBuffer decode_wav(std::string_view bytes, const std::string& name) {
  const WavInfo info = probe_wav(bytes, name);
  if (info.format_tag != kPcm) {
    bad(ErrorCode::kUnsupportedFormat, name, 20,
        "format tag " + std::to_string(info.format_tag) + " is not PCM");
  }
  if (info.channels != 1) {
    bad(ErrorCode::kUnsupportedFormat, name, 22,
        std::to_string(info.channels) + " channels, only mono is supported");
  }
  if (info.bits_per_sample != 16) {
    bad(ErrorCode::kUnsupportedFormat, name, 34,
        std::to_string(info.bits_per_sample) + "-bit samples, only 16-bit is supported");
  }
  if (info.sample_rate_hz == 0 || info.sample_rate_hz > 1'000'000) {
    bad(ErrorCode::kUnsupportedFormat, name, 24, "implausible sample rate");
  }
  if (info.num_frames == 0) bad(ErrorCode::kInvalidRepresentation, name, info.data_offset, "no samples");
  AudioBuffer audio;
  audio.sample_rate_hz = static_cast<int>(info.sample_rate_hz);
  audio.samples.resize(info.num_frames);
  for (std::size_t i = 0; i < audio.samples.size(); ++i) {
    const auto v = static_cast<std::int16_t>(u16(bytes, info.data_offset + 2 * i));
    audio.samples[i] = v / 32768.0;
  }
  return audio;
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  return decode_wav(read_file_bytes(path), path.string());
}

std::string encode_wav_pcm16(std::span<const std::int16_t> interleaved, std::uint16_t channels,
                             std::uint32_t sample_rate_hz) {
  const auto data_bytes = static_cast<std::uint32_t>(interleaved.size() * 2);
  std::string out = "RIFF";
  put32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, kPcm);
  put16(out, channels);
  put32(out, sample_rate_hz);
  put32(out, sample_rate_hz * channels * 2);
  put16(out, static_cast<std::uint16_t>(channels * 2));
  put16(out, 16);
  out += "data";
  put32(out, data_bytes);
  for (std::int16_t s : interleaved) put16(out, static_cast<std::uint16_t>(s));
  return out;
}

std::string encode_wav(const AudioBuffer& audio) {
  audio.validate();
  std::vector<std::int16_t> pcm(audio.samples.size());
  for (std::size_t i = 0; i < pcm.size(); ++i) {
    const double scaled = std::round(audio.samples[i] * 32768.0);
    pcm[i] = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
  }
  return encode_wav_pcm16(pcm, 1, static_cast<std::uint32_t>(audio.sample_rate_hz));
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio) {
  write_file_bytes(path, encode_wav(audio));
}

}  // namespace dsu::io
