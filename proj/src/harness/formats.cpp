#include "dsu/harness/formats.hpp"

#include <bit>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "dsu/error.hpp"
#include "json.hpp"

namespace dsu::io {

namespace fs = std::filesystem;

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
  }
  return v;
}

std::uint64_t get_u64(std::string_view bytes, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
  }
  return v;
}

[[noreturn]] void fail_at_byte(ErrorCode code, const std::string& file, std::uint64_t offset,
                               const std::string& message) {
  throw FileError(code, file, std::nullopt, offset, message);
}

[[noreturn]] void fail_at_line(ErrorCode code, const std::string& file, std::uint64_t line,
                               std::uint64_t offset, const std::string& message) {
  throw FileError(code, file, line, offset, message);
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > UINT32_MAX) throw Error(ErrorCode::kShape, std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

// Splits text into lines, tracking 1-based line numbers and the byte offset
// of each line start. A trailing '\r' is dropped.
struct Line {
  std::string_view text;
  std::uint64_t number;
  std::uint64_t offset;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t start = 0;
  std::uint64_t number = 1;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back({line, number, start});
    start = end + 1;
    ++number;
  }
  return lines;
}

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t") == std::string_view::npos;
}

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size()) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> parse_uint(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::string format_g(double v, int digits = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace

std::string Diagnostic::to_string() const {
  std::ostringstream os;
  os << (severity == Severity::kError ? "error" : "warning") << " [" << code << "] " << file;
  if (line) os << ":" << *line;
  if (byte_offset) os << ": byte " << *byte_offset;
  if (!utt_id.empty()) os << ": " << utt_id;
  os << ": " << message;
  return os.str();
}

std::string read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError(ErrorCode::kIo, path.string(), std::nullopt, std::nullopt, "cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file_bytes(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError(ErrorCode::kIo, path.string(), std::nullopt, std::nullopt, "cannot write file");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FileError(ErrorCode::kIo, path.string(), std::nullopt, std::nullopt, "write failed");
}

// ---------------------------------------------------------------------------

std::string encode_feature_file(const FeatureMatrix& features) {
  features.validate();
  std::string out = "DSUF";
  put_u32(out, kFeatureFileVersion);
  put_u32(out, checked_u32(features.rows(), "row count"));
  put_u32(out, checked_u32(features.cols(), "column count"));
  const double hop_us = std::round(features.frame_hop_seconds() * 1e6);
  if (!(hop_us >= 1.0) || hop_us > UINT32_MAX) {
    throw Error(ErrorCode::kInvalidFeature, "frame hop is not representable in microseconds");
  }
  put_u32(out, static_cast<std::uint32_t>(hop_us));
  out.reserve(out.size() + features.values().size() * 4);
  for (double v : features.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

FeatureMatrix decode_feature_file(std::string_view bytes, const std::string& name) {
  constexpr std::size_t kHeader = 20;
  if (bytes.size() < kHeader) {
    fail_at_byte(ErrorCode::kParse, name, bytes.size(), "truncated header: file has " +
                                                            std::to_string(bytes.size()) + " bytes");
  }
  if (bytes.substr(0, 4) != "DSUF") fail_at_byte(ErrorCode::kParse, name, 0, "bad magic, expected DSUF");
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kFeatureFileVersion) {
    fail_at_byte(ErrorCode::kParse, name, 4, "unsupported version " + std::to_string(version));
  }
  const std::uint32_t rows = get_u32(bytes, 8);
  const std::uint32_t cols = get_u32(bytes, 12);
  const std::uint32_t hop_us = get_u32(bytes, 16);
  if (rows == 0) fail_at_byte(ErrorCode::kParse, name, 8, "row count is zero");
  if (cols == 0) fail_at_byte(ErrorCode::kParse, name, 12, "column count is zero");
  if (hop_us == 0) fail_at_byte(ErrorCode::kParse, name, 16, "frame hop is zero");
  const std::uint64_t expected = static_cast<std::uint64_t>(rows) * cols * 4;
  if (bytes.size() - kHeader != expected) {
    fail_at_byte(ErrorCode::kParse, name, kHeader,
                 "payload holds " + std::to_string(bytes.size() - kHeader) +
                     " bytes, header declares " + std::to_string(expected));
  }
  std::vector<double> values(static_cast<std::size_t>(rows) * cols);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = std::bit_cast<float>(get_u32(bytes, kHeader + 4 * i));
    if (!std::isfinite(v)) {
      fail_at_byte(ErrorCode::kInvalidFeature, name, kHeader + 4 * i, "non-finite feature value");
    }
    values[i] = v;
  }
  return FeatureMatrix(rows, cols, std::move(values), hop_us * 1e-6);
}

FeatureMatrix read_feature_file(const fs::path& path) {
  return decode_feature_file(read_file_bytes(path), path.string());
}

void write_feature_file(const fs::path& path, const FeatureMatrix& features) {
  write_file_bytes(path, encode_feature_file(features));
}

// ---------------------------------------------------------------------------

std::string encode_codebook(const Codebook& codebook) {
  std::string out = "DSUK";
  put_u32(out, kCodebookFileVersion);
  put_u32(out, checked_u32(codebook.k(), "codebook size"));
  put_u32(out, checked_u32(codebook.dim(), "codebook dimension"));
  for (double v : codebook.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Codebook decode_codebook(std::string_view bytes, const std::string& name) {
  constexpr std::size_t kHeader = 16;
  if (bytes.size() < kHeader) fail_at_byte(ErrorCode::kParse, name, bytes.size(), "truncated header");
  if (bytes.substr(0, 4) != "DSUK") fail_at_byte(ErrorCode::kParse, name, 0, "bad magic, expected DSUK");
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kCodebookFileVersion) {
    fail_at_byte(ErrorCode::kParse, name, 4, "unsupported version " + std::to_string(version));
  }
  const std::uint32_t k = get_u32(bytes, 8);
  const std::uint32_t dim = get_u32(bytes, 12);
  if (k == 0) fail_at_byte(ErrorCode::kParse, name, 8, "codebook size is zero");
  if (dim == 0) fail_at_byte(ErrorCode::kParse, name, 12, "codebook dimension is zero");
  const std::uint64_t expected = static_cast<std::uint64_t>(k) * dim * 8;
  if (bytes.size() - kHeader != expected) {
    fail_at_byte(ErrorCode::kParse, name, kHeader,
                 "payload holds " + std::to_string(bytes.size() - kHeader) +
                     " bytes, header declares " + std::to_string(expected));
  }
  std::vector<double> values(static_cast<std::size_t>(k) * dim);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<double>(get_u64(bytes, kHeader + 8 * i));
    if (!std::isfinite(values[i])) {
      fail_at_byte(ErrorCode::kInvalidFeature, name, kHeader + 8 * i, "non-finite centroid value");
    }
  }
  return Codebook(k, dim, std::move(values));
}

Codebook read_codebook(const fs::path& path) { return decode_codebook(read_file_bytes(path), path.string()); }

void write_codebook(const fs::path& path, const Codebook& codebook) {
  write_file_bytes(path, encode_codebook(codebook));
}

// ---------------------------------------------------------------------------

std::string encode_bpe_model(const BpeModel& model) {
  std::ostringstream os;
  os << "#dsu-bpe version=1 base_vocab=" << model.base_vocab_size()
     << " merges=" << model.merges().size() << "\n";
  for (const auto& m : model.merges()) os << m.left << ' ' << m.right << ' ' << m.result << '\n';
  return os.str();
}

BpeModel decode_bpe_model(std::string_view text, const std::string& name) {
  const auto lines = split_lines(text);
  if (lines.empty()) fail_at_line(ErrorCode::kParse, name, 1, 0, "empty BPE model file");
  std::uint64_t base = 0, count = 0;
  {
    std::istringstream header{std::string(lines[0].text)};
    std::string magic;
    header >> magic;
    if (magic != "#dsu-bpe") fail_at_line(ErrorCode::kParse, name, 1, 0, "missing #dsu-bpe header");
    std::string field;
    bool have_base = false, have_count = false;
    while (header >> field) {
      const auto eq = field.find('=');
      const std::string key = field.substr(0, eq);
      const auto value = eq == std::string::npos ? std::nullopt : parse_uint(std::string_view(field).substr(eq + 1));
      if (key == "version" && value != 1u) {
        fail_at_line(ErrorCode::kParse, name, 1, 0, "unsupported BPE model version");
      } else if (key == "base_vocab" && value) {
        base = *value;
        have_base = true;
      } else if (key == "merges" && value) {
        count = *value;
        have_count = true;
      }
    }
    if (!have_base || !have_count || base == 0 || base > UINT32_MAX) {
      fail_at_line(ErrorCode::kParse, name, 1, 0, "header needs base_vocab and merges");
    }
  }
  std::vector<BpeMerge> merges;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const Line& line = lines[i];
    if (is_blank(line.text)) continue;
    std::istringstream row{std::string(line.text)};
    std::string a, b, c;
    row >> a >> b >> c;
    std::string extra;
    const auto l = parse_uint(a), r = parse_uint(b), res = parse_uint(c);
    if (!l || !r || !res || (row >> extra)) {
      fail_at_line(ErrorCode::kParse, name, line.number, line.offset, "expected '<left> <right> <result>'");
    }
    const auto expected = base + merges.size();
    if (*res != expected || *l >= expected || *r >= expected) {
      fail_at_line(ErrorCode::kParse, name, line.number, line.offset,
                   "merge must define symbol " + std::to_string(expected) + " from earlier symbols");
    }
    merges.push_back({static_cast<Token>(*l), static_cast<Token>(*r), static_cast<Token>(*res)});
  }
  if (merges.size() != count) {
    fail_at_line(ErrorCode::kParse, name, 1, 0,
                 "header declares " + std::to_string(count) + " merges, file has " +
                     std::to_string(merges.size()));
  }
  return BpeModel(static_cast<std::uint32_t>(base), std::move(merges));
}

BpeModel read_bpe_model(const fs::path& path) { return decode_bpe_model(read_file_bytes(path), path.string()); }

void write_bpe_model(const fs::path& path, const BpeModel& model) {
  write_file_bytes(path, encode_bpe_model(model));
}

// ---------------------------------------------------------------------------

const UnitRecord* UnitFile::find(std::string_view utt_id) const {
  for (const auto& r : records) {
    if (r.utt_id == utt_id) return &r;
  }
  return nullptr;
}

std::string encode_unit_file(const UnitFile& file) {
  if (file.vocab_sizes.empty()) throw Error(ErrorCode::kInvalidRepresentation, "unit file has no streams");
  std::string out = "#vocab_size=";
  bool shared = std::all_of(file.vocab_sizes.begin(), file.vocab_sizes.end(),
                            [&](std::uint32_t v) { return v == file.vocab_sizes.front(); });
  if (shared) {
    out += std::to_string(file.vocab_sizes.front());
  } else {
    for (std::size_t s = 0; s < file.vocab_sizes.size(); ++s) {
      out += (s ? "," : "") + std::to_string(file.vocab_sizes[s]);
    }
  }
  out += " #streams=" + std::to_string(file.num_streams()) + "\n";
  const bool multi = file.num_streams() > 1;
  for (const auto& rec : file.records) {
    if (rec.streams.size() != file.num_streams()) {
      throw Error(ErrorCode::kInvalidRepresentation, "record '" + rec.utt_id + "' has " +
                                                         std::to_string(rec.streams.size()) + " streams");
    }
    for (std::size_t s = 0; s < rec.streams.size(); ++s) {
      out += rec.utt_id;
      if (multi) out += "@" + std::to_string(s + 1);
      out += '\t';
      const auto& tokens = rec.streams[s].tokens;
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(tokens[i]);
      }
      out += '\n';
    }
  }
  return out;
}

UnitFile decode_unit_file(std::string_view text, const std::string& name,
                          std::vector<Diagnostic>* diagnostics) {
  auto report = [&](ErrorCode code, std::uint64_t line, std::uint64_t offset, const std::string& utt,
                    const std::string& message) {
    if (!diagnostics) {
      fail_at_line(code, name, line, offset, utt.empty() ? message : utt + ": " + message);
    }
    diagnostics->push_back({Severity::kError, std::string(to_string(code)), name, line, offset, utt, message});
  };

  const auto lines = split_lines(text);
  std::size_t first = 0;
  while (first < lines.size() && is_blank(lines[first].text)) ++first;
  UnitFile file;
  if (first == lines.size()) {
    report(ErrorCode::kParse, 1, 0, "", "missing '#vocab_size=<k> #streams=<m>' header");
    return file;
  }
  {
    const Line& header = lines[first];
    std::istringstream fields{std::string(header.text)};
    std::string field;
    std::optional<std::uint64_t> streams;
    std::vector<std::uint32_t> sizes;
    bool ok = true;
    while (fields >> field) {
      if (field.rfind("#vocab_size=", 0) == 0) {
        std::string_view list = std::string_view(field).substr(12);
        while (ok) {
          const auto comma = list.find(',');
          const auto v = parse_uint(list.substr(0, comma));
          if (!v || *v == 0 || *v > UINT32_MAX) {
            ok = false;
            break;
          }
          sizes.push_back(static_cast<std::uint32_t>(*v));
          if (comma == std::string_view::npos) break;
          list.remove_prefix(comma + 1);
        }
      } else if (field.rfind("#streams=", 0) == 0) {
        streams = parse_uint(std::string_view(field).substr(9));
      } else {
        ok = false;
      }
    }
    if (!ok || sizes.empty() || !streams || *streams == 0 ||
        (sizes.size() != 1 && sizes.size() != *streams)) {
      report(ErrorCode::kParse, header.number, header.offset, "",
             "malformed header, expected '#vocab_size=<k> #streams=<m>'");
      return file;
    }
    file.vocab_sizes.assign(*streams, sizes.front());
    if (sizes.size() == *streams) file.vocab_sizes = sizes;
  }

  const std::size_t m = file.num_streams();
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::vector<bool>> present;
  for (std::size_t li = first + 1; li < lines.size(); ++li) {
    const Line& line = lines[li];
    if (is_blank(line.text) || line.text.front() == '#') continue;
    const auto tab = line.text.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      report(ErrorCode::kParse, line.number, line.offset, "", "expected 'utt_id<TAB>tokens'");
      continue;
    }
    std::string key(line.text.substr(0, tab));
    std::size_t stream = 0;
    if (m > 1) {
      const auto at = key.rfind('@');
      const auto s = at == std::string::npos ? std::nullopt : parse_uint(std::string_view(key).substr(at + 1));
      if (!s || *s < 1 || *s > m) {
        report(ErrorCode::kParse, line.number, line.offset, key,
               "multi-stream line needs an '@<stream>' suffix in 1.." + std::to_string(m));
        continue;
      }
      stream = *s - 1;
      key.resize(at);
    }
    auto [it, inserted] = index.emplace(key, file.records.size());
    if (inserted) {
      UnitRecord rec;
      rec.utt_id = key;
      rec.streams.resize(m);
      for (std::size_t s = 0; s < m; ++s) rec.streams[s].vocab_size = file.vocab_sizes[s];
      file.records.push_back(std::move(rec));
      present.emplace_back(m, false);
    }
    const std::size_t r = it->second;
    if (present[r][stream]) {
      report(ErrorCode::kParse, line.number, line.offset, key,
             m > 1 ? "duplicate stream " + std::to_string(stream + 1) : std::string("duplicate utt_id"));
      continue;
    }
    present[r][stream] = true;
    UnitStream& out = file.records[r].streams[stream];
    const std::uint32_t vocab = file.vocab_sizes[stream];
    std::string_view rest = line.text.substr(tab + 1);
    std::size_t pos = 0;
    std::size_t token_index = 0;
    while (pos < rest.size()) {
      if (rest[pos] == ' ') {
        ++pos;
        continue;
      }
      std::size_t end = rest.find(' ', pos);
      if (end == std::string_view::npos) end = rest.size();
      const std::uint64_t offset = line.offset + tab + 1 + pos;
      const auto v = parse_uint(rest.substr(pos, end - pos));
      if (!v) {
        report(ErrorCode::kParse, line.number, offset, key,
               "token " + std::to_string(token_index) + " is not a non-negative integer");
      } else if (*v >= vocab) {
        report(ErrorCode::kInvalidToken, line.number, offset, key,
               "token " + std::to_string(token_index) + " has value " + std::to_string(*v) +
                   ", outside vocab_size " + std::to_string(vocab));
      } else {
        out.tokens.push_back(static_cast<Token>(*v));
      }
      ++token_index;
      pos = end;
    }
  }
  for (std::size_t r = 0; r < file.records.size(); ++r) {
    for (std::size_t s = 0; s < m; ++s) {
      if (!present[r][s]) {
        report(ErrorCode::kParse, lines.back().number, lines.back().offset, file.records[r].utt_id,
               "missing stream " + std::to_string(s + 1));
      }
    }
  }
  return file;
}

UnitFile read_unit_file(const fs::path& path, std::vector<Diagnostic>* diagnostics) {
  return decode_unit_file(read_file_bytes(path), path.string(), diagnostics);
}

void write_unit_file(const fs::path& path, const UnitFile& file) {
  write_file_bytes(path, encode_unit_file(file));
}

UnitFile make_unit_file(std::vector<UnitRecord> records) {
  UnitFile file;
  if (records.empty()) {
    file.vocab_sizes = {1};
    return file;
  }
  for (const auto& s : records.front().streams) file.vocab_sizes.push_back(s.vocab_size);
  for (const auto& r : records) {
    if (r.streams.size() != file.vocab_sizes.size()) {
      throw Error(ErrorCode::kInvalidRepresentation, "records disagree on stream count");
    }
    for (std::size_t s = 0; s < r.streams.size(); ++s) {
      if (r.streams[s].vocab_size != file.vocab_sizes[s]) {
        throw Error(ErrorCode::kInvalidRepresentation,
                    "record '" + r.utt_id + "' disagrees on vocab_size of stream " + std::to_string(s + 1));
      }
    }
  }
  file.records = std::move(records);
  return file;
}

// ---------------------------------------------------------------------------

std::vector<TableRow> decode_table(std::string_view text, const std::string& name) {
  std::vector<TableRow> rows;
  std::set<std::string> seen;
  for (const Line& line : split_lines(text)) {
    if (is_blank(line.text) || line.text.front() == '#') continue;
    const auto tab = line.text.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      fail_at_line(ErrorCode::kParse, name, line.number, line.offset, "expected 'utt_id<TAB>value'");
    }
    TableRow row{std::string(line.text.substr(0, tab)), std::string(line.text.substr(tab + 1)), line.number};
    if (!seen.insert(row.key).second) {
      fail_at_line(ErrorCode::kParse, name, line.number, line.offset, "duplicate utt_id '" + row.key + "'");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<TableRow> read_table(const fs::path& path) {
  return decode_table(read_file_bytes(path), path.string());
}

Manifest read_manifest(const fs::path& path, bool require_paths) {
  Manifest manifest;
  manifest.source = path;
  const fs::path base = path.parent_path();
  for (const auto& row : read_table(path)) {
    fs::path p = row.value;
    if (p.is_relative()) p = base / p;
    if (require_paths && !fs::exists(p)) {
      throw FileError(ErrorCode::kIo, path.string(), row.line, std::nullopt,
                      "utt_id '" + row.key + "' references missing file " + p.string());
    }
    manifest.entries.push_back({row.key, p});
  }
  return manifest;
}

std::vector<TableRow> read_transcripts(const fs::path& path) { return read_table(path); }

std::vector<std::pair<std::string, double>> read_durations(const fs::path& path) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& row : read_table(path)) {
    const auto v = parse_double(row.value);
    if (!v || !std::isfinite(*v) || *v <= 0.0) {
      throw FileError(ErrorCode::kParse, path.string(), row.line, std::nullopt,
                      "duration for '" + row.key + "' must be a positive number of seconds");
    }
    out.emplace_back(row.key, *v);
  }
  return out;
}

std::vector<TranscriptPair> pair_transcripts(const std::vector<TableRow>& ref,
                                             const std::vector<TableRow>& hyp) {
  std::map<std::string, const TableRow*> by_id;
  for (const auto& h : hyp) by_id[h.key] = &h;
  std::vector<std::string> missing_hyp, missing_ref;
  std::vector<TranscriptPair> pairs;
  std::set<std::string> ref_ids;
  for (const auto& r : ref) {
    ref_ids.insert(r.key);
    auto it = by_id.find(r.key);
    if (it == by_id.end()) {
      missing_hyp.push_back(r.key);
      continue;
    }
    pairs.push_back({r.key, r.value, it->second->value});
  }
  for (const auto& h : hyp) {
    if (!ref_ids.count(h.key)) missing_ref.push_back(h.key);
  }
  if (!missing_hyp.empty() || !missing_ref.empty()) {
    std::string msg = "utt_id sets differ";
    auto list = [&](const char* label, const std::vector<std::string>& ids) {
      if (ids.empty()) return;
      msg += std::string("; ") + label + ":";
      for (const auto& id : ids) msg += " " + id;
    };
    list("missing from hypothesis", missing_hyp);
    list("missing from reference", missing_ref);
    throw Error(ErrorCode::kAlignment, msg);
  }
  return pairs;
}

// ---------------------------------------------------------------------------

std::optional<int> parse_sampling_rate(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (c != ' ') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  double scale = 1.0;
  if (s.size() > 3 && s.ends_with("khz")) {
    s.resize(s.size() - 3);
    scale = 1000.0;
  } else if (s.size() > 2 && s.ends_with("hz")) {
    s.resize(s.size() - 2);
  } else if (s.size() > 1 && s.ends_with('k')) {
    s.resize(s.size() - 1);
    scale = 1000.0;
  }
  const auto v = parse_double(s);
  if (!v || !std::isfinite(*v) || *v <= 0.0) return std::nullopt;
  const double hz = std::round(*v * scale);
  if (hz > 1e9) return std::nullopt;
  return static_cast<int>(hz);
}

std::vector<ScoreCard> decode_scores(std::string_view text, Track track, const std::string& name) {
  const auto lines = split_lines(text);
  std::size_t li = 0;
  while (li < lines.size() && (is_blank(lines[li].text) || lines[li].text.front() == '#')) ++li;
  if (li == lines.size()) fail_at_line(ErrorCode::kSchema, name, 1, 0, "missing header row");

  auto split_tabs = [](std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      const auto tab = s.find('\t', start);
      out.emplace_back(s.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    return out;
  };
  const Line& header_line = lines[li];
  const auto header = split_tabs(header_line.text);
  if (header.empty() || header.front() != "team_id") {
    fail_at_line(ErrorCode::kSchema, name, header_line.number, header_line.offset,
                 "first column must be 'team_id'");
  }
  std::vector<std::string> required = required_metrics(track);
  if (track == Track::kTtsVocoder) required.push_back("sampling_rate_hz");
  for (const auto& col : required) {
    if (std::find(header.begin(), header.end(), col) == header.end()) {
      fail_at_line(ErrorCode::kSchema, name, header_line.number, header_line.offset,
                   "missing required column '" + col + "'");
    }
  }
  const auto metric_names = required_metrics(track);
  std::vector<ScoreCard> cards;
  for (++li; li < lines.size(); ++li) {
    const Line& line = lines[li];
    if (is_blank(line.text) || line.text.front() == '#') continue;
    const auto fields = split_tabs(line.text);
    if (fields.size() != header.size()) {
      fail_at_line(ErrorCode::kSchema, name, line.number, line.offset,
                   "row has " + std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(header.size()));
    }
    ScoreCard card;
    card.team_id = fields[0];
    card.track = track;
    if (card.team_id.empty()) fail_at_line(ErrorCode::kSchema, name, line.number, line.offset, "empty team_id");
    for (std::size_t c = 1; c < header.size(); ++c) {
      const std::string& col = header[c];
      const bool is_required = std::find(metric_names.begin(), metric_names.end(), col) != metric_names.end();
      if (col == "sampling_rate_hz") {
        if (is_blank(fields[c])) continue;
        const auto rate = parse_sampling_rate(fields[c]);
        if (!rate) {
          fail_at_line(ErrorCode::kInvalidScore, name, line.number, line.offset,
                       "team '" + card.team_id + "' has invalid sampling_rate_hz '" + fields[c] + "'");
        }
        card.sampling_rate_hz = rate;
        continue;
      }
      const auto v = parse_double(fields[c]);
      if (!v) {
        if (is_required) {
          fail_at_line(ErrorCode::kInvalidScore, name, line.number, line.offset,
                       "team '" + card.team_id + "' has non-numeric " + col + " '" + fields[c] + "'");
        }
        continue;
      }
      if (!std::isfinite(*v)) {
        fail_at_line(ErrorCode::kInvalidScore, name, line.number, line.offset,
                     "team '" + card.team_id + "' has non-finite " + col);
      }
      card.metrics[col] = *v;
    }
    if (track == Track::kTtsVocoder && !card.sampling_rate_hz) {
      fail_at_line(ErrorCode::kIncompleteCard, name, line.number, line.offset,
                   "team '" + card.team_id + "' has no sampling_rate_hz");
    }
    cards.push_back(std::move(card));
  }
  return cards;
}

std::vector<ScoreCard> read_scores(const fs::path& path, Track track) {
  return decode_scores(read_file_bytes(path), track, path.string());
}

std::string leaderboards_to_tsv(const std::vector<Leaderboard>& boards) {
  std::ostringstream os;
  bool header_written = false;
  for (const auto& board : boards) {
    if (!header_written) {
      os << "group\tposition\tteam_id";
      for (const auto& m : board.ranked_metrics) os << '\t' << m.name << "\trank_" << m.name;
      os << "\taverage_rank\tunresolved_tie\ttiebreak_trace\n";
      header_written = true;
    }
    for (const auto& e : board.entries) {
      os << board.group << '\t' << e.position << '\t' << e.team_id;
      for (const auto& m : board.ranked_metrics) {
        os << '\t' << format_g(e.metrics.at(m.name)) << '\t' << format_g(e.ranks.at(m.name));
      }
      char avg[32];
      std::snprintf(avg, sizeof avg, "%.6f", e.average_rank);
      os << '\t' << avg << '\t' << (e.unresolved_tie ? "true" : "false") << '\t' << e.tiebreak_trace << '\n';
    }
  }
  return os.str();
}

std::string leaderboards_to_json(const std::vector<Leaderboard>& boards, int indent) {
  nlohmann::ordered_json doc;
  doc["track"] = boards.empty() ? "" : std::string(to_string(boards.front().track));
  doc["groups"] = nlohmann::ordered_json::array();
  for (const auto& board : boards) {
    nlohmann::ordered_json g;
    g["group"] = board.group;
    g["ranked_metrics"] = nlohmann::ordered_json::array();
    for (const auto& m : board.ranked_metrics) {
      g["ranked_metrics"].push_back(
          {{"name", m.name}, {"label", m.label},
           {"direction", m.direction == Direction::kAscending ? "ascending" : "descending"}});
    }
    g["tiebreak_order"] = board.tiebreak_order;
    g["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : board.entries) {
      nlohmann::ordered_json j;
      j["position"] = e.position;
      j["team_id"] = e.team_id;
      if (e.sampling_rate_hz) j["sampling_rate_hz"] = *e.sampling_rate_hz;
      j["metrics"] = e.metrics;
      j["ranks"] = e.ranks;
      j["average_rank"] = e.average_rank;
      j["unresolved_tie"] = e.unresolved_tie;
      j["tiebreak_trace"] = e.tiebreak_trace;
      g["entries"].push_back(std::move(j));
    }
    doc["groups"].push_back(std::move(g));
  }
  return doc.dump(indent) + "\n";
}

}  // namespace dsu::io
