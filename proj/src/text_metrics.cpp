#include "dsu/text_metrics.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "dsu/error.hpp"

namespace dsu {

namespace {

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t at = i;
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) {
      throw Error(ErrorCode::kParse, "malformed UTF-8 at byte " + std::to_string(at));
    }
    out.push_back(static_cast<char32_t>(c));
  }
  return out;
}

std::u32string normalize_code_points(std::string_view text) {
  const std::u32string raw = decode_utf8(text);
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(ErrorCode::kConfig, "ICU NFC normalizer unavailable");
  const icu::UnicodeString src = icu::UnicodeString::fromUTF32(
      reinterpret_cast<const UChar32*>(raw.data()), static_cast<int32_t>(raw.size()));
  const icu::UnicodeString composed = nfc->normalize(src, status);
  if (U_FAILURE(status)) throw Error(ErrorCode::kParse, "NFC normalization failed");

  std::u32string out;
  out.reserve(static_cast<std::size_t>(composed.length()));
  bool pending_space = false;
  for (int32_t i = 0; i < composed.length();) {
    const UChar32 c = composed.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(static_cast<char32_t>(c));
  }
  return out;
}

std::string encode_utf8(const std::u32string& text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) {
    uint8_t buf[4];
    int32_t n = 0;
    UBool error = false;
    U8_APPEND(buf, n, 4, static_cast<UChar32>(c), error);
    (void)error;  // code points come from a successful decode
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
  }
  return out;
}

}  // namespace

std::string normalize_text(std::string_view text) {
  return encode_utf8(normalize_code_points(text));
}

std::vector<char32_t> text_chars(std::string_view text, const TextOptions& options) {
  const std::u32string norm = normalize_code_points(text);
  std::vector<char32_t> out;
  out.reserve(norm.size());
  for (char32_t c : norm) {
    if (c == U' ' && !options.count_spaces) continue;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> text_words(std::string_view text) {
  const std::string norm = normalize_text(text);
  std::vector<std::string> words;
  std::size_t start = 0;
  while (start < norm.size()) {
    std::size_t end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    words.emplace_back(norm.substr(start, end - start));
    start = end + 1;
  }
  return words;
}

double ErrorCounts::rate() const {
  if (reference_length == 0) {
    throw Error(ErrorCode::kDegenerateCorpus, "total reference length is zero");
  }
  return static_cast<double>(errors) / static_cast<double>(reference_length);
}

ErrorCounts char_errors(const TranscriptPair& pair, const TextOptions& options) {
  const auto ref = text_chars(pair.reference, options);
  const auto hyp = text_chars(pair.hypothesis, options);
  return {edit_distance(ref, hyp), ref.size()};
}

ErrorCounts word_errors(const TranscriptPair& pair) {
  const auto ref = text_words(pair.reference);
  const auto hyp = text_words(pair.hypothesis);
  return {edit_distance(ref, hyp), ref.size()};
}

double cer_corpus(std::span<const TranscriptPair> pairs, const TextOptions& options) {
  ErrorCounts total;
  for (const auto& p : pairs) total += char_errors(p, options);
  return total.rate();
}

double wer_corpus(std::span<const TranscriptPair> pairs) {
  ErrorCounts total;
  for (const auto& p : pairs) total += word_errors(p);
  return total.rate();
}

}  // namespace dsu
