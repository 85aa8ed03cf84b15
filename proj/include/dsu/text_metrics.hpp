#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dsu {

struct TranscriptPair {
  std::string utt_id;
  std::string reference;
  std::string hypothesis;
};

struct TextOptions {
  // When false, spaces are dropped before character comparison.
  bool count_spaces = true;
};

/// NFC, trims both ends and collapses every whitespace run to one U+0020.
/// Input must be UTF-8; throws kParse on malformed sequences.
std::string normalize_text(std::string_view text);

/// Code points of the normalized text (spaces removed unless counted).
std::vector<char32_t> text_chars(std::string_view text, const TextOptions& options = {});

/// Whitespace-delimited words of the normalized text.
std::vector<std::string> text_words(std::string_view text);

/// Unit-cost Levenshtein distance.
template <typename T>
std::size_t edit_distance(std::span<const T> a, std::span<const T> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

template <typename T>
std::size_t edit_distance(const std::vector<T>& a, const std::vector<T>& b) {
  return edit_distance(std::span<const T>(a), std::span<const T>(b));
}

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  return edit_distance(std::span<const char>(a.data(), a.size()),
                       std::span<const char>(b.data(), b.size()));
}

/// Edit count and reference length, summed across utterances.
struct ErrorCounts {
  std::uint64_t errors = 0;
  std::uint64_t reference_length = 0;

  ErrorCounts& operator+=(const ErrorCounts& o) {
    errors += o.errors;
    reference_length += o.reference_length;
    return *this;
  }
  /// errors / reference_length; throws kDegenerateCorpus when the length is 0.
  double rate() const;
};

ErrorCounts char_errors(const TranscriptPair& pair, const TextOptions& options = {});
ErrorCounts word_errors(const TranscriptPair& pair);

/// Micro-averaged CER as a fraction: total character edits over total
/// reference characters.
double cer_corpus(std::span<const TranscriptPair> pairs, const TextOptions& options = {});

/// Micro-averaged WER as a fraction.
double wer_corpus(std::span<const TranscriptPair> pairs);

}  // namespace dsu
