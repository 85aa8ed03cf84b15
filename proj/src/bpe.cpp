#include <algorithm>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <unordered_map>

#include "dsu/discretize.hpp"
#include "dsu/error.hpp"

namespace dsu {

namespace {

using PairKey = std::uint64_t;

constexpr PairKey make_key(Token left, Token right) {
  return (static_cast<PairKey>(left) << 32) | right;
}
constexpr Token key_left(PairKey k) { return static_cast<Token>(k >> 32); }
constexpr Token key_right(PairKey k) { return static_cast<Token>(k & 0xffffffffu); }

// Highest count first; ties to the lower left symbol, then lower right.
struct Candidate {
  std::int64_t count;
  Token left;
  Token right;
  bool operator<(const Candidate& o) const {
    if (count != o.count) return count > o.count;
    if (left != o.left) return left < o.left;
    return right < o.right;
  }
};

// Doubly linked token list over the whole corpus with incremental pair counts.
class MergeState {
 public:
  explicit MergeState(std::span<const UnitStream> corpus) {
    std::size_t total = 0;
    for (const auto& s : corpus) total += s.tokens.size();
    sym_.reserve(total);
    prev_.reserve(total);
    next_.reserve(total);
    for (const auto& s : corpus) {
      const auto start = static_cast<std::int64_t>(sym_.size());
      const auto len = static_cast<std::int64_t>(s.tokens.size());
      for (std::int64_t i = 0; i < len; ++i) {
        sym_.push_back(s.tokens[static_cast<std::size_t>(i)]);
        prev_.push_back(i == 0 ? -1 : start + i - 1);
        next_.push_back(i + 1 == len ? -1 : start + i + 1);
      }
    }
    alive_.assign(sym_.size(), true);
    for (std::size_t p = 0; p < sym_.size(); ++p) {
      if (next_[p] >= 0) add(sym_[p], sym_[static_cast<std::size_t>(next_[p])], static_cast<std::int64_t>(p));
    }
  }

  bool best(Candidate& out) const {
    if (queue_.empty()) return false;
    out = *queue_.begin();
    return true;
  }

  void merge(Token a, Token b, Token merged) {
    const PairKey key = make_key(a, b);
    auto node = positions_.extract(key);
    if (node.empty()) return;
    std::vector<std::int64_t>& where = node.mapped();
    std::sort(where.begin(), where.end());
    where.erase(std::unique(where.begin(), where.end()), where.end());
    for (std::int64_t p : where) {
      const auto up = static_cast<std::size_t>(p);
      if (!alive_[up] || sym_[up] != a) continue;
      const std::int64_t q = next_[up];
      if (q < 0 || sym_[static_cast<std::size_t>(q)] != b) continue;
      const std::int64_t before = prev_[up];
      const std::int64_t after = next_[static_cast<std::size_t>(q)];
      if (before >= 0) remove(sym_[static_cast<std::size_t>(before)], a);
      remove(a, b);
      if (after >= 0) remove(b, sym_[static_cast<std::size_t>(after)]);
      sym_[up] = merged;
      alive_[static_cast<std::size_t>(q)] = false;
      next_[up] = after;
      if (after >= 0) prev_[static_cast<std::size_t>(after)] = p;
      if (before >= 0) add(sym_[static_cast<std::size_t>(before)], merged, before);
      if (after >= 0) add(merged, sym_[static_cast<std::size_t>(after)], p);
    }
  }

 private:
  void set_count(PairKey key, std::int64_t old_count, std::int64_t new_count) {
    if (old_count > 0) queue_.erase(Candidate{old_count, key_left(key), key_right(key)});
    if (new_count > 0) queue_.insert(Candidate{new_count, key_left(key), key_right(key)});
  }

  void add(Token left, Token right, std::int64_t pos) {
    const PairKey key = make_key(left, right);
    std::int64_t& c = counts_[key];
    set_count(key, c, c + 1);
    ++c;
    positions_[key].push_back(pos);
  }

  void remove(Token left, Token right) {
    const PairKey key = make_key(left, right);
    auto it = counts_.find(key);
    if (it == counts_.end() || it->second == 0) return;
    set_count(key, it->second, it->second - 1);
    if (--it->second == 0) counts_.erase(it);
  }

  std::vector<Token> sym_;
  std::vector<std::int64_t> prev_;
  std::vector<std::int64_t> next_;
  std::vector<bool> alive_;
  std::unordered_map<PairKey, std::int64_t> counts_;
  std::unordered_map<PairKey, std::vector<std::int64_t>> positions_;
  std::set<Candidate> queue_;
};

}  // namespace

BpeModel::BpeModel(std::uint32_t base_vocab_size, std::vector<BpeMerge> merges)
    : base_vocab_size_(base_vocab_size), merges_(std::move(merges)) {
  if (base_vocab_size_ == 0) throw Error(ErrorCode::kInvalidTarget, "BPE base alphabet is empty");
  expansions_.resize(base_vocab_size_ + merges_.size());
  for (Token t = 0; t < base_vocab_size_; ++t) expansions_[t] = {t};
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    const BpeMerge& m = merges_[i];
    const Token expected = base_vocab_size_ + static_cast<Token>(i);
    if (m.result != expected || m.left >= expected || m.right >= expected) {
      throw Error(ErrorCode::kInvalidTarget,
                  "BPE merge " + std::to_string(i) + " must define symbol " +
                      std::to_string(expected) + " from earlier symbols");
    }
    auto& e = expansions_[expected];
    e = expansions_[m.left];
    e.insert(e.end(), expansions_[m.right].begin(), expansions_[m.right].end());
  }
}

const std::vector<Token>& BpeModel::expansion(Token symbol) const {
  if (symbol >= expansions_.size()) {
    throw Error(ErrorCode::kInvalidToken, "symbol " + std::to_string(symbol) +
                                              " is outside BPE vocabulary of size " +
                                              std::to_string(expansions_.size()));
  }
  return expansions_[symbol];
}

BpeModel bpe_train(std::span<const UnitStream> corpus, std::uint32_t target_vocab) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "BPE training corpus is empty");
  const std::uint32_t base = corpus.front().vocab_size;
  for (const auto& s : corpus) {
    if (s.vocab_size != base) {
      throw Error(ErrorCode::kInvalidRepresentation,
                  "BPE corpus streams must share one vocab_size (" + std::to_string(base) +
                      " vs " + std::to_string(s.vocab_size) + ")");
    }
    s.validate();
  }
  if (target_vocab < base) {
    throw Error(ErrorCode::kInvalidTarget, "target vocabulary " + std::to_string(target_vocab) +
                                               " is smaller than base alphabet " +
                                               std::to_string(base));
  }
  MergeState state(corpus);
  std::vector<BpeMerge> merges;
  while (base + merges.size() < target_vocab) {
    Candidate top{};
    if (!state.best(top) || top.count < 2) break;
    const Token merged = base + static_cast<Token>(merges.size());
    merges.push_back({top.left, top.right, merged});
    state.merge(top.left, top.right, merged);
  }
  return BpeModel(base, std::move(merges));
}

UnitStream bpe_encode(const UnitStream& stream, const BpeModel& model) {
  for (std::size_t i = 0; i < stream.tokens.size(); ++i) {
    if (stream.tokens[i] >= model.base_vocab_size()) {
      throw Error(ErrorCode::kInvalidToken,
                  "token " + std::to_string(stream.tokens[i]) + " at index " + std::to_string(i) +
                      " is outside the BPE base alphabet of size " +
                      std::to_string(model.base_vocab_size()));
    }
  }
  std::unordered_map<PairKey, std::size_t> rank;
  rank.reserve(model.merges().size());
  for (std::size_t i = 0; i < model.merges().size(); ++i) {
    rank.emplace(make_key(model.merges()[i].left, model.merges()[i].right), i);
  }

  // A merge only creates pairs that later merges reference, so repeatedly
  // applying the lowest-ranked present merge visits merges in training order.
  std::vector<Token> seq = stream.tokens;
  std::vector<Token> scratch;
  while (seq.size() >= 2) {
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      auto it = rank.find(make_key(seq[i], seq[i + 1]));
      if (it != rank.end() && it->second < best) best = it->second;
    }
    if (best == std::numeric_limits<std::size_t>::max()) break;
    const BpeMerge& m = model.merges()[best];
    scratch.clear();
    for (std::size_t i = 0; i < seq.size();) {
      if (i + 1 < seq.size() && seq[i] == m.left && seq[i + 1] == m.right) {
        scratch.push_back(m.result);
        i += 2;
      } else {
        scratch.push_back(seq[i]);
        ++i;
      }
    }
    seq.swap(scratch);
  }
  return UnitStream{std::move(seq), model.total_vocab_size()};
}

UnitStream bpe_decode(const UnitStream& stream, const BpeModel& model) {
  UnitStream out;
  out.vocab_size = model.base_vocab_size();
  for (Token t : stream.tokens) {
    const auto& e = model.expansion(t);
    out.tokens.insert(out.tokens.end(), e.begin(), e.end());
  }
  return out;
}

}  // namespace dsu
