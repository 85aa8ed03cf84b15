#include <algorithm>
#include <cmath>

#include "dsu/discretize.hpp"
#include "dsu/error.hpp"

namespace dsu {

UnitStream dedup(const UnitStream& stream) {
  UnitStream out;
  out.vocab_size = stream.vocab_size;
  out.tokens.reserve(stream.tokens.size());
  for (Token t : stream.tokens) {
    if (out.tokens.empty() || out.tokens.back() != t) out.tokens.push_back(t);
  }
  return out;
}

std::size_t F0Contour::voiced_count() const {
  return static_cast<std::size_t>(
      std::count_if(frames.begin(), frames.end(), [](const F0Frame& f) { return f.voiced; }));
}

std::uint32_t f0_vocab_size(double f0_max_hz, double resolution_hz) {
  if (!(resolution_hz > 0.0)) throw Error(ErrorCode::kConfig, "F0 resolution must be positive");
  if (!(f0_max_hz > 0.0)) throw Error(ErrorCode::kConfig, "F0 ceiling must be positive");
  return 1 + static_cast<std::uint32_t>(std::lround(f0_max_hz / resolution_hz)) + 1;
}

UnitStream quantize_f0(const F0Contour& contour, double resolution_hz) {
  UnitStream out;
  out.vocab_size = f0_vocab_size(contour.f0_max_hz, resolution_hz);
  out.tokens.reserve(contour.frames.size());
  const Token top = out.vocab_size - 1;
  for (const auto& frame : contour.frames) {
    if (!frame.voiced || !(frame.f0_hz > 0.0)) {
      out.tokens.push_back(0);
      continue;
    }
    // Extractors may interpolate slightly past the ceiling; clamp to the top bin.
    const double bin = std::round(frame.f0_hz / resolution_hz) + 1.0;
    out.tokens.push_back(bin >= static_cast<double>(top) ? top : static_cast<Token>(bin));
  }
  return out;
}

}  // namespace dsu
