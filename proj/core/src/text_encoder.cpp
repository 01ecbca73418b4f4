#include "kgicu/text_encoder.hpp"

#include <cmath>

#include "kgicu/errors.hpp"
#include "kgicu/rng.hpp"

namespace kgicu {

std::vector<double> HashingTextEncoder::encode(
    const std::vector<std::string>& notes_at_t, size_t dim) const {
  if (dim < 1) throw ContractError("encode_text: dimension must be >= 1");
  std::vector<double> out(dim, 0.0);
  size_t token_count = 0;
  for (const std::string& note : notes_at_t) {
    size_t start = 0;
    while (start < note.size()) {
      while (start < note.size() &&
             std::isspace(static_cast<unsigned char>(note[start])))
        ++start;
      size_t end = start;
      while (end < note.size() &&
             !std::isspace(static_cast<unsigned char>(note[end])))
        ++end;
      if (end > start) {
        const uint64_t h =
            fnv1a64(std::string_view(note.data() + start, end - start));
        const size_t bucket = static_cast<size_t>(h % dim);
        const double sign = ((h >> 32) & 1ULL) ? 1.0 : -1.0;
        out[bucket] += sign;
        ++token_count;
      }
      start = end;
    }
  }
  if (token_count == 0) return out;  // zero vector for empty note sets
  const double scale = 1.0 / std::sqrt(static_cast<double>(token_count));
  for (double& x : out) x *= scale;
  return out;
}

std::vector<double> encode_text(const std::vector<std::string>& notes_at_t,
                                size_t dim) {
  return HashingTextEncoder().encode(notes_at_t, dim);
}

}  // namespace kgicu
