#pragma once

#include <string>
#include <vector>

namespace kgicu {

// Maps the clinical notes of one timestep to a d-dimensional vector. An
// empty note set is by convention the exact zero vector.
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual std::vector<double> encode(const std::vector<std::string>& notes_at_t,
                                     size_t dim) const = 0;
};

// Deterministic stand-in for a pretrained note encoder: signed feature
// hashing of whitespace tokens, scaled by 1/sqrt(token count).
class HashingTextEncoder final : public TextEncoder {
 public:
  std::vector<double> encode(const std::vector<std::string>& notes_at_t,
                             size_t dim) const override;
};

std::vector<double> encode_text(const std::vector<std::string>& notes_at_t,
                                size_t dim);

}  // namespace kgicu
