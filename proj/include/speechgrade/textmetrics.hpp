#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "speechgrade/errors.hpp"

namespace speechgrade {

// Unit-cost Levenshtein alignment counts between a reference and a
// hypothesis token sequence.
struct EditSummary {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t ref_len = 0;
  double wer = 0.0;
};

// Whitespace tokenization, no normalization. Multibyte UTF-8 words stay
// atomic.
std::vector<std::string> tokenize(const std::string& line);

// Levenshtein DP with backtrace. Ties resolve substitution > deletion >
// insertion so counts are deterministic. Reference must be non-empty.
EditSummary edit_distance(const std::vector<std::string>& ref,
                          const std::vector<std::string>& hyp);

// (S+I+D)/|ref| on whitespace tokens; unclamped, may exceed 1.
double word_error_rate(const std::string& ref_line, const std::string& hyp_line);

// Levenshtein distance over Unicode scalar values, not bytes.
std::size_t char_edit_distance(const std::string& a, const std::string& b);

// Decodes UTF-8 into code points; invalid bytes are kept as single code
// points so distance stays total.
std::vector<char32_t> decode_utf8(const std::string& s);

}  // namespace speechgrade
