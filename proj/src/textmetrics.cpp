#include "speechgrade/textmetrics.hpp"

#include <algorithm>

namespace speechgrade {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) words.emplace_back(line.substr(start, i - start));
  }
  return words;
}

EditSummary edit_distance(const std::vector<std::string>& ref,
                          const std::vector<std::string>& hyp) {
  if (ref.empty()) throw ValidationError("EmptyReference: reference side has no tokens");
  const std::size_t m = ref.size(), n = hyp.size();
  std::vector<std::vector<std::size_t>> d(m + 1, std::vector<std::size_t>(n + 1, 0));
  for (std::size_t i = 0; i <= m; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= n; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      const std::size_t sub = d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const std::size_t del = d[i - 1][j] + 1;
      const std::size_t ins = d[i][j - 1] + 1;
      d[i][j] = std::min({sub, del, ins});
    }
  }

  // Backtrace; ties prefer substitution, then deletion, then insertion.
  EditSummary s;
  s.ref_len = m;
  std::size_t i = m, j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        d[i][j] == d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++s.substitutions;
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ++s.deletions;
      --i;
    } else {
      ++s.insertions;
      --j;
    }
  }
  s.wer = static_cast<double>(s.substitutions + s.insertions + s.deletions) /
          static_cast<double>(m);
  return s;
}

double word_error_rate(const std::string& ref_line, const std::string& hyp_line) {
  const auto ref = tokenize(ref_line);
  if (ref.empty()) throw ValidationError("EmptyReference: reference line has no words");
  return edit_distance(ref, tokenize(hyp_line)).wer;
}

std::vector<char32_t> decode_utf8(const std::string& s) {
  std::vector<char32_t> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = c;
    if (c >= 0xF0)
      len = 4, cp = c & 0x07;
    else if (c >= 0xE0)
      len = 3, cp = c & 0x0F;
    else if (c >= 0xC0)
      len = 2, cp = c & 0x1F;
    if (i + len > s.size()) len = 1, cp = c;
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) {  // broken continuation, fall back to raw byte
        len = 1;
        cp = c;
        break;
      }
      cp = (cp << 6) | (cc & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::size_t char_edit_distance(const std::string& a, const std::string& b) {
  const auto ca = decode_utf8(a);
  const auto cb = decode_utf8(b);
  const std::size_t m = ca.size(), n = cb.size();
  std::vector<std::size_t> prev(n + 1), cur(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= n; ++j) {
      cur[j] = std::min({prev[j - 1] + (ca[i - 1] == cb[j - 1] ? 0 : 1),
                         prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

}  // namespace speechgrade
