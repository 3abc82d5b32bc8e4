#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "speechgrade/errors.hpp"

namespace speechgrade {

inline constexpr const char* kBos = "<s>";
inline constexpr const char* kEos = "</s>";
inline constexpr const char* kUnk = "<unk>";

struct Hypothesis {
  std::vector<std::string> words;
  double acoustic_score = 0.0;  // natural-log domain
};

struct CorrectionConfig {
  std::size_t max_char_edits = 2;
  double edit_penalty = 0.8;  // log10 units per character edit
  std::size_t beam_width = 8;
  double lm_weight = 1.0;

  void validate() const;
};

// Interpolated Kneser-Ney n-gram model with one estimated discount per
// order (D = n1/(n1 + 2 n2), falling back to 0.75 when the count-of-counts
// are degenerate). Lower orders use continuation counts except for
// <s>-initial grams, which keep raw counts. Probabilities and backoff
// weights are stored in log10, ARPA style.
class NGramModel {
 public:
  static constexpr std::size_t kMaxOrder = 5;

  static NGramModel train(const std::vector<std::vector<std::string>>& sentences,
                          std::size_t order);

  std::size_t order() const { return order_; }
  // Predictable tokens: corpus words plus </s> and <unk>, never <s>.
  std::vector<std::string> predictable_vocab() const;
  double discount(std::size_t k) const { return discounts_.at(k); }

  // log10 P(word | context), walking backoff from the longest stored
  // history. OOV tokens map to <unk>. <s> is only valid inside context.
  double conditional_log10(const std::vector<std::string>& context,
                           const std::string& word) const;

  // Total log10 probability of the sentence with implicit <s> context and
  // terminal </s>.
  double logprob(const std::vector<std::string>& words) const;

  // 10^(-total_log10 / predicted tokens); each </s> counts as predicted.
  double perplexity(const std::vector<std::vector<std::string>>& sentences) const;

  std::string to_arpa() const;
  void dump_arpa(const std::string& path) const;
  static NGramModel from_arpa_text(const std::string& text);
  static NGramModel load_arpa(const std::string& path);

 private:
  using Gram = std::vector<std::uint32_t>;
  struct GramHash {
    std::size_t operator()(const Gram& g) const {
      std::size_t h = 1469598103934665603ull;
      for (const std::uint32_t v : g) {
        h ^= v;
        h *= 1099511628211ull;
      }
      return h;
    }
  };
  struct Entry {
    double log10_prob = 0.0;
    double log10_backoff = 0.0;  // 0 unless the gram is a context (k < n)
  };
  using Table = std::unordered_map<Gram, Entry, GramHash>;

  std::uint32_t intern(const std::string& token);
  std::uint32_t lookup_or_unk(const std::string& token) const;
  double conditional_log10_ids(const Gram& context, std::uint32_t word) const;

  std::size_t order_ = 0;
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, std::uint32_t> token_to_id_;
  std::vector<Table> tables_;       // tables_[k] holds k-grams, k = 1..order
  std::vector<double> discounts_;   // discounts_[k], k = 1..order (training only)
};

// argmax over acoustic + lm_weight * ln(10) * logprob + length_bonus * len;
// ties break toward the lowest index.
std::size_t rescore_nbest(const std::vector<Hypothesis>& hypotheses,
                          const NGramModel& model, double lm_weight,
                          double length_bonus);

// Substitution-only lattice correction: per position the candidates are the
// incumbent word plus lexicon words within max_char_edits; beam search
// maximizes lm_weight * logprob increments minus edit_penalty per character
// edit. Ties resolve to the lexicographically smaller word sequence.
std::vector<std::string> correct_transcript(const std::vector<std::string>& hyp,
                                            const NGramModel& model,
                                            const std::vector<std::string>& lexicon,
                                            const CorrectionConfig& cfg);

}  // namespace speechgrade
