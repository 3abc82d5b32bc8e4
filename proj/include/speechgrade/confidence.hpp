#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "speechgrade/corpus.hpp"
#include "speechgrade/dsp.hpp"
#include "speechgrade/errors.hpp"

namespace speechgrade {

struct StaticScores {
  double s_perceptual = 0.0;
  double s_sim = 0.0;
  double s_wer = 0.0;
};

struct AggregationWeights {
  double alpha = 0.4;
  double beta = 0.3;
  double gamma = 0.3;

  void validate() const;  // nonnegative, sum to 1 within 1e-9
};

struct WeightLogits {
  double w1 = 0.0;
  double w2 = 0.0;
  double w3 = 0.0;
};

struct ConfidenceReport {
  std::string utt_id;
  StaticScores scores;
  double c_static = 0.0;
  double c_model = 0.0;
  double c_final = 0.0;
  double lambda_used = 0.0;
};

// lambda starts at lambda_start and decays linearly to lambda_end over the
// training run.
struct AnnealSchedule {
  double lambda_start = 1.0;
  double lambda_end = 0.5;
  std::size_t total_epochs = 50;

  void validate() const;
};

// (v - min)/(max - min) over one feature across the corpus; a degenerate
// range maps everything to 0.5.
std::vector<double> normalize_minmax(const std::vector<double>& values);

// Mean of the five normalized features.
double perceptual_score(const std::array<double, 5>& normalized);

// Cosine of mean||std pooled MFCC vectors, clamped to [0,1]; zero-norm
// pooling yields 0.
double acoustic_similarity(const MfccSequence& real_mfcc,
                           const MfccSequence& synth_mfcc);

// 1 - WER, clamped below at 0.
double wer_score(const std::vector<std::string>& ref_words,
                 const std::vector<std::string>& hyp_words);

double aggregate_fixed(const StaticScores& scores, const AggregationWeights& weights);

// Softmax with max-subtraction; sums to 1 within 1e-12.
AggregationWeights softmax_weights(const WeightLogits& logits);

double aggregate_learnable(const StaticScores& scores, const WeightLogits& logits);

// dC/dw_k = a_k (S_k - C) with a = softmax(logits); components sum to 0.
std::array<double, 3> aggregation_gradient(const StaticScores& scores,
                                           const WeightLogits& logits);

// H = -sum p ln p, natural log, 0 ln 0 := 0.
double posterior_entropy(const std::vector<double>& p);

// 1 - mean over frames of H/ln(V).
double model_confidence(const std::vector<std::vector<double>>& posteriors);

double lambda_at_epoch(const AnnealSchedule& schedule, std::size_t epoch);

// lambda * c + (1 - lambda) * c_model.
double hybrid_confidence(double c_static_or_learnable, double c_model, double lambda);

using Weighting = std::variant<AggregationWeights, WeightLogits>;

struct ScoreOptions {
  Weighting weighting = AggregationWeights{};
  double lambda = 1.0;
  // Score aligned records against their own transcript when no decoded
  // hypothesis was supplied (instead of raising MissingHypothesis).
  bool fallback_to_transcript = false;
};

struct ScoreInputs {
  std::vector<CorpusRecord> records;            // manifest order
  std::vector<PerceptualFeatures> features;     // parallel to records
  // MFCCs for SyntheticAligned records and their Real partners.
  std::unordered_map<std::string, MfccSequence> mfccs;
  // Decoded words per utt_id, for the WER score of aligned records.
  std::unordered_map<std::string, std::vector<std::string>> hypotheses;
  // Per-utterance model confidence; records without an entry get 0.5.
  std::unordered_map<std::string, double> model_confidences;
};

// Full static + hybrid scoring pass over a corpus, in manifest order.
std::vector<ConfidenceReport> score_corpus(const ScoreInputs& inputs,
                                           const ScoreOptions& options);

}  // namespace speechgrade
