#include "speechgrade/confidence.hpp"

#include <algorithm>
#include <cmath>

#include "speechgrade/textmetrics.hpp"

namespace speechgrade {

namespace {

void require_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0))
    throw ValidationError(std::string("OutOfRange(") + what + "): value " +
                          std::to_string(v) + " not in [0,1]");
}

}  // namespace

void AggregationWeights::validate() const {
  if (alpha < 0.0 || beta < 0.0 || gamma < 0.0 ||
      std::abs(alpha + beta + gamma - 1.0) > 1e-9)
    throw ValidationError("InvalidWeights: alpha+beta+gamma must be 1 (got " +
                          std::to_string(alpha + beta + gamma) + ")");
}

void AnnealSchedule::validate() const {
  if (!(lambda_end >= 0.0 && lambda_end <= lambda_start && lambda_start <= 1.0))
    throw ValidationError("AnnealSchedule: need 0 <= lambda_end <= lambda_start <= 1");
  if (total_epochs == 0)
    throw ValidationError("AnnealSchedule: total_epochs must be positive");
}

std::vector<double> normalize_minmax(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("EmptyInput: nothing to normalize");
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      throw ValidationError("NonFiniteValue(" + std::to_string(i) + ")");
  const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  const double mn = *mn_it, mx = *mx_it;
  std::vector<double> out(values.size());
  if (mx == mn) {
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  for (std::size_t i = 0; i < values.size(); ++i)
    out[i] = (values[i] - mn) / (mx - mn);
  return out;
}

double perceptual_score(const std::array<double, 5>& normalized) {
  static const char* names[5] = {"f_sc", "f_sr", "f_mfcc", "f_pv", "f_e"};
  double sum = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    require_unit(normalized[i], names[i]);
    sum += normalized[i];
  }
  return sum / 5.0;
}

double acoustic_similarity(const MfccSequence& real_mfcc,
                           const MfccSequence& synth_mfcc) {
  if (real_mfcc.frames.empty() || synth_mfcc.frames.empty() ||
      real_mfcc.frames[0].size() != synth_mfcc.frames[0].size())
    throw ValidationError("DimensionMismatch: MFCC sequences incompatible");

  // mean over time concatenated with population std over time
  auto pool = [](const MfccSequence& seq) {
    const std::size_t dim = seq.frames[0].size();
    const double T = static_cast<double>(seq.frames.size());
    std::vector<double> v(2 * dim, 0.0);
    for (const auto& frame : seq.frames)
      for (std::size_t j = 0; j < dim; ++j) v[j] += frame[j];
    for (std::size_t j = 0; j < dim; ++j) v[j] /= T;
    for (const auto& frame : seq.frames)
      for (std::size_t j = 0; j < dim; ++j) {
        const double d = frame[j] - v[j];
        v[dim + j] += d * d;
      }
    for (std::size_t j = 0; j < dim; ++j) v[dim + j] = std::sqrt(v[dim + j] / T);
    return v;
  };

  const auto a = pool(real_mfcc);
  const auto b = pool(synth_mfcc);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    dot += a[j] * b[j];
    na += a[j] * a[j];
    nb += b[j] * b[j];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

double wer_score(const std::vector<std::string>& ref_words,
                 const std::vector<std::string>& hyp_words) {
  if (ref_words.empty()) throw ValidationError("EmptyReference: no reference words");
  return std::max(0.0, 1.0 - edit_distance(ref_words, hyp_words).wer);
}

double aggregate_fixed(const StaticScores& scores, const AggregationWeights& weights) {
  weights.validate();
  return weights.alpha * scores.s_perceptual + weights.beta * scores.s_sim +
         weights.gamma * scores.s_wer;
}

AggregationWeights softmax_weights(const WeightLogits& logits) {
  if (!std::isfinite(logits.w1) || !std::isfinite(logits.w2) ||
      !std::isfinite(logits.w3))
    throw ValidationError("NonFiniteLogit");
  const double mx = std::max({logits.w1, logits.w2, logits.w3});
  const double e1 = std::exp(logits.w1 - mx);
  const double e2 = std::exp(logits.w2 - mx);
  const double e3 = std::exp(logits.w3 - mx);
  const double z = e1 + e2 + e3;
  return {e1 / z, e2 / z, e3 / z};
}

double aggregate_learnable(const StaticScores& scores, const WeightLogits& logits) {
  const auto w = softmax_weights(logits);
  return w.alpha * scores.s_perceptual + w.beta * scores.s_sim + w.gamma * scores.s_wer;
}

std::array<double, 3> aggregation_gradient(const StaticScores& scores,
                                           const WeightLogits& logits) {
  const auto w = softmax_weights(logits);
  const double c = w.alpha * scores.s_perceptual + w.beta * scores.s_sim +
                   w.gamma * scores.s_wer;
  return {w.alpha * (scores.s_perceptual - c), w.beta * (scores.s_sim - c),
          w.gamma * (scores.s_wer - c)};
}

double posterior_entropy(const std::vector<double>& p) {
  double sum = 0.0;
  for (const double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ValidationError("NotADistribution: negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw ValidationError("NotADistribution: entries sum to " + std::to_string(sum));
  double h = 0.0;
  for (const double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

double model_confidence(const std::vector<std::vector<double>>& posteriors) {
  if (posteriors.empty())
    throw ValidationError("NotADistribution: no posterior frames");
  const std::size_t v = posteriors[0].size();
  if (v < 2) throw ValidationError("DegenerateVocab: need V >= 2");
  const double log_v = std::log(static_cast<double>(v));
  double acc = 0.0;
  for (std::size_t t = 0; t < posteriors.size(); ++t) {
    if (posteriors[t].size() != v)
      throw ValidationError("NotADistribution(frame " + std::to_string(t) +
                            "): inconsistent vocabulary size");
    acc += posterior_entropy(posteriors[t]) / log_v;
  }
  return 1.0 - acc / static_cast<double>(posteriors.size());
}

double lambda_at_epoch(const AnnealSchedule& schedule, std::size_t epoch) {
  schedule.validate();
  if (schedule.total_epochs <= 1) return schedule.lambda_end;
  const double frac =
      std::min(1.0, static_cast<double>(epoch) /
                        static_cast<double>(schedule.total_epochs - 1));
  return schedule.lambda_start - (schedule.lambda_start - schedule.lambda_end) * frac;
}

double hybrid_confidence(double c_static_or_learnable, double c_model, double lambda) {
  require_unit(c_static_or_learnable, "c_static");
  require_unit(c_model, "c_model");
  require_unit(lambda, "lambda");
  return lambda * c_static_or_learnable + (1.0 - lambda) * c_model;
}

std::vector<ConfidenceReport> score_corpus(const ScoreInputs& inputs,
                                           const ScoreOptions& options) {
  const auto& records = inputs.records;
  if (records.size() != inputs.features.size())
    throw ValidationError("score_corpus: records and features length mismatch");
  if (records.empty()) throw ValidationError("EmptyInput: no records to score");

  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < records.size(); ++i) by_id[records[i].utt_id] = i;

  // Eq.-style corpus-wide min-max pass, one feature at a time.
  const std::size_t n = records.size();
  std::array<std::vector<double>, 5> cols;
  for (auto& c : cols) c.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    cols[0][i] = inputs.features[i].f_sc;
    cols[1][i] = inputs.features[i].f_sr;
    cols[2][i] = inputs.features[i].f_mfcc;
    cols[3][i] = inputs.features[i].f_pv;
    cols[4][i] = inputs.features[i].f_e;
  }
  for (auto& c : cols) c = normalize_minmax(c);

  std::vector<ConfidenceReport> reports(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = records[i];
    ConfidenceReport& rep = reports[i];
    rep.utt_id = rec.utt_id;
    rep.lambda_used = options.lambda;
    rep.scores.s_perceptual = perceptual_score(
        {cols[0][i], cols[1][i], cols[2][i], cols[3][i], cols[4][i]});

    const auto mask = availability_mask(rec);
    if (mask.has_sim || mask.has_wer) {
      const auto ref_it = by_id.find(rec.aligned_ref_id);
      if (ref_it == by_id.end())
        throw ValidationError("DanglingAlignment(" + rec.utt_id + ")");
      const auto& ref_rec = records[ref_it->second];

      const auto self_mfcc = inputs.mfccs.find(rec.utt_id);
      const auto ref_mfcc = inputs.mfccs.find(ref_rec.utt_id);
      if (self_mfcc == inputs.mfccs.end() || ref_mfcc == inputs.mfccs.end())
        throw ValidationError("MissingMfcc(" + rec.utt_id +
                              "): aligned records need MFCCs for both sides");
      rep.scores.s_sim = acoustic_similarity(ref_mfcc->second, self_mfcc->second);

      const auto ref_words = tokenize(ref_rec.transcript);
      const auto hyp_it = inputs.hypotheses.find(rec.utt_id);
      if (hyp_it != inputs.hypotheses.end()) {
        rep.scores.s_wer = wer_score(ref_words, hyp_it->second);
      } else if (options.fallback_to_transcript) {
        rep.scores.s_wer = wer_score(ref_words, tokenize(rec.transcript));
      } else {
        throw ValidationError("MissingHypothesis(" + rec.utt_id + ")");
      }
    } else {
      rep.scores.s_sim = *mask.fixed_sim;
      rep.scores.s_wer = *mask.fixed_wer;
    }

    if (std::holds_alternative<AggregationWeights>(options.weighting))
      rep.c_static =
          aggregate_fixed(rep.scores, std::get<AggregationWeights>(options.weighting));
    else
      rep.c_static =
          aggregate_learnable(rep.scores, std::get<WeightLogits>(options.weighting));

    const auto cm_it = inputs.model_confidences.find(rec.utt_id);
    rep.c_model = cm_it != inputs.model_confidences.end() ? cm_it->second : 0.5;
    rep.c_final = hybrid_confidence(rep.c_static, rep.c_model, options.lambda);
  }
  return reports;
}

}  // namespace speechgrade
