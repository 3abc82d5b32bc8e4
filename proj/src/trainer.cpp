#include "speechgrade/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace speechgrade {

namespace {

void check_sample(const TrainSample& s, std::size_t n_classes, std::size_t n_features) {
  if (s.features.size() != n_features)
    throw ValidationError("DimensionMismatch: sample has " +
                          std::to_string(s.features.size()) + " features, expected " +
                          std::to_string(n_features));
  if (s.label >= n_classes)
    throw ValidationError("label " + std::to_string(s.label) + " out of range");
}

double static_confidence(const StaticScores& s, const Weighting& w) {
  if (std::holds_alternative<AggregationWeights>(w))
    return aggregate_fixed(s, std::get<AggregationWeights>(w));
  return aggregate_learnable(s, std::get<WeightLogits>(w));
}

double logits_entropy(const WeightLogits& logits) {
  const auto a = softmax_weights(logits);
  double h = 0.0;
  for (const double v : {a.alpha, a.beta, a.gamma})
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

}  // namespace

ToyModel ToyModel::zeros(std::size_t n_classes, std::size_t n_features) {
  if (n_classes < 2 || n_features < 1)
    throw ValidationError("ToyModel: need K >= 2 and D >= 1");
  ToyModel m;
  m.n_classes = n_classes;
  m.n_features = n_features;
  m.weights.assign(n_classes * n_features, 0.0);
  m.bias.assign(n_classes, 0.0);
  return m;
}

std::vector<double> forward(const ToyModel& model, std::span<const double> features) {
  if (features.size() != model.n_features)
    throw ValidationError("DimensionMismatch: feature vector has " +
                          std::to_string(features.size()) + " entries, model expects " +
                          std::to_string(model.n_features));
  std::vector<double> z(model.n_classes);
  for (std::size_t k = 0; k < model.n_classes; ++k) {
    double acc = model.bias[k];
    const double* row = model.weights.data() + k * model.n_features;
    for (std::size_t d = 0; d < model.n_features; ++d) acc += row[d] * features[d];
    z[k] = acc;
  }
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (auto& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : z) v /= sum;
  return z;
}

SampleLoss weighted_loss(const TrainSample& sample, const ToyModel& model,
                         const Weighting& weighting, double lambda,
                         std::optional<double> frozen_c_model) {
  check_sample(sample, model.n_classes, model.n_features);
  SampleLoss out;
  out.probs = forward(model, sample.features);
  out.ce = -std::log(std::max(out.probs[sample.label], 1e-300));
  if (frozen_c_model) {
    out.c_model = *frozen_c_model;
  } else {
    double h = 0.0;
    for (const double p : out.probs)
      if (p > 0.0) h -= p * std::log(p);
    out.c_model = 1.0 - h / std::log(static_cast<double>(model.n_classes));
    out.c_model = std::clamp(out.c_model, 0.0, 1.0);
  }
  out.c_static = static_confidence(sample.scores, weighting);
  out.c_final = lambda * out.c_static + (1.0 - lambda) * out.c_model;
  out.loss = out.c_final * out.ce;
  return out;
}

double batch_loss(std::span<const TrainSample> batch, const ToyModel& model,
                  const Weighting& weighting, double lambda, double mu,
                  std::span<const double> frozen_c_model) {
  if (batch.empty()) throw ValidationError("EmptyBatch");
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto frozen = frozen_c_model.empty()
                            ? std::nullopt
                            : std::optional<double>(frozen_c_model[i]);
    total += weighted_loss(batch[i], model, weighting, lambda, frozen).loss;
  }
  double loss = total / static_cast<double>(batch.size());
  if (mu > 0.0 && std::holds_alternative<WeightLogits>(weighting))
    loss -= mu * logits_entropy(std::get<WeightLogits>(weighting));
  return loss;
}

double batch_ce_with_confidence(std::span<const TrainSample> batch,
                                const ToyModel& model,
                                std::span<const double> c_final) {
  if (batch.empty()) throw ValidationError("EmptyBatch");
  if (c_final.size() != batch.size())
    throw ValidationError("confidence vector length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto p = forward(model, batch[i].features);
    total += c_final[i] * -std::log(std::max(p[batch[i].label], 1e-300));
  }
  return total / static_cast<double>(batch.size());
}

std::vector<double> batch_confidences(std::span<const TrainSample> batch,
                                      const ToyModel& model, const Weighting& weighting,
                                      double lambda,
                                      std::span<const double> frozen_c_model) {
  std::vector<double> out(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto frozen = frozen_c_model.empty()
                            ? std::nullopt
                            : std::optional<double>(frozen_c_model[i]);
    out[i] = weighted_loss(batch[i], model, weighting, lambda, frozen).c_final;
  }
  return out;
}

Gradients backward(std::span<const TrainSample> batch, const ToyModel& model,
                   const Weighting& weighting, double lambda, double mu,
                   std::span<const double> frozen_c_model) {
  if (batch.empty()) throw ValidationError("EmptyBatch");
  Gradients g;
  g.weights.assign(model.weights.size(), 0.0);
  g.bias.assign(model.bias.size(), 0.0);

  const bool learnable = std::holds_alternative<WeightLogits>(weighting);
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto frozen = frozen_c_model.empty()
                            ? std::nullopt
                            : std::optional<double>(frozen_c_model[i]);
    const auto ev = weighted_loss(batch[i], model, weighting, lambda, frozen);

    // model side: c_final is a constant multiplier by construction
    for (std::size_t k = 0; k < model.n_classes; ++k) {
      const double gz =
          ev.c_final * (ev.probs[k] - (k == batch[i].label ? 1.0 : 0.0)) * inv_n;
      g.bias[k] += gz;
      double* row = g.weights.data() + k * model.n_features;
      for (std::size_t d = 0; d < model.n_features; ++d)
        row[d] += gz * batch[i].features[d];
    }

    if (learnable) {
      const auto grad = aggregation_gradient(batch[i].scores,
                                             std::get<WeightLogits>(weighting));
      for (std::size_t k = 0; k < 3; ++k)
        g.logits[k] += inv_n * ev.ce * lambda * grad[k];
    }
  }

  if (learnable && mu > 0.0) {
    // d(-mu H(a))/dw_k = mu * a_k (ln a_k + H)
    const auto& logits = std::get<WeightLogits>(weighting);
    const auto a = softmax_weights(logits);
    const double h = logits_entropy(logits);
    const std::array<double, 3> av{a.alpha, a.beta, a.gamma};
    for (std::size_t k = 0; k < 3; ++k)
      g.logits[k] += mu * av[k] * (std::log(av[k]) + h);
  }
  return g;
}

void TrainConfig::validate() const {
  if (epochs == 0 || learning_rate <= 0.0 || batch_size == 0)
    throw ValidationError("TrainConfig: epochs, learning_rate and batch_size "
                          "must be positive");
  if (logits_learning_rate && *logits_learning_rate <= 0.0)
    throw ValidationError("TrainConfig: logits_learning_rate must be positive");
  if (weight_entropy_reg < 0.0)
    throw ValidationError("TrainConfig: weight_entropy_reg must be >= 0");
  if (mode == WeightMode::Fixed) fixed_weights.validate();
  schedule.validate();
}

TrainResult train(const std::vector<TrainSample>& dataset, const TrainConfig& config) {
  config.validate();
  if (dataset.empty()) throw ValidationError("EmptyCorpus: no training samples");

  std::size_t n_classes = 2;
  const std::size_t n_features = dataset[0].features.size();
  for (const auto& s : dataset) {
    n_classes = std::max(n_classes, s.label + 1);
    if (s.features.size() != n_features)
      throw ValidationError("DimensionMismatch: inconsistent feature dimensions");
    for (const double v : {s.scores.s_perceptual, s.scores.s_sim, s.scores.s_wer})
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError("OutOfRange: static scores must lie in [0,1]");
  }

  TrainResult result;
  result.state.model = ToyModel::zeros(n_classes, n_features);
  result.state.logits = config.initial_logits;
  result.state.rng = Rng(config.seed);
  auto& state = result.state;

  AnnealSchedule schedule = config.schedule;
  schedule.total_epochs = config.epochs;
  const double logits_lr = config.logits_learning_rate.value_or(config.learning_rate);

  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t e = 0; e < config.epochs; ++e) {
    const double lambda =
        config.mode == WeightMode::Unweighted ? 1.0 : lambda_at_epoch(schedule, e);
    const double lr = config.learning_rate * 0.5 *
                      (1.0 + std::cos(std::numbers::pi * static_cast<double>(e) /
                                      static_cast<double>(config.epochs)));
    state.rng.shuffle(order);

    // optional per-epoch freeze of the entropy term
    std::vector<double> frozen_cm;
    if (config.freeze_confidence_per_epoch && config.mode != WeightMode::Unweighted) {
      frozen_cm.resize(dataset.size());
      const double log_k = std::log(static_cast<double>(n_classes));
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto p = forward(state.model, dataset[i].features);
        double h = 0.0;
        for (const double v : p)
          if (v > 0.0) h -= v * std::log(v);
        frozen_cm[i] = std::clamp(1.0 - h / log_k, 0.0, 1.0);
      }
    }

    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < dataset.size(); start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, dataset.size() - start);
      std::vector<TrainSample> batch(len);
      std::vector<double> batch_cm(len);
      for (std::size_t j = 0; j < len; ++j) {
        batch[j] = dataset[order[start + j]];
        if (!frozen_cm.empty()) batch_cm[j] = frozen_cm[order[start + j]];
      }
      const std::span<const double> cm_span =
          frozen_cm.empty() ? std::span<const double>{}
                            : std::span<const double>(batch_cm);

      double loss;
      Gradients grads;
      if (config.mode == WeightMode::Unweighted) {
        // plain mean CE
        grads.weights.assign(state.model.weights.size(), 0.0);
        grads.bias.assign(state.model.bias.size(), 0.0);
        const double inv_n = 1.0 / static_cast<double>(len);
        loss = 0.0;
        for (const auto& s : batch) {
          const auto p = forward(state.model, s.features);
          loss += -std::log(std::max(p[s.label], 1e-300));
          for (std::size_t k = 0; k < n_classes; ++k) {
            const double gz = (p[k] - (k == s.label ? 1.0 : 0.0)) * inv_n;
            grads.bias[k] += gz;
            double* row = grads.weights.data() + k * n_features;
            for (std::size_t d = 0; d < n_features; ++d) row[d] += gz * s.features[d];
          }
        }
        loss *= inv_n;
      } else {
        const Weighting weighting =
            config.mode == WeightMode::Fixed ? Weighting(config.fixed_weights)
                                             : Weighting(state.logits);
        loss = batch_loss(batch, state.model, weighting, lambda,
                          config.weight_entropy_reg, cm_span);
        grads = backward(batch, state.model, weighting, lambda,
                         config.weight_entropy_reg, cm_span);
      }
      if (!std::isfinite(loss))
        throw NumericError("training loss is not finite at epoch " +
                           std::to_string(e));

      for (std::size_t i = 0; i < state.model.weights.size(); ++i)
        state.model.weights[i] -= lr * grads.weights[i];
      for (std::size_t i = 0; i < state.model.bias.size(); ++i)
        state.model.bias[i] -= lr * grads.bias[i];
      if (config.mode == WeightMode::Learnable) {
        state.logits.w1 -= logits_lr * grads.logits[0];
        state.logits.w2 -= logits_lr * grads.logits[1];
        state.logits.w3 -= logits_lr * grads.logits[2];
      }
      epoch_loss += loss * static_cast<double>(len);
      seen += len;
    }

    EpochLog log;
    log.epoch = e;
    log.loss = epoch_loss / static_cast<double>(seen);
    log.lambda = lambda;
    log.lr = lr;
    if (config.mode == WeightMode::Learnable) {
      const auto a = softmax_weights(state.logits);
      log.alpha = a.alpha;
      log.beta = a.beta;
      log.gamma = a.gamma;
    } else if (config.mode == WeightMode::Fixed) {
      log.alpha = config.fixed_weights.alpha;
      log.beta = config.fixed_weights.beta;
      log.gamma = config.fixed_weights.gamma;
    }
    result.log.push_back(log);
    state.epoch = e + 1;
  }
  return result;
}

ExperimentResult noise_robustness_experiment(std::uint64_t seed,
                                             double corruption_rate,
                                             bool force_unit_confidence) {
  if (corruption_rate < 0.0 || corruption_rate > 1.0)
    throw ValidationError("corruption_rate must lie in [0,1]");
  constexpr std::size_t kDim = 5;
  constexpr std::size_t kTrain = 400;
  constexpr std::size_t kTest = 200;
  const double sep = 1.25 / std::sqrt(static_cast<double>(kDim));

  Rng rng(seed);
  auto generate = [&](std::size_t n, std::vector<TrainSample>& out) {
    out.resize(n);
    for (auto& s : out) {
      s.label = rng.index(2);
      const double sign = s.label == 1 ? 1.0 : -1.0;
      s.features.resize(kDim);
      for (auto& f : s.features) f = rng.normal() + sign * sep;
    }
  };
  std::vector<TrainSample> train_set, test_set;
  generate(kTrain, train_set);
  generate(kTest, test_set);

  // Flip labels of a corruption_rate fraction, sampled without replacement
  // with weight exp(0.5 * margin): confidently-classifiable samples are the
  // likeliest to carry a wrong label.
  const std::size_t n_corrupt =
      static_cast<std::size_t>(std::llround(corruption_rate * kTrain));
  std::vector<bool> corrupted(kTrain, false);
  if (n_corrupt > 0) {
    std::vector<std::pair<double, std::size_t>> keys(kTrain);
    for (std::size_t i = 0; i < kTrain; ++i) {
      double margin = 0.0;
      for (const double f : train_set[i].features) margin += f * sep;
      margin *= train_set[i].label == 1 ? 1.0 : -1.0;
      const double u = 1.0 - rng.uniform01();  // (0, 1]
      // Efraimidis-Spirakis: top-k by log(u)/w
      keys[i] = {std::log(u) / std::exp(0.5 * margin), i};
    }
    std::sort(keys.begin(), keys.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t j = 0; j < n_corrupt; ++j) {
      const std::size_t i = keys[j].second;
      train_set[i].label = 1 - train_set[i].label;
      corrupted[i] = true;
    }
  }
  for (std::size_t i = 0; i < kTrain; ++i) {
    const double base = corrupted[i] ? 0.1 : 0.9;
    train_set[i].scores.s_perceptual = base + rng.uniform(-0.05, 0.05);
    train_set[i].scores.s_sim = base + rng.uniform(-0.05, 0.05);
    train_set[i].scores.s_wer = base + rng.uniform(-0.05, 0.05);
    if (force_unit_confidence) train_set[i].scores = {1.0, 1.0, 1.0};
  }

  TrainConfig cfg;
  cfg.seed = seed;
  cfg.mode = WeightMode::Fixed;
  if (force_unit_confidence) {
    // dyadic weights and a flat schedule keep c_final exactly 1
    cfg.fixed_weights = {0.5, 0.25, 0.25};
    cfg.schedule = {1.0, 1.0, cfg.epochs};
  } else {
    cfg.fixed_weights = {0.4, 0.3, 0.3};
    cfg.schedule = {1.0, 0.5, cfg.epochs};
  }

  TrainConfig cfg_unweighted = cfg;
  cfg_unweighted.mode = WeightMode::Unweighted;

  const auto weighted = train(train_set, cfg);
  const auto unweighted = train(train_set, cfg_unweighted);

  auto accuracy = [&](const ToyModel& m) {
    std::size_t correct = 0;
    for (const auto& s : test_set) {
      const auto p = forward(m, s.features);
      const std::size_t pred =
          std::distance(p.begin(), std::max_element(p.begin(), p.end()));
      if (pred == s.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test_set.size());
  };
  return {accuracy(weighted.state.model), accuracy(unweighted.state.model)};
}

}  // namespace speechgrade
