#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "speechgrade/confidence.hpp"
#include "speechgrade/errors.hpp"
#include "speechgrade/rng.hpp"

namespace speechgrade {

// Linear softmax classifier standing in for the fine-tuned acoustic model;
// small enough that every gradient claim is checkable by finite differences.
struct ToyModel {
  std::size_t n_classes = 0;
  std::size_t n_features = 0;
  std::vector<double> weights;  // row-major, n_classes x n_features
  std::vector<double> bias;     // n_classes

  static ToyModel zeros(std::size_t n_classes, std::size_t n_features);
};

struct TrainSample {
  std::vector<double> features;
  std::size_t label = 0;
  StaticScores scores;
};

enum class WeightMode { Fixed, Learnable, Unweighted };

struct TrainConfig {
  std::size_t epochs = 50;
  double learning_rate = 1e-2;
  // Logits follow learning_rate unless a separate rate is requested.
  std::optional<double> logits_learning_rate;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  WeightMode mode = WeightMode::Fixed;
  AggregationWeights fixed_weights{};
  WeightLogits initial_logits{};
  AnnealSchedule schedule{};
  double weight_entropy_reg = 0.0;  // mu; pushes learnable weights toward uniform
  // Cache c_model per sample at the start of each epoch instead of
  // recomputing the entropy every step.
  bool freeze_confidence_per_epoch = false;

  void validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double lr = 0.0;
};

struct TrainState {
  ToyModel model;
  WeightLogits logits;
  std::size_t epoch = 0;
  Rng rng{0};
};

struct TrainResult {
  TrainState state;
  std::vector<EpochLog> log;
};

// softmax(Wx + b), max-subtracted.
std::vector<double> forward(const ToyModel& model, std::span<const double> features);

struct SampleLoss {
  double loss = 0.0;     // c_final * ce
  double ce = 0.0;       // -ln p[label]
  double c_final = 0.0;
  double c_static = 0.0;
  double c_model = 0.0;  // detached from the gradient
  std::vector<double> probs;
};

// c_model may be overridden (epoch-frozen value); otherwise it is
// 1 - H(p)/ln K from the forward pass.
SampleLoss weighted_loss(const TrainSample& sample, const ToyModel& model,
                         const Weighting& weighting, double lambda,
                         std::optional<double> frozen_c_model = std::nullopt);

// Mean weighted loss; in learnable mode adds -mu * H(softmax(logits)).
double batch_loss(std::span<const TrainSample> batch, const ToyModel& model,
                  const Weighting& weighting, double lambda, double mu = 0.0,
                  std::span<const double> frozen_c_model = {});

// Mean of c[i] * CE_i with externally fixed confidences; the finite-
// difference oracle for the model gradient perturbs the model under these
// frozen weights because c_model is detached by definition.
double batch_ce_with_confidence(std::span<const TrainSample> batch,
                                const ToyModel& model, std::span<const double> c_final);

std::vector<double> batch_confidences(std::span<const TrainSample> batch,
                                      const ToyModel& model, const Weighting& weighting,
                                      double lambda,
                                      std::span<const double> frozen_c_model = {});

struct Gradients {
  std::vector<double> weights;
  std::vector<double> bias;
  std::array<double, 3> logits{0.0, 0.0, 0.0};
};

Gradients backward(std::span<const TrainSample> batch, const ToyModel& model,
                   const Weighting& weighting, double lambda, double mu = 0.0,
                   std::span<const double> frozen_c_model = {});

TrainResult train(const std::vector<TrainSample>& dataset, const TrainConfig& config);

struct ExperimentResult {
  double acc_weighted = 0.0;
  double acc_unweighted = 0.0;
};

// Two Gaussian clusters (D=5, 400 train / 200 test); a corruption_rate
// fraction of training labels is flipped, sampled toward high-margin
// points (uniform flips leave a well-specified linear boundary in place
// and show nothing). Corrupted samples get static scores near 0.1, clean
// ones near 0.9. Both arms share data and seed. force_unit_confidence pins
// every confidence to 1, collapsing the weighted arm onto the unweighted
// one (reduction check).
ExperimentResult noise_robustness_experiment(std::uint64_t seed,
                                             double corruption_rate,
                                             bool force_unit_confidence = false);

}  // namespace speechgrade
