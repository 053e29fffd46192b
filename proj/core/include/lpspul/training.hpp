#pragma once

#include <optional>

#include "lpspul/objective.hpp"

namespace lpspul {

/// Training inputs as the optimizer sees them: embedded samples and the
/// labeled-positive flags, nothing else. Ground-truth labels never reach
/// this type.
struct TrainView {
  std::vector<EmbeddedSample> samples;
  std::vector<std::uint8_t> labeled;

  std::size_t size() const { return samples.size(); }
  std::size_t labeled_count() const;
};

struct TrainConfig {
  int embed_dim = 4;
  int bond_dim = 2;
  int skip = 1;
  int repetitions = 1;
  double lr = 0.1;
  int epochs = 20;
  std::optional<int> patience;     // halve lr after this many non-improving epochs
  std::optional<int> batch_size;   // nullopt = one full batch
  bool resample_labeled = false;
  std::uint64_t seed = 0;
  int ensemble = 4;
  int workers = 1;
  double init_log_frobenius = 0.0;  // starting log ||P||_F for both networks
  LossWeights weights;
  Lambda7Settings lambda7;

  void validate() const;
};

/// Shuffled index batches for one epoch, seeded by (seed, epoch). With
/// resampling, every batch of size B gains B labeled-positive indices drawn
/// uniformly with replacement.
std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::uint8_t>& labeled,
                                                   std::optional<int> batch_size, bool resample_labeled,
                                                   std::uint64_t seed, int epoch);

/// First/second moment estimates mirroring both networks, plus the step
/// counter. beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
struct AdamState {
  NetworkGrad m_pos, v_pos, m_neg, v_neg;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState init(const PulModel& model);
};

/// One bias-corrected Adam update on every tensor of both networks.
/// Throws training_error naming the site on a NaN gradient.
void adam_step(PulModel& model, const BatchGradient& grads, AdamState& state, double lr);

struct EpochRecord {
  int epoch = 0;
  LossTerms terms;  // mean over the epoch's batches
  double lambda7 = 1.0;
  double labeled_accuracy = 0.0;
  double positive_fraction = 0.0;  // unlabeled samples classified positive
  double lr = 0.0;
};

struct TrainResult {
  PulModel model;
  std::vector<EpochRecord> log;
};

/// Trains one model: per epoch, regenerate batches, partition with current
/// parameters, take Adam steps; at epoch end update the lambda7 controller
/// with the labeled accuracy and apply the patience-based lr halving.
/// Deterministic given (view, basis, preprocess, cfg, member_index).
TrainResult train_model(const TrainView& view, const BasisSpec& basis, const PreprocessSpec& preprocess,
                        const TrainConfig& cfg, int member_index);

/// M independent runs with member indices 0..M-1; members may run on a small
/// thread pool (cfg.workers) without changing any bit of the result.
std::vector<TrainResult> train_ensemble(const TrainView& view, const BasisSpec& basis,
                                        const PreprocessSpec& preprocess, const TrainConfig& cfg);

}  // namespace lpspul
