#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "barkit/augment.hpp"
#include "barkit/encoder.hpp"
#include "barkit/metrics.hpp"
#include "barkit/phantom.hpp"

namespace barkit {

struct TrainConfig {
  std::uint64_t seed = 7;
  std::size_t batch_size = 16;
  std::size_t pretrain_epochs = 30;
  std::size_t finetune_epochs = 20;
  double learning_rate = 0.05;
  double temperature = 0.1;
  RegionPolicy policy = FixedCount{2};
  std::size_t train_size = 200;
  std::size_t test_size = 100;
  /// Augmented views per anchor in a pretraining batch (1 or 2).
  std::size_t views = 1;
  /// Fine-tuning trains the head only unless set.
  bool finetune_encoder = false;
  double cutmix_alpha = 1.0;
  std::size_t variability_draws = 200;

  void validate() const;
};

/// Hard-labelled phantoms with their pooled features cached.
struct Dataset {
  std::vector<Volume3D> volumes;
  std::vector<int> labels;
  std::vector<SoftLabel> hard_labels;  ///< one-hot copies of `labels`
  std::vector<Eigen::VectorXd> features;
  std::vector<std::uint64_t> ids;

  std::size_t size() const noexcept { return volumes.size(); }
  SampleSource source() const noexcept { return {volumes, hard_labels}; }
};

/// Phantoms with ids [first_id, first_id + count); class = id % 2 and the
/// noise stream is derived from (seed, id).
Dataset make_dataset(const PhantomConfig& phantom, const ParcellationAtlas& atlas,
                     std::uint64_t seed, std::uint64_t first_id, std::size_t count,
                     int pool_grid);

struct TrainResult {
  EncoderParams params;
  std::vector<double> loss_curve;  ///< mean loss per epoch
};

/// The augmented samples of one pretraining batch. BAR and CutMix share the
/// anchor/donor schedule and sub-stream seeds; only the method differs.
std::vector<AugmentedSample> pretrain_batch(const Dataset& train,
                                            const ParcellationAtlas& atlas,
                                            const TrainConfig& cfg, AugmentMethod method,
                                            std::size_t epoch, std::size_t batch);

std::size_t pretrain_batches_per_epoch(const TrainConfig& cfg, std::size_t train_size);

/// SGD on the soft-label contrastive loss over augmented batches.
TrainResult pretrain_contrastive(EncoderParams params, const Dataset& train,
                                 const ParcellationAtlas& atlas, const TrainConfig& cfg,
                                 AugmentMethod method = AugmentMethod::Bar);

/// SGD on softmax cross-entropy with hard labels, unaugmented samples.
TrainResult finetune_ce(EncoderParams params, const Dataset& train, const TrainConfig& cfg,
                        bool train_encoder);

/// Mean cross-entropy and its gradient over a set of samples.
struct CrossEntropyStep {
  double loss = 0.0;
  EncoderGrads grads;
};

CrossEntropyStep cross_entropy_step(const EncoderParams& params,
                                    std::span<const Eigen::VectorXd> features,
                                    std::span<const int> labels, bool train_encoder);

std::vector<int> predict(const EncoderParams& params, const Dataset& data);

EvalReport evaluate(const EncoderParams& params, const Dataset& test);

}  // namespace barkit
