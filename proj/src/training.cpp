#include "barkit/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "barkit/error.hpp"

namespace barkit {
namespace {

constexpr std::uint64_t kPhantomStream = 0x9A;
constexpr std::uint64_t kScheduleStream = 0x5C;
constexpr std::uint64_t kDonorStream = 0xD0;
constexpr std::uint64_t kAugmentStream = 0xA6;
constexpr std::uint64_t kFinetuneStream = 0xF7;

// Batch indices within an epoch never reach this, so (epoch, batch) maps
// to a unique sub-stream index.
constexpr std::uint64_t kEpochStride = 1u << 20;

void sgd_update(EncoderParams& params, const EncoderGrads& grads, double lr,
                bool encoder, bool head) {
  if (encoder) {
    params.w1 -= lr * grads.w1;
    params.b1 -= lr * grads.b1;
    params.w2 -= lr * grads.w2;
    params.b2 -= lr * grads.b2;
  }
  if (head) {
    params.head_w -= lr * grads.head_w;
    params.head_b -= lr * grads.head_b;
  }
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::uint64_t stream,
                                     std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng::derive(seed, stream, epoch);
  std::shuffle(order.begin(), order.end(), rng.engine());
  return order;
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidConfig, msg); };
  if (batch_size < 2) fail("batch_size must be at least 2");
  if (pretrain_epochs == 0 || finetune_epochs == 0) fail("epoch counts must be positive");
  // 0 is allowed: it freezes the parameters.
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    fail("learning_rate must be non-negative");
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) fail("temperature must be positive");
  if (train_size < 2) fail("train_size must be at least 2");
  if (test_size == 0) fail("test_size must be positive");
  if (views != 1 && views != 2) fail("views must be 1 or 2");
  if (!(cutmix_alpha > 0.0)) fail("cutmix_alpha must be positive");
  if (variability_draws == 0) fail("variability_draws must be positive");
  if (const auto* fixed = std::get_if<FixedCount>(&policy)) {
    if (fixed->k == 0) fail("policy k must be positive");
  } else {
    const double p = std::get<Bernoulli>(policy).p;
    if (!(p > 0.0 && p < 1.0)) fail("policy p must lie in (0,1)");
  }
}

Dataset make_dataset(const PhantomConfig& phantom, const ParcellationAtlas& atlas,
                     std::uint64_t seed, std::uint64_t first_id, std::size_t count,
                     int pool_grid) {
  Dataset ds;
  ds.volumes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t id = first_id + i;
    const int cls = static_cast<int>(id % 2);
    Rng rng = Rng::derive(seed, kPhantomStream, id);
    Phantom p = make_phantom(phantom, atlas, cls, rng);
    ds.features.push_back(pool_features(p.volume, pool_grid));
    ds.volumes.push_back(std::move(p.volume));
    ds.labels.push_back(cls);
    ds.hard_labels.push_back(SoftLabel::one_hot(static_cast<std::size_t>(cls), 2));
    ds.ids.push_back(id);
  }
  return ds;
}

std::size_t pretrain_batches_per_epoch(const TrainConfig& cfg, std::size_t train_size) {
  return std::max<std::size_t>(1, train_size / cfg.batch_size);
}

std::vector<AugmentedSample> pretrain_batch(const Dataset& train,
                                            const ParcellationAtlas& atlas,
                                            const TrainConfig& cfg, AugmentMethod method,
                                            std::size_t epoch, std::size_t batch) {
  const std::size_t n = train.size();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "pretraining needs two samples");
  const auto order = epoch_order(n, cfg.seed, kScheduleStream, epoch);
  const std::size_t per_batch = std::min(cfg.batch_size, n);
  const std::size_t begin = batch * per_batch;
  if (begin + per_batch > n) {
    throw Error(ErrorKind::InvalidArgument, "batch index beyond epoch");
  }

  const std::uint64_t slot = epoch * kEpochStride + batch;
  Rng donor_rng = Rng::derive(cfg.seed, kDonorStream, slot);
  PairList pairs;
  for (std::size_t k = begin; k < begin + per_batch; ++k) {
    for (std::size_t v = 0; v < cfg.views; ++v) {
      // donor uniform over the other samples
      auto donor = static_cast<std::size_t>(donor_rng.uniform_int(0, static_cast<std::int64_t>(n) - 2));
      if (donor >= order[k]) ++donor;
      pairs.emplace_back(order[k], donor);
    }
  }

  const std::uint64_t aug_seed = Rng::derive_seed(cfg.seed, kAugmentStream, slot);
  if (method == AugmentMethod::Bar) {
    return bar_batch(pairs, train.source(), atlas, cfg.policy, aug_seed);
  }
  return cutmix_batch(pairs, train.source(), atlas, cfg.cutmix_alpha, aug_seed);
}

TrainResult pretrain_contrastive(EncoderParams params, const Dataset& train,
                                 const ParcellationAtlas& atlas, const TrainConfig& cfg,
                                 AugmentMethod method) {
  cfg.validate();
  params.validate();
  TrainResult result;
  const std::size_t batches = pretrain_batches_per_epoch(cfg, train.size());
  for (std::size_t epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
    double total = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const auto samples = pretrain_batch(train, atlas, cfg, method, epoch, b);
      std::vector<Eigen::VectorXd> features;
      std::vector<SoftLabel> labels;
      features.reserve(samples.size());
      labels.reserve(samples.size());
      for (const auto& s : samples) {
        features.push_back(pool_features(s.volume, params.pool_grid));
        labels.push_back(s.label);
      }
      const ContrastiveStep step = contrastive_step(params, features, labels, cfg.temperature);
      sgd_update(params, step.grads, cfg.learning_rate, /*encoder=*/true, /*head=*/false);
      total += step.loss;
    }
    result.loss_curve.push_back(total / static_cast<double>(batches));
  }
  result.params = std::move(params);
  return result;
}

CrossEntropyStep cross_entropy_step(const EncoderParams& params,
                                    std::span<const Eigen::VectorXd> features,
                                    std::span<const int> labels, bool train_encoder) {
  if (features.size() != labels.size() || features.empty()) {
    throw Error(ErrorKind::LengthMismatch, "need one label per sample");
  }
  CrossEntropyStep step;
  step.grads = EncoderGrads::zeros_like(params);
  const double scale = 1.0 / static_cast<double>(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const EncoderCache cache = encoder_forward_features(params, features[i]);
    const Eigen::VectorXd logits = head_logits(params, cache);
    const double top = logits.maxCoeff();
    const Eigen::VectorXd shifted = logits.array() - top;
    const double log_norm = std::log(shifted.array().exp().sum());
    const auto cls = static_cast<Eigen::Index>(labels[i]);
    if (cls < 0 || cls >= logits.size()) {
      throw Error(ErrorKind::InvalidLabel, "class index out of range");
    }
    step.loss += (log_norm - shifted(cls)) * scale;

    Eigen::VectorXd grad_logits = (shifted.array() - log_norm).exp().matrix();
    grad_logits(cls) -= 1.0;
    grad_logits *= scale;

    const Eigen::VectorXd& input = head_input(params, cache);
    step.grads.head_w.noalias() += grad_logits * input.transpose();
    step.grads.head_b += grad_logits;
    if (!train_encoder) continue;

    const Eigen::VectorXd grad_input = params.head_w.transpose() * grad_logits;
    Eigen::VectorXd grad_projection = grad_input;
    if (params.normalize_embedding) {
      const Eigen::VectorXd& e = cache.embedding;
      grad_projection = (grad_input - grad_input.dot(e) * e) / cache.norm;
    }
    encoder_backward(params, cache, grad_projection, step.grads);
  }
  return step;
}

TrainResult finetune_ce(EncoderParams params, const Dataset& train, const TrainConfig& cfg,
                        bool train_encoder) {
  params.validate();
  if (train.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty training set");
  if (cfg.batch_size == 0 || cfg.finetune_epochs == 0) {
    throw Error(ErrorKind::InvalidConfig, "batch size and epochs must be positive");
  }
  TrainResult result;
  for (std::size_t epoch = 0; epoch < cfg.finetune_epochs; ++epoch) {
    const auto order = epoch_order(train.size(), cfg.seed, kFinetuneStream, epoch);
    double total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      std::vector<Eigen::VectorXd> features;
      std::vector<int> labels;
      for (std::size_t k = begin; k < end; ++k) {
        features.push_back(train.features[order[k]]);
        labels.push_back(train.labels[order[k]]);
      }
      const CrossEntropyStep step = cross_entropy_step(params, features, labels, train_encoder);
      sgd_update(params, step.grads, cfg.learning_rate, train_encoder, /*head=*/true);
      total += step.loss * static_cast<double>(end - begin);
    }
    result.loss_curve.push_back(total / static_cast<double>(train.size()));
  }
  result.params = std::move(params);
  return result;
}

std::vector<int> predict(const EncoderParams& params, const Dataset& data) {
  std::vector<int> out;
  out.reserve(data.size());
  for (const auto& f : data.features) {
    const Eigen::VectorXd logits = head_logits(params, encoder_forward_features(params, f));
    Eigen::Index best = 0;
    logits.maxCoeff(&best);
    out.push_back(static_cast<int>(best));
  }
  return out;
}

EvalReport evaluate(const EncoderParams& params, const Dataset& test) {
  if (test.size() == 0) throw Error(ErrorKind::EmptyTestSet, "no test samples");
  const auto predicted = predict(params, test);
  return report_from_confusion(confusion_from_predictions(predicted, test.labels));
}

}  // namespace barkit
