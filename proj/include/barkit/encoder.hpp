#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "barkit/random.hpp"
#include "barkit/soft_label.hpp"
#include "barkit/volume.hpp"

namespace barkit {

/// Mean-pool over a grid^3 partition of the volume. Throws DimsNotPoolable
/// unless every axis is divisible by `grid`.
Eigen::VectorXd pool_features(const Volume3D& vol, int grid);

/// Mean-pool features -> affine -> tanh -> affine -> L2 normalize, plus a
/// linear classifier head used during fine-tuning.
struct EncoderParams {
  int pool_grid = 4;
  Eigen::MatrixXd w1;  ///< hidden x features
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  ///< embedding x hidden
  Eigen::VectorXd b2;
  bool normalize_embedding = true;  ///< head sees the unit embedding when set
  Eigen::MatrixXd head_w;  ///< classes x embedding
  Eigen::VectorXd head_b;

  /// Xavier-uniform weights, zero biases.
  static EncoderParams init(Rng& rng, int pool_grid = 4, int hidden = 32,
                            int embedding = 16, int classes = 2);

  Eigen::Index feature_count() const noexcept { return w1.cols(); }
  Eigen::Index embedding_dim() const noexcept { return w2.rows(); }

  /// w1, b1, w2, b2 flattened in that order (head excluded).
  Eigen::VectorXd encoder_vector() const;
  void set_encoder_vector(const Eigen::VectorXd& flat);

  void validate() const;

  friend bool operator==(const EncoderParams& a, const EncoderParams& b);
};

struct EncoderGrads {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
  Eigen::MatrixXd head_w;
  Eigen::VectorXd head_b;

  static EncoderGrads zeros_like(const EncoderParams& params);
  Eigen::VectorXd encoder_vector() const;
};

/// Intermediates kept for backprop.
struct EncoderCache {
  Eigen::VectorXd features;
  Eigen::VectorXd hidden;      ///< after tanh
  Eigen::VectorXd projection;  ///< before normalization
  double norm = 0.0;
  Eigen::VectorXd embedding;   ///< projection / norm
};

/// Throws DegenerateNorm when the projection is (numerically) zero.
EncoderCache encoder_forward_features(const EncoderParams& params,
                                      const Eigen::VectorXd& features);
EncoderCache encoder_forward(const EncoderParams& params, const Volume3D& vol);

/// Accumulates d(loss)/d(params) given d(loss)/d(projection).
void encoder_backward(const EncoderParams& params, const EncoderCache& cache,
                      const Eigen::VectorXd& grad_projection, EncoderGrads& grads);

/// What the classifier head consumes for this sample.
const Eigen::VectorXd& head_input(const EncoderParams& params, const EncoderCache& cache);

Eigen::VectorXd head_logits(const EncoderParams& params, const EncoderCache& cache);

/// Soft-label contrastive loss over the encoder outputs of `features`, and
/// its gradient with respect to the encoder parameters.
struct ContrastiveStep {
  double loss = 0.0;
  EncoderGrads grads;
};

ContrastiveStep contrastive_step(const EncoderParams& params,
                                 std::span<const Eigen::VectorXd> features,
                                 std::span<const SoftLabel> labels, double tau);

/// Relative error of the composed encoder + contrastive loss gradient over
/// every encoder weight. Like finite_diff_check, but the denominator floor is
/// 1e-6 because near-zero weight gradients sit at rounding-noise level.
double encoder_grad_check(const EncoderParams& params,
                          std::span<const Eigen::VectorXd> features,
                          std::span<const SoftLabel> labels, double tau, double epsilon);

}  // namespace barkit
