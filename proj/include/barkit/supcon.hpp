#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "barkit/random.hpp"
#include "barkit/soft_label.hpp"

namespace barkit {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// n raw encoder outputs (rows) with their unit-normalized copies, soft
/// labels and temperature.
class EmbeddingBatch {
 public:
  static constexpr double kMinNorm = 1e-12;

  /// Throws InvalidBatch (n < 2, d < 2, tau <= 0), LengthMismatch, or
  /// DegenerateNorm when a raw row is (numerically) zero.
  EmbeddingBatch(Matrix raw, std::vector<SoftLabel> labels, double tau);

  const Matrix& raw() const noexcept { return raw_; }
  const Matrix& normalized() const noexcept { return normalized_; }
  const Vector& norms() const noexcept { return norms_; }
  const std::vector<SoftLabel>& labels() const noexcept { return labels_; }
  double tau() const noexcept { return tau_; }
  Eigen::Index n() const noexcept { return raw_.rows(); }
  Eigen::Index d() const noexcept { return raw_.cols(); }

  /// Same labels and temperature, different raw rows.
  EmbeddingBatch with_raw(Matrix raw) const;

 private:
  Matrix raw_;
  Matrix normalized_;
  Vector norms_;
  std::vector<SoftLabel> labels_;
  double tau_;
};

struct LossReport {
  double value = 0.0;
  Vector per_anchor;          ///< 0 for excluded anchors
  std::vector<bool> valid;    ///< false where the affinity row sum is ~0
  std::size_t valid_anchor_count = 0;
  Vector affinity_row_sums;
};

/// w_ij = y_i . y_j off the diagonal, 0 on it.
Matrix label_affinity(std::span<const SoftLabel> labels);

/// Anchors whose affinity mass is at or below this are excluded.
inline constexpr double kMinAffinityMass = 1e-12;

LossReport soft_supcon_loss(const EmbeddingBatch& batch);

/// Gradient of the loss value with respect to the raw rows.
Matrix soft_supcon_grad(const EmbeddingBatch& batch);

/// Gradient on the unit sphere: the normalized-space gradient with its
/// radial component removed, so each row is orthogonal to z_i.
Matrix soft_supcon_grad_sphere(const EmbeddingBatch& batch);

struct LossAndGrad {
  LossReport report;
  Matrix grad_sphere;
  Matrix grad_raw;
};

LossAndGrad soft_supcon(const EmbeddingBatch& batch);

/// Max over raw coordinates of |analytic - central difference| /
/// max(|analytic|, |numeric|, 1e-8). epsilon must lie in (0, 1e-2].
double finite_diff_check(const EmbeddingBatch& batch, double epsilon);

/// Gaussian raw rows with two-class soft labels formed by mixing random
/// one-hot pairs, the way augmented batches look.
EmbeddingBatch random_batch(Eigen::Index n, Eigen::Index d, double tau, Rng& rng);

/// `n=<n> d=<d> tau=<tau> loss=<value> gradcheck=<maxrel>`
std::string loss_check_line(Eigen::Index n, Eigen::Index d, double tau, double loss,
                            double max_rel_error);

/// printf-style scientific notation with a bare exponent: 1.5e-3, 0.0e0.
std::string format_scientific(double value, int digits);

}  // namespace barkit
