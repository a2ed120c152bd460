#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace barkit {

/// Probability vector over C >= 2 classes: components in [0,1] summing to 1
/// within 1e-9.
class SoftLabel {
 public:
  static constexpr double kSumTolerance = 1e-9;

  SoftLabel() = default;
  explicit SoftLabel(std::vector<double> probs);

  static SoftLabel one_hot(std::size_t cls, std::size_t num_classes);

  /// Accepts user-supplied weights that are on the simplex within `tol`
  /// and renormalizes them exactly.
  static SoftLabel from_weights(std::span<const double> weights, double tol = 1e-6);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const noexcept { return probs_[i]; }
  const std::vector<double>& probs() const noexcept { return probs_; }

  /// Index of the largest component (first on ties).
  std::size_t argmax() const noexcept;

  friend bool operator==(const SoftLabel&, const SoftLabel&) = default;

 private:
  std::vector<double> probs_;
};

/// y = (1 - ratio) * anchor + ratio * donor.
SoftLabel mix_labels(const SoftLabel& anchor, const SoftLabel& donor, double ratio);

}  // namespace barkit
