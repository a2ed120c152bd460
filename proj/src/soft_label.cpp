#include "barkit/soft_label.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "barkit/error.hpp"

namespace barkit {

SoftLabel::SoftLabel(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) {
    throw Error(ErrorKind::InvalidLabel, "a label needs at least two classes");
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::InvalidLabel,
                  "component " + std::to_string(p) + " outside [0,1]");
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > kSumTolerance) {
    throw Error(ErrorKind::InvalidLabel, "components sum to " + std::to_string(sum));
  }
}

SoftLabel SoftLabel::one_hot(std::size_t cls, std::size_t num_classes) {
  if (cls >= num_classes) {
    throw Error(ErrorKind::InvalidLabel, "class index out of range");
  }
  std::vector<double> probs(num_classes, 0.0);
  probs[cls] = 1.0;
  return SoftLabel(std::move(probs));
}

SoftLabel SoftLabel::from_weights(std::span<const double> weights, double tol) {
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < -tol || w > 1.0 + tol) {
      throw Error(ErrorKind::InvalidLabel, "weight outside [0,1]");
    }
    sum += std::max(w, 0.0);
  }
  if (std::fabs(sum - 1.0) > tol || sum <= 0.0) {
    throw Error(ErrorKind::InvalidLabel,
                "weights sum to " + std::to_string(sum) + ", not 1");
  }
  std::vector<double> probs(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    probs[i] = std::clamp(std::max(weights[i], 0.0) / sum, 0.0, 1.0);
  }
  return SoftLabel(std::move(probs));
}

std::size_t SoftLabel::argmax() const noexcept {
  return static_cast<std::size_t>(
      std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

SoftLabel mix_labels(const SoftLabel& anchor, const SoftLabel& donor, double ratio) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw Error(ErrorKind::RatioOutOfRange, "ratio " + std::to_string(ratio));
  }
  if (anchor.size() != donor.size()) {
    throw Error(ErrorKind::LengthMismatch,
                std::to_string(anchor.size()) + " vs " + std::to_string(donor.size()));
  }
  std::vector<double> out(anchor.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp((1.0 - ratio) * anchor[i] + ratio * donor[i], 0.0, 1.0);
  }
  return SoftLabel(std::move(out));
}

}  // namespace barkit
