#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"

namespace barkit {

/// Binary confusion counts; class 1 ("AD") is positive.
struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

Confusion confusion_from_predictions(std::span<const int> predicted,
                                     std::span<const int> actual);

struct EvalReport {
  Confusion confusion;
  double accuracy = 0.0;
  /// NaN when TP + FP == 0; see precision_defined.
  double precision = 0.0;
  /// NaN when TP + FN == 0; see recall_defined.
  double recall = 0.0;
  bool precision_defined = false;
  bool recall_defined = false;
  std::vector<double> pretrain_loss;
  std::vector<double> finetune_loss;
};

/// Throws EmptyTestSet for an all-zero confusion.
EvalReport report_from_confusion(const Confusion& confusion);

/// Undefined precision/recall serialize as null.
nlohmann::json to_json(const EvalReport& report);

}  // namespace barkit
