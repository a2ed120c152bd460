#include "barkit/metrics.hpp"

#include <limits>

#include "barkit/error.hpp"

namespace barkit {

Confusion confusion_from_predictions(std::span<const int> predicted,
                                     std::span<const int> actual) {
  if (predicted.size() != actual.size()) {
    throw Error(ErrorKind::LengthMismatch, "prediction and label counts differ");
  }
  Confusion c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool pred = predicted[i] == 1;
    const bool truth = actual[i] == 1;
    if (pred && truth) ++c.tp;
    else if (pred) ++c.fp;
    else if (truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

EvalReport report_from_confusion(const Confusion& c) {
  if (c.total() == 0) {
    throw Error(ErrorKind::EmptyTestSet, "no test samples");
  }
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  EvalReport r;
  r.confusion = c;
  r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  r.precision_defined = c.tp + c.fp > 0;
  r.recall_defined = c.tp + c.fn > 0;
  r.precision = r.precision_defined
                    ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp)
                    : nan;
  r.recall = r.recall_defined
                 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn)
                 : nan;
  return r;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["accuracy"] = r.accuracy;
  j["precision"] = r.precision_defined ? nlohmann::json(r.precision) : nlohmann::json(nullptr);
  j["recall"] = r.recall_defined ? nlohmann::json(r.recall) : nlohmann::json(nullptr);
  j["confusion"] = {{"tp", r.confusion.tp},
                    {"fp", r.confusion.fp},
                    {"fn", r.confusion.fn},
                    {"tn", r.confusion.tn}};
  j["pretrain_loss"] = r.pretrain_loss;
  j["finetune_loss"] = r.finetune_loss;
  return j;
}

}  // namespace barkit
