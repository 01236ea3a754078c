#include "schedpred/metrics.hpp"

#include "schedpred/dataset.hpp"
#include "schedpred/errors.hpp"

namespace schedpred {

Metrics metrics_from_counts(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn) {
  Metrics m{tp, tn, fp, fn, 0.0, std::nullopt, std::nullopt};
  const std::size_t total = m.total();
  if (total > 0) m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(total);
  if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return m;
}

Metrics confusion_metrics(std::span<const int> predicted, std::span<const int> actual) {
  if (predicted.size() != actual.size()) throw LengthMismatch("confusion_metrics: lengths differ");
  if (predicted.empty()) throw EmptyInput("confusion_metrics: no predictions");
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] == kFailClass;
    const bool a = actual[i] == kFailClass;
    if (p && a) ++tp;
    else if (!p && !a) ++tn;
    else if (p) ++fp;
    else ++fn;
  }
  return metrics_from_counts(tp, tn, fp, fn);
}

nlohmann::json to_json(const Metrics& m) {
  nlohmann::json j = {{"tp", m.tp},         {"tn", m.tn},         {"fp", m.fp},
                      {"fn", m.fn},         {"accuracy", m.accuracy},
                      {"precision", nullptr}, {"recall", nullptr}};
  if (m.precision) j["precision"] = *m.precision;
  if (m.recall) j["recall"] = *m.recall;
  return j;
}

}  // namespace schedpred
