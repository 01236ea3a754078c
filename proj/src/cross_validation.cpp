#include "schedpred/cross_validation.hpp"

#include <numeric>

#include "schedpred/errors.hpp"
#include "schedpred/rng.hpp"

namespace schedpred {

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw TooFewSamples("cross-validation needs at least 2 folds");
  if (n < k) {
    throw TooFewSamples("cross-validation with " + std::to_string(k) + " folds needs at least " +
                        std::to_string(k) + " samples, got " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t at = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t size = n / k + (i < n % k ? 1 : 0);
    folds[i].assign(order.begin() + static_cast<std::ptrdiff_t>(at),
                    order.begin() + static_cast<std::ptrdiff_t>(at + size));
    at += size;
  }
  return folds;
}

CvResult cross_validate(const Dataset& data, std::size_t k, const ModelSpec& spec,
                        std::uint64_t seed) {
  const auto folds = make_folds(data.size(), k, seed);
  CvResult result;
  std::vector<char> in_test(data.size());
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  double precision_sum = 0.0, recall_sum = 0.0;
  std::size_t precision_n = 0, recall_n = 0;

  for (const auto& test : folds) {
    std::fill(in_test.begin(), in_test.end(), 0);
    for (std::size_t i : test) in_test[i] = 1;
    std::vector<std::size_t> train;
    train.reserve(data.size() - test.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!in_test[i]) train.push_back(i);
    }

    const auto model = train_model(spec, data.subset(train));
    std::vector<int> predicted, actual;
    for (std::size_t i : test) {
      predicted.push_back(model->predict(data.row(i)));
      actual.push_back(data.label(i));
    }
    const Metrics m = confusion_metrics(predicted, actual);
    tp += m.tp;
    tn += m.tn;
    fp += m.fp;
    fn += m.fn;
    result.accuracy += m.accuracy;
    if (m.precision) {
      precision_sum += *m.precision;
      ++precision_n;
    }
    if (m.recall) {
      recall_sum += *m.recall;
      ++recall_n;
    }
    result.folds.push_back(m);
  }

  result.accuracy /= static_cast<double>(k);
  if (precision_n > 0) result.precision = precision_sum / static_cast<double>(precision_n);
  if (recall_n > 0) result.recall = recall_sum / static_cast<double>(recall_n);
  result.pooled = metrics_from_counts(tp, tn, fp, fn);
  return result;
}

nlohmann::json to_json(const CvResult& r) {
  nlohmann::json folds = nlohmann::json::array();
  for (const Metrics& m : r.folds) folds.push_back(to_json(m));
  nlohmann::json j = {{"k", r.folds.size()},   {"folds", folds},       {"pooled", to_json(r.pooled)},
                      {"accuracy", r.accuracy}, {"precision", nullptr}, {"recall", nullptr}};
  if (r.precision) j["precision"] = *r.precision;
  if (r.recall) j["recall"] = *r.recall;
  return j;
}

}  // namespace schedpred
