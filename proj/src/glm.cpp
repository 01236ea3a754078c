#include "schedpred/glm.hpp"

#include <algorithm>
#include <cmath>

#include "schedpred/errors.hpp"

namespace schedpred {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

nlohmann::json to_json(const GlmParams& p) {
  return {{"l2", p.l2}, {"max_iter", p.max_iter}, {"tol", p.tol}};
}

GlmParams glm_params_from_json(const nlohmann::json& j) {
  GlmParams p;
  for (const auto& [key, value] : j.items()) {
    if (key == "l2") p.l2 = value.get<double>();
    else if (key == "max_iter") p.max_iter = value.get<std::size_t>();
    else if (key == "tol") p.tol = value.get<double>();
    else throw ConfigError("unknown glm parameter: " + key);
  }
  return p;
}

double GlmModel::probability(std::span<const double> x) const {
  if (x.size() != mean.size()) {
    throw ArityMismatch("glm expects " + std::to_string(mean.size()) + " features, got " +
                        std::to_string(x.size()));
  }
  double z = weights[0];
  for (std::size_t f = 0; f < x.size(); ++f) z += weights[f + 1] * (x[f] - mean[f]) / scale[f];
  return sigmoid(z);
}

int GlmModel::predict(std::span<const double> x) const {
  return probability(x) >= 0.5 ? kFailClass : kFinishClass;
}

nlohmann::json GlmModel::to_json() const {
  return {{"mean", mean},
          {"scale", scale},
          {"weights", weights},
          {"iterations", iterations},
          {"converged", converged}};
}

GlmModel GlmModel::from_json(const nlohmann::json& j) {
  GlmModel m;
  m.mean = j.at("mean").get<std::vector<double>>();
  m.scale = j.at("scale").get<std::vector<double>>();
  m.weights = j.at("weights").get<std::vector<double>>();
  m.iterations = j.at("iterations").get<std::size_t>();
  m.converged = j.at("converged").get<bool>();
  if (m.scale.size() != m.mean.size() || m.weights.size() != m.mean.size() + 1) {
    throw SchemaMismatch("glm model arrays have inconsistent lengths");
  }
  return m;
}

LogisticObjective::LogisticObjective(std::vector<double> design, std::vector<int> labels,
                                     std::size_t n_features, double l2)
    : design_(std::move(design)), labels_(std::move(labels)), n_features_(n_features), l2_(l2) {
  if (design_.size() != labels_.size() * n_features_) {
    throw LengthMismatch("logistic objective: design size does not match labels");
  }
  if (labels_.empty()) throw EmptyDataset("logistic objective: no samples");
}

LogisticObjective LogisticObjective::from_dataset(const Dataset& data,
                                                  std::span<const double> mean,
                                                  std::span<const double> scale, double l2) {
  const std::size_t d = data.n_features();
  std::vector<double> design(data.size() * d);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t f = 0; f < d; ++f) design[i * d + f] = (data.value(i, f) - mean[f]) / scale[f];
  }
  return {std::move(design), std::vector<int>(data.labels().begin(), data.labels().end()), d, l2};
}

double LogisticObjective::linear(std::size_t row, std::span<const double> w) const {
  const double* x = design_.data() + row * n_features_;
  double z = w[0];
  for (std::size_t f = 0; f < n_features_; ++f) z += w[f + 1] * x[f];
  return z;
}

double LogisticObjective::value(std::span<const double> w) const {
  double ll = 0.0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const double z = linear(i, w);
    ll += labels_[i] == kFailClass ? -softplus(-z) : -softplus(z);
  }
  double penalty = 0.0;
  for (std::size_t f = 1; f < w.size(); ++f) penalty += w[f] * w[f];
  return ll / static_cast<double>(labels_.size()) - 0.5 * l2_ * penalty;
}

std::vector<double> LogisticObjective::gradient(std::span<const double> w) const {
  std::vector<double> g(dimension(), 0.0);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const double r = (labels_[i] == kFailClass ? 1.0 : 0.0) - sigmoid(linear(i, w));
    const double* x = design_.data() + i * n_features_;
    g[0] += r;
    for (std::size_t f = 0; f < n_features_; ++f) g[f + 1] += r * x[f];
  }
  const auto n = static_cast<double>(labels_.size());
  for (double& v : g) v /= n;
  for (std::size_t f = 1; f < g.size(); ++f) g[f] -= l2_ * w[f];
  return g;
}

GlmModel train_logistic(const Dataset& data, const GlmParams& params) {
  if (data.empty()) throw EmptyDataset("train_logistic: empty dataset");
  if (!(params.l2 >= 0.0)) throw ConfigError("train_logistic: l2 must be non-negative");
  if (params.max_iter == 0) throw ConfigError("train_logistic: max_iter must be positive");

  const std::size_t d = data.n_features();
  const auto n = static_cast<double>(data.size());
  GlmModel model;
  model.mean.assign(d, 0.0);
  model.scale.assign(d, 1.0);
  for (std::size_t f = 0; f < d; ++f) {
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) sum += data.value(i, f);
    const double mu = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) ss += (data.value(i, f) - mu) * (data.value(i, f) - mu);
    const double sd = std::sqrt(ss / n);
    model.mean[f] = mu;
    model.scale[f] = sd > 0.0 ? sd : 1.0;
  }

  const auto objective = LogisticObjective::from_dataset(data, model.mean, model.scale, params.l2);
  std::vector<double> w(d + 1, 0.0);
  double f = objective.value(w);
  std::vector<double> g = objective.gradient(w);
  double step = 1.0;
  std::vector<double> prev_w, prev_g;

  for (std::size_t it = 0; it < params.max_iter; ++it) {
    if (max_abs(g) < params.tol) {
      model.converged = true;
      break;
    }
    // Barzilai-Borwein step length, safeguarded by Armijo backtracking.
    if (!prev_w.empty()) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        const double s = w[k] - prev_w[k];
        const double y = prev_g[k] - g[k];
        ss += s * s;
        sy += s * y;
      }
      step = sy > 0.0 ? std::clamp(ss / sy, 1e-6, 1e6) : 1.0;
    }
    double gg = 0.0;
    for (double v : g) gg += v * v;
    std::vector<double> candidate(w.size());
    double fc = f;
    for (int attempt = 0; attempt < 60; ++attempt) {
      for (std::size_t k = 0; k < w.size(); ++k) candidate[k] = w[k] + step * g[k];
      fc = objective.value(candidate);
      if (fc >= f + 1e-4 * step * gg) break;
      step *= 0.5;
    }
    if (!(fc >= f)) break;  // no ascent possible at machine precision
    prev_w = std::move(w);
    prev_g = std::move(g);
    w = std::move(candidate);
    f = fc;
    g = objective.gradient(w);
    model.iterations = it + 1;
  }
  if (!model.converged && max_abs(g) < params.tol) model.converged = true;
  model.weights = std::move(w);
  return model;
}

}  // namespace schedpred
