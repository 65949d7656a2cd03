#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "finemo/streamml.h"

namespace finemo {

using nlohmann::json;

double attribute_value(const FeatureVector& fv, std::uint32_t attribute) {
  if (attribute < kNumNumeric) return fv.numeric[attribute];
  if (attribute == kTrendAttribute) return fv.trend ? 1.0 : 0.0;
  const std::uint32_t column = attribute - kDenseAttributes;
  auto it = std::lower_bound(
      fv.sparse.begin(), fv.sparse.end(), column,
      [](const SparseEntry& e, std::uint32_t c) { return e.first < c; });
  if (it == fv.sparse.end() || it->first != column) return 0.0;
  return it->second;
}

int argmax(const std::vector<double>& scores) {
  int best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = static_cast<int>(i);
  }
  return best;
}

double gaussian_log_density(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) -
         d * d / (2.0 * variance);
}

NaiveBayes::NaiveBayes(std::size_t num_classes, NbConfig cfg)
    : cfg_(cfg),
      class_weight_(num_classes, 0.0),
      numeric_(num_classes),
      trend_true_(num_classes, 0.0),
      sparse_(num_classes),
      sparse_total_(num_classes, 0.0) {
  if (num_classes < 2) throw LearnerError("naive Bayes needs at least two classes");
  if (!(cfg.var_smoothing > 0.0)) throw LearnerError("var_smoothing must be positive");
}

std::vector<double> NaiveBayes::predict_scores(const FeatureVector& fv) const {
  const std::size_t k_count = class_weight_.size();
  if (total_weight_ <= 0.0) {
    return std::vector<double>(k_count, -std::log(static_cast<double>(k_count)));
  }
  double vocab = static_cast<double>(vocabulary_.size());
  for (const auto& [c, n] : fv.sparse) {
    if (!vocabulary_.contains(c)) vocab += 1.0;
  }
  std::vector<double> scores(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double cw = class_weight_[k];
    if (cw <= 0.0) {
      scores[k] = -std::numeric_limits<double>::infinity();
      continue;
    }
    double s = std::log(cw / total_weight_);
    const double denom = sparse_total_[k] + vocab;
    for (const auto& [c, n] : fv.sparse) {
      auto it = sparse_[k].find(c);
      const double count = it == sparse_[k].end() ? 0.0 : it->second;
      s += n * std::log((count + 1.0) / denom);
    }
    for (std::size_t a = 0; a < kNumNumeric; ++a) {
      const Moments& m = numeric_[k][a];
      const double mean = m.sum / m.weight;
      const double var = std::max(m.sumsq / m.weight - mean * mean, 0.0);
      s += gaussian_log_density(fv.numeric[a], mean, var + cfg_.var_smoothing);
    }
    const double p = (trend_true_[k] + 1.0) / (cw + 2.0);
    s += std::log(fv.trend ? p : 1.0 - p);
    scores[k] = s;
  }
  return scores;
}

void NaiveBayes::partial_fit(const FeatureVector& fv, int label, double weight) {
  if (label < 0 || static_cast<std::size_t>(label) >= class_weight_.size()) {
    throw LearnerError("label out of range");
  }
  if (weight <= 0.0) return;
  const auto k = static_cast<std::size_t>(label);
  total_weight_ += weight;
  class_weight_[k] += weight;
  for (std::size_t a = 0; a < kNumNumeric; ++a) {
    const double x = fv.numeric[a];
    Moments& m = numeric_[k][a];
    m.weight += weight;
    m.sum += weight * x;
    m.sumsq += weight * x * x;
  }
  if (fv.trend) trend_true_[k] += weight;
  for (const auto& [c, n] : fv.sparse) {
    sparse_[k][c] += weight * n;
    sparse_total_[k] += weight * n;
    vocabulary_.insert(c);
  }
}

json NaiveBayes::to_json() const {
  json j;
  j["type"] = "nb";
  j["num_classes"] = class_weight_.size();
  j["var_smoothing"] = cfg_.var_smoothing;
  j["total_weight"] = total_weight_;
  j["class_weight"] = class_weight_;
  j["trend_true"] = trend_true_;
  j["sparse_total"] = sparse_total_;
  json numeric = json::array();
  json sparse = json::array();
  for (std::size_t k = 0; k < class_weight_.size(); ++k) {
    json rows = json::array();
    for (const Moments& m : numeric_[k]) rows.push_back({m.weight, m.sum, m.sumsq});
    numeric.push_back(std::move(rows));
    std::vector<std::pair<std::uint32_t, double>> entries(sparse_[k].begin(),
                                                          sparse_[k].end());
    std::sort(entries.begin(), entries.end());
    sparse.push_back(entries);
  }
  j["numeric"] = std::move(numeric);
  j["sparse"] = std::move(sparse);
  std::vector<std::uint32_t> vocab(vocabulary_.begin(), vocabulary_.end());
  std::sort(vocab.begin(), vocab.end());
  j["vocabulary"] = vocab;
  return j;
}

std::unique_ptr<NaiveBayes> NaiveBayes::from_json(const json& j) {
  NbConfig cfg;
  cfg.var_smoothing = j.at("var_smoothing").get<double>();
  auto nb = std::make_unique<NaiveBayes>(j.at("num_classes").get<std::size_t>(), cfg);
  nb->total_weight_ = j.at("total_weight").get<double>();
  nb->class_weight_ = j.at("class_weight").get<std::vector<double>>();
  nb->trend_true_ = j.at("trend_true").get<std::vector<double>>();
  nb->sparse_total_ = j.at("sparse_total").get<std::vector<double>>();
  for (std::size_t k = 0; k < nb->class_weight_.size(); ++k) {
    const json& rows = j.at("numeric").at(k);
    for (std::size_t a = 0; a < kNumNumeric; ++a) {
      nb->numeric_[k][a] = {rows.at(a).at(0).get<double>(),
                            rows.at(a).at(1).get<double>(),
                            rows.at(a).at(2).get<double>()};
    }
    for (const json& e : j.at("sparse").at(k)) {
      nb->sparse_[k][e.at(0).get<std::uint32_t>()] = e.at(1).get<double>();
    }
  }
  for (const json& c : j.at("vocabulary")) nb->vocabulary_.insert(c.get<std::uint32_t>());
  return nb;
}

}  // namespace finemo
