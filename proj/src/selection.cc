#include "finemo/selection.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

namespace finemo {

namespace {

// Class index per sample over the sorted distinct labels.
std::vector<std::size_t> encode_classes(const std::vector<int>& y,
                                        std::size_t& num_classes) {
  std::map<int, std::size_t> ids;
  for (int label : y) ids.emplace(label, 0);
  if (ids.size() < 2) throw SelectionError("chi2 needs at least two classes");
  std::size_t next = 0;
  for (auto& [label, id] : ids) id = next++;
  num_classes = ids.size();
  std::vector<std::size_t> out;
  out.reserve(y.size());
  for (int label : y) out.push_back(ids.at(label));
  return out;
}

std::vector<double> chi2_from_observed(
    const std::vector<std::vector<double>>& observed,
    const std::vector<double>& class_count, std::size_t n_samples,
    std::size_t dim) {
  std::vector<double> scores(dim, 0.0);
  for (std::size_t f = 0; f < dim; ++f) {
    double total = 0.0;
    for (const auto& row : observed) total += row[f];
    if (total == 0.0) continue;
    double chi2 = 0.0;
    for (std::size_t c = 0; c < observed.size(); ++c) {
      const double expected =
          class_count[c] / static_cast<double>(n_samples) * total;
      const double d = observed[c][f] - expected;
      chi2 += d * d / expected;
    }
    scores[f] = chi2;
  }
  return scores;
}

}  // namespace

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw SelectionError("pearson: length mismatch");
  if (x.size() < 2) throw SelectionError("pearson: needs at least two samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw SelectionError("pearson: undefined correlation (zero variance)");
  }
  const double r = sxy / (std::sqrt(sxx) * std::sqrt(syy));
  return std::clamp(r, -1.0, 1.0);
}

std::vector<std::string> CorrelationReport::constant_features() const {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    if (!e.r) out.push_back(e.feature);
  }
  return out;
}

nlohmann::json CorrelationReport::to_json() const {
  nlohmann::json j;
  j["samples"] = samples;
  j["y_mean"] = y_mean;
  j["target_encoding"] = {{"precaution", -1}, {"neutral", 0}, {"opportunity", 1}};
  nlohmann::json features = nlohmann::json::array();
  for (const auto& e : entries) {
    if (!e.r) continue;
    features.push_back({{"feature", e.feature}, {"r", *e.r}, {"mean", e.x_mean}});
  }
  j["features"] = std::move(features);
  j["constant"] = constant_features();
  return j;
}

CorrelationReport correlation_report(
    const std::vector<std::pair<std::string, std::vector<double>>>& columns,
    const std::vector<double>& target) {
  CorrelationReport report;
  report.samples = target.size();
  if (!target.empty()) {
    report.y_mean = std::accumulate(target.begin(), target.end(), 0.0) /
                    static_cast<double>(target.size());
  }
  for (const auto& [name, values] : columns) {
    CorrelationEntry entry;
    entry.feature = name;
    if (!values.empty()) {
      entry.x_mean = std::accumulate(values.begin(), values.end(), 0.0) /
                     static_cast<double>(values.size());
    }
    try {
      entry.r = pearson(values, target);
    } catch (const SelectionError&) {
      if (values.size() != target.size()) throw;
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

std::vector<double> chi2_scores(const std::vector<std::vector<double>>& X,
                                const std::vector<int>& y) {
  if (X.size() != y.size()) throw SelectionError("chi2: row/label count mismatch");
  if (X.empty()) throw SelectionError("chi2: no samples");
  const std::size_t dim = X.front().size();
  std::size_t k = 0;
  const auto cls = encode_classes(y, k);
  std::vector<std::vector<double>> observed(k, std::vector<double>(dim, 0.0));
  std::vector<double> class_count(k, 0.0);
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (X[i].size() != dim) throw SelectionError("chi2: ragged matrix");
    class_count[cls[i]] += 1.0;
    for (std::size_t f = 0; f < dim; ++f) {
      if (X[i][f] < 0.0) throw SelectionError("chi2: negative feature value");
      observed[cls[i]][f] += X[i][f];
    }
  }
  return chi2_from_observed(observed, class_count, X.size(), dim);
}

std::vector<double> chi2_scores_sparse(const std::vector<SparseRow>& rows,
                                       std::size_t dim,
                                       const std::vector<int>& y) {
  if (rows.size() != y.size()) throw SelectionError("chi2: row/label count mismatch");
  if (rows.empty()) throw SelectionError("chi2: no samples");
  std::size_t k = 0;
  const auto cls = encode_classes(y, k);
  std::vector<std::vector<double>> observed(k, std::vector<double>(dim, 0.0));
  std::vector<double> class_count(k, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    class_count[cls[i]] += 1.0;
    for (const auto& [f, v] : rows[i]) {
      if (f >= dim) throw SelectionError("chi2: column out of range");
      if (v < 0.0) throw SelectionError("chi2: negative feature value");
      observed[cls[i]][f] += v;
    }
  }
  return chi2_from_observed(observed, class_count, rows.size(), dim);
}

nlohmann::json SelectionMask::to_json() const {
  return {{"retained", retained},
          {"percentile", percentile},
          {"score_function", score_function}};
}

SelectionMask select_percentile(const std::vector<double>& scores,
                                int percentile) {
  if (scores.empty()) throw SelectionError("select_percentile: empty scores");
  if (percentile <= 0 || percentile > 100) {
    throw SelectionError(
        fmt::format("percentile must be in (0, 100], got {}", percentile));
  }
  const std::size_t n = scores.size();
  const std::size_t k =
      (static_cast<std::size_t>(percentile) * n + 99) / 100;
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  auto key = [&](std::uint32_t i) {
    return std::isnan(scores[i]) ? -HUGE_VAL : scores[i];
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return key(a) > key(b); });
  SelectionMask mask;
  mask.percentile = percentile;
  mask.retained.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(mask.retained.begin(), mask.retained.end());
  return mask;
}

}  // namespace finemo
