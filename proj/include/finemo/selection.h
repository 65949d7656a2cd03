#ifndef FINEMO_SELECTION_H_
#define FINEMO_SELECTION_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace finemo {

class SelectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pearson correlation coefficient. Throws on length mismatch, fewer than two
// samples or zero variance.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct CorrelationEntry {
  std::string feature;
  std::optional<double> r;  // empty for constant features
  double x_mean = 0.0;
};

struct CorrelationReport {
  double y_mean = 0.0;
  std::size_t samples = 0;
  std::vector<CorrelationEntry> entries;

  std::vector<std::string> constant_features() const;
  nlohmann::json to_json() const;
};

// Correlates every named column with the target.
CorrelationReport correlation_report(
    const std::vector<std::pair<std::string, std::vector<double>>>& columns,
    const std::vector<double>& target);

// Count-based chi-squared statistic per feature for nonnegative features.
// `X` is row-major (one row per sample).
std::vector<double> chi2_scores(const std::vector<std::vector<double>>& X,
                                const std::vector<int>& y);

using SparseRow = std::vector<std::pair<std::uint32_t, double>>;
std::vector<double> chi2_scores_sparse(const std::vector<SparseRow>& rows,
                                       std::size_t dim,
                                       const std::vector<int>& y);

struct SelectionMask {
  std::vector<std::uint32_t> retained;  // ascending
  int percentile = 15;
  std::string score_function = "chi2";

  nlohmann::json to_json() const;
};

// Keeps the ceil(percentile * N / 100) best scores; ties go to the lower
// index.
SelectionMask select_percentile(const std::vector<double>& scores,
                                int percentile);

}  // namespace finemo

#endif  // FINEMO_SELECTION_H_
