#ifndef FINEMO_EVAL_H_
#define FINEMO_EVAL_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "finemo/emotion.h"
#include "finemo/features.h"
#include "finemo/streamml.h"

namespace finemo {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rows are gold labels, columns predictions, both in P-, N, O+ order.
using ConfusionMatrix = std::array<std::array<std::uint64_t, 3>, 3>;

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  bool precision_defined = false;  // false when nothing was predicted as the class
  bool recall_defined = false;     // false when the class never occurred
};

struct ConfusionSummary {
  std::uint64_t n = 0;
  double accuracy = 0.0;
  std::array<ClassMetrics, 3> per_class{};
};

std::uint64_t total(const ConfusionMatrix& m);
ConfusionSummary summarize(const ConfusionMatrix& m);

class PrequentialReport {
 public:
  // `series_every` samples the accuracy series every that many instances (the
  // last instance is always sampled). Instances after the first `cold_start`
  // are also tallied in a separate matrix.
  explicit PrequentialReport(std::size_t series_every = 1, std::size_t cold_start = 0);

  void record(Emotion gold, Emotion predicted);
  // Closes the series with the final point if it was not sampled.
  void finalize();

  std::uint64_t n() const { return n_; }
  std::uint64_t correct() const { return correct_; }
  double accuracy() const;
  const ConfusionMatrix& confusion() const { return confusion_; }
  const ConfusionMatrix& confusion_after_cold_start() const { return after_cold_start_; }
  std::size_t cold_start() const { return cold_start_; }
  const std::vector<std::pair<std::uint64_t, double>>& accuracy_series() const {
    return series_;
  }
  ClassMetrics class_metrics(Emotion e) const;

  nlohmann::json to_json() const;
  void write_confusion_csv(const std::filesystem::path& path) const;
  void write_accuracy_csv(const std::filesystem::path& path) const;

 private:
  std::size_t series_every_;
  std::size_t cold_start_;
  std::uint64_t n_ = 0;
  std::uint64_t correct_ = 0;
  ConfusionMatrix confusion_{};
  ConfusionMatrix after_cold_start_{};
  std::vector<std::pair<std::uint64_t, double>> series_;
};

std::string confusion_csv(const ConfusionMatrix& m);

struct PrequentialOptions {
  std::size_t series_every = 1;
  std::size_t cold_start = 0;
};

// Called after each prediction, before the learner is updated.
using PredictionCallback = std::function<void(std::size_t index, Emotion predicted)>;

// Test-then-train over a labeled stream. Every vector must carry a label.
PrequentialReport prequential_run(const std::vector<FeatureVector>& stream,
                                  IncrementalLearner& learner,
                                  const PrequentialOptions& options = {},
                                  const PredictionCallback& on_prediction = {});

// --------------------------------------------------------------- Agreement

using CoincidenceMatrix = std::array<std::array<double, 3>, 3>;

// Nominal Krippendorff alpha from a coincidence matrix.
double krippendorff_alpha(const CoincidenceMatrix& c);

// One row per annotated item, one label per annotator. Items with fewer than
// two labels contribute nothing.
CoincidenceMatrix coincidence_from_annotations(
    const std::vector<std::vector<Emotion>>& items);

struct PairAgreement {
  std::size_t first = 0;
  std::size_t second = 0;
  double accuracy = 0.0;
  std::optional<double> alpha;  // empty when undefined for the pair
};

std::vector<PairAgreement> pairwise_agreement(
    const std::vector<std::vector<Emotion>>& items);

struct AgreementReport {
  CoincidenceMatrix coincidence{};
  double alpha = 0.0;
  std::vector<PairAgreement> pairs;

  nlohmann::json to_json() const;
};

AgreementReport agreement_report(const std::vector<std::vector<Emotion>>& items);

// Reads `item_id<TAB>label<TAB>label...` lines; `#` starts a comment line.
std::vector<std::vector<Emotion>> load_annotations(const std::filesystem::path& path);

}  // namespace finemo

#endif  // FINEMO_EVAL_H_
