#ifndef FINEMO_STREAMML_H_
#define FINEMO_STREAMML_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "finemo/features.h"

namespace finemo {

class LearnerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Attribute ids seen by the learners: 0..19 numeric block, 20 trend, and
// 21 + c for sparse column c.
inline constexpr std::uint32_t kTrendAttribute = kNumNumeric;
inline constexpr std::uint32_t kDenseAttributes = kNumNumeric + 1;

double attribute_value(const FeatureVector& fv, std::uint32_t attribute);

// Calls fn(attribute, value) for every nonzero attribute, ascending.
template <class Fn>
void for_each_nonzero(const FeatureVector& fv, Fn&& fn) {
  for (std::uint32_t a = 0; a < kNumNumeric; ++a) {
    if (fv.numeric[a] != 0) fn(a, static_cast<double>(fv.numeric[a]));
  }
  if (fv.trend) fn(kTrendAttribute, 1.0);
  for (const auto& [c, n] : fv.sparse) {
    if (n != 0) fn(kDenseAttributes + c, static_cast<double>(n));
  }
}

// Index of the largest score; ties go to the lowest index.
int argmax(const std::vector<double>& scores);

class IncrementalLearner {
 public:
  virtual ~IncrementalLearner() = default;

  virtual std::size_t num_classes() const = 0;
  // Per-class scores; larger is better. Never mutates the learner.
  virtual std::vector<double> predict_scores(const FeatureVector& fv) const = 0;
  virtual void partial_fit(const FeatureVector& fv, int label,
                           double weight = 1.0) = 0;
  virtual double weight_seen() const = 0;
  virtual nlohmann::json to_json() const = 0;

  int predict(const FeatureVector& fv) const { return argmax(predict_scores(fv)); }
};

// ---------------------------------------------------------------- Naive Bayes

struct NbConfig {
  // Added to every per-class variance of the numeric block.
  double var_smoothing = 1e-2;
};

// Multinomial likelihood over sparse counts (add-one smoothing), Gaussian
// likelihood over the numeric block and Bernoulli likelihood over the trend.
// Scores are log posteriors up to a shared constant.
class NaiveBayes final : public IncrementalLearner {
 public:
  NaiveBayes(std::size_t num_classes, NbConfig cfg = {});

  std::size_t num_classes() const override { return class_weight_.size(); }
  std::vector<double> predict_scores(const FeatureVector& fv) const override;
  void partial_fit(const FeatureVector& fv, int label,
                   double weight = 1.0) override;
  double weight_seen() const override { return total_weight_; }
  nlohmann::json to_json() const override;
  static std::unique_ptr<NaiveBayes> from_json(const nlohmann::json& j);

  const NbConfig& config() const { return cfg_; }

 private:
  struct Moments {
    double weight = 0.0;
    double sum = 0.0;
    double sumsq = 0.0;
  };

  NbConfig cfg_;
  double total_weight_ = 0.0;
  std::vector<double> class_weight_;
  std::vector<std::array<Moments, kNumNumeric>> numeric_;
  std::vector<double> trend_true_;
  std::vector<std::unordered_map<std::uint32_t, double>> sparse_;
  std::vector<double> sparse_total_;
  std::unordered_set<std::uint32_t> vocabulary_;
};

// Log density of a normal distribution, shared by NaiveBayes and its tests.
double gaussian_log_density(double x, double mean, double variance);

// ------------------------------------------------------------- Hoeffding tree

enum class LeafPrediction { MajorityClass, NaiveBayes, NaiveBayesAdaptive };

struct HoeffdingConfig {
  double delta = 1e-7;
  double grace_period = 200;
  double tie_threshold = 0.05;
  LeafPrediction leaf_prediction = LeafPrediction::NaiveBayesAdaptive;
  std::size_t max_depth = 0;  // 0 = unlimited
  double min_branch_fraction = 0.01;
  std::size_t split_bins = 10;
  // Random attribute subspace per leaf; 0 keeps every attribute.
  std::size_t subspace_size = 0;
  std::size_t num_attributes = 0;  // needed when subspace_size > 0
  NbConfig nb;
};

// Hoeffding bound for a range R after n observations.
double hoeffding_bound(double range, double delta, double n);

class HoeffdingTree final : public IncrementalLearner {
 public:
  HoeffdingTree(std::size_t num_classes, HoeffdingConfig cfg = {},
                std::uint64_t seed = 1);
  ~HoeffdingTree() override;
  HoeffdingTree(const HoeffdingTree&) = delete;
  HoeffdingTree& operator=(const HoeffdingTree&) = delete;

  std::size_t num_classes() const override { return num_classes_; }
  std::vector<double> predict_scores(const FeatureVector& fv) const override;
  void partial_fit(const FeatureVector& fv, int label,
                   double weight = 1.0) override;
  double weight_seen() const override { return weight_seen_; }
  nlohmann::json to_json() const override;
  static std::unique_ptr<HoeffdingTree> from_json(const nlohmann::json& j);

  std::size_t num_leaves() const;
  std::size_t num_splits() const;
  std::size_t depth() const;
  const HoeffdingConfig& config() const { return cfg_; }

  struct Node;

 private:
  void attempt_split(Node& leaf);
  std::unique_ptr<Node> make_leaf(std::vector<double> inherited,
                                  std::size_t depth);
  Node& sort_to_leaf(const FeatureVector& fv) const;

  std::size_t num_classes_;
  HoeffdingConfig cfg_;
  std::mt19937_64 rng_;
  double weight_seen_ = 0.0;
  std::unique_ptr<Node> root_;
};

// ---------------------------------------------------------------------- ADWIN

class Adwin {
 public:
  explicit Adwin(double delta = 0.002);

  // Adds a value; returns true when a change was detected (the window has
  // then been shrunk).
  bool update(double value);

  double delta() const { return delta_; }
  double width() const { return width_; }
  double mean() const { return width_ > 0 ? total_ / width_ : 0.0; }

  nlohmann::json to_json() const;
  static Adwin from_json(const nlohmann::json& j);

 private:
  struct Bucket {
    double total = 0.0;
    double variance = 0.0;
  };

  void compress();
  bool detect_change();
  void drop_oldest();

  double delta_;
  // rows_[r] holds buckets of 2^r elements, oldest first.
  std::vector<std::vector<Bucket>> rows_;
  double width_ = 0.0;
  double total_ = 0.0;
  double variance_ = 0.0;
  std::uint64_t ticks_ = 0;
  static constexpr std::size_t kMaxBuckets = 5;
  static constexpr std::uint64_t kClock = 32;
  static constexpr double kMinWindow = 5;
};

// ------------------------------------------------------- Adaptive random forest

struct ArfConfig {
  std::size_t estimators = 10;
  std::size_t max_features = 0;  // 0 = round(sqrt(num_attributes))
  double lambda = 6.0;
  bool bootstrap = true;
  bool drift_detection = true;
  double warning_delta = 0.01;
  double drift_delta = 0.001;
  std::size_t num_attributes = 0;
  HoeffdingConfig tree = forest_tree_defaults();

  static HoeffdingConfig forest_tree_defaults() {
    HoeffdingConfig t;
    t.delta = 0.01;
    t.grace_period = 50;
    return t;
  }
};

class AdaptiveRandomForest final : public IncrementalLearner {
 public:
  AdaptiveRandomForest(std::size_t num_classes, ArfConfig cfg = {},
                       std::uint64_t seed = 1);
  ~AdaptiveRandomForest() override;

  std::size_t num_classes() const override { return num_classes_; }
  // Fraction of member votes per class.
  std::vector<double> predict_scores(const FeatureVector& fv) const override;
  void partial_fit(const FeatureVector& fv, int label,
                   double weight = 1.0) override;
  double weight_seen() const override { return weight_seen_; }
  nlohmann::json to_json() const override;
  static std::unique_ptr<AdaptiveRandomForest> from_json(const nlohmann::json& j);

  std::size_t drifts_detected() const { return drifts_; }
  std::size_t effective_max_features() const;
  const ArfConfig& config() const { return cfg_; }

 private:
  struct Member;
  HoeffdingConfig member_tree_config() const;

  std::size_t num_classes_;
  ArfConfig cfg_;
  std::uint64_t seed_;
  double weight_seen_ = 0.0;
  std::size_t drifts_ = 0;
  std::vector<std::unique_ptr<Member>> members_;
};

// ------------------------------------------------------------------------ SGD

enum class Penalty { L1, L2, ElasticNet };

struct SgdConfig {
  Penalty penalty = Penalty::L2;
  double l1_ratio = 0.15;
  double alpha = 1e-4;
  // Warmup epochs (grid scoring only).
  std::size_t max_iter = 1000;
  double tol = 1e-3;
  std::size_t n_iter_no_change = 5;
};

std::string to_string(Penalty p);
Penalty parse_penalty(const std::string& s);

// One-vs-rest linear classifier trained with hinge loss and the "optimal"
// learning rate 1 / (alpha * (t0 + t)).
class SgdClassifier final : public IncrementalLearner {
 public:
  SgdClassifier(std::size_t num_classes, SgdConfig cfg = {});

  std::size_t num_classes() const override { return models_.size(); }
  // Decision values w.x + b per class.
  std::vector<double> predict_scores(const FeatureVector& fv) const override;
  void partial_fit(const FeatureVector& fv, int label,
                   double weight = 1.0) override;
  double weight_seen() const override { return weight_seen_; }
  nlohmann::json to_json() const override;
  static std::unique_ptr<SgdClassifier> from_json(const nlohmann::json& j);

  // Squared norm of the weights of one binary model (wscale applied).
  double weight_norm2(std::size_t cls) const;
  double intercept(std::size_t cls) const { return models_[cls].intercept; }
  const SgdConfig& config() const { return cfg_; }

 private:
  struct Binary {
    std::vector<double> w;
    std::vector<double> q;  // applied L1 penalty per weight
    double wscale = 1.0;
    double intercept = 0.0;
    double decision(const FeatureVector& fv) const;
  };

  void ensure_size(Binary& m, std::size_t dim);

  SgdConfig cfg_;
  std::vector<Binary> models_;
  double t_ = 1.0;
  double u_ = 0.0;  // accumulated L1 penalty
  double weight_seen_ = 0.0;
};

// Epoch-wise prequential accuracy on a warmup window: up to max_iter passes
// (shuffled after the first), stopping after n_iter_no_change epochs without
// a tol improvement. Returns the accuracy of the last epoch.
double sgd_warmup_score(const SgdConfig& cfg, std::size_t num_classes,
                        const std::vector<const FeatureVector*>& warmup,
                        const std::vector<int>& labels, std::uint64_t seed);

// ------------------------------------------------------------------ Factories

enum class LearnerKind { NaiveBayes, HoeffdingTree, RandomForest, Sgd };

std::string to_string(LearnerKind k);
LearnerKind parse_learner_kind(const std::string& s);

struct LearnerSpec {
  LearnerKind kind = LearnerKind::RandomForest;
  NbConfig nb;
  HoeffdingConfig dt;
  ArfConfig rf;
  SgdConfig sgd;
};

std::unique_ptr<IncrementalLearner> make_learner(const LearnerSpec& spec,
                                                 std::size_t num_classes,
                                                 std::uint64_t seed);
std::unique_ptr<IncrementalLearner> learner_from_json(const nlohmann::json& j);

// ------------------------------------------------------------------- Stacking

enum class Stage2Training { GoldRouted, PredictionRouted };

// Stage 1 separates P-, N and O+. A non-neutral stage-1 prediction is
// re-checked by a binary learner against N.
class StackedClassifier final : public IncrementalLearner {
 public:
  StackedClassifier(std::unique_ptr<IncrementalLearner> stage1,
                    std::unique_ptr<IncrementalLearner> stage2_pre,
                    std::unique_ptr<IncrementalLearner> stage2_opp,
                    Stage2Training training = Stage2Training::GoldRouted);

  static std::unique_ptr<StackedClassifier> make(
      const LearnerSpec& spec, std::uint64_t seed,
      Stage2Training training = Stage2Training::GoldRouted);

  std::size_t num_classes() const override { return kNumEmotions; }
  // One-hot score of the final decision.
  std::vector<double> predict_scores(const FeatureVector& fv) const override;
  void partial_fit(const FeatureVector& fv, int label,
                   double weight = 1.0) override;
  double weight_seen() const override { return stage1_->weight_seen(); }
  nlohmann::json to_json() const override;
  static std::unique_ptr<StackedClassifier> from_json(const nlohmann::json& j);

  Emotion stacked_predict(const FeatureVector& fv) const;
  Emotion stage1_predict(const FeatureVector& fv) const;

  const IncrementalLearner& stage1() const { return *stage1_; }
  const IncrementalLearner& stage2_pre() const { return *stage2_pre_; }
  const IncrementalLearner& stage2_opp() const { return *stage2_opp_; }

 private:
  std::unique_ptr<IncrementalLearner> stage1_;
  std::unique_ptr<IncrementalLearner> stage2_pre_;  // 0 = P-, 1 = N
  std::unique_ptr<IncrementalLearner> stage2_opp_;  // 0 = O+, 1 = N
  Stage2Training training_;
};

// ---------------------------------------------------------------- Grid search

struct RfParams {
  std::size_t estimators = 10;
  std::size_t max_features = 0;  // 0 = auto
  double lambda = 6.0;
};

std::vector<RfParams> rf_grid();
std::vector<SgdConfig> sgd_grid();

nlohmann::json to_json(const RfParams& p);
nlohmann::json to_json(const SgdConfig& c);

struct GridResult {
  std::size_t best_index = 0;
  double best_score = 0.0;
  std::vector<double> scores;  // one per grid point, enumeration order
};

// Scores every grid point and returns the best one; ties go to the first in
// enumeration order. `threads` > 1 scores points concurrently.
GridResult grid_search(std::size_t grid_size,
                       const std::function<double(std::size_t)>& score,
                       std::size_t threads = 1);

// Final prequential accuracy of a fresh learner over a labeled window.
double prequential_accuracy(IncrementalLearner& learner,
                            const std::vector<const FeatureVector*>& window,
                            const std::vector<int>& labels);

}  // namespace finemo

#endif  // FINEMO_STREAMML_H_
