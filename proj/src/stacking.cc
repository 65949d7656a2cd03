#include <algorithm>
#include <atomic>
#include <limits>
#include <mutex>
#include <thread>

#include "finemo/streamml.h"

namespace finemo {

using nlohmann::json;

std::string to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::NaiveBayes: return "nb";
    case LearnerKind::HoeffdingTree: return "dt";
    case LearnerKind::RandomForest: return "rf";
    case LearnerKind::Sgd: return "sgd";
  }
  return "rf";
}

LearnerKind parse_learner_kind(const std::string& s) {
  if (s == "nb") return LearnerKind::NaiveBayes;
  if (s == "dt" || s == "ht") return LearnerKind::HoeffdingTree;
  if (s == "rf" || s == "arf") return LearnerKind::RandomForest;
  if (s == "sgd") return LearnerKind::Sgd;
  throw LearnerError("unknown learner: " + s);
}

std::unique_ptr<IncrementalLearner> make_learner(const LearnerSpec& spec,
                                                 std::size_t num_classes,
                                                 std::uint64_t seed) {
  switch (spec.kind) {
    case LearnerKind::NaiveBayes:
      return std::make_unique<NaiveBayes>(num_classes, spec.nb);
    case LearnerKind::HoeffdingTree:
      return std::make_unique<HoeffdingTree>(num_classes, spec.dt, seed);
    case LearnerKind::RandomForest:
      return std::make_unique<AdaptiveRandomForest>(num_classes, spec.rf, seed);
    case LearnerKind::Sgd:
      return std::make_unique<SgdClassifier>(num_classes, spec.sgd);
  }
  throw LearnerError("unknown learner kind");
}

std::unique_ptr<IncrementalLearner> learner_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "nb") return NaiveBayes::from_json(j);
  if (type == "ht") return HoeffdingTree::from_json(j);
  if (type == "arf") return AdaptiveRandomForest::from_json(j);
  if (type == "sgd") return SgdClassifier::from_json(j);
  if (type == "stacked") return StackedClassifier::from_json(j);
  throw LearnerError("unknown model type: " + type);
}

// ------------------------------------------------------------------- Stacking

StackedClassifier::StackedClassifier(std::unique_ptr<IncrementalLearner> stage1,
                                     std::unique_ptr<IncrementalLearner> stage2_pre,
                                     std::unique_ptr<IncrementalLearner> stage2_opp,
                                     Stage2Training training)
    : stage1_(std::move(stage1)),
      stage2_pre_(std::move(stage2_pre)),
      stage2_opp_(std::move(stage2_opp)),
      training_(training) {
  if (!stage1_ || !stage2_pre_ || !stage2_opp_) {
    throw LearnerError("stacked classifier needs three learners");
  }
  if (stage1_->num_classes() != kNumEmotions || stage2_pre_->num_classes() != 2 ||
      stage2_opp_->num_classes() != 2) {
    throw LearnerError("stacked classifier stage arity mismatch");
  }
}

std::unique_ptr<StackedClassifier> StackedClassifier::make(const LearnerSpec& spec,
                                                           std::uint64_t seed,
                                                           Stage2Training training) {
  return std::make_unique<StackedClassifier>(make_learner(spec, kNumEmotions, seed),
                                             make_learner(spec, 2, seed + 1),
                                             make_learner(spec, 2, seed + 2), training);
}

Emotion StackedClassifier::stage1_predict(const FeatureVector& fv) const {
  return emotion_from_index(stage1_->predict(fv));
}

Emotion StackedClassifier::stacked_predict(const FeatureVector& fv) const {
  const Emotion s1 = stage1_predict(fv);
  if (s1 == Emotion::Precaution) {
    return stage2_pre_->predict(fv) == 0 ? Emotion::Precaution : Emotion::Neutral;
  }
  if (s1 == Emotion::Opportunity) {
    return stage2_opp_->predict(fv) == 0 ? Emotion::Opportunity : Emotion::Neutral;
  }
  return Emotion::Neutral;
}

std::vector<double> StackedClassifier::predict_scores(const FeatureVector& fv) const {
  std::vector<double> scores(kNumEmotions, 0.0);
  scores[index_of(stacked_predict(fv))] = 1.0;
  return scores;
}

void StackedClassifier::partial_fit(const FeatureVector& fv, int label, double weight) {
  if (label < 0 || label >= static_cast<int>(kNumEmotions)) {
    throw LearnerError("label out of range");
  }
  const Emotion gold = emotion_from_index(label);
  bool route_pre = true;
  bool route_opp = true;
  if (training_ == Stage2Training::PredictionRouted) {
    const Emotion s1 = stage1_predict(fv);
    route_pre = s1 == Emotion::Precaution;
    route_opp = s1 == Emotion::Opportunity;
  }
  stage1_->partial_fit(fv, label, weight);
  if (route_pre && gold != Emotion::Opportunity) {
    stage2_pre_->partial_fit(fv, gold == Emotion::Precaution ? 0 : 1, weight);
  }
  if (route_opp && gold != Emotion::Precaution) {
    stage2_opp_->partial_fit(fv, gold == Emotion::Opportunity ? 0 : 1, weight);
  }
}

json StackedClassifier::to_json() const {
  return {{"type", "stacked"},
          {"training", training_ == Stage2Training::GoldRouted ? "gold" : "prediction"},
          {"stage1", stage1_->to_json()},
          {"stage2_pre", stage2_pre_->to_json()},
          {"stage2_opp", stage2_opp_->to_json()}};
}

std::unique_ptr<StackedClassifier> StackedClassifier::from_json(const json& j) {
  const std::string training = j.at("training").get<std::string>();
  if (training != "gold" && training != "prediction") {
    throw LearnerError("unknown stage-2 training mode: " + training);
  }
  return std::make_unique<StackedClassifier>(
      learner_from_json(j.at("stage1")), learner_from_json(j.at("stage2_pre")),
      learner_from_json(j.at("stage2_opp")),
      training == "gold" ? Stage2Training::GoldRouted : Stage2Training::PredictionRouted);
}

// ---------------------------------------------------------------- Grid search

std::vector<RfParams> rf_grid() {
  std::vector<RfParams> grid;
  for (std::size_t e : {10, 35, 50, 100}) {
    for (std::size_t m : {0, 35, 50, 100}) {
      for (double l : {6.0, 35.0, 50.0, 100.0}) grid.push_back({e, m, l});
    }
  }
  return grid;
}

std::vector<SgdConfig> sgd_grid() {
  std::vector<SgdConfig> grid;
  for (Penalty p : {Penalty::L1, Penalty::L2, Penalty::ElasticNet}) {
    for (double r : {0.05, 0.15, 0.9}) {
      for (double a : {1e-3, 1e-4, 1e-5}) {
        for (std::size_t it : {100, 1000, 10000}) {
          for (double tol : {1e-1, 1e-3, 1e-5}) {
            SgdConfig c;
            c.penalty = p;
            c.l1_ratio = r;
            c.alpha = a;
            c.max_iter = it;
            c.tol = tol;
            grid.push_back(c);
          }
        }
      }
    }
  }
  return grid;
}

json to_json(const RfParams& p) {
  return {{"estimators", p.estimators},
          {"max_features", p.max_features == 0 ? json("auto") : json(p.max_features)},
          {"lambda", p.lambda}};
}

json to_json(const SgdConfig& c) {
  return {{"penalty", to_string(c.penalty)}, {"l1_ratio", c.l1_ratio},
          {"alpha", c.alpha},                 {"max_iter", c.max_iter},
          {"tol", c.tol},                     {"n_iter_no_change", c.n_iter_no_change}};
}

GridResult grid_search(std::size_t grid_size,
                       const std::function<double(std::size_t)>& score,
                       std::size_t threads) {
  if (grid_size == 0) throw LearnerError("empty parameter grid");
  GridResult result;
  result.scores.assign(grid_size, 0.0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < grid_size; i = next++) {
      try {
        result.scores[i] = score(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(threads, 1, grid_size);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  result.best_index = 0;
  result.best_score = result.scores[0];
  for (std::size_t i = 1; i < grid_size; ++i) {
    if (result.scores[i] > result.best_score) {
      result.best_score = result.scores[i];
      result.best_index = i;
    }
  }
  return result;
}

double prequential_accuracy(IncrementalLearner& learner,
                            const std::vector<const FeatureVector*>& window,
                            const std::vector<int>& labels) {
  if (window.size() != labels.size()) throw LearnerError("window size mismatch");
  if (window.empty()) throw LearnerError("empty window");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (learner.predict(*window[i]) == labels[i]) ++correct;
    learner.partial_fit(*window[i], labels[i]);
  }
  return static_cast<double>(correct) / static_cast<double>(window.size());
}

}  // namespace finemo
