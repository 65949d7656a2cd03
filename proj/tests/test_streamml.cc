#include "doctest.h"

#include <cmath>
#include <random>

#include "finemo/streamml.h"
#include "synthetic.h"

using namespace finemo;
using finemo::test::random_stream;

namespace {

FeatureVector dense_point(int a, int b, bool trend = false) {
  FeatureVector fv;
  fv.numeric[0] = a;
  fv.numeric[1] = b;
  fv.trend = trend;
  return fv;
}

// Class 0 when x0 < 50, class 1 otherwise.
std::vector<std::pair<FeatureVector, int>> threshold_stream(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, 99);
  std::vector<std::pair<FeatureVector, int>> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int x = u(rng);
    out.push_back({dense_point(x, u(rng)), x < 50 ? 0 : 1});
  }
  return out;
}

double accuracy_after(IncrementalLearner& learner,
                      const std::vector<std::pair<FeatureVector, int>>& data,
                      std::size_t train) {
  for (std::size_t i = 0; i < train; ++i) learner.partial_fit(data[i].first, data[i].second);
  std::size_t correct = 0;
  for (std::size_t i = train; i < data.size(); ++i) {
    correct += learner.predict(data[i].first) == data[i].second;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size() - train);
}

}  // namespace

TEST_SUITE("streamml") {
  TEST_CASE("attribute ids") {
    FeatureVector fv = dense_point(3, 0, true);
    fv.sparse = {{2, 5}, {7, 1}};
    CHECK(attribute_value(fv, 0) == 3);
    CHECK(attribute_value(fv, kTrendAttribute) == 1);
    CHECK(attribute_value(fv, kDenseAttributes + 2) == 5);
    CHECK(attribute_value(fv, kDenseAttributes + 3) == 0);
    std::vector<std::uint32_t> seen;
    for_each_nonzero(fv, [&](std::uint32_t a, double) { seen.push_back(a); });
    CHECK(seen == std::vector<std::uint32_t>{0, kTrendAttribute, kDenseAttributes + 2,
                                             kDenseAttributes + 7});
    CHECK(argmax({1, 3, 3}) == 1);
  }

  TEST_CASE("naive Bayes prediction does not change the model") {
    const auto data = random_stream(1, 200, 20);
    NaiveBayes nb(3);
    for (std::size_t i = 0; i < 100; ++i) nb.partial_fit(data[i], index_of(*data[i].label));
    const auto before = nb.to_json();
    for (std::size_t i = 100; i < 200; ++i) nb.predict_scores(data[i]);
    CHECK(nb.to_json() == before);
  }

  TEST_CASE("naive Bayes with no data is uniform") {
    NaiveBayes nb(3);
    const auto s = nb.predict_scores(dense_point(1, 1));
    CHECK(s[0] == s[1]);
    CHECK(s[1] == s[2]);
    CHECK(nb.predict(dense_point(1, 1)) == 0);
  }

  TEST_CASE("naive Bayes weights act like repetition") {
    const auto data = random_stream(2, 150, 15);
    NaiveBayes weighted(3), repeated(3);
    for (const auto& fv : data) {
      weighted.partial_fit(fv, index_of(*fv.label), 2.0);
      repeated.partial_fit(fv, index_of(*fv.label));
      repeated.partial_fit(fv, index_of(*fv.label));
    }
    for (const auto& fv : data) CHECK(weighted.predict(fv) == repeated.predict(fv));
  }

  TEST_CASE("naive Bayes JSON round trip") {
    const auto data = random_stream(3, 120, 25);
    NaiveBayes nb(3);
    for (const auto& fv : data) nb.partial_fit(fv, index_of(*fv.label));
    const auto back = NaiveBayes::from_json(nb.to_json());
    for (const auto& fv : data) CHECK(back->predict_scores(fv) == nb.predict_scores(fv));
  }

  TEST_CASE("naive Bayes rejects bad input") {
    CHECK_THROWS_AS(NaiveBayes(1), LearnerError);
    NaiveBayes nb(3);
    CHECK_THROWS_AS(nb.partial_fit(dense_point(0, 0), 3), LearnerError);
  }

  TEST_CASE("gaussian density") {
    CHECK(gaussian_log_density(0, 0, 1) == doctest::Approx(-0.5 * std::log(2 * M_PI)));
    CHECK(gaussian_log_density(2, 0, 1) < gaussian_log_density(1, 0, 1));
  }

  TEST_CASE("hoeffding bound") {
    CHECK(hoeffding_bound(1, 1e-7, 100) > hoeffding_bound(1, 1e-7, 1000));
    CHECK(hoeffding_bound(1, 1e-3, 100) < hoeffding_bound(1, 1e-7, 100));
    CHECK(hoeffding_bound(2, 1e-7, 100) == doctest::Approx(2 * hoeffding_bound(1, 1e-7, 100)));
    CHECK(hoeffding_bound(1, 1.0, 50) == doctest::Approx(0.0));
  }

  TEST_CASE("hoeffding tree learns a threshold") {
    HoeffdingConfig cfg;
    cfg.leaf_prediction = LeafPrediction::MajorityClass;
    cfg.grace_period = 50;
    HoeffdingTree tree(2, cfg);
    CHECK(accuracy_after(tree, threshold_stream(1, 4000), 3000) > 0.9);
    CHECK(tree.num_splits() >= 1);
    CHECK(tree.num_leaves() == tree.num_splits() + 1);
  }

  TEST_CASE("hoeffding tree does not split a constant stream") {
    HoeffdingTree tree(3);
    for (int i = 0; i < 2000; ++i) tree.partial_fit(dense_point(5, 5), i % 3);
    CHECK(tree.num_splits() == 0);
    CHECK(tree.depth() == 0);
  }

  TEST_CASE("hoeffding tree respects max depth") {
    HoeffdingConfig cfg;
    cfg.max_depth = 1;
    cfg.grace_period = 50;
    HoeffdingTree tree(2, cfg);
    const auto data = threshold_stream(2, 3000);
    for (const auto& [fv, y] : data) tree.partial_fit(fv, y);
    CHECK(tree.depth() <= 1);
  }

  TEST_CASE("hoeffding tree JSON round trip") {
    HoeffdingConfig cfg;
    cfg.grace_period = 50;
    HoeffdingTree tree(3, cfg, 5);
    const auto data = random_stream(4, 800, 30);
    for (const auto& fv : data) tree.partial_fit(fv, index_of(*fv.label));
    const auto back = HoeffdingTree::from_json(tree.to_json());
    CHECK(back->to_json() == tree.to_json());
    for (const auto& fv : data) CHECK(back->predict(fv) == tree.predict(fv));
  }

  TEST_CASE("ADWIN keeps a stationary window and cuts on a change") {
    Adwin stable(0.002);
    std::mt19937_64 rng(1);
    std::bernoulli_distribution low(0.2), high(0.8);
    std::size_t alarms = 0;
    for (int i = 0; i < 2000; ++i) alarms += stable.update(low(rng) ? 1.0 : 0.0);
    CHECK(alarms == 0);
    CHECK(stable.width() == 2000);
    CHECK(stable.mean() == doctest::Approx(0.2).epsilon(0.1));

    bool detected = false;
    for (int i = 0; i < 1000 && !detected; ++i) detected = stable.update(high(rng) ? 1.0 : 0.0);
    CHECK(detected);
    CHECK(stable.width() < 3000);
  }

  TEST_CASE("ADWIN JSON round trip") {
    Adwin a(0.01);
    for (int i = 0; i < 300; ++i) a.update(i % 3 == 0 ? 1.0 : 0.0);
    const Adwin b = Adwin::from_json(a.to_json());
    CHECK(b.to_json() == a.to_json());
  }

  TEST_CASE("forest subspace size") {
    ArfConfig cfg;
    cfg.num_attributes = 100;
    CHECK(AdaptiveRandomForest(3, cfg).effective_max_features() == 10);
    cfg.max_features = 35;
    CHECK(AdaptiveRandomForest(3, cfg).effective_max_features() == 35);
    cfg.max_features = 500;
    CHECK(AdaptiveRandomForest(3, cfg).effective_max_features() == 0);
  }

  TEST_CASE("one-member forest without resampling equals its tree") {
    const auto data = random_stream(5, 1500, 20);
    ArfConfig cfg;
    cfg.estimators = 1;
    cfg.bootstrap = false;
    cfg.drift_detection = false;
    cfg.num_attributes = kDenseAttributes + 20;
    cfg.max_features = cfg.num_attributes;
    AdaptiveRandomForest forest(3, cfg, 9);
    HoeffdingTree tree(3, cfg.tree, 9);
    for (const auto& fv : data) {
      CHECK(forest.predict(fv) == tree.predict(fv));
      forest.partial_fit(fv, index_of(*fv.label));
      tree.partial_fit(fv, index_of(*fv.label));
    }
  }

  TEST_CASE("forest is deterministic for a seed") {
    const auto data = random_stream(6, 1000, 30);
    ArfConfig cfg;
    cfg.num_attributes = kDenseAttributes + 30;
    AdaptiveRandomForest a(3, cfg, 4), b(3, cfg, 4);
    for (const auto& fv : data) {
      CHECK(a.predict_scores(fv) == b.predict_scores(fv));
      a.partial_fit(fv, index_of(*fv.label));
      b.partial_fit(fv, index_of(*fv.label));
    }
    CHECK(a.to_json() == b.to_json());
    const auto back = AdaptiveRandomForest::from_json(a.to_json());
    for (std::size_t i = 0; i < 50; ++i) CHECK(back->predict(data[i]) == a.predict(data[i]));
  }

  TEST_CASE("forest votes sum to one") {
    ArfConfig cfg;
    cfg.estimators = 7;
    cfg.num_attributes = kDenseAttributes + 10;
    AdaptiveRandomForest f(3, cfg);
    const auto data = random_stream(7, 300, 10);
    for (const auto& fv : data) f.partial_fit(fv, index_of(*fv.label));
    const auto s = f.predict_scores(data[0]);
    CHECK(s[0] + s[1] + s[2] == doctest::Approx(1.0));
  }

  TEST_CASE("forest reacts to an abrupt concept change") {
    ArfConfig cfg;
    cfg.num_attributes = kDenseAttributes;
    AdaptiveRandomForest f(2, cfg, 3);
    auto data = threshold_stream(8, 6000);
    for (std::size_t i = 3000; i < data.size(); ++i) data[i].second = 1 - data[i].second;
    for (const auto& [fv, y] : data) f.partial_fit(fv, y);
    CHECK(f.drifts_detected() > 0);
    const auto fresh = threshold_stream(9, 500);
    std::size_t correct = 0;
    for (const auto& [fv, y] : fresh) correct += f.predict(fv) == 1 - y;
    CHECK(correct > 400);
  }

  TEST_CASE("SGD separates a linear problem") {
    SgdConfig cfg;
    cfg.alpha = 1e-4;
    SgdClassifier sgd(2, cfg);
    std::vector<std::pair<FeatureVector, int>> data;
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> u(-10, 10);
    for (int i = 0; i < 3000; ++i) {
      int a = u(rng), b = u(rng);
      if (a == b) continue;
      data.push_back({dense_point(a, b), a > b ? 1 : 0});
    }
    CHECK(accuracy_after(sgd, data, 2000) > 0.95);
  }

  TEST_CASE("SGD with a large penalty keeps small weights") {
    SgdConfig strong, weak;
    strong.alpha = 1.0;
    weak.alpha = 1e-5;
    SgdClassifier a(3, strong), b(3, weak);
    const auto data = random_stream(10, 500, 20);
    for (const auto& fv : data) {
      a.partial_fit(fv, index_of(*fv.label));
      b.partial_fit(fv, index_of(*fv.label));
    }
    for (std::size_t k = 0; k < 3; ++k) CHECK(a.weight_norm2(k) < b.weight_norm2(k));
  }

  TEST_CASE("SGD L1 and elastic net shrink weights") {
    for (Penalty p : {Penalty::L1, Penalty::ElasticNet}) {
      SgdConfig strong, weak;
      strong.penalty = weak.penalty = p;
      strong.alpha = 1e-1;
      weak.alpha = 1e-5;
      SgdClassifier a(2, strong), b(2, weak);
      for (const auto& [fv, y] : threshold_stream(11, 2000)) {
        a.partial_fit(fv, y);
        b.partial_fit(fv, y);
      }
      CAPTURE(to_string(p));
      CHECK(std::isfinite(a.weight_norm2(0)));
      CHECK(a.weight_norm2(0) < b.weight_norm2(0));
    }
  }

  TEST_CASE("SGD is order deterministic and round trips") {
    const auto data = random_stream(12, 400, 20);
    SgdClassifier a(3), b(3);
    for (const auto& fv : data) {
      a.partial_fit(fv, index_of(*fv.label));
      b.partial_fit(fv, index_of(*fv.label));
    }
    CHECK(a.to_json() == b.to_json());
    const auto back = SgdClassifier::from_json(a.to_json());
    for (const auto& fv : data) CHECK(back->predict_scores(fv) == a.predict_scores(fv));
  }

  TEST_CASE("SGD penalties parse") {
    CHECK(parse_penalty("l1") == Penalty::L1);
    CHECK(parse_penalty("elasticnet") == Penalty::ElasticNet);
    CHECK(to_string(Penalty::L2) == "l2");
    CHECK_THROWS(parse_penalty("l3"));
  }

  TEST_CASE("SGD warmup score stops early") {
    const auto data = random_stream(13, 200, 20);
    std::vector<const FeatureVector*> window;
    std::vector<int> labels;
    for (const auto& fv : data) {
      window.push_back(&fv);
      labels.push_back(index_of(*fv.label));
    }
    SgdConfig cfg;
    cfg.max_iter = 10000;
    cfg.tol = 1e-1;
    const double s = sgd_warmup_score(cfg, 3, window, labels, 1);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(s == sgd_warmup_score(cfg, 3, window, labels, 1));
  }
}
