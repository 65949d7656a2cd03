#include <algorithm>
#include <cmath>
#include <sstream>

#include "finemo/streamml.h"

namespace finemo {

using nlohmann::json;

// ---------------------------------------------------------------------- ADWIN

Adwin::Adwin(double delta) : delta_(delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw LearnerError("ADWIN delta must be in (0, 1)");
}

bool Adwin::update(double value) {
  ++ticks_;
  if (rows_.empty()) rows_.emplace_back();
  rows_[0].push_back({value, 0.0});
  if (width_ > 0.0) {
    const double mean_before = total_ / width_;
    variance_ += width_ * (value - mean_before) * (value - mean_before) / (width_ + 1.0);
  }
  width_ += 1.0;
  total_ += value;
  compress();
  if (ticks_ % kClock == 0 && width_ > kMinWindow) return detect_change();
  return false;
}

void Adwin::compress() {
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].size() <= kMaxBuckets) break;
    const double n = std::ldexp(1.0, static_cast<int>(r));
    const Bucket a = rows_[r][0];
    const Bucket b = rows_[r][1];
    const double d = a.total / n - b.total / n;
    Bucket merged{a.total + b.total, a.variance + b.variance + n * d * d / 2.0};
    rows_[r].erase(rows_[r].begin(), rows_[r].begin() + 2);
    if (r + 1 == rows_.size()) rows_.emplace_back();
    rows_[r + 1].push_back(merged);
  }
}

void Adwin::drop_oldest() {
  for (std::size_t r = rows_.size(); r-- > 0;) {
    if (rows_[r].empty()) continue;
    const double n = std::ldexp(1.0, static_cast<int>(r));
    const Bucket b = rows_[r].front();
    rows_[r].erase(rows_[r].begin());
    const double rest = width_ - n;
    if (rest > 0.0) {
      const double d = b.total / n - (total_ - b.total) / rest;
      variance_ -= b.variance + n * rest / (n + rest) * d * d;
    } else {
      variance_ = 0.0;
    }
    variance_ = std::max(variance_, 0.0);
    width_ = rest;
    total_ -= b.total;
    break;
  }
  while (!rows_.empty() && rows_.back().empty()) rows_.pop_back();
}

bool Adwin::detect_change() {
  bool changed = false;
  bool cut = true;
  while (cut && width_ > kMinWindow) {
    cut = false;
    double n0 = 0.0;
    double t0 = 0.0;
    const double v = variance_ / width_;
    const double dd = std::log(2.0 * std::log(width_) / delta_);
    for (std::size_t r = rows_.size(); r-- > 0 && !cut;) {
      const double n = std::ldexp(1.0, static_cast<int>(r));
      for (std::size_t i = 0; i < rows_[r].size(); ++i) {
        n0 += n;
        t0 += rows_[r][i].total;
        const double n1 = width_ - n0;
        if (n1 < kMinWindow) break;
        if (n0 < kMinWindow) continue;
        const double diff = t0 / n0 - (total_ - t0) / n1;
        const double m =
            1.0 / (n0 - kMinWindow + 1.0) + 1.0 / (n1 - kMinWindow + 1.0);
        const double eps = std::sqrt(2.0 * m * v * dd) + 2.0 / 3.0 * dd * m;
        if (std::abs(diff) > eps) {
          cut = true;
          break;
        }
      }
    }
    if (cut) {
      drop_oldest();
      changed = true;
    }
  }
  return changed;
}

json Adwin::to_json() const {
  json rows = json::array();
  for (const auto& row : rows_) {
    json r = json::array();
    for (const Bucket& b : row) r.push_back({b.total, b.variance});
    rows.push_back(std::move(r));
  }
  return {{"delta", delta_},   {"rows", rows},
          {"width", width_},   {"total", total_},
          {"variance", variance_}, {"ticks", ticks_}};
}

Adwin Adwin::from_json(const json& j) {
  Adwin a(j.at("delta").get<double>());
  for (const json& r : j.at("rows")) {
    std::vector<Bucket> row;
    for (const json& b : r) row.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    a.rows_.push_back(std::move(row));
  }
  a.width_ = j.at("width").get<double>();
  a.total_ = j.at("total").get<double>();
  a.variance_ = j.at("variance").get<double>();
  a.ticks_ = j.at("ticks").get<std::uint64_t>();
  return a;
}

// ------------------------------------------------------- Adaptive random forest

struct AdaptiveRandomForest::Member {
  std::unique_ptr<HoeffdingTree> tree;
  std::unique_ptr<HoeffdingTree> background;
  Adwin warning;
  Adwin drift;
  std::mt19937_64 rng;
  std::uint64_t trees_created = 0;

  Member(double warning_delta, double drift_delta, std::uint64_t seed)
      : warning(warning_delta), drift(drift_delta), rng(seed) {}
};

namespace {

std::uint64_t tree_seed(std::uint64_t seed, std::size_t member,
                        std::uint64_t generation) {
  return seed * 1000003ULL + member * 7919ULL + generation * 104729ULL + 1;
}

}  // namespace

AdaptiveRandomForest::AdaptiveRandomForest(std::size_t num_classes,
                                           ArfConfig cfg, std::uint64_t seed)
    : num_classes_(num_classes), cfg_(cfg), seed_(seed) {
  if (cfg.estimators == 0) throw LearnerError("forest needs at least one estimator");
  if (!(cfg.lambda > 0.0)) throw LearnerError("lambda must be positive");
  const HoeffdingConfig tree_cfg = member_tree_config();
  for (std::size_t i = 0; i < cfg.estimators; ++i) {
    auto m = std::make_unique<Member>(cfg.warning_delta, cfg.drift_delta,
                                      seed * 31ULL + i + 17ULL);
    m->tree = std::make_unique<HoeffdingTree>(num_classes, tree_cfg,
                                              tree_seed(seed, i, m->trees_created++));
    members_.push_back(std::move(m));
  }
}

AdaptiveRandomForest::~AdaptiveRandomForest() = default;

std::size_t AdaptiveRandomForest::effective_max_features() const {
  if (cfg_.num_attributes == 0) return 0;
  std::size_t m = cfg_.max_features;
  if (m == 0) {
    m = static_cast<std::size_t>(
        std::lround(std::sqrt(static_cast<double>(cfg_.num_attributes))));
    m = std::max<std::size_t>(m, 1);
  }
  return m >= cfg_.num_attributes ? 0 : m;
}

HoeffdingConfig AdaptiveRandomForest::member_tree_config() const {
  HoeffdingConfig t = cfg_.tree;
  t.num_attributes = cfg_.num_attributes;
  t.subspace_size = effective_max_features();
  return t;
}

std::vector<double> AdaptiveRandomForest::predict_scores(const FeatureVector& fv) const {
  std::vector<double> votes(num_classes_, 0.0);
  for (const auto& m : members_) votes[m->tree->predict(fv)] += 1.0;
  for (double& v : votes) v /= static_cast<double>(members_.size());
  return votes;
}

void AdaptiveRandomForest::partial_fit(const FeatureVector& fv, int label,
                                       double weight) {
  if (label < 0 || static_cast<std::size_t>(label) >= num_classes_) {
    throw LearnerError("label out of range");
  }
  weight_seen_ += weight;
  const HoeffdingConfig tree_cfg = member_tree_config();
  for (std::size_t i = 0; i < members_.size(); ++i) {
    Member& m = *members_[i];
    const int predicted = m.tree->predict(fv);
    int k = 1;
    if (cfg_.bootstrap) {
      std::poisson_distribution<int> poisson(cfg_.lambda);
      k = poisson(m.rng);
    }
    if (k <= 0) continue;
    m.tree->partial_fit(fv, label, weight * k);
    if (m.background) m.background->partial_fit(fv, label, weight * k);
    if (!cfg_.drift_detection) continue;

    const double error = predicted == label ? 0.0 : 1.0;
    if (m.warning.update(error)) {
      m.background = std::make_unique<HoeffdingTree>(
          num_classes_, tree_cfg, tree_seed(seed_, i, m.trees_created++));
      m.warning = Adwin(cfg_.warning_delta);
    }
    if (m.drift.update(error)) {
      ++drifts_;
      if (m.background) {
        m.tree = std::move(m.background);
      } else {
        m.tree = std::make_unique<HoeffdingTree>(
            num_classes_, tree_cfg, tree_seed(seed_, i, m.trees_created++));
      }
      m.warning = Adwin(cfg_.warning_delta);
      m.drift = Adwin(cfg_.drift_delta);
    }
  }
}

json AdaptiveRandomForest::to_json() const {
  json j;
  j["type"] = "arf";
  j["num_classes"] = num_classes_;
  j["seed"] = seed_;
  j["config"] = {{"estimators", cfg_.estimators},
                 {"max_features", cfg_.max_features},
                 {"lambda", cfg_.lambda},
                 {"bootstrap", cfg_.bootstrap},
                 {"drift_detection", cfg_.drift_detection},
                 {"warning_delta", cfg_.warning_delta},
                 {"drift_delta", cfg_.drift_delta},
                 {"num_attributes", cfg_.num_attributes}};
  j["tree"] = HoeffdingTree(2, member_tree_config()).to_json().at("config");
  j["weight_seen"] = weight_seen_;
  j["drifts"] = drifts_;
  json members = json::array();
  for (const auto& m : members_) {
    std::ostringstream rng;
    rng << m->rng;
    members.push_back({{"tree", m->tree->to_json()},
                       {"background", m->background ? m->background->to_json()
                                                    : json(nullptr)},
                       {"warning", m->warning.to_json()},
                       {"drift", m->drift.to_json()},
                       {"rng", rng.str()},
                       {"trees_created", m->trees_created}});
  }
  j["members"] = std::move(members);
  return j;
}

std::unique_ptr<AdaptiveRandomForest> AdaptiveRandomForest::from_json(const json& j) {
  const json& c = j.at("config");
  ArfConfig cfg;
  cfg.estimators = c.at("estimators").get<std::size_t>();
  cfg.max_features = c.at("max_features").get<std::size_t>();
  cfg.lambda = c.at("lambda").get<double>();
  cfg.bootstrap = c.at("bootstrap").get<bool>();
  cfg.drift_detection = c.at("drift_detection").get<bool>();
  cfg.warning_delta = c.at("warning_delta").get<double>();
  cfg.drift_delta = c.at("drift_delta").get<double>();
  cfg.num_attributes = c.at("num_attributes").get<std::size_t>();
  const json& t = j.at("tree");
  cfg.tree.delta = t.at("delta").get<double>();
  cfg.tree.grace_period = t.at("grace_period").get<double>();
  cfg.tree.tie_threshold = t.at("tie_threshold").get<double>();
  cfg.tree.max_depth = t.at("max_depth").get<std::size_t>();
  cfg.tree.min_branch_fraction = t.at("min_branch_fraction").get<double>();
  cfg.tree.split_bins = t.at("split_bins").get<std::size_t>();
  cfg.tree.nb.var_smoothing = t.at("var_smoothing").get<double>();
  const std::string leaf = t.at("leaf_prediction").get<std::string>();
  cfg.tree.leaf_prediction = leaf == "mc"   ? LeafPrediction::MajorityClass
                             : leaf == "nb" ? LeafPrediction::NaiveBayes
                                            : LeafPrediction::NaiveBayesAdaptive;
  auto arf = std::make_unique<AdaptiveRandomForest>(
      j.at("num_classes").get<std::size_t>(), cfg, j.at("seed").get<std::uint64_t>());
  arf->weight_seen_ = j.at("weight_seen").get<double>();
  arf->drifts_ = j.at("drifts").get<std::size_t>();
  const json& members = j.at("members");
  if (members.size() != arf->members_.size()) {
    throw LearnerError("forest checkpoint member count mismatch");
  }
  for (std::size_t i = 0; i < members.size(); ++i) {
    Member& m = *arf->members_[i];
    const json& mj = members.at(i);
    m.tree = HoeffdingTree::from_json(mj.at("tree"));
    m.background = mj.at("background").is_null()
                       ? nullptr
                       : HoeffdingTree::from_json(mj.at("background"));
    m.warning = Adwin::from_json(mj.at("warning"));
    m.drift = Adwin::from_json(mj.at("drift"));
    std::istringstream rng(mj.at("rng").get<std::string>());
    rng >> m.rng;
    m.trees_created = mj.at("trees_created").get<std::uint64_t>();
  }
  return arf;
}

}  // namespace finemo
