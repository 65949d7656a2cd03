#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "finemo/streamml.h"

namespace finemo {

using nlohmann::json;

namespace {

double entropy(const std::vector<double>& dist) {
  double total = 0.0;
  for (double w : dist) total += w;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double w : dist) {
    if (w > 0.0) {
      const double p = w / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

double info_gain(const std::vector<double>& parent,
                 const std::vector<double>& left,
                 const std::vector<double>& right, double min_fraction) {
  double total = 0.0;
  double wl = 0.0;
  double wr = 0.0;
  for (std::size_t k = 0; k < parent.size(); ++k) {
    wl += left[k];
    wr += right[k];
  }
  total = wl + wr;
  if (total <= 0.0) return -std::numeric_limits<double>::infinity();
  int branches = 0;
  if (wl > min_fraction * total) ++branches;
  if (wr > min_fraction * total) ++branches;
  if (branches < 2) return -std::numeric_limits<double>::infinity();
  return entropy(parent) - (wl / total) * entropy(left) -
         (wr / total) * entropy(right);
}

std::vector<double> normalized(const std::vector<double>& dist) {
  double total = 0.0;
  for (double w : dist) total += w;
  std::vector<double> out(dist.size(), 1.0 / static_cast<double>(dist.size()));
  if (total > 0.0) {
    for (std::size_t k = 0; k < dist.size(); ++k) out[k] = dist[k] / total;
  }
  return out;
}

std::vector<double> softmax(const std::vector<double>& scores) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double s : scores) hi = std::max(hi, s);
  std::vector<double> out(scores.size(), 0.0);
  if (!std::isfinite(hi)) return normalized(out);
  double total = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    out[k] = std::isfinite(scores[k]) ? std::exp(scores[k] - hi) : 0.0;
    total += out[k];
  }
  for (double& p : out) p /= total;
  return out;
}

std::string to_string(LeafPrediction p) {
  switch (p) {
    case LeafPrediction::MajorityClass: return "mc";
    case LeafPrediction::NaiveBayes: return "nb";
    case LeafPrediction::NaiveBayesAdaptive: return "nba";
  }
  return "nba";
}

LeafPrediction parse_leaf_prediction(const std::string& s) {
  if (s == "mc") return LeafPrediction::MajorityClass;
  if (s == "nb") return LeafPrediction::NaiveBayes;
  if (s == "nba") return LeafPrediction::NaiveBayesAdaptive;
  throw LearnerError("unknown leaf prediction '" + s + "'");
}

// Per-class statistics of the nonzero values of one attribute at one leaf.
// Zeros are implicit: the leaf's observed class weight minus the nonzero
// weight.
struct Observer {
  std::vector<double> weight;
  std::vector<double> mean;
  std::vector<double> m2;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();

  explicit Observer(std::size_t k = 0) : weight(k, 0.0), mean(k, 0.0), m2(k, 0.0) {}

  void update(std::size_t k, double x, double w) {
    const double new_weight = weight[k] + w;
    const double d = x - mean[k];
    const double r = d * w / new_weight;
    mean[k] += r;
    m2[k] += weight[k] * d * r;
    weight[k] = new_weight;
    min = std::min(min, x);
    max = std::max(max, x);
  }

  // Weight of class k's nonzero values that fall at or below t.
  double weight_below(std::size_t k, double t) const {
    if (weight[k] <= 0.0) return 0.0;
    const double var = m2[k] / weight[k];
    if (var <= 1e-12) return t >= mean[k] ? weight[k] : 0.0;
    const double z = (t - mean[k]) / std::sqrt(var);
    return weight[k] * 0.5 * std::erfc(-z / std::sqrt(2.0));
  }

  json to_json() const {
    return {{"w", weight}, {"mean", mean}, {"m2", m2}, {"min", min}, {"max", max}};
  }

  static Observer from_json(const json& j) {
    Observer o;
    o.weight = j.at("w").get<std::vector<double>>();
    o.mean = j.at("mean").get<std::vector<double>>();
    o.m2 = j.at("m2").get<std::vector<double>>();
    o.min = j.at("min").is_null() ? std::numeric_limits<double>::infinity()
                                  : j.at("min").get<double>();
    o.max = j.at("max").is_null() ? -std::numeric_limits<double>::infinity()
                                  : j.at("max").get<double>();
    return o;
  }
};

struct SplitCandidate {
  std::uint32_t attribute = 0;
  double threshold = 0.0;
  double merit = -std::numeric_limits<double>::infinity();
  std::vector<double> left;
  std::vector<double> right;
};

}  // namespace

struct HoeffdingTree::Node {
  bool is_leaf = true;
  std::size_t depth = 0;

  std::uint32_t attribute = 0;
  double threshold = 0.0;
  std::unique_ptr<Node> left;
  std::unique_ptr<Node> right;

  std::vector<double> class_weight;  // inherited estimate + observed
  std::vector<double> observed;      // observed at this leaf only
  double weight_at_last_eval = 0.0;
  std::unordered_map<std::uint32_t, Observer> observers;
  std::vector<std::uint32_t> subspace;  // sorted; empty = all attributes
  std::unique_ptr<NaiveBayes> nb;
  double mc_correct = 0.0;
  double nb_correct = 0.0;

  bool in_subspace(std::uint32_t a) const {
    return subspace.empty() ||
           std::binary_search(subspace.begin(), subspace.end(), a);
  }

  double observed_total() const {
    double t = 0.0;
    for (double w : observed) t += w;
    return t;
  }
};

double hoeffding_bound(double range, double delta, double n) {
  return std::sqrt(range * range * std::log(1.0 / delta) / (2.0 * n));
}

HoeffdingTree::HoeffdingTree(std::size_t num_classes, HoeffdingConfig cfg,
                             std::uint64_t seed)
    : num_classes_(num_classes), cfg_(cfg), rng_(seed) {
  if (num_classes < 2) throw LearnerError("a tree needs at least two classes");
  if (!(cfg.delta > 0.0 && cfg.delta <= 1.0)) throw LearnerError("delta must be in (0, 1]");
  if (!(cfg.grace_period > 0.0)) throw LearnerError("grace period must be positive");
  if (cfg.subspace_size > 0 && cfg.num_attributes == 0) {
    throw LearnerError("random subspaces need num_attributes");
  }
  root_ = make_leaf(std::vector<double>(num_classes, 0.0), 0);
}

HoeffdingTree::~HoeffdingTree() = default;

std::unique_ptr<HoeffdingTree::Node> HoeffdingTree::make_leaf(
    std::vector<double> inherited, std::size_t depth) {
  auto leaf = std::make_unique<Node>();
  leaf->depth = depth;
  leaf->class_weight = std::move(inherited);
  leaf->observed.assign(num_classes_, 0.0);
  if (cfg_.leaf_prediction != LeafPrediction::MajorityClass) {
    leaf->nb = std::make_unique<NaiveBayes>(num_classes_, cfg_.nb);
  }
  if (cfg_.subspace_size > 0 && cfg_.subspace_size < cfg_.num_attributes) {
    // Floyd's sampling of subspace_size distinct attributes.
    std::unordered_set<std::uint32_t> chosen;
    const auto n = static_cast<std::uint32_t>(cfg_.num_attributes);
    const auto m = static_cast<std::uint32_t>(cfg_.subspace_size);
    for (std::uint32_t j = n - m; j < n; ++j) {
      std::uniform_int_distribution<std::uint32_t> pick(0, j);
      const std::uint32_t t = pick(rng_);
      chosen.insert(chosen.contains(t) ? j : t);
    }
    leaf->subspace.assign(chosen.begin(), chosen.end());
    std::sort(leaf->subspace.begin(), leaf->subspace.end());
  }
  return leaf;
}

HoeffdingTree::Node& HoeffdingTree::sort_to_leaf(const FeatureVector& fv) const {
  Node* node = root_.get();
  while (!node->is_leaf) {
    node = attribute_value(fv, node->attribute) <= node->threshold
               ? node->left.get()
               : node->right.get();
  }
  return *node;
}

std::vector<double> HoeffdingTree::predict_scores(const FeatureVector& fv) const {
  const Node& leaf = sort_to_leaf(fv);
  LeafPrediction mode = cfg_.leaf_prediction;
  if (mode == LeafPrediction::NaiveBayesAdaptive) {
    mode = leaf.mc_correct > leaf.nb_correct ? LeafPrediction::MajorityClass
                                             : LeafPrediction::NaiveBayes;
  }
  if (mode == LeafPrediction::NaiveBayes &&
      (!leaf.nb || leaf.nb->weight_seen() <= 0.0)) {
    mode = LeafPrediction::MajorityClass;
  }
  if (mode == LeafPrediction::MajorityClass) return normalized(leaf.class_weight);
  return softmax(leaf.nb->predict_scores(fv));
}

void HoeffdingTree::partial_fit(const FeatureVector& fv, int label, double weight) {
  if (label < 0 || static_cast<std::size_t>(label) >= num_classes_) {
    throw LearnerError("label out of range");
  }
  if (weight <= 0.0) return;
  weight_seen_ += weight;
  Node& leaf = sort_to_leaf(fv);
  const auto k = static_cast<std::size_t>(label);

  if (cfg_.leaf_prediction == LeafPrediction::NaiveBayesAdaptive) {
    const int mc = argmax(leaf.class_weight);
    const int nb = leaf.nb->weight_seen() > 0.0 ? leaf.nb->predict(fv) : mc;
    if (mc == label) leaf.mc_correct += weight;
    if (nb == label) leaf.nb_correct += weight;
  }
  leaf.class_weight[k] += weight;
  leaf.observed[k] += weight;
  if (leaf.nb) leaf.nb->partial_fit(fv, label, weight);
  for_each_nonzero(fv, [&](std::uint32_t a, double x) {
    if (!leaf.in_subspace(a)) return;
    auto [it, inserted] = leaf.observers.try_emplace(a, num_classes_);
    it->second.update(k, x, weight);
  });

  if (cfg_.max_depth > 0 && leaf.depth >= cfg_.max_depth) return;
  const double seen = leaf.observed_total();
  if (seen - leaf.weight_at_last_eval >= cfg_.grace_period) {
    attempt_split(leaf);
    leaf.weight_at_last_eval = seen;
  }
}

void HoeffdingTree::attempt_split(Node& leaf) {
  int classes = 0;
  for (double w : leaf.observed) classes += w > 0.0 ? 1 : 0;
  if (classes < 2) return;

  std::vector<SplitCandidate> best_per_attribute;
  std::vector<std::uint32_t> attributes;
  attributes.reserve(leaf.observers.size());
  for (const auto& [a, obs] : leaf.observers) attributes.push_back(a);
  std::sort(attributes.begin(), attributes.end());

  std::vector<double> left(num_classes_);
  std::vector<double> right(num_classes_);
  for (std::uint32_t a : attributes) {
    const Observer& obs = leaf.observers.at(a);
    SplitCandidate best;
    best.attribute = a;
    auto consider = [&](double t) {
      for (std::size_t k = 0; k < num_classes_; ++k) {
        const double zeros = std::max(leaf.observed[k] - obs.weight[k], 0.0);
        const double below = t >= 0.0 ? zeros + obs.weight_below(k, t)
                                       : obs.weight_below(k, t);
        left[k] = std::min(below, leaf.observed[k]);
        right[k] = leaf.observed[k] - left[k];
      }
      const double merit =
          info_gain(leaf.observed, left, right, cfg_.min_branch_fraction);
      if (merit > best.merit) {
        best.merit = merit;
        best.threshold = t;
        best.left = left;
        best.right = right;
      }
    };
    consider(0.0);
    if (obs.max > obs.min) {
      const double bins = static_cast<double>(cfg_.split_bins + 1);
      for (std::size_t i = 1; i <= cfg_.split_bins; ++i) {
        consider(obs.min + (obs.max - obs.min) * static_cast<double>(i) / bins);
      }
    }
    if (std::isfinite(best.merit)) best_per_attribute.push_back(std::move(best));
  }
  if (best_per_attribute.empty()) return;
  std::stable_sort(best_per_attribute.begin(), best_per_attribute.end(),
                   [](const SplitCandidate& x, const SplitCandidate& y) {
                     return x.merit > y.merit;
                   });

  const SplitCandidate& best = best_per_attribute.front();
  // The null split (no split, merit 0) always competes.
  const double second =
      best_per_attribute.size() > 1 ? std::max(best_per_attribute[1].merit, 0.0)
                                    : 0.0;
  if (!(best.merit > 0.0)) return;
  const double range = std::log2(static_cast<double>(num_classes_));
  const double eps = hoeffding_bound(range, cfg_.delta, leaf.observed_total());
  if (!(best.merit - second > eps || eps < cfg_.tie_threshold)) return;

  leaf.is_leaf = false;
  leaf.attribute = best.attribute;
  leaf.threshold = best.threshold;
  leaf.left = make_leaf(best.left, leaf.depth + 1);
  leaf.right = make_leaf(best.right, leaf.depth + 1);
  leaf.observers.clear();
  leaf.nb.reset();
  leaf.subspace.clear();
  leaf.class_weight.clear();
  leaf.observed.clear();
}

namespace {

void count_nodes(const HoeffdingTree::Node& n, std::size_t& leaves,
                 std::size_t& splits, std::size_t& depth) {
  depth = std::max(depth, n.depth);
  if (n.is_leaf) {
    ++leaves;
    return;
  }
  ++splits;
  count_nodes(*n.left, leaves, splits, depth);
  count_nodes(*n.right, leaves, splits, depth);
}

json node_to_json(const HoeffdingTree::Node& n) {
  json j;
  j["depth"] = n.depth;
  if (!n.is_leaf) {
    j["attribute"] = n.attribute;
    j["threshold"] = n.threshold;
    j["left"] = node_to_json(*n.left);
    j["right"] = node_to_json(*n.right);
    return j;
  }
  j["class_weight"] = n.class_weight;
  j["observed"] = n.observed;
  j["weight_at_last_eval"] = n.weight_at_last_eval;
  j["subspace"] = n.subspace;
  j["mc_correct"] = n.mc_correct;
  j["nb_correct"] = n.nb_correct;
  std::vector<std::uint32_t> attrs;
  for (const auto& [a, o] : n.observers) attrs.push_back(a);
  std::sort(attrs.begin(), attrs.end());
  json observers = json::array();
  for (std::uint32_t a : attrs) {
    json o = n.observers.at(a).to_json();
    o["attribute"] = a;
    observers.push_back(std::move(o));
  }
  j["observers"] = std::move(observers);
  j["nb"] = n.nb ? n.nb->to_json() : json(nullptr);
  return j;
}

std::unique_ptr<HoeffdingTree::Node> node_from_json(const json& j) {
  auto n = std::make_unique<HoeffdingTree::Node>();
  n->depth = j.at("depth").get<std::size_t>();
  if (j.contains("attribute")) {
    n->is_leaf = false;
    n->attribute = j.at("attribute").get<std::uint32_t>();
    n->threshold = j.at("threshold").get<double>();
    n->left = node_from_json(j.at("left"));
    n->right = node_from_json(j.at("right"));
    return n;
  }
  n->class_weight = j.at("class_weight").get<std::vector<double>>();
  n->observed = j.at("observed").get<std::vector<double>>();
  n->weight_at_last_eval = j.at("weight_at_last_eval").get<double>();
  n->subspace = j.at("subspace").get<std::vector<std::uint32_t>>();
  n->mc_correct = j.at("mc_correct").get<double>();
  n->nb_correct = j.at("nb_correct").get<double>();
  for (const json& o : j.at("observers")) {
    n->observers.emplace(o.at("attribute").get<std::uint32_t>(),
                         Observer::from_json(o));
  }
  if (!j.at("nb").is_null()) n->nb = NaiveBayes::from_json(j.at("nb"));
  return n;
}

}  // namespace

std::size_t HoeffdingTree::num_leaves() const {
  std::size_t leaves = 0, splits = 0, d = 0;
  count_nodes(*root_, leaves, splits, d);
  return leaves;
}

std::size_t HoeffdingTree::num_splits() const {
  std::size_t leaves = 0, splits = 0, d = 0;
  count_nodes(*root_, leaves, splits, d);
  return splits;
}

std::size_t HoeffdingTree::depth() const {
  std::size_t leaves = 0, splits = 0, d = 0;
  count_nodes(*root_, leaves, splits, d);
  return d;
}

json HoeffdingTree::to_json() const {
  json j;
  j["type"] = "ht";
  j["num_classes"] = num_classes_;
  j["config"] = {{"delta", cfg_.delta},
                 {"grace_period", cfg_.grace_period},
                 {"tie_threshold", cfg_.tie_threshold},
                 {"leaf_prediction", to_string(cfg_.leaf_prediction)},
                 {"max_depth", cfg_.max_depth},
                 {"min_branch_fraction", cfg_.min_branch_fraction},
                 {"split_bins", cfg_.split_bins},
                 {"subspace_size", cfg_.subspace_size},
                 {"num_attributes", cfg_.num_attributes},
                 {"var_smoothing", cfg_.nb.var_smoothing}};
  std::ostringstream rng;
  rng << rng_;
  j["rng"] = rng.str();
  j["weight_seen"] = weight_seen_;
  j["root"] = node_to_json(*root_);
  return j;
}

std::unique_ptr<HoeffdingTree> HoeffdingTree::from_json(const json& j) {
  const json& c = j.at("config");
  HoeffdingConfig cfg;
  cfg.delta = c.at("delta").get<double>();
  cfg.grace_period = c.at("grace_period").get<double>();
  cfg.tie_threshold = c.at("tie_threshold").get<double>();
  cfg.leaf_prediction = parse_leaf_prediction(c.at("leaf_prediction").get<std::string>());
  cfg.max_depth = c.at("max_depth").get<std::size_t>();
  cfg.min_branch_fraction = c.at("min_branch_fraction").get<double>();
  cfg.split_bins = c.at("split_bins").get<std::size_t>();
  cfg.subspace_size = c.at("subspace_size").get<std::size_t>();
  cfg.num_attributes = c.at("num_attributes").get<std::size_t>();
  cfg.nb.var_smoothing = c.at("var_smoothing").get<double>();
  auto tree = std::make_unique<HoeffdingTree>(j.at("num_classes").get<std::size_t>(), cfg);
  std::istringstream rng(j.at("rng").get<std::string>());
  rng >> tree->rng_;
  tree->weight_seen_ = j.at("weight_seen").get<double>();
  tree->root_ = node_from_json(j.at("root"));
  return tree;
}

}  // namespace finemo
