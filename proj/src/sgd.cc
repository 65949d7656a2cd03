#include <algorithm>
#include <cmath>
#include <numeric>

#include "finemo/streamml.h"

namespace finemo {

using nlohmann::json;

std::string to_string(Penalty p) {
  switch (p) {
    case Penalty::L1: return "l1";
    case Penalty::L2: return "l2";
    case Penalty::ElasticNet: return "elasticnet";
  }
  return "l2";
}

Penalty parse_penalty(const std::string& s) {
  if (s == "l1") return Penalty::L1;
  if (s == "l2") return Penalty::L2;
  if (s == "elasticnet") return Penalty::ElasticNet;
  throw LearnerError("unknown penalty: " + s);
}

namespace {

// Offset of the "optimal" learning-rate schedule for the hinge loss.
double optimal_init(double alpha) {
  const double typw = std::sqrt(1.0 / std::sqrt(alpha));
  const double eta0 = typw / std::max(1.0, typw);
  return 1.0 / (eta0 * alpha);
}

}  // namespace

SgdClassifier::SgdClassifier(std::size_t num_classes, SgdConfig cfg)
    : cfg_(cfg), models_(num_classes) {
  if (num_classes < 2) throw LearnerError("SGD needs at least two classes");
  if (!(cfg.alpha > 0.0)) throw LearnerError("alpha must be positive");
  if (cfg.l1_ratio < 0.0 || cfg.l1_ratio > 1.0) {
    throw LearnerError("l1_ratio must be in [0, 1]");
  }
}

double SgdClassifier::Binary::decision(const FeatureVector& fv) const {
  double dot = 0.0;
  for_each_nonzero(fv, [&](std::uint32_t a, double x) {
    if (a < w.size()) dot += w[a] * x;
  });
  return dot * wscale + intercept;
}

void SgdClassifier::ensure_size(Binary& m, std::size_t dim) {
  if (m.w.size() < dim) {
    m.w.resize(dim, 0.0);
    m.q.resize(dim, 0.0);
  }
}

std::vector<double> SgdClassifier::predict_scores(const FeatureVector& fv) const {
  std::vector<double> scores(models_.size());
  for (std::size_t k = 0; k < models_.size(); ++k) scores[k] = models_[k].decision(fv);
  return scores;
}

void SgdClassifier::partial_fit(const FeatureVector& fv, int label, double weight) {
  if (label < 0 || static_cast<std::size_t>(label) >= models_.size()) {
    throw LearnerError("label out of range");
  }
  weight_seen_ += weight;
  std::uint32_t max_attr = 0;
  bool any = false;
  for_each_nonzero(fv, [&](std::uint32_t a, double) {
    max_attr = std::max(max_attr, a);
    any = true;
  });

  const double eta = 1.0 / (cfg_.alpha * (optimal_init(cfg_.alpha) + t_ - 1.0));
  double l1_ratio = 0.0;
  if (cfg_.penalty == Penalty::L1) l1_ratio = 1.0;
  if (cfg_.penalty == Penalty::ElasticNet) l1_ratio = cfg_.l1_ratio;
  const bool l1 = cfg_.penalty != Penalty::L2;
  if (l1) u_ += l1_ratio * eta * cfg_.alpha;

  for (std::size_t k = 0; k < models_.size(); ++k) {
    Binary& m = models_[k];
    if (any) ensure_size(m, max_attr + 1);
    const double y = static_cast<int>(k) == label ? 1.0 : -1.0;
    const double p = m.decision(fv);
    if (y * p < 1.0) {
      const double update = eta * y * weight;
      for_each_nonzero(fv, [&](std::uint32_t a, double x) {
        m.w[a] += update * x / m.wscale;
      });
      m.intercept += update;
    }
    if (cfg_.penalty != Penalty::L1) {
      m.wscale *= std::max(0.0, 1.0 - (1.0 - l1_ratio) * eta * cfg_.alpha);
      if (m.wscale < 1e-9) {
        for (double& v : m.w) v *= m.wscale;
        m.wscale = 1.0;
      }
    }
    if (l1) {
      for_each_nonzero(fv, [&](std::uint32_t a, double) {
        const double z = m.w[a];
        if (m.wscale * z > 0.0) {
          m.w[a] = std::max(0.0, z - (u_ + m.q[a]) / m.wscale);
        } else if (m.wscale * z < 0.0) {
          m.w[a] = std::min(0.0, z + (u_ - m.q[a]) / m.wscale);
        }
        m.q[a] += m.wscale * (m.w[a] - z);
      });
    }
  }
  t_ += 1.0;
}

double SgdClassifier::weight_norm2(std::size_t cls) const {
  const Binary& m = models_.at(cls);
  double s = 0.0;
  for (double v : m.w) s += v * v;
  return s * m.wscale * m.wscale;
}

json SgdClassifier::to_json() const {
  json j;
  j["type"] = "sgd";
  j["config"] = finemo::to_json(cfg_);
  j["t"] = t_;
  j["u"] = u_;
  j["weight_seen"] = weight_seen_;
  json models = json::array();
  for (const Binary& m : models_) {
    models.push_back({{"w", m.w}, {"q", m.q}, {"wscale", m.wscale},
                      {"intercept", m.intercept}});
  }
  j["models"] = std::move(models);
  return j;
}

std::unique_ptr<SgdClassifier> SgdClassifier::from_json(const json& j) {
  const json& c = j.at("config");
  SgdConfig cfg;
  cfg.penalty = parse_penalty(c.at("penalty").get<std::string>());
  cfg.l1_ratio = c.at("l1_ratio").get<double>();
  cfg.alpha = c.at("alpha").get<double>();
  cfg.max_iter = c.at("max_iter").get<std::size_t>();
  cfg.tol = c.at("tol").get<double>();
  cfg.n_iter_no_change = c.at("n_iter_no_change").get<std::size_t>();
  const json& models = j.at("models");
  auto sgd = std::make_unique<SgdClassifier>(models.size(), cfg);
  sgd->t_ = j.at("t").get<double>();
  sgd->u_ = j.at("u").get<double>();
  sgd->weight_seen_ = j.at("weight_seen").get<double>();
  for (std::size_t k = 0; k < models.size(); ++k) {
    Binary& m = sgd->models_[k];
    m.w = models[k].at("w").get<std::vector<double>>();
    m.q = models[k].at("q").get<std::vector<double>>();
    m.wscale = models[k].at("wscale").get<double>();
    m.intercept = models[k].at("intercept").get<double>();
  }
  return sgd;
}

double sgd_warmup_score(const SgdConfig& cfg, std::size_t num_classes,
                        const std::vector<const FeatureVector*>& warmup,
                        const std::vector<int>& labels, std::uint64_t seed) {
  if (warmup.size() != labels.size()) throw LearnerError("warmup size mismatch");
  if (warmup.empty()) throw LearnerError("empty warmup window");
  SgdClassifier sgd(num_classes, cfg);
  std::vector<std::size_t> order(warmup.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  double best = -std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  double last = 0.0;
  const std::size_t epochs = std::max<std::size_t>(cfg.max_iter, 1);
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    if (epoch > 0) std::shuffle(order.begin(), order.end(), rng);
    std::size_t correct = 0;
    for (std::size_t i : order) {
      if (sgd.predict(*warmup[i]) == labels[i]) ++correct;
      sgd.partial_fit(*warmup[i], labels[i]);
    }
    last = static_cast<double>(correct) / static_cast<double>(warmup.size());
    if (last < best + cfg.tol) {
      ++stale;
    } else {
      stale = 0;
    }
    best = std::max(best, last);
    if (stale >= cfg.n_iter_no_change) break;
  }
  return last;
}

}  // namespace finemo
