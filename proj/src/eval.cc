#include "finemo/eval.h"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "finemo/utf8.h"

namespace finemo {

using nlohmann::json;

std::uint64_t total(const ConfusionMatrix& m) {
  std::uint64_t s = 0;
  for (const auto& row : m) {
    for (std::uint64_t v : row) s += v;
  }
  return s;
}

ConfusionSummary summarize(const ConfusionMatrix& m) {
  ConfusionSummary s;
  s.n = total(m);
  std::uint64_t trace = 0;
  for (int c = 0; c < 3; ++c) {
    trace += m[c][c];
    std::uint64_t row = 0;
    std::uint64_t col = 0;
    for (int k = 0; k < 3; ++k) {
      row += m[c][k];
      col += m[k][c];
    }
    ClassMetrics& cm = s.per_class[c];
    cm.precision_defined = col > 0;
    cm.recall_defined = row > 0;
    cm.precision = col > 0 ? static_cast<double>(m[c][c]) / static_cast<double>(col) : 0.0;
    cm.recall = row > 0 ? static_cast<double>(m[c][c]) / static_cast<double>(row) : 0.0;
  }
  s.accuracy = s.n > 0 ? static_cast<double>(trace) / static_cast<double>(s.n) : 0.0;
  return s;
}

PrequentialReport::PrequentialReport(std::size_t series_every, std::size_t cold_start)
    : series_every_(series_every), cold_start_(cold_start) {
  if (series_every == 0) throw EvalError("series_every must be positive");
}

void PrequentialReport::record(Emotion gold, Emotion predicted) {
  ++n_;
  if (gold == predicted) ++correct_;
  ++confusion_[index_of(gold)][index_of(predicted)];
  if (n_ > cold_start_) ++after_cold_start_[index_of(gold)][index_of(predicted)];
  if (n_ % series_every_ == 0) series_.emplace_back(n_, accuracy());
}

void PrequentialReport::finalize() {
  if (n_ > 0 && (series_.empty() || series_.back().first != n_)) {
    series_.emplace_back(n_, accuracy());
  }
}

double PrequentialReport::accuracy() const {
  return n_ > 0 ? static_cast<double>(correct_) / static_cast<double>(n_) : 0.0;
}

ClassMetrics PrequentialReport::class_metrics(Emotion e) const {
  return summarize(confusion_).per_class[index_of(e)];
}

namespace {

json matrix_json(const ConfusionMatrix& m) {
  json rows = json::array();
  for (const auto& r : m) rows.push_back(r);
  return rows;
}

json summary_json(const ConfusionMatrix& m) {
  const ConfusionSummary s = summarize(m);
  json per_class = json::object();
  json flagged = json::array();
  for (Emotion e : kAllEmotions) {
    const ClassMetrics& c = s.per_class[index_of(e)];
    per_class[std::string(name_of(e))] = {{"precision", c.precision}, {"recall", c.recall}};
    if (!c.precision_defined) flagged.push_back(fmt::format("precision:{}", name_of(e)));
    if (!c.recall_defined) flagged.push_back(fmt::format("recall:{}", name_of(e)));
  }
  return {{"n", s.n},
          {"accuracy", s.accuracy},
          {"confusion", matrix_json(m)},
          {"per_class", per_class},
          {"empty_denominators", flagged}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EvalError("cannot write " + path.string());
  out << text;
}

}  // namespace

std::string confusion_csv(const ConfusionMatrix& m) {
  std::string out = "gold,precaution,neutral,opportunity\n";
  for (Emotion e : kAllEmotions) {
    const auto& r = m[index_of(e)];
    out += fmt::format("{},{},{},{}\n", name_of(e), r[0], r[1], r[2]);
  }
  return out;
}

json PrequentialReport::to_json() const {
  json j = summary_json(confusion_);
  j["series_every"] = series_every_;
  j["cold_start"] = cold_start_;
  j["after_cold_start"] = summary_json(after_cold_start_);
  return j;
}

void PrequentialReport::write_confusion_csv(const std::filesystem::path& path) const {
  write_text(path, confusion_csv(confusion_));
}

void PrequentialReport::write_accuracy_csv(const std::filesystem::path& path) const {
  std::string out = "n,accuracy\n";
  for (const auto& [n, acc] : series_) out += fmt::format("{},{:.10f}\n", n, acc);
  write_text(path, out);
}

PrequentialReport prequential_run(const std::vector<FeatureVector>& stream,
                                  IncrementalLearner& learner,
                                  const PrequentialOptions& options,
                                  const PredictionCallback& on_prediction) {
  if (stream.empty()) throw EvalError("empty stream");
  if (learner.num_classes() != static_cast<std::size_t>(kNumEmotions)) {
    throw EvalError("learner must predict the three emotion classes");
  }
  PrequentialReport report(options.series_every, options.cold_start);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const FeatureVector& fv = stream[i];
    if (!fv.label) throw EvalError(fmt::format("instance {} has no label", i));
    const Emotion predicted = emotion_from_index(learner.predict(fv));
    report.record(*fv.label, predicted);
    if (on_prediction) on_prediction(i, predicted);
    learner.partial_fit(fv, index_of(*fv.label));
  }
  report.finalize();
  return report;
}

// --------------------------------------------------------------- Agreement

double krippendorff_alpha(const CoincidenceMatrix& c) {
  double n = 0.0;
  std::array<double, 3> marginal{};
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      if (c[i][k] < 0.0) throw EvalError("coincidence counts must be nonnegative");
      if (std::abs(c[i][k] - c[k][i]) > 1e-9 * (1.0 + std::abs(c[i][k]))) {
        throw EvalError("coincidence matrix must be symmetric");
      }
      marginal[i] += c[i][k];
      n += c[i][k];
    }
  }
  if (n <= 1.0) throw EvalError("alpha needs more than one pairable value");
  double observed = 0.0;
  double expected = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      if (i == k) continue;
      observed += c[i][k];
      expected += marginal[i] * marginal[k];
    }
  }
  if (expected <= 0.0) throw EvalError("alpha undefined: no expected disagreement");
  return 1.0 - (n - 1.0) * observed / expected;
}

CoincidenceMatrix coincidence_from_annotations(
    const std::vector<std::vector<Emotion>>& items) {
  CoincidenceMatrix c{};
  for (const auto& labels : items) {
    const std::size_t m = labels.size();
    if (m < 2) continue;
    const double w = 1.0 / static_cast<double>(m - 1);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        if (a != b) c[index_of(labels[a])][index_of(labels[b])] += w;
      }
    }
  }
  return c;
}

std::vector<PairAgreement> pairwise_agreement(
    const std::vector<std::vector<Emotion>>& items) {
  if (items.empty()) throw EvalError("no annotated items");
  const std::size_t annotators = items.front().size();
  for (const auto& labels : items) {
    if (labels.size() != annotators) {
      throw EvalError("every item needs a label from every annotator");
    }
  }
  if (annotators < 2) throw EvalError("agreement needs at least two annotators");
  std::vector<PairAgreement> out;
  for (std::size_t a = 0; a < annotators; ++a) {
    for (std::size_t b = a + 1; b < annotators; ++b) {
      PairAgreement p{a, b, 0.0, std::nullopt};
      std::vector<std::vector<Emotion>> pair_items;
      std::size_t agree = 0;
      for (const auto& labels : items) {
        if (labels[a] == labels[b]) ++agree;
        pair_items.push_back({labels[a], labels[b]});
      }
      p.accuracy = static_cast<double>(agree) / static_cast<double>(items.size());
      try {
        p.alpha = krippendorff_alpha(coincidence_from_annotations(pair_items));
      } catch (const EvalError&) {
      }
      out.push_back(p);
    }
  }
  return out;
}

json AgreementReport::to_json() const {
  json matrix = json::array();
  for (const auto& r : coincidence) matrix.push_back(r);
  json pj = json::array();
  for (const PairAgreement& p : pairs) {
    pj.push_back({{"annotators", {p.first, p.second}},
                  {"accuracy", p.accuracy},
                  {"alpha", p.alpha ? json(*p.alpha) : json(nullptr)}});
  }
  return {{"coincidence", matrix}, {"alpha", alpha}, {"pairs", pj}};
}

AgreementReport agreement_report(const std::vector<std::vector<Emotion>>& items) {
  AgreementReport r;
  r.pairs = pairwise_agreement(items);
  r.coincidence = coincidence_from_annotations(items);
  r.alpha = krippendorff_alpha(r.coincidence);
  return r;
}

std::vector<std::vector<Emotion>> load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EvalError("annotations file not found: " + path.string());
  std::vector<std::vector<Emotion>> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (utf8::trim(line).empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (fields.size() < 3) {
      throw EvalError(fmt::format("{}:{}: expected an item id and two or more labels",
                                  path.string(), line_no));
    }
    std::vector<Emotion> labels;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto e = parse_emotion(utf8::trim(fields[i]));
      if (!e) {
        throw EvalError(fmt::format("{}:{}: bad label '{}'", path.string(), line_no,
                                    fields[i]));
      }
      labels.push_back(*e);
    }
    items.push_back(std::move(labels));
  }
  return items;
}

}  // namespace finemo
