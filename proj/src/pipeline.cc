#include "finemo/pipeline.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "finemo/selection.h"
#include "finemo/utf8.h"

namespace finemo {

using nlohmann::json;
namespace chr = std::chrono;

// ------------------------------------------------------------------ Ingestion

std::optional<chr::sys_seconds> parse_timestamp(std::string_view text) {
  const std::string s = utf8::trim(text);
  if (s.size() < 10) return std::nullopt;
  const auto day = parse_date(std::string_view(s).substr(0, 10));
  if (!day) return std::nullopt;
  chr::sys_seconds t = chr::sys_seconds(*day);
  if (s.size() == 10) return t;
  if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  std::size_t pos = 11;
  auto two_digits = [&](int& v) {
    if (pos + 2 > s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])) ||
        !std::isdigit(static_cast<unsigned char>(s[pos + 1]))) {
      return false;
    }
    v = (s[pos] - '0') * 10 + (s[pos + 1] - '0');
    pos += 2;
    return true;
  };
  if (!two_digits(hh) || pos >= s.size() || s[pos++] != ':' || !two_digits(mm)) {
    return std::nullopt;
  }
  if (pos < s.size() && s[pos] == ':') {
    ++pos;
    if (!two_digits(ss)) return std::nullopt;
  }
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  t += chr::hours(hh) + chr::minutes(mm) + chr::seconds(ss);
  if (pos == s.size()) return t;
  if (s[pos] == 'Z' && pos + 1 == s.size()) return t;
  if (s[pos] == '+' || s[pos] == '-') {
    const int sign = s[pos] == '+' ? 1 : -1;
    ++pos;
    int oh = 0, om = 0;
    if (!two_digits(oh)) return std::nullopt;
    if (pos < s.size() && s[pos] == ':') ++pos;
    if (pos < s.size() && !two_digits(om)) return std::nullopt;
    if (pos != s.size()) return std::nullopt;
    return t - sign * (chr::hours(oh) + chr::minutes(om));
  }
  return std::nullopt;
}

std::string format_timestamp(chr::sys_seconds t) {
  const auto day = chr::floor<chr::days>(t);
  const chr::year_month_day ymd(day);
  const chr::hh_mm_ss hms(t - day);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError("cannot open " + path.string());
  std::vector<json> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (utf8::trim(line).empty()) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw PipelineError(fmt::format("{}:{}: invalid JSON: {}", path.string(), line_no,
                                      e.what()));
    }
  }
  return rows;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PipelineError("cannot write " + path.string());
  for (const json& r : rows) out << r.dump() << '\n';
}

std::vector<RawTweet> load_tweets(const std::filesystem::path& path) {
  std::vector<RawTweet> tweets;
  std::size_t row = 0;
  for (const json& j : read_jsonl(path)) {
    ++row;
    try {
      RawTweet t;
      t.id = j.at("id").is_string() ? j.at("id").get<std::string>()
                                    : j.at("id").dump();
      const auto ts = parse_timestamp(j.at("created_at").get<std::string>());
      if (!ts) throw PipelineError("bad created_at");
      t.timestamp = *ts;
      t.text = j.at("text").get<std::string>();
      tweets.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw PipelineError(fmt::format("{}: record {}: {}", path.string(), row, e.what()));
    } catch (const PipelineError& e) {
      throw PipelineError(fmt::format("{}: record {}: {}", path.string(), row, e.what()));
    }
  }
  std::stable_sort(tweets.begin(), tweets.end(), [](const RawTweet& a, const RawTweet& b) {
    return a.timestamp < b.timestamp;
  });
  return tweets;
}

LabelKey label_key(const std::string& tweet_id, int segment_index,
                   const std::string& focus) {
  return {tweet_id, segment_index, utf8::fold_case(focus)};
}

LabelMap load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError("labels file not found: " + path.string());
  LabelMap labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (utf8::trim(line).empty() || line.front() == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) f.push_back(field);
    auto fail = [&](const std::string& why) {
      return PipelineError(fmt::format("{}:{}: {}", path.string(), line_no, why));
    };
    if (f.size() != 4) throw fail("expected tweet_id, segment_index, focus, label");
    int index = 0;
    try {
      std::size_t used = 0;
      index = std::stoi(f[1], &used);
      if (used != f[1].size()) throw fail("bad segment index");
    } catch (const std::logic_error&) {
      throw fail("bad segment index");
    }
    const auto e = parse_emotion(utf8::trim(f[3]));
    if (!e) throw fail("bad label '" + f[3] + "'");
    if (!labels.emplace(label_key(f[0], index, f[2]), *e).second) {
      throw fail("duplicate label");
    }
  }
  return labels;
}

std::set<chr::sys_days> parse_holidays(const std::vector<std::string>& days) {
  std::set<chr::sys_days> out;
  for (const std::string& d : days) {
    const auto day = parse_date(d);
    if (!day) throw PipelineError("bad holiday date: " + d);
    out.insert(*day);
  }
  return out;
}

// --------------------------------------------------------------------- Stream

PreparedStream prepare_stream(const std::vector<RawTweet>& tweets, const LexiconSet& lx,
                              const TextprocConfig& textproc, const LabelMap* labels,
                              const PriceSeries* prices,
                              const std::set<chr::sys_days>& holidays) {
  PreparedStream out;
  out.tweets = tweets.size();
  for (const RawTweet& tweet : tweets) {
    for (const Segment& seg : segment_tweet(tweet, lx)) {
      for (Segment replica : replicate_per_asset(seg)) {
        ++out.segments;
        const std::string focus = replica.focus.value_or("");
        if (labels) {
          auto it = labels->find(label_key(replica.tweet_id, replica.segment_index, focus));
          if (it == labels->end()) {
            ++out.unlabeled_skipped;
            continue;
          }
          replica.label = it->second;
        }
        StreamInstance inst;
        inst.processed = process(replica, lx, textproc);
        inst.numeric = extract_numeric(inst.processed, inst.processed.pre_clean_text, lx);
        inst.text = replica.original_text.empty() ? replica.text : replica.original_text;
        inst.timestamp = tweet.timestamp;
        if (prices) {
          try {
            inst.trend = compute_trend(focus, tweet.timestamp, *prices, holidays);
          } catch (const TrendUnavailable&) {
            ++out.trend_defaults;
          }
        } else {
          ++out.trend_defaults;
        }
        out.instances.push_back(std::move(inst));
      }
    }
  }
  return out;
}

// ------------------------------------------------------------------ Training

json IndicatorRecord::to_json() const {
  return {{"tweet_id", tweet_id},
          {"segment_index", segment_index},
          {"text", text},
          {"focus", focus},
          {"predicted", std::string(name_of(predicted))},
          {"code", std::string(1, code_of(predicted))},
          {"timestamp", format_timestamp(timestamp)}};
}

std::vector<FeatureVector> vectorize_stream(const std::vector<StreamInstance>& stream,
                                            const VocabularyModel& vm) {
  std::vector<FeatureVector> out;
  out.reserve(stream.size());
  for (const StreamInstance& inst : stream) {
    out.push_back(vectorize(inst.processed, vm, inst.numeric, inst.trend));
  }
  return out;
}

std::unique_ptr<IncrementalLearner> make_classifier(const LearnerSpec& spec, bool stacked,
                                                    Stage2Training training,
                                                    std::uint64_t seed) {
  if (stacked) return StackedClassifier::make(spec, seed, training);
  return make_learner(spec, kNumEmotions, seed);
}

namespace {

void set_attribute_count(LearnerSpec& spec, std::size_t output_dim) {
  spec.rf.num_attributes = kDenseAttributes + output_dim;
  spec.dt.num_attributes = kDenseAttributes + output_dim;
}

json run_grid(LearnerSpec& spec, const TrainEvalConfig& cfg,
              const std::vector<const FeatureVector*>& window,
              const std::vector<int>& labels) {
  if (spec.kind == LearnerKind::RandomForest) {
    const std::vector<RfParams> grid = rf_grid();
    const GridResult r = grid_search(
        grid.size(),
        [&](std::size_t i) {
          LearnerSpec s = spec;
          s.rf.estimators = grid[i].estimators;
          s.rf.max_features = grid[i].max_features;
          s.rf.lambda = grid[i].lambda;
          auto learner = make_classifier(s, cfg.stacked, cfg.stage2_training, cfg.seed);
          return prequential_accuracy(*learner, window, labels);
        },
        cfg.grid_threads);
    spec.rf.estimators = grid[r.best_index].estimators;
    spec.rf.max_features = grid[r.best_index].max_features;
    spec.rf.lambda = grid[r.best_index].lambda;
    return {{"evaluated", grid.size()},
            {"best", to_json(grid[r.best_index])},
            {"best_score", r.best_score}};
  }
  if (spec.kind == LearnerKind::Sgd) {
    const std::vector<SgdConfig> grid = sgd_grid();
    const GridResult r = grid_search(
        grid.size(),
        [&](std::size_t i) {
          return sgd_warmup_score(grid[i], kNumEmotions, window, labels, cfg.seed);
        },
        cfg.grid_threads);
    spec.sgd = grid[r.best_index];
    return {{"evaluated", grid.size()},
            {"best", to_json(grid[r.best_index])},
            {"best_score", r.best_score}};
  }
  return nullptr;
}

}  // namespace

TrainEvalResult train_eval(const std::vector<StreamInstance>& stream,
                           const TrainEvalConfig& cfg) {
  if (cfg.warmup == 0) throw PipelineError("warmup must be at least 1");
  if (stream.size() < cfg.warmup) throw PipelineError("insufficient warmup data");
  for (const StreamInstance& inst : stream) {
    if (!inst.processed.label) throw PipelineError("train-eval needs labeled instances");
  }

  std::vector<ProcessedSegment> warm_corpus;
  warm_corpus.reserve(cfg.warmup);
  for (std::size_t i = 0; i < cfg.warmup; ++i) warm_corpus.push_back(stream[i].processed);
  VocabularyModel vm = fit_vocabularies(warm_corpus, cfg.vectorizer);

  std::vector<int> warm_labels;
  for (std::size_t i = 0; i < cfg.warmup; ++i) {
    warm_labels.push_back(index_of(*stream[i].processed.label));
  }

  if (cfg.selection && vm.ngram_dim() > 0) {
    const std::size_t dim = vm.ngram_dim();
    std::vector<SparseRow> rows;
    rows.reserve(cfg.warmup);
    for (std::size_t i = 0; i < cfg.warmup; ++i) {
      const FeatureVector fv = vectorize(stream[i].processed, vm, stream[i].numeric,
                                         stream[i].trend);
      SparseRow row;
      for (const auto& [c, n] : fv.sparse) {
        if (c < dim) row.emplace_back(c, static_cast<double>(n));
      }
      rows.push_back(std::move(row));
    }
    const SelectionMask mask =
        select_percentile(chi2_scores_sparse(rows, dim, warm_labels), cfg.percentile);
    vm.set_selection(mask.retained);
  }

  std::vector<FeatureVector> vectors = vectorize_stream(stream, vm);

  TrainEvalResult result{PrequentialReport(cfg.series_every, cfg.warmup), vm,
                         cfg.learner, nullptr, nullptr, {}};
  set_attribute_count(result.learner_spec, vm.output_dim());
  if (cfg.grid_search) {
    std::vector<const FeatureVector*> window;
    for (std::size_t i = 0; i < cfg.warmup; ++i) window.push_back(&vectors[i]);
    result.grid = run_grid(result.learner_spec, cfg, window, warm_labels);
  }

  result.learner = make_classifier(result.learner_spec, cfg.stacked, cfg.stage2_training,
                                   cfg.seed);
  result.predictions.reserve(vectors.size());
  result.report = prequential_run(
      vectors, *result.learner, {cfg.series_every, cfg.warmup},
      [&](std::size_t, Emotion e) { result.predictions.push_back(e); });
  return result;
}

// -------------------------------------------------------------- Configuration

void apply_config(PipelineConfig& cfg, const json& j) {
  if (!j.is_object()) throw PipelineError("config must be a JSON object");
  auto path = [&](const char* key, auto& target) {
    if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<std::string>();
  };
  try {
    path("lexicons", cfg.lexicons);
    path("tweets", cfg.tweets);
    path("prices", cfg.prices);
    path("labels", cfg.labels);
    path("model", cfg.model);
    path("out", cfg.out);
    if (j.contains("holidays")) cfg.holidays = j.at("holidays").get<std::vector<std::string>>();
    if (j.contains("all")) cfg.emit_all = j.at("all").get<bool>();

    TrainEvalConfig& t = cfg.train;
    if (j.contains("warmup")) t.warmup = j.at("warmup").get<std::size_t>();
    if (j.contains("seed")) t.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("stacked")) t.stacked = j.at("stacked").get<bool>();
    if (j.contains("stage2_training")) {
      const std::string s = j.at("stage2_training").get<std::string>();
      if (s == "gold") {
        t.stage2_training = Stage2Training::GoldRouted;
      } else if (s == "prediction") {
        t.stage2_training = Stage2Training::PredictionRouted;
      } else {
        throw PipelineError("stage2_training must be gold or prediction");
      }
    }
    if (j.contains("learner")) t.learner.kind = parse_learner_kind(j.at("learner").get<std::string>());
    if (j.contains("grid_search")) t.grid_search = j.at("grid_search").get<bool>();
    if (j.contains("grid_threads")) t.grid_threads = j.at("grid_threads").get<std::size_t>();
    if (j.contains("series_every")) t.series_every = j.at("series_every").get<std::size_t>();

    if (j.contains("selection")) {
      const json& s = j.at("selection");
      if (s.contains("enabled")) t.selection = s.at("enabled").get<bool>();
      if (s.contains("percentile")) t.percentile = s.at("percentile").get<int>();
    }
    if (j.contains("vectorizer")) {
      const json& v = j.at("vectorizer");
      if (v.contains("ngram_range")) {
        const auto r = v.at("ngram_range").get<std::vector<std::size_t>>();
        if (r.size() != 2) throw PipelineError("ngram_range needs two values");
        t.vectorizer.ngram_min = r[0];
        t.vectorizer.ngram_max = r[1];
      }
      if (v.contains("max_df")) t.vectorizer.max_df = v.at("max_df").get<double>();
      if (v.contains("min_df")) t.vectorizer.min_df = v.at("min_df").get<double>();
      if (v.contains("use_bow")) t.vectorizer.use_bow = v.at("use_bow").get<bool>();
      if (v.contains("bow_size")) t.vectorizer.bow_size = v.at("bow_size").get<std::size_t>();
    }
    if (j.contains("textproc")) {
      const json& p = j.at("textproc");
      if (p.contains("max_edit_distance")) {
        cfg.textproc.max_edit_distance = p.at("max_edit_distance").get<int>();
      }
      if (p.contains("drop_unknown")) cfg.textproc.drop_unknown = p.at("drop_unknown").get<bool>();
      if (p.contains("min_split_piece")) {
        cfg.textproc.min_split_piece = p.at("min_split_piece").get<std::size_t>();
      }
    }
    LearnerSpec& l = t.learner;
    if (j.contains("nb")) {
      const json& n = j.at("nb");
      if (n.contains("var_smoothing")) l.nb.var_smoothing = n.at("var_smoothing").get<double>();
    }
    auto tree = [](HoeffdingConfig& h, const json& d) {
      if (d.contains("delta")) h.delta = d.at("delta").get<double>();
      if (d.contains("grace_period")) h.grace_period = d.at("grace_period").get<double>();
      if (d.contains("tie_threshold")) h.tie_threshold = d.at("tie_threshold").get<double>();
      if (d.contains("max_depth")) h.max_depth = d.at("max_depth").get<std::size_t>();
      if (d.contains("split_bins")) h.split_bins = d.at("split_bins").get<std::size_t>();
      if (d.contains("leaf_prediction")) {
        const std::string s = d.at("leaf_prediction").get<std::string>();
        if (s == "mc") {
          h.leaf_prediction = LeafPrediction::MajorityClass;
        } else if (s == "nb") {
          h.leaf_prediction = LeafPrediction::NaiveBayes;
        } else if (s == "nba") {
          h.leaf_prediction = LeafPrediction::NaiveBayesAdaptive;
        } else {
          throw PipelineError("leaf_prediction must be mc, nb or nba");
        }
      }
    };
    if (j.contains("dt")) tree(l.dt, j.at("dt"));
    if (j.contains("rf")) {
      const json& r = j.at("rf");
      if (r.contains("estimators")) l.rf.estimators = r.at("estimators").get<std::size_t>();
      if (r.contains("max_features")) {
        const json& m = r.at("max_features");
        l.rf.max_features = m.is_string() && m.get<std::string>() == "auto"
                                ? 0
                                : m.get<std::size_t>();
      }
      if (r.contains("lambda")) l.rf.lambda = r.at("lambda").get<double>();
      if (r.contains("bootstrap")) l.rf.bootstrap = r.at("bootstrap").get<bool>();
      if (r.contains("drift_detection")) l.rf.drift_detection = r.at("drift_detection").get<bool>();
      if (r.contains("warning_delta")) l.rf.warning_delta = r.at("warning_delta").get<double>();
      if (r.contains("drift_delta")) l.rf.drift_delta = r.at("drift_delta").get<double>();
      if (r.contains("tree")) tree(l.rf.tree, r.at("tree"));
    }
    if (j.contains("sgd")) {
      const json& s = j.at("sgd");
      if (s.contains("penalty")) l.sgd.penalty = parse_penalty(s.at("penalty").get<std::string>());
      if (s.contains("l1_ratio")) l.sgd.l1_ratio = s.at("l1_ratio").get<double>();
      if (s.contains("alpha")) l.sgd.alpha = s.at("alpha").get<double>();
      if (s.contains("max_iter")) l.sgd.max_iter = s.at("max_iter").get<std::size_t>();
      if (s.contains("tol")) l.sgd.tol = s.at("tol").get<double>();
      if (s.contains("n_iter_no_change")) {
        l.sgd.n_iter_no_change = s.at("n_iter_no_change").get<std::size_t>();
      }
    }
  } catch (const json::exception& e) {
    throw PipelineError(std::string("invalid config: ") + e.what());
  } catch (const LearnerError& e) {
    throw PipelineError(std::string("invalid config: ") + e.what());
  }
}

json config_to_json(const PipelineConfig& cfg) {
  const TrainEvalConfig& t = cfg.train;
  const LearnerSpec& l = t.learner;
  json j;
  j["lexicons"] = cfg.lexicons.string();
  j["tweets"] = cfg.tweets.string();
  j["prices"] = cfg.prices ? json(cfg.prices->string()) : json(nullptr);
  j["labels"] = cfg.labels ? json(cfg.labels->string()) : json(nullptr);
  j["holidays"] = cfg.holidays;
  j["warmup"] = t.warmup;
  j["seed"] = t.seed;
  j["learner"] = to_string(l.kind);
  j["stacked"] = t.stacked;
  j["stage2_training"] = t.stage2_training == Stage2Training::GoldRouted ? "gold" : "prediction";
  j["grid_search"] = t.grid_search;
  j["series_every"] = t.series_every;
  j["selection"] = {{"enabled", t.selection}, {"percentile", t.percentile}};
  j["vectorizer"] = {{"ngram_range", {t.vectorizer.ngram_min, t.vectorizer.ngram_max}},
                     {"max_df", t.vectorizer.max_df},
                     {"min_df", t.vectorizer.min_df},
                     {"use_bow", t.vectorizer.use_bow},
                     {"bow_size", t.vectorizer.bow_size}};
  j["rf"] = {{"estimators", l.rf.estimators},
             {"max_features", l.rf.max_features == 0 ? json("auto") : json(l.rf.max_features)},
             {"lambda", l.rf.lambda}};
  j["sgd"] = to_json(l.sgd);
  return j;
}

// -------------------------------------------------------------- Whole runs

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PipelineError("cannot write " + path.string());
  out << text;
}

IndicatorRecord indicator_for(const StreamInstance& inst, Emotion predicted) {
  return {inst.processed.tweet_id, inst.processed.segment_index, inst.text,
          inst.processed.focus,    predicted,                    inst.timestamp};
}

void warn_trend_defaults(const PreparedStream& ps) {
  if (ps.trend_defaults > 0) {
    fmt::print(stderr, "warning: no price data for {} of {} segments; trend set to downward\n",
               ps.trend_defaults, ps.instances.size() + ps.unlabeled_skipped);
  }
}

}  // namespace

PipelineSummary run_pipeline(const PipelineConfig& cfg) {
  const LexiconSet lx = load_lexicons(cfg.lexicons);
  const std::vector<RawTweet> tweets = load_tweets(cfg.tweets);
  std::optional<PriceSeries> prices;
  if (cfg.prices) prices = load_prices(*cfg.prices);
  const auto holidays = parse_holidays(cfg.holidays);
  std::optional<LabelMap> labels;
  if (cfg.labels) labels = load_labels(*cfg.labels);

  const PreparedStream ps = prepare_stream(tweets, lx, cfg.textproc,
                                           labels ? &*labels : nullptr,
                                           prices ? &*prices : nullptr, holidays);
  warn_trend_defaults(ps);
  std::filesystem::create_directories(cfg.out);

  PipelineSummary summary;
  summary.instances = ps.instances.size();
  std::vector<json> indicators;

  if (!labels) {
    if (!cfg.model) {
      throw PipelineError("inference mode needs a trained model (--model)");
    }
    std::ifstream in(*cfg.model);
    if (!in) throw PipelineError("model file not found: " + cfg.model->string());
    json model;
    try {
      model = json::parse(in);
    } catch (const json::parse_error& e) {
      throw PipelineError(std::string("invalid model file: ") + e.what());
    }
    const VocabularyModel vm = VocabularyModel::from_json(model.at("vocabulary"));
    const auto learner = learner_from_json(model.at("learner"));
    for (const StreamInstance& inst : ps.instances) {
      const Emotion e = emotion_from_index(
          learner->predict(vectorize(inst.processed, vm, inst.numeric, inst.trend)));
      if (cfg.emit_all || e != Emotion::Neutral) {
        indicators.push_back(indicator_for(inst, e).to_json());
      }
    }
    write_jsonl(cfg.out / "indicators.jsonl", indicators);
    summary.inference_only = true;
    summary.indicators = indicators.size();
    return summary;
  }

  if (ps.instances.size() < cfg.train.warmup) {
    throw PipelineError("insufficient warmup data");
  }
  TrainEvalResult r = train_eval(ps.instances, cfg.train);
  for (std::size_t i = 0; i < ps.instances.size(); ++i) {
    if (cfg.emit_all || r.predictions[i] != Emotion::Neutral) {
      indicators.push_back(indicator_for(ps.instances[i], r.predictions[i]).to_json());
    }
  }

  json report = r.report.to_json();
  report["config"] = config_to_json(cfg);
  report["learner"] = {{"kind", to_string(r.learner_spec.kind)},
                       {"stacked", cfg.train.stacked}};
  report["grid"] = r.grid;
  report["stream"] = {{"tweets", ps.tweets},
                      {"segments", ps.segments},
                      {"instances", ps.instances.size()},
                      {"unlabeled_skipped", ps.unlabeled_skipped},
                      {"trend_defaults", ps.trend_defaults}};
  report["vocabulary"] = {{"ngram_columns", r.vocabulary.ngram_dim()},
                          {"output_columns", r.vocabulary.output_dim()}};

  write_file(cfg.out / "report.json", report.dump(2) + "\n");
  r.report.write_confusion_csv(cfg.out / "confusion.csv");
  r.report.write_accuracy_csv(cfg.out / "accuracy_series.csv");
  write_jsonl(cfg.out / "indicators.jsonl", indicators);
  const json model = {{"format_version", 1},
                      {"vocabulary", r.vocabulary.to_json()},
                      {"learner", r.learner->to_json()}};
  write_file(cfg.out / "model.json", model.dump() + "\n");

  summary.indicators = indicators.size();
  summary.accuracy = r.report.accuracy();
  return summary;
}

// ------------------------------------------------------------- JSON records

json segment_to_json(const Segment& seg, chr::sys_seconds timestamp) {
  json assets = json::array();
  for (const AssetMention& a : seg.assets) {
    assets.push_back({{"ticker", a.ticker}, {"begin", a.begin}, {"end", a.end}});
  }
  json j = {{"tweet_id", seg.tweet_id},
            {"segment_index", seg.segment_index},
            {"created_at", format_timestamp(timestamp)},
            {"text", seg.text},
            {"original_text", seg.original_text},
            {"focus", seg.focus ? json(*seg.focus) : json(nullptr)},
            {"assets", assets}};
  if (seg.label) j["label"] = std::string(1, code_of(*seg.label));
  return j;
}

Segment segment_from_json(const json& j, chr::sys_seconds* timestamp) {
  try {
    Segment seg;
    seg.tweet_id = j.at("tweet_id").get<std::string>();
    seg.segment_index = j.at("segment_index").get<int>();
    seg.text = j.at("text").get<std::string>();
    seg.original_text = j.value("original_text", std::string());
    if (j.contains("focus") && !j.at("focus").is_null()) {
      seg.focus = j.at("focus").get<std::string>();
    }
    if (j.contains("assets")) {
      for (const json& a : j.at("assets")) {
        seg.assets.push_back({a.at("ticker").get<std::string>(),
                              a.at("begin").get<std::size_t>(),
                              a.at("end").get<std::size_t>()});
      }
    }
    if (j.contains("label") && !j.at("label").is_null()) {
      const auto e = parse_emotion(j.at("label").get<std::string>());
      if (!e) throw PipelineError("bad label");
      seg.label = *e;
    }
    if (timestamp) {
      const auto ts = parse_timestamp(j.value("created_at", std::string("1970-01-01")));
      if (!ts) throw PipelineError("bad created_at");
      *timestamp = *ts;
    }
    return seg;
  } catch (const json::exception& e) {
    throw PipelineError(std::string("invalid segment record: ") + e.what());
  }
}

json processed_to_json(const StreamInstance& inst) {
  const ProcessedSegment& p = inst.processed;
  json j = {{"tweet_id", p.tweet_id},
            {"segment_index", p.segment_index},
            {"created_at", format_timestamp(inst.timestamp)},
            {"focus", p.focus},
            {"tokens", p.tokens},
            {"raw_len", p.raw_len},
            {"pre_clean_text", p.pre_clean_text},
            {"text", inst.text},
            {"numeric", inst.numeric},
            {"trend", inst.trend}};
  if (p.label) j["label"] = std::string(1, code_of(*p.label));
  return j;
}

StreamInstance processed_from_json(const json& j) {
  try {
    StreamInstance inst;
    ProcessedSegment& p = inst.processed;
    p.tweet_id = j.at("tweet_id").get<std::string>();
    p.segment_index = j.at("segment_index").get<int>();
    p.focus = j.at("focus").get<std::string>();
    p.tokens = j.at("tokens").get<std::vector<std::string>>();
    p.raw_len = j.at("raw_len").get<std::size_t>();
    p.pre_clean_text = j.value("pre_clean_text", std::string());
    inst.text = j.value("text", std::string());
    inst.trend = j.value("trend", false);
    if (j.contains("numeric")) {
      const auto v = j.at("numeric").get<std::vector<int>>();
      if (v.size() != kNumNumeric) throw PipelineError("numeric block needs 20 values");
      std::copy(v.begin(), v.end(), inst.numeric.begin());
    }
    if (j.contains("label") && !j.at("label").is_null()) {
      const auto e = parse_emotion(j.at("label").get<std::string>());
      if (!e) throw PipelineError("bad label");
      p.label = *e;
    }
    const auto ts = parse_timestamp(j.value("created_at", std::string("1970-01-01")));
    if (!ts) throw PipelineError("bad created_at");
    inst.timestamp = *ts;
    return inst;
  } catch (const json::exception& e) {
    throw PipelineError(std::string("invalid processed record: ") + e.what());
  }
}

}  // namespace finemo
