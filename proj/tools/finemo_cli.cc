// finemo: segment, process, vectorize, analyze and classify financial posts.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "finemo/eval.h"
#include "finemo/pipeline.h"
#include "finemo/selection.h"
#include "finemo/utf8.h"

#ifndef FINEMO_DEFAULT_LEXICONS
#define FINEMO_DEFAULT_LEXICONS "resources/lexicons"
#endif

using namespace finemo;
using nlohmann::json;

namespace {

void emit_jsonl(const std::string& path, const std::vector<json>& rows) {
  if (path.empty() || path == "-") {
    for (const json& r : rows) std::cout << r.dump() << '\n';
  } else {
    write_jsonl(path, rows);
  }
}

void emit_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PipelineError("cannot write " + path);
  out << j.dump(2) << '\n';
}

std::vector<StreamInstance> read_processed(const std::string& path) {
  std::vector<StreamInstance> out;
  for (const json& j : read_jsonl(path)) out.push_back(processed_from_json(j));
  return out;
}

std::vector<StreamInstance> labeled_only(std::vector<StreamInstance> v) {
  v.erase(std::remove_if(v.begin(), v.end(),
                         [](const StreamInstance& s) { return !s.processed.label; }),
          v.end());
  return v;
}

// Toy matrices for analyze: CSV header f1,...,fk,label; labels P/N/O.
void read_matrix(const std::string& path, std::vector<std::string>& names,
                 std::vector<std::vector<double>>& rows, std::vector<int>& labels) {
  std::ifstream in(path);
  if (!in) throw PipelineError("cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (utf8::trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(utf8::trim(cell));
    if (names.empty()) {
      if (f.size() < 2) throw PipelineError(path + ": header needs features and a label");
      names.assign(f.begin(), f.end() - 1);
      continue;
    }
    if (f.size() != names.size() + 1) {
      throw PipelineError(fmt::format("{}:{}: expected {} cells", path, line_no,
                                      names.size() + 1));
    }
    std::vector<double> row;
    for (std::size_t i = 0; i < names.size(); ++i) {
      try {
        row.push_back(std::stod(f[i]));
      } catch (const std::logic_error&) {
        throw PipelineError(fmt::format("{}:{}: bad number '{}'", path, line_no, f[i]));
      }
    }
    const auto e = parse_emotion(f.back());
    if (!e) throw PipelineError(fmt::format("{}:{}: bad label '{}'", path, line_no, f.back()));
    rows.push_back(std::move(row));
    labels.push_back(index_of(*e));
  }
}

void print_ranking(const std::vector<std::string>& names, const std::vector<double>& chi2,
                   const SelectionMask& mask, std::size_t top) {
  std::vector<std::size_t> order(chi2.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return chi2[a] > chi2[b]; });
  fmt::print("{:>5}  {:>12}  {:>4}  {}\n", "rank", "chi2", "keep", "feature");
  for (std::size_t i = 0; i < std::min(top, order.size()); ++i) {
    const std::size_t c = order[i];
    const bool kept = std::binary_search(mask.retained.begin(), mask.retained.end(),
                                         static_cast<std::uint32_t>(c));
    fmt::print("{:>5}  {:>12.4f}  {:>4}  {}\n", i + 1, chi2[c], kept ? "yes" : "no",
               names[c]);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-asset financial emotion analysis of microblog posts"};
  app.require_subcommand(1);

  // segment
  std::string lexicons = FINEMO_DEFAULT_LEXICONS;
  std::string tweets, labels_path, out_path, segments_path, prices_path, processed_path;
  std::vector<std::string> holidays;
  auto* seg_cmd = app.add_subcommand("segment", "Split posts into per-asset segments");
  seg_cmd->add_option("--lexicons", lexicons, "Lexicon directory");
  seg_cmd->add_option("--tweets", tweets, "Posts as JSON Lines")->required();
  seg_cmd->add_option("--labels", labels_path, "Optional gold labels (TSV)");
  seg_cmd->add_option("--out", out_path, "Output JSONL (default stdout)");

  // process
  auto* proc_cmd = app.add_subcommand("process", "Normalize segments and extract dense features");
  proc_cmd->add_option("--lexicons", lexicons, "Lexicon directory");
  proc_cmd->add_option("--segments", segments_path, "Segments JSONL")->required();
  proc_cmd->add_option("--prices", prices_path, "Closing prices CSV");
  proc_cmd->add_option("--holidays", holidays, "Non-trading days (YYYY-MM-DD)");
  proc_cmd->add_option("--out", out_path, "Output JSONL (default stdout)");

  // features
  std::size_t warmup = 0;
  std::string model_path;
  bool no_bow = false;
  auto* feat_cmd = app.add_subcommand("features", "Vectorize processed segments");
  feat_cmd->add_option("--processed", processed_path, "Processed JSONL")->required();
  feat_cmd->add_option("--warmup", warmup, "Fit on the first N labeled segments (0 = all)");
  feat_cmd->add_option("--model", model_path, "Reuse the vocabulary of a trained model");
  feat_cmd->add_flag("--no-bow", no_bow, "Disable the emotion BOW counters");
  feat_cmd->add_option("--out", out_path, "Output directory")->required();

  // analyze
  int percentile = 15;
  std::size_t top = 25;
  std::string matrix_path;
  auto* an_cmd = app.add_subcommand("analyze", "Pearson and chi-squared feature report");
  auto* an_src = an_cmd->add_option_group("source")->require_option(1);
  an_src->add_option("--processed", processed_path, "Processed JSONL");
  an_src->add_option("--matrix", matrix_path, "CSV matrix f1,...,fk,label");
  an_cmd->add_option("--percentile", percentile, "Selection percentile")->check(CLI::Range(1, 100));
  an_cmd->add_option("--top", top, "Rows of the printed ranking");
  an_cmd->add_option("--out", out_path, "JSON report path");

  // train-eval
  PipelineConfig pcfg;
  std::string config_path, learner_name;
  std::uint64_t seed = 1;
  std::size_t te_warmup = 1000, threads = 1;
  bool stacked = false, single = false, emit_all = false, no_grid = false;
  auto* te_cmd = app.add_subcommand("train-eval", "Prequential training and evaluation");
  te_cmd->add_option("--config", config_path, "JSON config file");
  auto* o_lex = te_cmd->add_option("--lexicons", lexicons, "Lexicon directory");
  auto* o_tw = te_cmd->add_option("--tweets", tweets, "Posts as JSON Lines");
  auto* o_pr = te_cmd->add_option("--prices", prices_path, "Closing prices CSV");
  auto* o_lb = te_cmd->add_option("--labels", labels_path, "Gold labels TSV (omit for inference)");
  auto* o_md = te_cmd->add_option("--model", model_path, "Trained model for inference mode");
  auto* o_wu = te_cmd->add_option("--warmup", te_warmup, "Cold-start instances")->check(CLI::PositiveNumber);
  auto* o_le = te_cmd->add_option("--learner", learner_name, "nb, dt, rf or sgd")
                   ->check(CLI::IsMember({"nb", "dt", "rf", "sgd"}));
  auto* o_st = te_cmd->add_flag("--stacked", stacked, "Two-stage stacking");
  auto* o_si = te_cmd->add_flag("--single", single, "Single-stage classifier");
  o_st->excludes(o_si);
  auto* o_sd = te_cmd->add_option("--seed", seed, "Random seed");
  auto* o_out = te_cmd->add_option("--out", out_path, "Output directory");
  auto* o_all = te_cmd->add_flag("--all", emit_all, "Also emit neutral indicators");
  auto* o_ng = te_cmd->add_flag("--no-grid", no_grid, "Skip hyperparameter search");
  auto* o_th = te_cmd->add_option("--threads", threads, "Grid search threads")->check(CLI::PositiveNumber);

  // agreement
  std::string annotations;
  auto* ag_cmd = app.add_subcommand("agreement", "Inter-annotator agreement");
  ag_cmd->add_option("--annotations", annotations, "item<TAB>label<TAB>label... file")->required();
  ag_cmd->add_option("--out", out_path, "JSON report path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (seg_cmd->parsed()) {
      const LexiconSet lx = load_lexicons(lexicons);
      std::optional<LabelMap> labels;
      if (!labels_path.empty()) labels = load_labels(labels_path);
      std::vector<json> rows;
      for (const RawTweet& t : load_tweets(tweets)) {
        for (const Segment& s : segment_tweet(t, lx)) {
          for (Segment r : replicate_per_asset(s)) {
            if (labels) {
              auto it = labels->find(label_key(r.tweet_id, r.segment_index, r.focus.value_or("")));
              if (it != labels->end()) r.label = it->second;
            }
            rows.push_back(segment_to_json(r, t.timestamp));
          }
        }
      }
      emit_jsonl(out_path, rows);
      return 0;
    }

    if (proc_cmd->parsed()) {
      const LexiconSet lx = load_lexicons(lexicons);
      std::optional<PriceSeries> prices;
      if (!prices_path.empty()) prices = load_prices(prices_path);
      const auto days = parse_holidays(holidays);
      std::vector<json> rows;
      std::size_t defaults = 0;
      for (const json& j : read_jsonl(segments_path)) {
        std::chrono::sys_seconds ts{};
        const Segment seg = segment_from_json(j, &ts);
        StreamInstance inst;
        inst.processed = process(seg, lx);
        inst.numeric = extract_numeric(inst.processed, inst.processed.pre_clean_text, lx);
        inst.text = seg.original_text.empty() ? seg.text : seg.original_text;
        inst.timestamp = ts;
        if (prices) {
          try {
            inst.trend = compute_trend(inst.processed.focus, ts, *prices, days);
          } catch (const TrendUnavailable&) {
            ++defaults;
          }
        } else {
          ++defaults;
        }
        rows.push_back(processed_to_json(inst));
      }
      if (defaults > 0) {
        fmt::print(stderr, "warning: no price data for {} of {} segments; trend set to downward\n",
                   defaults, rows.size());
      }
      emit_jsonl(out_path, rows);
      return 0;
    }

    if (feat_cmd->parsed()) {
      const std::vector<StreamInstance> all = read_processed(processed_path);
      VocabularyModel vm;
      if (!model_path.empty()) {
        std::ifstream in(model_path);
        if (!in) throw PipelineError("model file not found: " + model_path);
        vm = VocabularyModel::from_json(json::parse(in).at("vocabulary"));
      } else {
        const auto labeled = labeled_only(all);
        const std::size_t n = warmup == 0 ? labeled.size() : warmup;
        if (labeled.size() < n || n == 0) throw PipelineError("insufficient warmup data");
        std::vector<ProcessedSegment> corpus;
        for (std::size_t i = 0; i < n; ++i) corpus.push_back(labeled[i].processed);
        VectorizerConfig vc;
        vc.use_bow = !no_bow;
        vm = fit_vocabularies(corpus, vc);
      }
      std::filesystem::create_directories(out_path);
      std::vector<json> rows;
      for (const FeatureVector& fv : vectorize_stream(all, vm)) rows.push_back(to_json(fv));
      write_jsonl(std::filesystem::path(out_path) / "features.jsonl", rows);
      emit_json((std::filesystem::path(out_path) / "vocabulary.json").string(), vm.to_json());
      fmt::print("{} vectors, {} columns\n", rows.size(), vm.output_dim());
      return 0;
    }

    if (an_cmd->parsed()) {
      json report;
      if (!matrix_path.empty()) {
        std::vector<std::string> names;
        std::vector<std::vector<double>> rows;
        std::vector<int> y;
        read_matrix(matrix_path, names, rows, y);
        std::vector<std::pair<std::string, std::vector<double>>> columns;
        std::vector<double> target;
        for (int v : y) target.push_back(signed_ordinal(emotion_from_index(v)));
        for (std::size_t c = 0; c < names.size(); ++c) {
          std::vector<double> col;
          for (const auto& r : rows) col.push_back(r[c]);
          columns.emplace_back(names[c], std::move(col));
        }
        const auto chi2 = chi2_scores(rows, y);
        const SelectionMask mask = select_percentile(chi2, percentile);
        print_ranking(names, chi2, mask, top);
        report = {{"correlation", correlation_report(columns, target).to_json()},
                  {"chi2", chi2},
                  {"features", names},
                  {"selection", mask.to_json()}};
      } else {
        const auto labeled = labeled_only(read_processed(processed_path));
        if (labeled.empty()) throw PipelineError("analyze needs labeled segments");
        std::vector<ProcessedSegment> corpus;
        for (const auto& s : labeled) corpus.push_back(s.processed);
        const VocabularyModel vm = fit_vocabularies(corpus);
        const auto vectors = vectorize_stream(labeled, vm);
        std::vector<double> target;
        std::vector<int> y;
        for (const auto& fv : vectors) {
          target.push_back(signed_ordinal(*fv.label));
          y.push_back(index_of(*fv.label));
        }
        std::vector<std::pair<std::string, std::vector<double>>> columns;
        for (std::size_t a = 0; a < kNumNumeric; ++a) {
          std::vector<double> col;
          for (const auto& fv : vectors) col.push_back(fv.numeric[a]);
          columns.emplace_back(std::string(kNumericNames[a]), std::move(col));
        }
        std::vector<double> trend;
        for (const auto& fv : vectors) trend.push_back(fv.trend ? 1.0 : 0.0);
        columns.emplace_back("TREND", std::move(trend));
        for (std::size_t c = vm.ngram_dim(); c < vm.output_dim(); ++c) {
          std::vector<double> col;
          for (const auto& fv : vectors) col.push_back(attribute_value(fv, kDenseAttributes + c));
          columns.emplace_back(vm.column_name(c), std::move(col));
        }
        const CorrelationReport corr = correlation_report(columns, target);
        fmt::print("{:>16}  {:>8}\n", "feature", "pearson");
        for (const auto& e : corr.entries) {
          fmt::print("{:>16}  {:>8}\n", e.feature,
                     e.r ? fmt::format("{:.4f}", *e.r) : std::string("constant"));
        }
        std::vector<SparseRow> rows;
        for (const auto& fv : vectors) {
          SparseRow row;
          for (const auto& [c, n] : fv.sparse) {
            if (c < vm.ngram_dim()) row.emplace_back(c, n);
          }
          rows.push_back(std::move(row));
        }
        std::vector<std::string> names;
        for (std::size_t c = 0; c < vm.ngram_dim(); ++c) names.push_back(vm.column_name(c));
        std::vector<double> chi2;
        SelectionMask mask;
        if (!names.empty()) {
          chi2 = chi2_scores_sparse(rows, names.size(), y);
          mask = select_percentile(chi2, percentile);
          fmt::print("\n");
          print_ranking(names, chi2, mask, top);
        }
        report = {{"correlation", corr.to_json()},
                  {"ngram_columns", names.size()},
                  {"selection", mask.to_json()}};
      }
      if (!out_path.empty()) emit_json(out_path, report);
      return 0;
    }

    if (te_cmd->parsed()) {
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw PipelineError("config file not found: " + config_path);
        json j;
        try {
          j = json::parse(in);
        } catch (const json::parse_error& e) {
          throw PipelineError(std::string("invalid config: ") + e.what());
        }
        apply_config(pcfg, j);
      }
      if (pcfg.lexicons.empty() || o_lex->count()) pcfg.lexicons = lexicons;
      if (o_tw->count()) pcfg.tweets = tweets;
      if (o_pr->count()) pcfg.prices = prices_path;
      if (o_lb->count()) pcfg.labels = labels_path;
      if (o_md->count()) pcfg.model = model_path;
      if (o_wu->count()) pcfg.train.warmup = te_warmup;
      if (o_le->count()) pcfg.train.learner.kind = parse_learner_kind(learner_name);
      if (o_st->count()) pcfg.train.stacked = true;
      if (o_si->count()) pcfg.train.stacked = false;
      if (o_sd->count()) pcfg.train.seed = seed;
      if (o_out->count()) pcfg.out = out_path;
      if (o_all->count()) pcfg.emit_all = true;
      if (o_ng->count()) pcfg.train.grid_search = false;
      if (o_th->count()) pcfg.train.grid_threads = threads;
      if (pcfg.tweets.empty()) throw PipelineError("--tweets is required");

      const PipelineSummary s = run_pipeline(pcfg);
      if (s.inference_only) {
        fmt::print("{} segments, {} indicators\n", s.instances, s.indicators);
      } else {
        fmt::print("{} segments, accuracy {:.4f}, {} indicators\n", s.instances,
                   s.accuracy.value_or(0.0), s.indicators);
      }
      return 0;
    }

    if (ag_cmd->parsed()) {
      const AgreementReport r = agreement_report(load_annotations(annotations));
      emit_json(out_path, r.to_json());
      return 0;
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
