#include "doctest.h"

#include <cstdlib>

#include <fmt/format.h>

#include "finemo/pipeline.h"
#include "support.h"
#include "synthetic.h"

using namespace finemo;
using finemo::test::sample_lexicons;

namespace {

PipelineConfig small_run(const test::CorpusFiles& files, const std::filesystem::path& out) {
  PipelineConfig cfg;
  cfg.lexicons = FINEMO_LEXICON_DIR;
  cfg.tweets = files.tweets;
  cfg.prices = files.prices;
  cfg.labels = files.labels;
  cfg.out = out;
  cfg.train.warmup = 100;
  cfg.train.grid_search = false;
  cfg.train.seed = 3;
  return cfg;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("timestamps") {
    const auto t = parse_timestamp("2020-06-05T10:30:00Z");
    REQUIRE(t);
    CHECK(format_timestamp(*t) == "2020-06-05T10:30:00Z");
    CHECK(parse_timestamp("2020-06-05T12:30:00+02:00") == t);
    CHECK(format_timestamp(*parse_timestamp("2020-06-05")) == "2020-06-05T00:00:00Z");
    CHECK_FALSE(parse_timestamp("yesterday"));
    CHECK_FALSE(parse_timestamp("2020-13-01"));
  }

  TEST_CASE("tweets are sorted by time") {
    const auto dir = test::scratch_dir("tweets");
    test::write_file(dir / "t.jsonl",
                     "{\"id\":\"b\",\"created_at\":\"2020-01-02T00:00:00Z\",\"text\":\"x\"}\n"
                     "{\"id\":7,\"created_at\":\"2020-01-01T00:00:00Z\",\"text\":\"y\"}\n");
    const auto tweets = load_tweets(dir / "t.jsonl");
    REQUIRE(tweets.size() == 2);
    CHECK(tweets[0].id == "7");
    CHECK(tweets[1].id == "b");
    test::write_file(dir / "bad.jsonl", "{\"id\":\"a\",\"text\":\"x\"}\n");
    CHECK_THROWS_AS(load_tweets(dir / "bad.jsonl"), PipelineError);
  }

  TEST_CASE("labels") {
    const auto dir = test::scratch_dir("labels");
    test::write_file(dir / "l.tsv", "# id\tidx\tfocus\tlabel\nt1\t0\tBBVA\tP\nt1\t1\tsan\tO\n");
    const LabelMap labels = load_labels(dir / "l.tsv");
    CHECK(labels.size() == 2);
    CHECK(labels.at(label_key("t1", 1, "SAN")) == Emotion::Opportunity);
    test::write_file(dir / "dup.tsv", "t1\t0\tBBVA\tP\nt1\t0\tbbva\tN\n");
    CHECK_THROWS_WITH_AS(load_labels(dir / "dup.tsv"), doctest::Contains("dup.tsv:2"),
                         PipelineError);
    test::write_file(dir / "short.tsv", "t1\t0\tP\n");
    CHECK_THROWS_AS(load_labels(dir / "short.tsv"), PipelineError);
    test::write_file(dir / "idx.tsv", "t1\tx\tBBVA\tP\n");
    CHECK_THROWS_AS(load_labels(dir / "idx.tsv"), PipelineError);
    CHECK_THROWS_AS(load_labels(dir / "missing.tsv"), PipelineError);
  }

  TEST_CASE("holidays") {
    CHECK(parse_holidays({"2020-01-06", "2020-12-25"}).size() == 2);
    CHECK_THROWS_AS(parse_holidays({"06/01/2020"}), PipelineError);
  }

  TEST_CASE("config overrides and round trip") {
    PipelineConfig cfg;
    apply_config(cfg, {{"warmup", 250},
                       {"learner", "sgd"},
                       {"stacked", false},
                       {"stage2_training", "prediction"},
                       {"selection", {{"percentile", 50}}},
                       {"out", "elsewhere"}});
    CHECK(cfg.train.warmup == 250);
    CHECK(cfg.train.learner.kind == LearnerKind::Sgd);
    CHECK_FALSE(cfg.train.stacked);
    CHECK(cfg.train.stage2_training == Stage2Training::PredictionRouted);
    CHECK(cfg.train.percentile == 50);
    CHECK(cfg.out == "elsewhere");
    PipelineConfig copy;
    apply_config(copy, config_to_json(cfg));
    CHECK(config_to_json(copy) == config_to_json(cfg));
    CHECK_THROWS_AS(apply_config(cfg, {{"stage2_training", "both"}}), PipelineError);
    CHECK_THROWS_AS(apply_config(cfg, {{"warmup", "many"}}), PipelineError);
    CHECK_THROWS_AS(apply_config(cfg, nlohmann::json::array()), PipelineError);
  }

  TEST_CASE("prepare_stream skips unlabeled segments and counts trend defaults") {
    std::vector<RawTweet> tweets(2);
    tweets[0] = {"t1", *parse_timestamp("2020-01-07T10:00:00Z"), "BBVA sube con fuerza hoy"};
    tweets[1] = {"t2", *parse_timestamp("2020-01-07T11:00:00Z"), "Repsol cae un 2%"};
    LabelMap labels;
    labels.emplace(label_key("t1", 0, "BBVA"), Emotion::Opportunity);
    const PreparedStream ps =
        prepare_stream(tweets, sample_lexicons(), {}, &labels, nullptr, {});
    CHECK(ps.tweets == 2);
    CHECK(ps.segments == 2);
    CHECK(ps.unlabeled_skipped == 1);
    REQUIRE(ps.instances.size() == 1);
    CHECK(ps.instances[0].processed.label == Emotion::Opportunity);
    CHECK_FALSE(ps.instances[0].trend);
    CHECK(ps.trend_defaults == 1);
  }

  TEST_CASE("processed records round trip") {
    const auto stream = test::planted_stream(4, {.instances = 20});
    for (const auto& inst : stream) {
      const auto j = processed_to_json(inst);
      CHECK(processed_to_json(processed_from_json(j)) == j);
    }
  }

  TEST_CASE("train_eval needs enough warmup data") {
    const auto stream = test::planted_stream(2, {.instances = 50});
    TrainEvalConfig cfg;
    cfg.warmup = 51;
    CHECK_THROWS_WITH_AS(train_eval(stream, cfg), "insufficient warmup data", PipelineError);
    cfg.warmup = 0;
    CHECK_THROWS_AS(train_eval(stream, cfg), PipelineError);
  }

  TEST_CASE("labeled run writes its outputs and repeats exactly") {
    const auto dir = test::scratch_dir("run");
    const auto files = test::write_labeled_corpus(dir, 5, 300);
    const PipelineSummary a = run_pipeline(small_run(files, dir / "a"));
    const PipelineSummary b = run_pipeline(small_run(files, dir / "b"));
    CHECK_FALSE(a.inference_only);
    CHECK(a.instances > 100);
    REQUIRE(a.accuracy);
    CHECK(a.accuracy == b.accuracy);
    for (const char* f : {"report.json", "confusion.csv", "accuracy_series.csv",
                          "indicators.jsonl", "model.json"}) {
      CAPTURE(f);
      REQUIRE(std::filesystem::exists(dir / "a" / f));
      if (std::string(f) != "report.json") {
        CHECK(test::read_file(dir / "a" / f) == test::read_file(dir / "b" / f));
      }
    }

    SUBCASE("inference with the trained model") {
      PipelineConfig cfg = small_run(files, dir / "inf");
      cfg.labels.reset();
      cfg.model = dir / "a" / "model.json";
      const PipelineSummary s = run_pipeline(cfg);
      CHECK(s.inference_only);
      CHECK_FALSE(s.accuracy);
      CHECK(std::filesystem::exists(dir / "inf" / "indicators.jsonl"));
      CHECK_FALSE(std::filesystem::exists(dir / "inf" / "model.json"));
      cfg.model.reset();
      CHECK_THROWS_AS(run_pipeline(cfg), PipelineError);
    }
  }

  TEST_CASE("command line smoke run") {
    const auto dir = test::scratch_dir("cli");
    const auto files = test::write_labeled_corpus(dir, 6, 250);
    const std::string cmd = fmt::format(
        "\"{}\" train-eval --lexicons \"{}\" --tweets \"{}\" --prices \"{}\" --labels \"{}\" "
        "--warmup 100 --no-grid --out \"{}\" > \"{}\" 2>&1",
        FINEMO_CLI_PATH, FINEMO_LEXICON_DIR, files.tweets.string(), files.prices.string(),
        files.labels.string(), (dir / "out").string(), (dir / "log.txt").string());
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(std::filesystem::exists(dir / "out" / "confusion.csv"));
    const std::string bad = fmt::format("\"{}\" train-eval --tweets \"{}\" > /dev/null 2>&1",
                                        FINEMO_CLI_PATH, (dir / "none.jsonl").string());
    CHECK(std::system(bad.c_str()) != 0);
  }
}
