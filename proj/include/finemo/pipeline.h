#ifndef FINEMO_PIPELINE_H_
#define FINEMO_PIPELINE_H_

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "finemo/eval.h"
#include "finemo/features.h"
#include "finemo/lexicons.h"
#include "finemo/segmenter.h"
#include "finemo/streamml.h"
#include "finemo/textproc.h"

namespace finemo {

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------------ Ingestion

// ISO-8601 date or date-time; a trailing Z or +hh:mm offset is honored.
std::optional<std::chrono::sys_seconds> parse_timestamp(std::string_view text);
std::string format_timestamp(std::chrono::sys_seconds t);

// JSON Lines with id, created_at and text. Stable-sorted by timestamp.
std::vector<RawTweet> load_tweets(const std::filesystem::path& path);

// (tweet_id, segment_index, folded focus ticker) -> label.
using LabelKey = std::tuple<std::string, int, std::string>;
using LabelMap = std::map<LabelKey, Emotion>;

LabelKey label_key(const std::string& tweet_id, int segment_index,
                   const std::string& focus);
LabelMap load_labels(const std::filesystem::path& path);

std::set<std::chrono::sys_days> parse_holidays(const std::vector<std::string>& days);

// --------------------------------------------------------------------- Stream

// One per-asset segment ready for vectorization.
struct StreamInstance {
  ProcessedSegment processed;
  std::array<int, kNumNumeric> numeric{};
  bool trend = false;
  std::string text;  // segment text as it appeared in the post
  std::chrono::sys_seconds timestamp{};
};

struct PreparedStream {
  std::vector<StreamInstance> instances;
  std::size_t tweets = 0;
  std::size_t segments = 0;           // after per-asset replication
  std::size_t unlabeled_skipped = 0;  // labeled mode only
  std::size_t trend_defaults = 0;     // trend set to downward for lack of prices
};

// Segments, replicates, processes and extracts dense features. With labels,
// segments without a gold label are skipped.
PreparedStream prepare_stream(const std::vector<RawTweet>& tweets, const LexiconSet& lx,
                              const TextprocConfig& textproc,
                              const LabelMap* labels, const PriceSeries* prices,
                              const std::set<std::chrono::sys_days>& holidays);

// ------------------------------------------------------------------ Training

struct TrainEvalConfig {
  std::size_t warmup = 1000;
  VectorizerConfig vectorizer;
  bool selection = true;
  int percentile = 15;
  LearnerSpec learner;
  bool stacked = true;
  Stage2Training stage2_training = Stage2Training::GoldRouted;
  std::uint64_t seed = 1;
  bool grid_search = true;
  std::size_t grid_threads = 1;
  std::size_t series_every = 1;
};

struct IndicatorRecord {
  std::string tweet_id;
  int segment_index = 0;
  std::string text;
  std::string focus;
  Emotion predicted = Emotion::Neutral;
  std::chrono::sys_seconds timestamp{};

  nlohmann::json to_json() const;
};

struct TrainEvalResult {
  PrequentialReport report;
  VocabularyModel vocabulary;
  LearnerSpec learner_spec;  // after grid search
  nlohmann::json grid;       // null when no grid was searched
  std::unique_ptr<IncrementalLearner> learner;
  std::vector<Emotion> predictions;  // one per instance
};

// Fits vocabularies, BOW lists and the selection mask on the first `warmup`
// instances, optionally grid-searches the learner there, then runs the whole
// stream prequentially. Every instance must carry a label.
TrainEvalResult train_eval(const std::vector<StreamInstance>& stream,
                           const TrainEvalConfig& cfg);

std::vector<FeatureVector> vectorize_stream(const std::vector<StreamInstance>& stream,
                                            const VocabularyModel& vm);

std::unique_ptr<IncrementalLearner> make_classifier(const LearnerSpec& spec,
                                                    bool stacked, Stage2Training training,
                                                    std::uint64_t seed);

// -------------------------------------------------------------- Whole runs

struct PipelineConfig {
  std::filesystem::path lexicons;
  std::filesystem::path tweets;
  std::optional<std::filesystem::path> prices;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> model;  // trained model for inference
  std::vector<std::string> holidays;
  std::filesystem::path out = "out";
  bool emit_all = false;
  TextprocConfig textproc;
  TrainEvalConfig train;
};

// Overrides fields present in a JSON config document.
void apply_config(PipelineConfig& cfg, const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& cfg);

struct PipelineSummary {
  bool inference_only = false;
  std::size_t instances = 0;
  std::size_t indicators = 0;
  std::optional<double> accuracy;
};

// Labeled runs write report.json, confusion.csv, accuracy_series.csv,
// indicators.jsonl and model.json to cfg.out; inference runs write only
// indicators.jsonl.
PipelineSummary run_pipeline(const PipelineConfig& cfg);

// JSON records used by the segment/process subcommands.
nlohmann::json segment_to_json(const Segment& seg, std::chrono::sys_seconds timestamp);
Segment segment_from_json(const nlohmann::json& j, std::chrono::sys_seconds* timestamp);
nlohmann::json processed_to_json(const StreamInstance& inst);
StreamInstance processed_from_json(const nlohmann::json& j);

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows);

}  // namespace finemo

#endif  // FINEMO_PIPELINE_H_
