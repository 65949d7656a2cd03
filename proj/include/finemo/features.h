#ifndef FINEMO_FEATURES_H_
#define FINEMO_FEATURES_H_

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "finemo/emotion.h"
#include "finemo/lexicons.h"
#include "finemo/textproc.h"

namespace finemo {

class FeatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrendUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kNumNumeric = 20;

enum NumericFeature : std::size_t {
  kLenTweet,
  kNegNum,
  kPosNum,
  kTotalNum,
  kNegPerc,
  kPosPerc,
  kTotalPerc,
  kFinAbbr,
  kExclamation,
  kInterrogation,
  kAdverbs,
  kAdverbsNeg,
  kAdverbsPos,
  kAdverbsDoubt,
  kAdverbsInt,
  kNegPolarity,
  kNeuPolarity,
  kPosPolarity,
  kNegEmotion,
  kPosEmotion,
};

inline constexpr std::array<std::string_view, kNumNumeric> kNumericNames = {
    "LEN_TWEET",     "NEG_NUM",     "POS_NUM",       "TOTAL_NUM",
    "NEG_PERC",      "POS_PERC",    "TOTAL_PERC",    "FIN_ABBR",
    "EXCLAMATION",   "INTERROGATION", "ADVERBS",     "ADVERBS_NEG",
    "ADVERBS_POS",   "ADVERBS_DOUBT", "ADVERBS_INT", "NEG_POLARITY",
    "NEU_POLARITY",  "POS_POLARITY",  "NEG_EMOTION", "POS_EMOTION"};

using SparseEntry = std::pair<std::uint32_t, std::uint32_t>;  // column, count

struct FeatureVector {
  std::vector<SparseEntry> sparse;  // ascending column order
  std::array<int, kNumNumeric> numeric{};
  bool trend = false;  // true = upward
  std::optional<Emotion> label;
};

struct VectorizerConfig {
  std::size_t ngram_min = 1;
  std::size_t ngram_max = 4;
  double max_df = 0.5;
  double min_df = 0.001;
  bool use_bow = true;
  std::size_t bow_size = 500;
};

// Fitted n-gram vocabularies, exclusive per-emotion BOW lists and the
// selection mask. Column space before selection is
// [char | word | word-boundary] n-grams; after selection the retained n-gram
// columns are renumbered densely and the three BOW counters follow.
class VocabularyModel {
 public:
  static constexpr int kFormatVersion = 1;

  VectorizerConfig config;
  std::vector<std::string> char_terms;  // sorted; position = column
  std::vector<std::string> word_terms;
  std::vector<std::string> wordbound_terms;
  std::array<std::vector<std::string>, kNumEmotions> bow;  // by Emotion
  std::optional<std::vector<std::uint32_t>> selection_mask;  // n-gram columns

  bool fitted() const { return fitted_; }
  std::size_t ngram_dim() const;
  std::size_t output_dim() const;
  std::string column_name(std::size_t output_column) const;

  // Recomputes the lookup tables after the public fields change.
  void rebuild();
  void set_selection(std::vector<std::uint32_t> ngram_columns);

  nlohmann::json to_json() const;
  static VocabularyModel from_json(const nlohmann::json& j);

  // Lookup helpers used by vectorize().
  std::optional<std::uint32_t> char_index(const std::string& g) const;
  std::optional<std::uint32_t> word_index(const std::string& g) const;
  std::optional<std::uint32_t> wordbound_index(const std::string& g) const;
  std::optional<std::uint32_t> output_column(std::uint32_t ngram_column) const;
  bool bow_contains(Emotion e, const std::string& term) const;

 private:
  bool fitted_ = false;
  std::unordered_map<std::string, std::uint32_t> char_index_;
  std::unordered_map<std::string, std::uint32_t> word_index_;
  std::unordered_map<std::string, std::uint32_t> wordbound_index_;
  std::array<std::unordered_set<std::string>, kNumEmotions> bow_index_;
  std::vector<std::int64_t> remap_;  // n-gram column -> output column or -1
};

// Analyzers, exposed for testing.
std::vector<std::string> char_ngrams(std::string_view text, std::size_t lo,
                                     std::size_t hi);
std::vector<std::string> word_ngrams(const std::vector<std::string>& tokens,
                                     std::size_t lo, std::size_t hi);
std::vector<std::string> wordbound_ngrams(
    const std::vector<std::string>& tokens, std::size_t lo, std::size_t hi);

VocabularyModel fit_vocabularies(const std::vector<ProcessedSegment>& corpus,
                                 const VectorizerConfig& cfg = {});

std::array<int, kNumNumeric> extract_numeric(const ProcessedSegment& seg,
                                             std::string_view pre_clean_text,
                                             const LexiconSet& lx);

FeatureVector vectorize(const ProcessedSegment& seg, const VocabularyModel& vm,
                        const std::array<int, kNumNumeric>& numeric,
                        bool trend);

// Closing prices per canonical ticker.
class PriceSeries {
 public:
  void add(const std::string& ticker, std::chrono::sys_days day, double close);
  std::optional<double> close(const std::string& ticker,
                              std::chrono::sys_days day) const;
  std::size_t size() const;

 private:
  std::map<std::string, std::map<std::chrono::sys_days, double>> prices_;
};

// CSV with a header line and rows ticker,YYYY-MM-DD,close.
PriceSeries load_prices(const std::filesystem::path& path);

std::optional<std::chrono::sys_days> parse_date(std::string_view text);

// Saturdays, Sundays and listed holidays are not working days.
bool is_working_day(std::chrono::sys_days day,
                    const std::set<std::chrono::sys_days>& holidays);
std::chrono::sys_days previous_working_day(
    std::chrono::sys_days day, const std::set<std::chrono::sys_days>& holidays);
std::chrono::sys_days next_working_day(
    std::chrono::sys_days day, const std::set<std::chrono::sys_days>& holidays);

// Upward iff the close of the working day after the post date is above the
// close of the working day before it. Throws TrendUnavailable when either
// price is missing.
bool compute_trend(const std::string& ticker,
                   std::chrono::sys_seconds post_time,
                   const PriceSeries& prices,
                   const std::set<std::chrono::sys_days>& holidays = {});

nlohmann::json to_json(const FeatureVector& fv);

}  // namespace finemo

#endif  // FINEMO_FEATURES_H_
