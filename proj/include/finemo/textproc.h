#ifndef FINEMO_TEXTPROC_H_
#define FINEMO_TEXTPROC_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finemo/emotion.h"
#include "finemo/lexicons.h"
#include "finemo/segmenter.h"

namespace finemo {

struct ProcessedSegment {
  std::string tweet_id;
  int segment_index = 0;
  std::string focus;
  std::vector<std::string> tokens;
  std::size_t raw_len = 0;  // code points of the segment before processing
  // Segment text with assets tagged but numbers, punctuation and stopwords
  // still in place. Numeric features are counted on it.
  std::string pre_clean_text;
  std::optional<Emotion> label;
};

struct TextprocConfig {
  int max_edit_distance = 2;
  // Keep only words that are in the dictionary (after spelling correction).
  bool drop_unknown = true;
  // Shortest piece accepted when splitting a hashtag or compound.
  std::size_t min_split_piece = 2;
};

// Replaces asset mentions with TICKER (focus) or OTHER_TICKER. Punctuation
// around the mention is kept; the $ # @ prefix is dropped.
std::string tag_assets(std::string_view text, std::string_view focus,
                       const LexiconSet& lx);

// Numbers become NEGATIVE, POSITIVE or NUMBER according to their sign.
std::string tag_numbers(std::string_view text);

// Drops URLs, RT markers, $ @ # characters, edge punctuation and stopwords.
// Case is left alone.
std::string clean_filter(std::string_view text, const LexiconSet& lx);

std::vector<std::string> split_hashtags(std::string_view token,
                                        const LexiconSet& lx,
                                        const TextprocConfig& cfg = {});

std::string lemmatize_correct(std::string_view token, const LexiconSet& lx,
                              const TextprocConfig& cfg = {});

// Levenshtein distance over code points.
std::size_t edit_distance(std::u32string_view a, std::u32string_view b);

ProcessedSegment process(const Segment& seg, const LexiconSet& lx,
                         const TextprocConfig& cfg = {});

}  // namespace finemo

#endif  // FINEMO_TEXTPROC_H_
