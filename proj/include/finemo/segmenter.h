#ifndef FINEMO_SEGMENTER_H_
#define FINEMO_SEGMENTER_H_

#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "finemo/emotion.h"
#include "finemo/lexicons.h"

namespace finemo {

struct RawTweet {
  std::string id;
  std::chrono::sys_seconds timestamp{};
  std::string text;
};

struct AssetMention {
  std::string ticker;  // canonical symbol
  std::size_t begin = 0;  // byte span of the mention inside Segment::text
  std::size_t end = 0;
};

// A span of a tweet carrying one or a few strongly related assets.
struct Segment {
  std::string tweet_id;
  int segment_index = 0;
  // Text handed to text processing. After replicate_per_asset() the asset
  // mentions in it are replaced by TICKER / OTHER_TICKER.
  std::string text;
  // Surface text as segmented from the tweet; never rewritten.
  std::string original_text;
  std::vector<AssetMention> assets;
  std::optional<std::string> focus;
  std::optional<Emotion> label;
};

// How a clause was separated from the one before it.
enum class BoundaryKind { Start, Sentence, Comma, Hyphen, Word };

struct Clause {
  std::string text;
  BoundaryKind opened_by = BoundaryKind::Start;
};

// Word lists that drive clause splitting and grouping. Matching is on the
// case-folded token. Defaults are Spanish.
struct SegmenterConfig {
  // Always open a new clause (when the current clause is non-empty).
  std::set<std::string> boundary_words = {"mientras", "aunque", "pero",
                                          "sino", "porque", "que"};
  // Open a new clause only between two asset-bearing stretches, and only
  // after at least `min_words_before_conditional` words.
  std::set<std::string> conditional_boundary_words = {"y"};
  std::size_t min_words_before_conditional = 2;
  // Grouping rule 1: a clause holding one of these starts a new group.
  std::set<std::string> additive_conjunctions = {"y"};
  // Grouping rule 2: a clause opening with one of these is a relative clause.
  std::set<std::string> relative_conjunctions = {"que"};
};

// Asset mentions found in `text`, in order, with byte spans.
std::vector<AssetMention> find_assets(std::string_view text,
                                      const LexiconSet& lx);

std::vector<Clause> split_clauses(std::string_view text, const LexiconSet& lx,
                                  const SegmenterConfig& cfg = {});
std::vector<std::string> segment_clauses(std::string_view text,
                                         const LexiconSet& lx,
                                         const SegmenterConfig& cfg = {});

// Forward propagation. Loop 1 appends every clause with no asset, additive
// conjunction, comma or hyphen to the running group; loop 2 folds a group
// into the next one when both carry assets and the next one opens with a
// relative conjunction. Empty groups are dropped.
std::vector<std::string> group_forward(const std::vector<Clause>& clauses,
                                       const LexiconSet& lx,
                                       const SegmenterConfig& cfg = {});
std::vector<std::string> group_forward(const std::vector<std::string>& clauses,
                                       const LexiconSet& lx,
                                       const SegmenterConfig& cfg = {});

// Splits asset report lists ("ALUA.BA -2,57% EDN +8,08% ...") right before
// every asset after the first, when the segment holds more than one number.
std::vector<std::string> split_asset_lists(std::string_view segment,
                                           const LexiconSet& lx);

std::vector<Segment> segment_tweet(const RawTweet& tweet, const LexiconSet& lx,
                                   const SegmenterConfig& cfg = {});

// One replica per distinct asset. In replica k the focus asset reads TICKER
// and every other asset OTHER_TICKER.
std::vector<Segment> replicate_per_asset(const Segment& seg);

}  // namespace finemo

#endif  // FINEMO_SEGMENTER_H_
