#include "finemo/segmenter.h"

#include <algorithm>

#include "finemo/tokens.h"
#include "finemo/utf8.h"

namespace finemo {

namespace {

constexpr std::string_view kClauseDelimiters[] = {".", ",", ";", ":",
                                                  "\xE2\x80\xA6"};
constexpr std::string_view kBoundaryMarks[] = {".", ",", ";", ":", "!", "?",
                                               "\xE2\x80\xA6"};

bool is_standalone_hyphen(std::string_view token) {
  return token == "-" || token == "\xE2\x80\x93" || token == "\xE2\x80\x94";
}

// Token end once trailing clause delimiters (but not ! or ?) are dropped.
std::size_t strip_delimiters(std::string_view token) {
  std::size_t end = token.size();
  bool changed = true;
  while (changed && end > 0) {
    changed = false;
    for (std::string_view d : kClauseDelimiters) {
      if (token.substr(0, end).ends_with(d)) {
        end -= d.size();
        changed = true;
        break;
      }
    }
  }
  return end;
}

// Boundary opened by the punctuation trailing a token, if any.
std::optional<BoundaryKind> trailing_boundary(std::string_view token) {
  const CoreBounds b = core_bounds(token);
  const std::string_view tail = token.substr(b.end);
  if (tail.empty()) return std::nullopt;
  bool any = false;
  bool only_commas = true;
  for (std::string_view mark : kBoundaryMarks) {
    if (tail.find(mark) != std::string_view::npos) {
      any = true;
      if (mark != ",") only_commas = false;
    }
  }
  if (!any) return std::nullopt;
  return only_commas ? BoundaryKind::Comma : BoundaryKind::Sentence;
}

struct TokenInfo {
  utf8::TokenSpan span;
  std::string folded;  // folded core
  bool asset = false;
  bool hyphen = false;
  std::size_t content_end = 0;  // byte offset in source, delimiters dropped
  std::optional<BoundaryKind> after;
};

std::vector<TokenInfo> analyze_tokens(std::string_view text,
                                      const LexiconSet& lx) {
  std::vector<TokenInfo> out;
  for (const utf8::TokenSpan& span : utf8::tokenize_with_spans(text)) {
    TokenInfo info;
    info.span = span;
    const std::string_view core = core_of(span.text);
    info.folded = utf8::fold_case(core);
    info.asset = !core.empty() && lookup_ticker(core, lx).has_value();
    info.hyphen = is_standalone_hyphen(span.text);
    info.content_end = span.begin + strip_delimiters(span.text);
    info.after = trailing_boundary(span.text);
    out.push_back(std::move(info));
  }
  return out;
}

bool has_asset(std::string_view text, const LexiconSet& lx) {
  return !find_assets(text, lx).empty();
}

bool has_word(std::string_view text, const std::set<std::string>& words) {
  for (std::string_view token : utf8::split_whitespace(text)) {
    if (words.contains(utf8::fold_case(core_of(token)))) return true;
  }
  return false;
}

// A comma that is not a decimal separator, or a hyphen token.
bool has_separator(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != ',') continue;
    const bool digit_before = i > 0 && text[i - 1] >= '0' && text[i - 1] <= '9';
    const bool digit_after =
        i + 1 < text.size() && text[i + 1] >= '0' && text[i + 1] <= '9';
    if (!(digit_before && digit_after)) return true;
  }
  for (std::string_view token : utf8::split_whitespace(text)) {
    if (is_standalone_hyphen(token)) return true;
  }
  return false;
}

bool starts_with_word(std::string_view text,
                      const std::set<std::string>& words) {
  const auto tokens = utf8::split_whitespace(text);
  return !tokens.empty() &&
         words.contains(utf8::fold_case(core_of(tokens.front())));
}

}  // namespace

std::vector<AssetMention> find_assets(std::string_view text,
                                      const LexiconSet& lx) {
  std::vector<AssetMention> out;
  for (const utf8::TokenSpan& span : utf8::tokenize_with_spans(text)) {
    const CoreBounds b = core_bounds(span.text);
    if (b.end <= b.begin) continue;
    const std::string_view core = span.text.substr(b.begin, b.end - b.begin);
    if (auto ticker = lookup_ticker(core, lx)) {
      out.push_back({*ticker, span.begin + b.begin, span.begin + b.end});
    }
  }
  return out;
}

std::vector<Clause> split_clauses(std::string_view text, const LexiconSet& lx,
                                  const SegmenterConfig& cfg) {
  const std::vector<TokenInfo> tokens = analyze_tokens(text, lx);
  std::vector<Clause> out;

  std::optional<std::size_t> begin;
  std::size_t end = 0;
  std::size_t words = 0;
  bool clause_has_asset = false;
  BoundaryKind kind = BoundaryKind::Start;

  auto close = [&](BoundaryKind next) {
    if (begin && end > *begin) {
      std::string piece = utf8::trim(text.substr(*begin, end - *begin));
      if (!piece.empty()) out.push_back({std::move(piece), kind});
    }
    begin.reset();
    words = 0;
    clause_has_asset = false;
    kind = next;
  };

  // Whether an asset occurs before the next hard boundary, from token `j`.
  auto asset_ahead = [&](std::size_t j) {
    for (; j < tokens.size(); ++j) {
      const TokenInfo& t = tokens[j];
      if (t.hyphen || cfg.boundary_words.contains(t.folded)) return false;
      if (t.asset) return true;
      if (t.after) return false;
    }
    return false;
  };

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const TokenInfo& t = tokens[i];
    if (t.hyphen) {
      close(BoundaryKind::Hyphen);
      continue;
    }
    if (words > 0 && cfg.boundary_words.contains(t.folded)) {
      close(BoundaryKind::Word);
    } else if (words >= cfg.min_words_before_conditional && clause_has_asset &&
               cfg.conditional_boundary_words.contains(t.folded) &&
               asset_ahead(i + 1)) {
      close(BoundaryKind::Word);
    }
    if (t.content_end > t.span.begin) {
      if (!begin) begin = t.span.begin;
      end = t.content_end;
      ++words;
      clause_has_asset = clause_has_asset || t.asset;
    }
    if (t.after) close(*t.after);
  }
  close(BoundaryKind::Start);
  return out;
}

std::vector<std::string> segment_clauses(std::string_view text,
                                         const LexiconSet& lx,
                                         const SegmenterConfig& cfg) {
  std::vector<std::string> out;
  for (Clause& c : split_clauses(text, lx, cfg)) out.push_back(std::move(c.text));
  return out;
}

std::vector<std::string> group_forward(const std::vector<Clause>& clauses,
                                       const LexiconSet& lx,
                                       const SegmenterConfig& cfg) {
  auto starts_group = [&](const Clause& c) {
    return c.opened_by == BoundaryKind::Comma ||
           c.opened_by == BoundaryKind::Hyphen || has_asset(c.text, lx) ||
           has_word(c.text, cfg.additive_conjunctions) ||
           has_separator(c.text);
  };

  std::vector<std::string> grouped;
  std::string aux;
  for (const Clause& c : clauses) {
    if (starts_group(c)) {
      grouped.push_back(std::move(aux));
      aux = c.text;
    } else {
      if (!aux.empty()) aux += ' ';
      aux += c.text;
    }
  }
  grouped.push_back(std::move(aux));
  std::erase_if(grouped, [](const std::string& s) { return s.empty(); });
  if (grouped.size() < 2) return grouped;

  std::vector<std::string> out;
  for (std::size_t r = 0; r + 1 < grouped.size(); ++r) {
    if (has_asset(grouped[r], lx) && has_asset(grouped[r + 1], lx) &&
        starts_with_word(grouped[r + 1], cfg.relative_conjunctions)) {
      grouped[r + 1] = grouped[r] + ' ' + grouped[r + 1];
    } else {
      out.push_back(std::move(grouped[r]));
    }
  }
  out.push_back(std::move(grouped.back()));
  return out;
}

std::vector<std::string> group_forward(const std::vector<std::string>& clauses,
                                       const LexiconSet& lx,
                                       const SegmenterConfig& cfg) {
  std::vector<Clause> wrapped;
  wrapped.reserve(clauses.size());
  for (const std::string& c : clauses) wrapped.push_back({c, BoundaryKind::Start});
  return group_forward(wrapped, lx, cfg);
}

std::vector<std::string> split_asset_lists(std::string_view segment,
                                           const LexiconSet& lx) {
  const auto spans = utf8::tokenize_with_spans(segment);
  std::size_t numbers = 0;
  for (const utf8::TokenSpan& span : spans) {
    const auto num = classify_numeric(core_of(span.text));
    if (num && !num->date) ++numbers;
  }
  if (numbers <= 1) return {utf8::trim(segment)};

  std::vector<std::size_t> cuts;
  bool first = true;
  for (const utf8::TokenSpan& span : spans) {
    const std::string_view core = core_of(span.text);
    if (core.empty() || !lookup_ticker(core, lx)) continue;
    if (first) {
      first = false;
      continue;
    }
    cuts.push_back(span.begin);
  }
  std::vector<std::string> out;
  std::size_t start = 0;
  cuts.push_back(segment.size());
  for (std::size_t cut : cuts) {
    std::string piece = utf8::trim(segment.substr(start, cut - start));
    if (!piece.empty()) out.push_back(std::move(piece));
    start = cut;
  }
  return out;
}

std::vector<Segment> segment_tweet(const RawTweet& tweet, const LexiconSet& lx,
                                   const SegmenterConfig& cfg) {
  std::vector<Segment> out;
  const auto groups = group_forward(split_clauses(tweet.text, lx, cfg), lx, cfg);
  for (const std::string& group : groups) {
    for (std::string& piece : split_asset_lists(group, lx)) {
      auto assets = find_assets(piece, lx);
      if (assets.empty()) continue;
      Segment seg;
      seg.tweet_id = tweet.id;
      seg.segment_index = static_cast<int>(out.size());
      seg.original_text = piece;
      seg.text = std::move(piece);
      seg.assets = std::move(assets);
      out.push_back(std::move(seg));
    }
  }
  return out;
}

std::vector<Segment> replicate_per_asset(const Segment& seg) {
  std::vector<std::string> distinct;
  std::vector<std::string> distinct_keys;
  for (const AssetMention& a : seg.assets) {
    std::string key = utf8::fold_case(a.ticker);
    if (std::find(distinct_keys.begin(), distinct_keys.end(), key) ==
        distinct_keys.end()) {
      distinct_keys.push_back(std::move(key));
      distinct.push_back(a.ticker);
    }
  }

  std::vector<AssetMention> mentions = seg.assets;
  std::sort(mentions.begin(), mentions.end(),
            [](const AssetMention& a, const AssetMention& b) {
              return a.begin < b.begin;
            });

  std::vector<Segment> out;
  for (std::size_t k = 0; k < distinct.size(); ++k) {
    Segment replica = seg;
    replica.focus = distinct[k];
    replica.assets.clear();
    std::string text;
    std::size_t cursor = 0;
    for (const AssetMention& m : mentions) {
      text.append(seg.text, cursor, m.begin - cursor);
      const bool is_focus = utf8::fold_case(m.ticker) == distinct_keys[k];
      const std::string_view tag = is_focus ? kTickerTag : kOtherTickerTag;
      replica.assets.push_back({m.ticker, text.size(), text.size() + tag.size()});
      text.append(tag);
      cursor = m.end;
    }
    text.append(seg.text, cursor, std::string::npos);
    replica.text = std::move(text);
    out.push_back(std::move(replica));
  }
  return out;
}

}  // namespace finemo
