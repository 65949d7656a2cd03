#include "finemo/textproc.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "finemo/tokens.h"
#include "finemo/utf8.h"

namespace finemo {

namespace {

constexpr double kMissingFrequency = 1e-9;

bool has_alnum(std::string_view text) {
  for (char32_t cp : utf8::decode(text)) {
    if (utf8::is_letter(cp) || utf8::is_digit(cp)) return true;
  }
  return false;
}

std::string without_symbols(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  for (char c : token) {
    if (c != '$' && c != '@' && c != '#') out.push_back(c);
  }
  return out;
}

std::string_view number_tag(const NumericToken& num) {
  if (num.date) return kNumberTag;
  if (num.sign < 0) return kNegativeTag;
  if (num.sign > 0) return kPositiveTag;
  return kNumberTag;
}

}  // namespace

std::string tag_assets(std::string_view text, std::string_view focus,
                       const LexiconSet& lx) {
  const std::string focus_key = utf8::fold_case(focus);
  std::string out;
  std::size_t cursor = 0;
  for (const AssetMention& m : find_assets(text, lx)) {
    out.append(text.substr(cursor, m.begin - cursor));
    out.append(utf8::fold_case(m.ticker) == focus_key ? kTickerTag
                                                       : kOtherTickerTag);
    cursor = m.end;
  }
  out.append(text.substr(cursor));
  return out;
}

std::string tag_numbers(std::string_view text) {
  std::vector<std::string> out;
  for (std::string_view token : utf8::split_whitespace(text)) {
    const CoreBounds b = core_bounds(token);
    const std::string_view core = token.substr(b.begin, b.end - b.begin);
    const auto num = classify_numeric(core);
    if (!num) {
      out.emplace_back(token);
      continue;
    }
    std::string tagged(token.substr(0, b.begin));
    tagged += number_tag(*num);
    tagged += token.substr(b.end);
    out.push_back(std::move(tagged));
  }
  return utf8::join(out, " ");
}

std::string clean_filter(std::string_view text, const LexiconSet& lx) {
  std::vector<std::string> out;
  for (std::string_view token : utf8::split_whitespace(text)) {
    if (is_url(token) || token == "RT") continue;
    const std::string stripped = without_symbols(token);
    const std::string core(core_of(stripped));
    if (core.empty() || !has_alnum(core)) continue;
    if (!is_tag(core) && lx.is_stopword(utf8::fold_case(core))) continue;
    out.push_back(core);
  }
  return utf8::join(out, " ");
}

std::vector<std::string> split_hashtags(std::string_view token,
                                        const LexiconSet& lx,
                                        const TextprocConfig& cfg) {
  const std::string folded = utf8::fold_case(token);
  if (lx.in_dictionary(folded)) return {std::string(token)};

  const std::u32string cps = utf8::decode(folded);
  const std::size_t n = cps.size();
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  // best[i]: best log score of a segmentation of cps[0, i).
  std::vector<double> best(n + 1, kNone);
  std::vector<std::size_t> back(n + 1, 0);
  std::vector<int> pieces(n + 1, 0);
  best[0] = 0.0;
  const std::size_t min_piece = std::max<std::size_t>(cfg.min_split_piece, 1);
  for (std::size_t end = 1; end <= n; ++end) {
    for (std::size_t start = 0; start + min_piece <= end; ++start) {
      if (best[start] == kNone) continue;
      const std::string piece =
          utf8::encode(std::u32string_view(cps).substr(start, end - start));
      if (!lx.in_dictionary(piece)) continue;
      const double f = lx.frequency(piece);
      const double score =
          best[start] + std::log(f > 0.0 ? f : kMissingFrequency);
      if (score > best[end]) {
        best[end] = score;
        back[end] = start;
        pieces[end] = pieces[start] + 1;
      }
    }
  }
  if (best[n] == kNone || pieces[n] < 2) return {std::string(token)};

  std::vector<std::string> out;
  for (std::size_t end = n; end > 0; end = back[end]) {
    out.push_back(
        utf8::encode(std::u32string_view(cps).substr(back[end], end - back[end])));
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string lemmatize_correct(std::string_view token, const LexiconSet& lx,
                              const TextprocConfig& cfg) {
  if (is_tag(token)) return std::string(token);
  const std::string folded = utf8::fold_case(token);
  if (auto it = lx.dictionary.find(folded); it != lx.dictionary.end()) {
    return it->second;
  }

  const std::u32string cps = utf8::decode(folded);
  const auto max_d = static_cast<std::size_t>(std::max(cfg.max_edit_distance, 0));
  std::size_t best_d = max_d + 1;
  double best_f = -1.0;
  std::string best_form;
  const std::size_t lo = cps.size() > max_d ? cps.size() - max_d : 0;
  for (auto it = lx.forms_by_length.lower_bound(lo);
       it != lx.forms_by_length.end() && it->first <= cps.size() + max_d; ++it) {
    for (const std::u32string& form : it->second) {
      const std::size_t d = edit_distance(cps, form);
      if (d > max_d || d > best_d) continue;
      const std::string utf = utf8::encode(form);
      const double f = lx.frequency(utf);
      if (d < best_d || f > best_f || (f == best_f && utf < best_form)) {
        best_d = d;
        best_f = f;
        best_form = utf;
      }
    }
  }
  if (best_form.empty()) return folded;
  return lx.dictionary.at(best_form);
}

ProcessedSegment process(const Segment& seg, const LexiconSet& lx,
                         const TextprocConfig& cfg) {
  ProcessedSegment out;
  out.tweet_id = seg.tweet_id;
  out.segment_index = seg.segment_index;
  out.label = seg.label;
  if (seg.focus) {
    out.focus = *seg.focus;
  } else if (!seg.assets.empty()) {
    out.focus = seg.assets.front().ticker;
  }
  const std::string& source =
      seg.original_text.empty() ? seg.text : seg.original_text;
  out.raw_len = utf8::length(source);

  out.pre_clean_text = tag_assets(seg.text, out.focus, lx);
  const std::string cleaned = clean_filter(tag_numbers(out.pre_clean_text), lx);

  for (std::string_view raw : utf8::split_whitespace(cleaned)) {
    if (is_tag(raw)) {
      out.tokens.emplace_back(raw);
      continue;
    }
    for (const std::string& piece : split_hashtags(utf8::fold_case(raw), lx, cfg)) {
      std::string lemma = lemmatize_correct(piece, lx, cfg);
      if (cfg.drop_unknown && !lx.in_dictionary(lemma)) continue;
      if (lx.is_stopword(lemma)) continue;
      out.tokens.push_back(std::move(lemma));
    }
  }
  if (std::find(out.tokens.begin(), out.tokens.end(), kTickerTag) ==
      out.tokens.end()) {
    out.tokens.insert(out.tokens.begin(), std::string(kTickerTag));
  }
  return out;
}

}  // namespace finemo
