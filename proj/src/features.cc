#include "finemo/features.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "finemo/tokens.h"
#include "finemo/utf8.h"

namespace finemo {

namespace {

using nlohmann::json;
using std::chrono::sys_days;

constexpr std::array<std::string_view, kNumEmotions> kBowNames = {
    "PRE_BOW", "NEU_BOW", "OPP_BOW"};

std::vector<std::string> document_frequency_filter(
    const std::vector<std::unordered_set<std::string>>& docs, double min_df,
    double max_df) {
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    for (const std::string& g : doc) ++df[g];
  }
  const double n = static_cast<double>(docs.size());
  const double lo = min_df * n;
  const double hi = max_df * n;
  std::vector<std::string> kept;
  for (const auto& [g, count] : df) {
    const auto c = static_cast<double>(count);
    if (c >= lo && c <= hi) kept.push_back(g);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

// Unigrams and bigrams of a token stream, used for the BOW lists.
std::vector<std::string> bow_terms(const std::vector<std::string>& tokens) {
  return word_ngrams(tokens, 1, 2);
}

std::string format_date(sys_days day) {
  const std::chrono::year_month_day ymd{day};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()));
}

}  // namespace

std::size_t VocabularyModel::ngram_dim() const {
  return char_terms.size() + word_terms.size() + wordbound_terms.size();
}

std::size_t VocabularyModel::output_dim() const {
  const std::size_t ngrams =
      selection_mask ? selection_mask->size() : ngram_dim();
  return ngrams + (config.use_bow ? kNumEmotions : 0);
}

std::string VocabularyModel::column_name(std::size_t output_column) const {
  const std::size_t ngrams =
      selection_mask ? selection_mask->size() : ngram_dim();
  if (output_column >= ngrams) {
    const std::size_t k = output_column - ngrams;
    if (!config.use_bow || k >= kNumEmotions) {
      throw FeatureError(fmt::format("column {} out of range", output_column));
    }
    return std::string(kBowNames[k]);
  }
  std::size_t c = selection_mask ? (*selection_mask)[output_column]
                                 : output_column;
  if (c < char_terms.size()) return "char:" + char_terms[c];
  c -= char_terms.size();
  if (c < word_terms.size()) return "word:" + word_terms[c];
  c -= word_terms.size();
  return "wb:" + wordbound_terms[c];
}

void VocabularyModel::rebuild() {
  auto index = [](const std::vector<std::string>& terms,
                  std::unordered_map<std::string, std::uint32_t>& out) {
    out.clear();
    out.reserve(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
      out.emplace(terms[i], static_cast<std::uint32_t>(i));
    }
  };
  index(char_terms, char_index_);
  index(word_terms, word_index_);
  index(wordbound_terms, wordbound_index_);
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    bow_index_[e] = {bow[e].begin(), bow[e].end()};
  }
  const std::size_t dim = ngram_dim();
  remap_.assign(dim, selection_mask ? -1 : 0);
  if (selection_mask) {
    std::int64_t rank = 0;
    for (std::uint32_t c : *selection_mask) {
      if (c >= dim) {
        throw FeatureError(
            fmt::format("selection column {} outside {} n-gram columns", c, dim));
      }
      remap_[c] = rank++;
    }
  } else {
    for (std::size_t c = 0; c < dim; ++c) remap_[c] = static_cast<std::int64_t>(c);
  }
  fitted_ = true;
}

void VocabularyModel::set_selection(std::vector<std::uint32_t> ngram_columns) {
  std::sort(ngram_columns.begin(), ngram_columns.end());
  ngram_columns.erase(std::unique(ngram_columns.begin(), ngram_columns.end()),
                      ngram_columns.end());
  selection_mask = std::move(ngram_columns);
  rebuild();
}

std::optional<std::uint32_t> VocabularyModel::char_index(
    const std::string& g) const {
  auto it = char_index_.find(g);
  if (it == char_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> VocabularyModel::word_index(
    const std::string& g) const {
  auto it = word_index_.find(g);
  if (it == word_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> VocabularyModel::wordbound_index(
    const std::string& g) const {
  auto it = wordbound_index_.find(g);
  if (it == wordbound_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> VocabularyModel::output_column(
    std::uint32_t ngram_column) const {
  if (ngram_column >= remap_.size() || remap_[ngram_column] < 0) {
    return std::nullopt;
  }
  return static_cast<std::uint32_t>(remap_[ngram_column]);
}

bool VocabularyModel::bow_contains(Emotion e, const std::string& term) const {
  return bow_index_[index_of(e)].contains(term);
}

json VocabularyModel::to_json() const {
  json j;
  j["version"] = kFormatVersion;
  j["config"] = {{"ngram_min", config.ngram_min},
                 {"ngram_max", config.ngram_max},
                 {"max_df", config.max_df},
                 {"min_df", config.min_df},
                 {"use_bow", config.use_bow},
                 {"bow_size", config.bow_size}};
  j["char"] = char_terms;
  j["word"] = word_terms;
  j["wordbound"] = wordbound_terms;
  for (Emotion e : kAllEmotions) {
    j["bow"][std::string(name_of(e))] = bow[index_of(e)];
  }
  j["selection_mask"] = selection_mask ? json(*selection_mask) : json(nullptr);
  return j;
}

VocabularyModel VocabularyModel::from_json(const json& j) {
  if (j.value("version", 0) != kFormatVersion) {
    throw FeatureError("unsupported vocabulary model version");
  }
  VocabularyModel vm;
  const json& c = j.at("config");
  vm.config.ngram_min = c.at("ngram_min").get<std::size_t>();
  vm.config.ngram_max = c.at("ngram_max").get<std::size_t>();
  vm.config.max_df = c.at("max_df").get<double>();
  vm.config.min_df = c.at("min_df").get<double>();
  vm.config.use_bow = c.at("use_bow").get<bool>();
  vm.config.bow_size = c.at("bow_size").get<std::size_t>();
  vm.char_terms = j.at("char").get<std::vector<std::string>>();
  vm.word_terms = j.at("word").get<std::vector<std::string>>();
  vm.wordbound_terms = j.at("wordbound").get<std::vector<std::string>>();
  for (Emotion e : kAllEmotions) {
    vm.bow[index_of(e)] =
        j.at("bow").at(std::string(name_of(e))).get<std::vector<std::string>>();
  }
  if (!j.at("selection_mask").is_null()) {
    vm.selection_mask = j.at("selection_mask").get<std::vector<std::uint32_t>>();
  }
  vm.rebuild();
  return vm;
}

std::vector<std::string> char_ngrams(std::string_view text, std::size_t lo,
                                     std::size_t hi) {
  const std::u32string cps = utf8::decode(text);
  std::vector<std::string> out;
  for (std::size_t n = std::max<std::size_t>(lo, 1); n <= hi; ++n) {
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
      out.push_back(utf8::encode(std::u32string_view(cps).substr(i, n)));
    }
  }
  return out;
}

std::vector<std::string> word_ngrams(const std::vector<std::string>& tokens,
                                     std::size_t lo, std::size_t hi) {
  std::vector<std::string> out;
  for (std::size_t n = std::max<std::size_t>(lo, 1); n <= hi; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string g = tokens[i];
      for (std::size_t k = 1; k < n; ++k) {
        g += ' ';
        g += tokens[i + k];
      }
      out.push_back(std::move(g));
    }
  }
  return out;
}

std::vector<std::string> wordbound_ngrams(
    const std::vector<std::string>& tokens, std::size_t lo, std::size_t hi) {
  std::vector<std::string> out;
  for (const std::string& token : tokens) {
    std::u32string w = U" " + utf8::decode(token) + U" ";
    for (std::size_t n = std::max<std::size_t>(lo, 1); n <= hi; ++n) {
      std::size_t offset = 0;
      out.push_back(utf8::encode(std::u32string_view(w).substr(offset, n)));
      while (offset + n < w.size()) {
        ++offset;
        out.push_back(utf8::encode(std::u32string_view(w).substr(offset, n)));
      }
      if (offset == 0) break;  // a word shorter than n is counted once
    }
  }
  return out;
}

VocabularyModel fit_vocabularies(const std::vector<ProcessedSegment>& corpus,
                                 const VectorizerConfig& cfg) {
  if (corpus.empty()) throw FeatureError("cannot fit vocabularies on an empty corpus");
  if (cfg.ngram_min < 1 || cfg.ngram_max < cfg.ngram_min) {
    throw FeatureError("invalid n-gram range");
  }

  std::vector<std::unordered_set<std::string>> chars, words, bounds;
  chars.reserve(corpus.size());
  words.reserve(corpus.size());
  bounds.reserve(corpus.size());
  for (const ProcessedSegment& seg : corpus) {
    const std::string text = utf8::join(seg.tokens, " ");
    auto c = char_ngrams(text, cfg.ngram_min, cfg.ngram_max);
    auto w = word_ngrams(seg.tokens, cfg.ngram_min, cfg.ngram_max);
    auto b = wordbound_ngrams(seg.tokens, cfg.ngram_min, cfg.ngram_max);
    chars.emplace_back(c.begin(), c.end());
    words.emplace_back(w.begin(), w.end());
    bounds.emplace_back(b.begin(), b.end());
  }

  VocabularyModel vm;
  vm.config = cfg;
  vm.char_terms = document_frequency_filter(chars, cfg.min_df, cfg.max_df);
  vm.word_terms = document_frequency_filter(words, cfg.min_df, cfg.max_df);
  vm.wordbound_terms = document_frequency_filter(bounds, cfg.min_df, cfg.max_df);

  std::unordered_map<std::string, std::array<std::size_t, kNumEmotions>> counts;
  for (const ProcessedSegment& seg : corpus) {
    if (!seg.label) throw FeatureError("vocabulary fitting needs labeled segments");
    for (std::string& term : bow_terms(seg.tokens)) {
      ++counts[std::move(term)][index_of(*seg.label)];
    }
  }
  std::array<std::vector<std::pair<std::size_t, std::string>>, kNumEmotions> ranked;
  for (const auto& [term, per_class] : counts) {
    int classes = 0;
    std::size_t owner = 0;
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      if (per_class[e] > 0) {
        ++classes;
        owner = e;
      }
    }
    if (classes == 1) ranked[owner].emplace_back(per_class[owner], term);
  }
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    auto& r = ranked[e];
    std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t i = 0; i < r.size() && i < cfg.bow_size; ++i) {
      vm.bow[e].push_back(r[i].second);
    }
  }
  vm.rebuild();
  return vm;
}

std::array<int, kNumNumeric> extract_numeric(const ProcessedSegment& seg,
                                             std::string_view pre_clean_text,
                                             const LexiconSet& lx) {
  std::array<int, kNumNumeric> f{};
  f[kLenTweet] = static_cast<int>(seg.raw_len);

  for (std::string_view token : utf8::split_whitespace(pre_clean_text)) {
    if (is_url(token)) continue;
    for (char32_t cp : utf8::decode(token)) {
      if (cp == U'!' || cp == U'¡') ++f[kExclamation];
      if (cp == U'?' || cp == U'¿') ++f[kInterrogation];
    }
    std::string_view core = core_of(token);
    while (!core.empty() &&
           (core.front() == '$' || core.front() == '#' || core.front() == '@')) {
      core.remove_prefix(1);
    }
    if (core.empty()) continue;
    if (lx.abbreviations.contains(utf8::fold_case(core))) ++f[kFinAbbr];
    const auto num = classify_numeric(core);
    if (!num || num->date) continue;
    const bool negative = num->sign < 0;
    const bool positive = num->sign > 0 || (num->sign == 0 && num->nonzero);
    if (num->percent) {
      ++f[kTotalPerc];
      if (negative) ++f[kNegPerc];
      if (positive) ++f[kPosPerc];
    } else {
      ++f[kTotalNum];
      if (negative) ++f[kNegNum];
      if (positive) ++f[kPosNum];
    }
  }

  for (const std::string& token : seg.tokens) {
    if (is_tag(token)) continue;
    if (auto it = lx.adverbs.find(token); it != lx.adverbs.end()) {
      ++f[kAdverbs];
      if (it->second & kAdverbNegation) ++f[kAdverbsNeg];
      if (it->second & kAdverbAffirmation) ++f[kAdverbsPos];
      if (it->second & kAdverbDoubt) ++f[kAdverbsDoubt];
      if (it->second & kAdverbIntensifier) ++f[kAdverbsInt];
    }
    if (auto it = lx.polarity.find(token); it != lx.polarity.end()) {
      switch (it->second) {
        case Polarity::Negative: ++f[kNegPolarity]; break;
        case Polarity::Neutral: ++f[kNeuPolarity]; break;
        case Polarity::Positive: ++f[kPosPolarity]; break;
      }
    }
    if (auto it = lx.emotions.find(token); it != lx.emotions.end()) {
      ++f[it->second == GeneralEmotion::Negative ? kNegEmotion : kPosEmotion];
    }
  }
  return f;
}

FeatureVector vectorize(const ProcessedSegment& seg, const VocabularyModel& vm,
                        const std::array<int, kNumNumeric>& numeric,
                        bool trend) {
  if (!vm.fitted()) throw FeatureError("vocabulary model is not fitted");
  const VectorizerConfig& cfg = vm.config;
  std::map<std::uint32_t, std::uint32_t> counts;
  auto hit = [&](std::uint32_t ngram_column) {
    if (auto out = vm.output_column(ngram_column)) ++counts[*out];
  };

  const auto n_char = static_cast<std::uint32_t>(vm.char_terms.size());
  const auto n_word = static_cast<std::uint32_t>(vm.word_terms.size());
  const std::string text = utf8::join(seg.tokens, " ");
  for (const std::string& g : char_ngrams(text, cfg.ngram_min, cfg.ngram_max)) {
    if (auto c = vm.char_index(g)) hit(*c);
  }
  for (const std::string& g : word_ngrams(seg.tokens, cfg.ngram_min, cfg.ngram_max)) {
    if (auto c = vm.word_index(g)) hit(n_char + *c);
  }
  for (const std::string& g :
       wordbound_ngrams(seg.tokens, cfg.ngram_min, cfg.ngram_max)) {
    if (auto c = vm.wordbound_index(g)) hit(n_char + n_word + *c);
  }

  if (cfg.use_bow) {
    const auto base = static_cast<std::uint32_t>(vm.output_dim() - kNumEmotions);
    const std::vector<std::string> terms = bow_terms(seg.tokens);
    for (Emotion e : kAllEmotions) {
      std::uint32_t n = 0;
      for (const std::string& t : terms) n += vm.bow_contains(e, t) ? 1 : 0;
      if (n > 0) counts[base + index_of(e)] = n;
    }
  }

  FeatureVector fv;
  fv.sparse.assign(counts.begin(), counts.end());
  fv.numeric = numeric;
  fv.trend = trend;
  fv.label = seg.label;
  return fv;
}

void PriceSeries::add(const std::string& ticker, sys_days day, double close) {
  if (!(close > 0.0)) {
    throw FeatureError(fmt::format("non-positive price for {} on {}", ticker,
                                   format_date(day)));
  }
  if (!prices_[utf8::fold_case(ticker)].emplace(day, close).second) {
    throw FeatureError(fmt::format("duplicate price for {} on {}", ticker,
                                   format_date(day)));
  }
}

std::optional<double> PriceSeries::close(const std::string& ticker,
                                         sys_days day) const {
  auto t = prices_.find(utf8::fold_case(ticker));
  if (t == prices_.end()) return std::nullopt;
  auto d = t->second.find(day);
  if (d == t->second.end()) return std::nullopt;
  return d->second;
}

std::size_t PriceSeries::size() const {
  std::size_t n = 0;
  for (const auto& [ticker, days] : prices_) n += days.size();
  return n;
}

std::optional<sys_days> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto num = [&](std::size_t pos, std::size_t len, auto& out) {
    const char* b = text.data() + pos;
    auto [ptr, ec] = std::from_chars(b, b + len, out);
    return ec == std::errc() && ptr == b + len;
  };
  if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd};
}

PriceSeries load_prices(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FeatureError(fmt::format("price file not found: {}", path.string()));
  PriceSeries prices;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string trimmed = utf8::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    if (number == 1 && trimmed.starts_with("ticker")) continue;
    const std::size_t c1 = trimmed.find(',');
    const std::size_t c2 =
        c1 == std::string::npos ? std::string::npos : trimmed.find(',', c1 + 1);
    if (c2 == std::string::npos) {
      throw FeatureError(fmt::format("{}:{}: expected ticker,date,close",
                                     path.string(), number));
    }
    const std::string ticker = utf8::trim(std::string_view(trimmed).substr(0, c1));
    const auto day = parse_date(utf8::trim(
        std::string_view(trimmed).substr(c1 + 1, c2 - c1 - 1)));
    const std::string close = utf8::trim(std::string_view(trimmed).substr(c2 + 1));
    double value = 0.0;
    auto [ptr, ec] =
        std::from_chars(close.data(), close.data() + close.size(), value);
    if (ticker.empty() || !day || ec != std::errc() ||
        ptr != close.data() + close.size()) {
      throw FeatureError(fmt::format("{}:{}: malformed price row", path.string(),
                                     number));
    }
    try {
      prices.add(ticker, *day, value);
    } catch (const FeatureError& e) {
      throw FeatureError(fmt::format("{}:{}: {}", path.string(), number, e.what()));
    }
  }
  return prices;
}

bool is_working_day(sys_days day, const std::set<sys_days>& holidays) {
  const std::chrono::weekday wd{day};
  return wd != std::chrono::Saturday && wd != std::chrono::Sunday &&
         !holidays.contains(day);
}

sys_days previous_working_day(sys_days day, const std::set<sys_days>& holidays) {
  do {
    day -= std::chrono::days{1};
  } while (!is_working_day(day, holidays));
  return day;
}

sys_days next_working_day(sys_days day, const std::set<sys_days>& holidays) {
  do {
    day += std::chrono::days{1};
  } while (!is_working_day(day, holidays));
  return day;
}

bool compute_trend(const std::string& ticker, std::chrono::sys_seconds post_time,
                   const PriceSeries& prices,
                   const std::set<sys_days>& holidays) {
  const sys_days day = std::chrono::floor<std::chrono::days>(post_time);
  const sys_days before = previous_working_day(day, holidays);
  const sys_days after = next_working_day(day, holidays);
  const auto p0 = prices.close(ticker, before);
  if (!p0) {
    throw TrendUnavailable(
        fmt::format("no close for {} on {}", ticker, format_date(before)));
  }
  const auto p1 = prices.close(ticker, after);
  if (!p1) {
    throw TrendUnavailable(
        fmt::format("no close for {} on {}", ticker, format_date(after)));
  }
  return *p1 > *p0;
}

json to_json(const FeatureVector& fv) {
  json j;
  json sparse = json::array();
  for (const auto& [c, n] : fv.sparse) sparse.push_back({c, n});
  j["sparse"] = std::move(sparse);
  for (std::size_t i = 0; i < kNumNumeric; ++i) {
    j["numeric"][std::string(kNumericNames[i])] = fv.numeric[i];
  }
  j["trend"] = fv.trend ? "upward" : "downward";
  j["label"] = fv.label ? json(std::string(1, code_of(*fv.label))) : json(nullptr);
  return j;
}

}  // namespace finemo
