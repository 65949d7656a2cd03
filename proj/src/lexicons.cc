#include "finemo/lexicons.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "finemo/utf8.h"

namespace finemo {

namespace {

struct Line {
  std::size_t number;
  std::vector<std::string> fields;  // tab separated, trimmed
};

// Reads non-comment, non-blank lines of a resource file.
std::vector<Line> read_resource(const std::filesystem::path& dir,
                                const std::string& file,
                                const std::string& kind) {
  const auto path = dir / file;
  std::ifstream in(path);
  if (!in) {
    throw LexiconError(
        fmt::format("{} lexicon not found: {}", kind, path.string()));
  }
  std::vector<Line> lines;
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string trimmed = utf8::trim(raw);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    Line line{number, {}};
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = trimmed.find('\t', start);
      line.fields.push_back(utf8::trim(
          std::string_view(trimmed).substr(start, tab - start)));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

[[noreturn]] void malformed(const std::string& file, std::size_t line,
                            std::string_view why) {
  throw LexiconError(fmt::format("{}:{}: {}", file, line, why));
}

void require_fields(const Line& line, const std::string& file,
                    std::size_t n) {
  if (line.fields.size() < n) {
    malformed(file, line.number,
              fmt::format("expected {} tab-separated fields", n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (line.fields[i].empty()) malformed(file, line.number, "empty field");
  }
}

std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    std::string piece = utf8::trim(s.substr(start, comma - start));
    if (!piece.empty()) out.push_back(std::move(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void load_tickers(const std::filesystem::path& dir, LexiconSet& lx) {
  const std::string file = "tickers.tsv";
  for (const Line& line : read_resource(dir, file, "ticker")) {
    require_fields(line, file, 1);
    const std::string& canonical = line.fields[0];
    lx.tickers.insert(canonical);
    for (const std::string& key : line.fields) {
      if (key.empty()) continue;
      std::string folded = utf8::fold_case(key);
      if (!lx.ticker_keys.emplace(folded, canonical).second) {
        malformed(file, line.number,
                  fmt::format("duplicate ticker alias '{}'", key));
      }
    }
  }
}

void load_word_list(const std::filesystem::path& dir, const std::string& file,
                    const std::string& kind,
                    std::unordered_set<std::string>& out) {
  for (const Line& line : read_resource(dir, file, kind)) {
    require_fields(line, file, 1);
    out.insert(utf8::fold_case(line.fields[0]));
  }
}

void load_polarity(const std::filesystem::path& dir, LexiconSet& lx) {
  const std::string file = "polarity.tsv";
  for (const Line& line : read_resource(dir, file, "polarity")) {
    require_fields(line, file, 2);
    const std::string tag = utf8::fold_case(line.fields[1]);
    Polarity p;
    if (tag == "neg") {
      p = Polarity::Negative;
    } else if (tag == "neu") {
      p = Polarity::Neutral;
    } else if (tag == "pos") {
      p = Polarity::Positive;
    } else {
      malformed(file, line.number, "polarity must be neg, neu or pos");
    }
    lx.polarity[utf8::fold_case(line.fields[0])] = p;
  }
}

void load_emotions(const std::filesystem::path& dir, LexiconSet& lx) {
  const std::string file = "emotions.tsv";
  for (const Line& line : read_resource(dir, file, "emotion")) {
    require_fields(line, file, 2);
    const std::string tag = utf8::fold_case(line.fields[1]);
    GeneralEmotion e;
    if (tag == "neg") {
      e = GeneralEmotion::Negative;
    } else if (tag == "pos") {
      e = GeneralEmotion::Positive;
    } else {
      malformed(file, line.number, "emotion must be neg or pos");
    }
    lx.emotions[utf8::fold_case(line.fields[0])] = e;
  }
}

void load_adverbs(const std::filesystem::path& dir, LexiconSet& lx) {
  const std::string file = "adverbs.tsv";
  for (const Line& line : read_resource(dir, file, "adverb")) {
    require_fields(line, file, 1);
    std::uint8_t bits = 0;
    if (line.fields.size() > 1) {
      for (const std::string& cls : split_commas(line.fields[1])) {
        const std::string c = utf8::fold_case(cls);
        if (c == "negation") {
          bits |= kAdverbNegation;
        } else if (c == "affirmation") {
          bits |= kAdverbAffirmation;
        } else if (c == "doubt") {
          bits |= kAdverbDoubt;
        } else if (c == "intensifier") {
          bits |= kAdverbIntensifier;
        } else {
          malformed(file, line.number,
                    fmt::format("unknown adverb class '{}'", cls));
        }
      }
    }
    lx.adverbs[utf8::fold_case(line.fields[0])] = bits;
  }
}

void load_freq(const std::filesystem::path& dir, LexiconSet& lx) {
  const std::string file = "freq.tsv";
  for (const Line& line : read_resource(dir, file, "frequency")) {
    require_fields(line, file, 2);
    const std::string& num = line.fields[1];
    double value = 0.0;
    const auto [ptr, ec] =
        std::from_chars(num.data(), num.data() + num.size(), value);
    if (ec != std::errc() || ptr != num.data() + num.size()) {
      malformed(file, line.number, "frequency is not a number");
    }
    if (!(value > 0.0 && value <= 1.0)) {
      malformed(file, line.number, "frequency must be in (0, 1]");
    }
    lx.freq[utf8::fold_case(line.fields[0])] = value;
  }
}

void load_dictionary(const std::filesystem::path& dir, LexiconSet& lx) {
  const std::string file = "dictionary.tsv";
  std::vector<std::string> lemmas;
  for (const Line& line : read_resource(dir, file, "dictionary")) {
    require_fields(line, file, 2);
    std::string form = utf8::fold_case(line.fields[0]);
    std::string lemma = utf8::fold_case(line.fields[1]);
    lemmas.push_back(lemma);
    lx.dictionary[std::move(form)] = std::move(lemma);
  }
  // Lemmas are valid words in their own right; re-lemmatizing one must be
  // the identity.
  for (std::string& lemma : lemmas) lx.dictionary.try_emplace(lemma, lemma);

  for (const auto& [form, lemma] : lx.dictionary) {
    std::u32string cps = utf8::decode(form);
    lx.forms_by_length[cps.size()].push_back(std::move(cps));
  }
  for (auto& [len, forms] : lx.forms_by_length) {
    std::sort(forms.begin(), forms.end());
  }
}

}  // namespace

bool LexiconSet::is_stopword(std::string_view folded) const {
  const std::string key(folded);
  return stopwords.contains(key) && !keep_words.contains(key);
}

bool LexiconSet::in_dictionary(std::string_view folded) const {
  return dictionary.contains(std::string(folded));
}

double LexiconSet::frequency(std::string_view folded) const {
  const auto it = freq.find(std::string(folded));
  return it == freq.end() ? 0.0 : it->second;
}

LexiconSet load_lexicons(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw LexiconError(
        fmt::format("lexicon directory not found: {}", dir.string()));
  }
  LexiconSet lx;
  load_tickers(dir, lx);
  load_word_list(dir, "stopwords.txt", "stopword", lx.stopwords);
  load_word_list(dir, "keepwords.txt", "keep-word", lx.keep_words);
  for (const std::string& w : lx.keep_words) lx.stopwords.erase(w);
  load_polarity(dir, lx);
  load_emotions(dir, lx);
  load_adverbs(dir, lx);
  load_word_list(dir, "abbreviations.txt", "abbreviation", lx.abbreviations);
  load_freq(dir, lx);
  load_dictionary(dir, lx);
  return lx;
}

std::optional<std::string> lookup_ticker(std::string_view token,
                                         const LexiconSet& lx) {
  std::size_t start = 0;
  while (start < token.size() &&
         (token[start] == '$' || token[start] == '#' || token[start] == '@')) {
    ++start;
  }
  if (start == token.size()) return std::nullopt;
  const auto it = lx.ticker_keys.find(utf8::fold_case(token.substr(start)));
  if (it == lx.ticker_keys.end()) return std::nullopt;
  return it->second;
}

std::string serialize(const LexiconSet& lx) {
  std::ostringstream out;
  auto sorted_keys = [](const auto& container) {
    std::vector<std::string> keys;
    for (const auto& item : container) {
      if constexpr (std::is_same_v<std::decay_t<decltype(item)>, std::string>) {
        keys.push_back(item);
      } else {
        keys.push_back(item.first);
      }
    }
    std::sort(keys.begin(), keys.end());
    return keys;
  };
  out << "[tickers]\n";
  for (const auto& k : sorted_keys(lx.ticker_keys)) {
    out << k << '\t' << lx.ticker_keys.at(k) << '\n';
  }
  out << "[stopwords]\n";
  for (const auto& k : sorted_keys(lx.stopwords)) out << k << '\n';
  out << "[keepwords]\n";
  for (const auto& k : sorted_keys(lx.keep_words)) out << k << '\n';
  out << "[polarity]\n";
  for (const auto& k : sorted_keys(lx.polarity)) {
    out << k << '\t' << static_cast<int>(lx.polarity.at(k)) << '\n';
  }
  out << "[emotions]\n";
  for (const auto& k : sorted_keys(lx.emotions)) {
    out << k << '\t' << static_cast<int>(lx.emotions.at(k)) << '\n';
  }
  out << "[adverbs]\n";
  for (const auto& k : sorted_keys(lx.adverbs)) {
    out << k << '\t' << static_cast<int>(lx.adverbs.at(k)) << '\n';
  }
  out << "[abbreviations]\n";
  for (const auto& k : sorted_keys(lx.abbreviations)) out << k << '\n';
  out << "[freq]\n";
  for (const auto& k : sorted_keys(lx.freq)) {
    out << k << '\t' << fmt::format("{}", lx.freq.at(k)) << '\n';
  }
  out << "[dictionary]\n";
  for (const auto& k : sorted_keys(lx.dictionary)) {
    out << k << '\t' << lx.dictionary.at(k) << '\n';
  }
  return out.str();
}

}  // namespace finemo
