#ifndef FINEMO_LEXICONS_H_
#define FINEMO_LEXICONS_H_

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
#include <vector>

namespace finemo {

class LexiconError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Polarity { Negative, Neutral, Positive };
enum class GeneralEmotion { Negative, Positive };

// Bit set over the adverb classes.
enum AdverbClass : std::uint8_t {
  kAdverbNegation = 1 << 0,
  kAdverbAffirmation = 1 << 1,
  kAdverbDoubt = 1 << 2,
  kAdverbIntensifier = 1 << 3,
};

// All dictionary resources. Immutable after load_lexicons(); every key is
// case-folded.
struct LexiconSet {
  // Match key (folded canonical or alias) -> canonical ticker.
  std::unordered_map<std::string, std::string> ticker_keys;
  std::set<std::string> tickers;  // canonical symbols
  std::unordered_set<std::string> stopwords;
  std::unordered_set<std::string> keep_words;
  std::unordered_map<std::string, Polarity> polarity;
  std::unordered_map<std::string, GeneralEmotion> emotions;
  std::unordered_map<std::string, std::uint8_t> adverbs;  // AdverbClass bits
  std::unordered_set<std::string> abbreviations;
  std::unordered_map<std::string, double> freq;
  // Inflected form -> lemma. Every lemma is also present as its own form.
  std::unordered_map<std::string, std::string> dictionary;

  // Dictionary forms bucketed by code-point length, for spelling correction.
  std::map<std::size_t, std::vector<std::u32string>> forms_by_length;

  bool is_stopword(std::string_view folded) const;
  bool in_dictionary(std::string_view folded) const;
  double frequency(std::string_view folded) const;
};

// Reads the nine resource files from `dir`: tickers.tsv, stopwords.txt,
// keepwords.txt, polarity.tsv, emotions.tsv, adverbs.tsv, abbreviations.txt,
// freq.tsv and dictionary.tsv. Lines starting with '#' are comments.
LexiconSet load_lexicons(const std::filesystem::path& dir);

// Canonical ticker for a raw token. Leading '$', '#' and '@' are stripped and
// the match is case-insensitive.
std::optional<std::string> lookup_ticker(std::string_view token,
                                         const LexiconSet& lx);

// Deterministic text dump, used to check that loading is reproducible.
std::string serialize(const LexiconSet& lx);

}  // namespace finemo

#endif  // FINEMO_LEXICONS_H_
