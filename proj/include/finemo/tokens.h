#ifndef FINEMO_TOKENS_H_
#define FINEMO_TOKENS_H_

#include <optional>
#include <string_view>

namespace finemo {

inline constexpr std::string_view kTickerTag = "TICKER";
inline constexpr std::string_view kOtherTickerTag = "OTHER_TICKER";
inline constexpr std::string_view kNegativeTag = "NEGATIVE";
inline constexpr std::string_view kPositiveTag = "POSITIVE";
inline constexpr std::string_view kNumberTag = "NUMBER";

bool is_tag(std::string_view token);

// Byte range of a whitespace token once surrounding punctuation is removed:
// leading opening marks (¿ ¡ ( [ " ' «) and trailing closing marks and
// sentence punctuation (. , ; : ! ? … ) ] " ' »).
struct CoreBounds {
  std::size_t begin = 0;
  std::size_t end = 0;
};
CoreBounds core_bounds(std::string_view token);
std::string_view core_of(std::string_view token);

// A token that reads as a number: optional sign, digit groups separated by
// '.' or ',', optional trailing '%'. Dates such as 30-07-2019 are reported
// with `date` set and are not counted as numerical values.
struct NumericToken {
  int sign = 0;  // -1 explicit minus, +1 explicit plus, 0 unsigned
  bool percent = false;
  bool date = false;
  bool nonzero = false;
};
std::optional<NumericToken> classify_numeric(std::string_view core);

// True for http(s) links and bare t.co / www. links.
bool is_url(std::string_view token);

}  // namespace finemo

#endif  // FINEMO_TOKENS_H_
