#include "finemo/tokens.h"

#include <array>

namespace finemo {

namespace {

constexpr std::array<std::string_view, 7> kLeading = {
    "\xC2\xBF" /* ¿ */, "\xC2\xA1" /* ¡ */, "(", "[", "\"", "'",
    "\xC2\xAB" /* « */};

constexpr std::array<std::string_view, 13> kTrailing = {
    ".", ",", ";", ":", "!", "?", ")", "]", "\"", "'",
    "\xE2\x80\xA6" /* … */, "\xC2\xBB" /* » */, "\xE2\x80\x9D" /* ” */};

bool digits(std::string_view s, std::size_t& i) {
  const std::size_t start = i;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
  return i > start;
}

}  // namespace

bool is_tag(std::string_view token) {
  return token == kTickerTag || token == kOtherTickerTag ||
         token == kNegativeTag || token == kPositiveTag ||
         token == kNumberTag;
}

CoreBounds core_bounds(std::string_view token) {
  CoreBounds b{0, token.size()};
  bool changed = true;
  while (changed && b.begin < b.end) {
    changed = false;
    for (std::string_view mark : kLeading) {
      if (token.substr(b.begin, b.end - b.begin).starts_with(mark)) {
        b.begin += mark.size();
        changed = true;
        break;
      }
    }
  }
  changed = true;
  while (changed && b.begin < b.end) {
    changed = false;
    for (std::string_view mark : kTrailing) {
      if (token.substr(b.begin, b.end - b.begin).ends_with(mark)) {
        b.end -= mark.size();
        changed = true;
        break;
      }
    }
  }
  return b;
}

std::string_view core_of(std::string_view token) {
  const CoreBounds b = core_bounds(token);
  return token.substr(b.begin, b.end - b.begin);
}

std::optional<NumericToken> classify_numeric(std::string_view s) {
  if (s.empty()) return std::nullopt;

  // Dates: d{1,4}[-/]d{1,2}[-/]d{1,4}
  {
    std::size_t i = 0;
    std::size_t a = i;
    if (digits(s, i) && i - a <= 4 && i < s.size() &&
        (s[i] == '-' || s[i] == '/')) {
      const char sep = s[i++];
      std::size_t b = i;
      if (digits(s, i) && i - b <= 2 && i < s.size() && s[i] == sep) {
        ++i;
        std::size_t c = i;
        if (digits(s, i) && i - c <= 4 && i == s.size()) {
          return NumericToken{0, false, true, true};
        }
      }
    }
  }

  NumericToken out;
  std::size_t i = 0;
  if (s[i] == '+') {
    out.sign = 1;
    ++i;
  } else if (s[i] == '-') {
    out.sign = -1;
    ++i;
  } else if (s.substr(i).starts_with("\xE2\x88\x92")) {  // U+2212 minus
    out.sign = -1;
    i += 3;
  }
  std::size_t end = s.size();
  if (end > i && s[end - 1] == '%') {
    out.percent = true;
    --end;
  }
  const std::string_view body = s.substr(i, end - i);
  std::size_t j = 0;
  if (!digits(body, j)) return std::nullopt;
  while (j < body.size()) {
    if (body[j] != '.' && body[j] != ',') return std::nullopt;
    ++j;
    if (!digits(body, j)) return std::nullopt;
  }
  for (char c : body) {
    if (c >= '1' && c <= '9') {
      out.nonzero = true;
      break;
    }
  }
  return out;
}

bool is_url(std::string_view token) {
  const std::string_view core = core_of(token);
  return core.starts_with("http://") || core.starts_with("https://") ||
         core.starts_with("www.") || core.starts_with("t.co/") ||
         core.starts_with("pic.twitter.com/");
}

}  // namespace finemo
