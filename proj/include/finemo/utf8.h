#ifndef FINEMO_UTF8_H_
#define FINEMO_UTF8_H_

#include <string>
#include <string_view>
#include <vector>

namespace finemo::utf8 {

// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
std::string encode(char32_t cp);

// Number of code points in `text`.
std::size_t length(std::string_view text);

// Lower-cases ASCII and the Latin-1 / Latin Extended-A letters used by
// Spanish and the other western European languages.
char32_t fold(char32_t cp);
std::string fold_case(std::string_view text);

bool is_letter(char32_t cp);
bool is_digit(char32_t cp);
bool is_space(char32_t cp);

// Splits on ASCII whitespace, dropping empty pieces.
std::vector<std::string_view> split_whitespace(std::string_view text);

struct TokenSpan {
  std::string_view text;
  std::size_t begin = 0;  // byte offset into the source
  std::size_t end = 0;
};
std::vector<TokenSpan> tokenize_with_spans(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string trim(std::string_view text);

}  // namespace finemo::utf8

#endif  // FINEMO_UTF8_H_
