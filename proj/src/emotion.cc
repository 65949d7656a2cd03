#include "finemo/emotion.h"

#include "finemo/utf8.h"

namespace finemo {

std::optional<Emotion> parse_emotion(std::string_view text) {
  const std::string t = utf8::fold_case(utf8::trim(text));
  if (t == "p" || t == "p-" || t == "precaution") return Emotion::Precaution;
  if (t == "n" || t == "neutral") return Emotion::Neutral;
  if (t == "o" || t == "o+" || t == "opportunity") return Emotion::Opportunity;
  return std::nullopt;
}

}  // namespace finemo
