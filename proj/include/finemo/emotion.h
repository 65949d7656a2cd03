#ifndef FINEMO_EMOTION_H_
#define FINEMO_EMOTION_H_

#include <array>
#include <optional>
#include <string_view>

namespace finemo {

// Financial emotion of one asset mention. The ordinal order (P-, N, O+) is
// the row/column order of every confusion and coincidence matrix.
enum class Emotion : int { Precaution = 0, Neutral = 1, Opportunity = 2 };

inline constexpr int kNumEmotions = 3;
inline constexpr std::array<Emotion, 3> kAllEmotions = {
    Emotion::Precaution, Emotion::Neutral, Emotion::Opportunity};

constexpr int index_of(Emotion e) { return static_cast<int>(e); }
constexpr Emotion emotion_from_index(int i) { return static_cast<Emotion>(i); }

// Single-letter codes used in label files: P, N, O.
constexpr char code_of(Emotion e) {
  switch (e) {
    case Emotion::Precaution: return 'P';
    case Emotion::Neutral: return 'N';
    case Emotion::Opportunity: return 'O';
  }
  return '?';
}

constexpr std::string_view name_of(Emotion e) {
  switch (e) {
    case Emotion::Precaution: return "precaution";
    case Emotion::Neutral: return "neutral";
    case Emotion::Opportunity: return "opportunity";
  }
  return "?";
}

// Accepts the single-letter codes and the full names, case-insensitively.
std::optional<Emotion> parse_emotion(std::string_view text);

// Signed ordinal encoding used for correlation analysis: P- = -1, N = 0,
// O+ = +1.
constexpr double signed_ordinal(Emotion e) {
  return static_cast<double>(index_of(e) - 1);
}

}  // namespace finemo

#endif  // FINEMO_EMOTION_H_
