#ifndef FINEMO_TESTS_SYNTHETIC_H_
#define FINEMO_TESTS_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "finemo/features.h"
#include "finemo/pipeline.h"

namespace finemo::test {

// Labeled vectors with random sparse counts over `sparse_dim` columns, a
// random numeric block and trend. Class-dependent shifts make the stream
// learnable but noisy.
std::vector<FeatureVector> random_stream(std::uint64_t seed, std::size_t n,
                                         std::size_t sparse_dim);

struct PlantedStreamConfig {
  std::size_t instances = 5000;
  // Class counts are scaled from these proportions (P-, N, O+).
  std::array<double, 3> balance = {1644, 4172, 2392};
  std::size_t common_words = 400;
  std::size_t planted_per_class = 60;   // exclusive bigrams per non-neutral class
  double plant_probability = 0.9;       // chance a P-/O+ post carries one
  std::size_t min_words = 5;
  std::size_t max_words = 9;
  // Probability that a numeric cue agrees with the class.
  double numeric_signal = 0.35;
  // Filler words never form a planted pair, so the label is a function of
  // the text when plant_probability is 1.
  bool exclusive_pairs = false;
};

// Posts whose textual signal lies in class-exclusive word pairs built from
// class-neutral words, in the style of "ser bajista" or "mayor ganancia".
std::vector<StreamInstance> planted_stream(std::uint64_t seed,
                                           const PlantedStreamConfig& cfg = {});

// Files of a small labeled corpus of one-asset posts written from the
// sample lexicons: tweets.jsonl, labels.tsv and prices.csv.
struct CorpusFiles {
  std::filesystem::path tweets;
  std::filesystem::path labels;
  std::filesystem::path prices;
  std::size_t posts = 0;
};

CorpusFiles write_labeled_corpus(const std::filesystem::path& dir,
                                 std::uint64_t seed, std::size_t posts);

}  // namespace finemo::test

#endif  // FINEMO_TESTS_SYNTHETIC_H_
