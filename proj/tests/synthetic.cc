#include "synthetic.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "finemo/utf8.h"

namespace finemo::test {

std::vector<FeatureVector> random_stream(std::uint64_t seed, std::size_t n,
                                         std::size_t sparse_dim) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> label_d(0, 2);
  std::uniform_int_distribution<int> entries_d(0, 6);
  std::uniform_int_distribution<std::size_t> col_d(0, sparse_dim - 1);
  std::uniform_int_distribution<int> count_d(1, 3);
  std::uniform_int_distribution<int> small_d(0, 5);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution bias(0.6);
  std::vector<FeatureVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector fv;
    const int label = label_d(rng);
    fv.label = emotion_from_index(label);
    std::map<std::uint32_t, std::uint32_t> cols;
    const int k = entries_d(rng);
    for (int e = 0; e < k; ++e) {
      std::size_t c = col_d(rng);
      if (bias(rng)) c = c - c % 3 + static_cast<std::size_t>(label);
      if (c >= sparse_dim) c = sparse_dim - 1;
      cols[static_cast<std::uint32_t>(c)] += static_cast<std::uint32_t>(count_d(rng));
    }
    fv.sparse.assign(cols.begin(), cols.end());
    for (std::size_t a = 0; a < kNumNumeric; ++a) {
      fv.numeric[a] = small_d(rng) + (a % 3 == static_cast<std::size_t>(label) ? 2 : 0);
    }
    fv.trend = label == 2 ? bias(rng) : coin(rng);
    out.push_back(std::move(fv));
  }
  return out;
}

namespace {

std::vector<std::string> make_words(std::mt19937_64& rng, std::size_t n) {
  static const std::vector<std::string> onsets = {"b", "c", "d", "f", "g", "l", "m",
                                                   "n", "p", "r", "s", "t", "v", "ch"};
  static const std::vector<std::string> vowels = {"a", "e", "i", "o", "u"};
  std::uniform_int_distribution<std::size_t> on(0, onsets.size() - 1);
  std::uniform_int_distribution<std::size_t> vo(0, vowels.size() - 1);
  std::uniform_int_distribution<int> syl(2, 3);
  std::set<std::string> seen;
  std::vector<std::string> words;
  while (words.size() < n) {
    std::string w;
    const int s = syl(rng);
    for (int i = 0; i < s; ++i) w += onsets[on(rng)] + vowels[vo(rng)];
    if (seen.insert(w).second) words.push_back(w);
  }
  return words;
}

std::size_t planted_pairs_in(const std::vector<std::size_t>& ids,
                             const std::set<std::pair<std::size_t, std::size_t>>& planted) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < ids.size(); ++i) n += planted.count({ids[i], ids[i + 1]});
  return n;
}

}  // namespace

std::vector<StreamInstance> planted_stream(std::uint64_t seed,
                                           const PlantedStreamConfig& cfg) {
  std::mt19937_64 rng(seed);
  const std::vector<std::string> words = make_words(rng, cfg.common_words);
  std::uniform_int_distribution<std::size_t> word_d(0, words.size() - 1);

  // Exclusive word pairs for P- (index 0) and O+ (index 2).
  std::set<std::pair<std::size_t, std::size_t>> used;
  std::array<std::vector<std::pair<std::size_t, std::size_t>>, 3> planted;
  for (int cls : {0, 2}) {
    while (planted[cls].size() < cfg.planted_per_class) {
      const std::size_t a = word_d(rng);
      const std::size_t b = word_d(rng);
      if (a == b || !used.insert({a, b}).second) continue;
      planted[cls].push_back({a, b});
    }
  }

  const double total = cfg.balance[0] + cfg.balance[1] + cfg.balance[2];
  std::array<std::size_t, 3> counts{};
  counts[0] = static_cast<std::size_t>(std::lround(cfg.instances * cfg.balance[0] / total));
  counts[2] = static_cast<std::size_t>(std::lround(cfg.instances * cfg.balance[2] / total));
  counts[1] = cfg.instances - counts[0] - counts[2];
  std::vector<int> labels;
  for (int c = 0; c < 3; ++c) labels.insert(labels.end(), counts[c], c);
  std::shuffle(labels.begin(), labels.end(), rng);

  std::uniform_int_distribution<std::size_t> len_d(cfg.min_words, cfg.max_words);
  std::uniform_int_distribution<int> raw_d(40, 180);
  std::uniform_int_distribution<int> pol_d(0, 2);
  std::bernoulli_distribution plant(cfg.plant_probability);
  std::bernoulli_distribution signal(cfg.numeric_signal);
  std::bernoulli_distribution noise(0.15);
  std::bernoulli_distribution trend_hint(0.65);
  std::bernoulli_distribution coin(0.5);

  std::vector<StreamInstance> out;
  out.reserve(labels.size());
  const auto start = std::chrono::sys_seconds(std::chrono::sys_days(
      std::chrono::year_month_day(std::chrono::year(2020), std::chrono::month(1),
                                  std::chrono::day(1))));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int cls = labels[i];
    const bool planted_here = cls != 1 && plant(rng);
    std::vector<std::size_t> ids;
    do {
      ids.clear();
      const std::size_t len = len_d(rng);
      for (std::size_t k = 0; k < len; ++k) ids.push_back(word_d(rng));
      if (planted_here) {
        std::uniform_int_distribution<std::size_t> pick(0, planted[cls].size() - 1);
        const auto [a, b] = planted[cls][pick(rng)];
        std::uniform_int_distribution<std::size_t> at_d(0, ids.size());
        auto at = ids.begin() + static_cast<std::ptrdiff_t>(at_d(rng));
        at = ids.insert(at, b);
        ids.insert(at, a);
      }
    } while (cfg.exclusive_pairs && planted_pairs_in(ids, used) != (planted_here ? 1u : 0u));
    std::vector<std::string> tokens;
    for (std::size_t id : ids) tokens.push_back(words[id]);

    StreamInstance inst;
    ProcessedSegment& p = inst.processed;
    p.tweet_id = "syn" + std::to_string(i);
    p.focus = "SYN";
    p.tokens = tokens;
    p.pre_clean_text = utf8::join(tokens, " ");
    p.label = emotion_from_index(cls);
    inst.text = p.pre_clean_text;
    inst.timestamp = start + std::chrono::minutes(static_cast<long>(i));

    auto& x = inst.numeric;
    x[kLenTweet] = raw_d(rng);
    p.raw_len = static_cast<std::size_t>(x[kLenTweet]);
    x[kNegPerc] = (cls == 0 && signal(rng)) || noise(rng) ? 1 : 0;
    x[kPosPerc] = (cls == 2 && signal(rng)) || noise(rng) ? 1 : 0;
    x[kTotalPerc] = x[kNegPerc] + x[kPosPerc];
    x[kNegPolarity] = pol_d(rng) + ((cls == 0 && signal(rng)) ? 1 : 0);
    x[kPosPolarity] = pol_d(rng) + ((cls == 2 && signal(rng)) ? 1 : 0);
    x[kAdverbs] = pol_d(rng);
    if (cls == 0) {
      inst.trend = !trend_hint(rng);
    } else if (cls == 2) {
      inst.trend = trend_hint(rng);
    } else {
      inst.trend = coin(rng);
    }
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace finemo::test

namespace finemo::test {

CorpusFiles write_labeled_corpus(const std::filesystem::path& dir, std::uint64_t seed,
                                 std::size_t posts) {
  static const std::vector<std::string> assets = {"BBVA", "Santander", "Inditex",
                                                  "Telefónica", "Repsol"};
  static const std::vector<std::string> tickers = {"BBVA", "SAN", "ITX", "TEF", "REP"};
  static const std::array<std::vector<std::string>, 3> cues = {
      std::vector<std::string>{"sigue cayendo", "riesgo de caída", "mucho cuidado",
                               "pérdidas fuertes", "tendencia bajista"},
      std::vector<std::string>{"presenta resultados", "abre la sesión", "cotiza hoy",
                               "publica datos", "reparte dividendo"},
      std::vector<std::string>{"rebote alcista", "oportunidad de compra", "sube fuerte",
                               "mayor ganancia", "buen nivel"}};
  static const std::vector<std::string> fillers = {"en bolsa", "esta semana", "tras el cierre",
                                                   "en el mercado", ""};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> asset_d(0, assets.size() - 1);
  std::uniform_int_distribution<int> label_d(0, 2);
  std::uniform_int_distribution<std::size_t> cue_d(0, 4);
  std::uniform_int_distribution<int> pct_d(1, 900);

  CorpusFiles files{dir / "tweets.jsonl", dir / "labels.tsv", dir / "prices.csv", posts};
  std::ofstream tweets(files.tweets);
  std::ofstream labels(files.labels);
  const auto day0 = std::chrono::sys_days(std::chrono::year(2020) / 1 / 6);
  for (std::size_t i = 0; i < posts; ++i) {
    const std::size_t a = asset_d(rng);
    const int label = label_d(rng);
    std::string text = "$" + assets[a] + " " + cues[label][cue_d(rng)];
    if (label != 1) {
      const int pct = pct_d(rng);
      text += fmt::format(" {}{},{:02d}%", label == 0 ? "-" : "+", pct / 100, pct % 100);
    }
    const std::string& filler = fillers[cue_d(rng)];
    if (!filler.empty()) text += " " + filler;
    const auto ts = std::chrono::sys_seconds(day0) + std::chrono::hours(3 * i);
    const nlohmann::json row = {{"id", fmt::format("t{:05d}", i)},
                                {"created_at", format_timestamp(ts)},
                                {"text", text}};
    tweets << row.dump() << "\n";
    labels << fmt::format("t{:05d}\t0\t{}\t{}\n", i, tickers[a],
                          code_of(emotion_from_index(label)));
  }

  std::ofstream prices(files.prices);
  prices << "ticker,date,close\n";
  const std::size_t days = posts * 3 / 24 + 10;
  std::uniform_real_distribution<double> step(-2.0, 2.0);
  for (const std::string& t : tickers) {
    double close = 100.0;
    for (std::size_t d = 0; d < days + 10; ++d) {
      const std::chrono::year_month_day ymd{day0 + std::chrono::days(d) - std::chrono::days(5)};
      close += step(rng);
      prices << fmt::format("{},{:04d}-{:02d}-{:02d},{:.2f}\n", t, static_cast<int>(ymd.year()),
                            static_cast<unsigned>(ymd.month()),
                            static_cast<unsigned>(ymd.day()), close);
    }
  }
  return files;
}

}  // namespace finemo::test
