#include "doctest.h"

#include <map>
#include <set>

#include "finemo/features.h"
#include "finemo/pipeline.h"
#include "finemo/textproc.h"
#include "support.h"
#include "synthetic.h"

using namespace finemo;
using finemo::test::sample_lexicons;
using std::chrono::sys_days;
using Strings = std::vector<std::string>;

namespace {

ProcessedSegment labeled(std::vector<std::string> tokens, Emotion e) {
  ProcessedSegment p;
  p.tokens = std::move(tokens);
  p.label = e;
  return p;
}

ProcessedSegment processed(const std::string& text, const std::string& focus) {
  Segment seg;
  seg.text = text;
  seg.original_text = text;
  seg.focus = focus;
  return process(seg, sample_lexicons());
}

sys_days day(int y, unsigned m, unsigned d) {
  return sys_days(std::chrono::year(y) / std::chrono::month(m) / std::chrono::day(d));
}

std::chrono::sys_seconds noon(int y, unsigned m, unsigned d) {
  return std::chrono::sys_seconds(day(y, m, d)) + std::chrono::hours(12);
}

}  // namespace

TEST_SUITE("features") {
  TEST_CASE("character n-grams") {
    CHECK(char_ngrams("ab c", 1, 2) == Strings{"a", "b", " ", "c", "ab", "b ", " c"});
    CHECK(char_ngrams("ñu", 2, 2) == Strings{"ñu"});
  }

  TEST_CASE("word n-grams") {
    CHECK(word_ngrams({"a", "b", "c"}, 1, 2) == Strings{"a", "b", "c", "a b", "b c"});
    CHECK(word_ngrams({"a"}, 2, 3).empty());
  }

  TEST_CASE("word-boundary n-grams pad each word") {
    CHECK(wordbound_ngrams({"ab"}, 2, 3) == Strings{" a", "ab", "b ", " ab", "ab "});
    CHECK(wordbound_ngrams({"a"}, 4, 5) == Strings{" a "});
  }

  TEST_CASE("document frequency bounds") {
    std::vector<ProcessedSegment> corpus;
    const std::vector<Strings> docs = {{"x", "y"}, {"x", "z"}, {"x", "w"}, {"y", "v"}};
    for (const auto& d : docs) corpus.push_back(labeled(d, Emotion::Neutral));
    VectorizerConfig cfg;
    cfg.ngram_min = 1;
    cfg.ngram_max = 1;
    cfg.max_df = 0.5;
    cfg.min_df = 0.3;
    const VocabularyModel vm = fit_vocabularies(corpus, cfg);
    std::map<std::string, int> df;
    for (const auto& d : docs) {
      for (const auto& t : std::set<std::string>(d.begin(), d.end())) ++df[t];
    }
    for (const auto& [term, count] : df) {
      const bool keep = count >= 0.3 * 4 && count <= 0.5 * 4;
      const bool kept = std::binary_search(vm.word_terms.begin(), vm.word_terms.end(), term);
      CAPTURE(term);
      CHECK(kept == keep);
    }
    CHECK(vm.word_terms == Strings{"y"});
  }

  TEST_CASE("BOW lists are exclusive and frequency ordered") {
    std::vector<ProcessedSegment> corpus = {
        labeled({"mucho", "cuidar", "caer"}, Emotion::Precaution),
        labeled({"mucho", "cuidar"}, Emotion::Precaution),
        labeled({"caer", "hoy"}, Emotion::Neutral),
        labeled({"vez", "NUMBER", "subir"}, Emotion::Opportunity),
    };
    const VocabularyModel vm = fit_vocabularies(corpus, {});
    std::map<std::string, std::set<int>> owners;
    for (const auto& p : corpus) {
      for (const auto& t : word_ngrams(p.tokens, 1, 2)) owners[t].insert(index_of(*p.label));
    }
    for (int e = 0; e < 3; ++e) {
      for (const std::string& t : vm.bow[e]) {
        CAPTURE(t);
        CHECK(owners[t] == std::set<int>{e});
      }
    }
    CHECK(vm.bow[0] == Strings{"cuidar", "mucho", "mucho cuidar", "cuidar caer"});
    CHECK(vm.bow[1] == Strings{"caer hoy", "hoy"});
    CHECK(std::find(vm.bow[2].begin(), vm.bow[2].end(), "vez NUMBER") != vm.bow[2].end());
  }

  TEST_CASE("BOW counters follow the n-gram columns") {
    VocabularyModel vm;
    vm.bow[index_of(Emotion::Precaution)] = {"mucho cuidar", "cuidar"};
    vm.rebuild();
    const ProcessedSegment p = labeled({"mucho", "cuidar"}, Emotion::Precaution);
    const FeatureVector fv = vectorize(p, vm, {}, false);
    REQUIRE(fv.sparse.size() == 1);
    CHECK(fv.sparse[0] == SparseEntry{static_cast<std::uint32_t>(vm.ngram_dim()), 2});
    CHECK(vm.output_dim() == vm.ngram_dim() + 3);
  }

  TEST_CASE("selection renumbers n-gram columns densely") {
    std::vector<ProcessedSegment> corpus = {labeled({"aa", "bb"}, Emotion::Neutral),
                                            labeled({"cc"}, Emotion::Precaution)};
    VectorizerConfig cfg;
    cfg.ngram_min = 1;
    cfg.ngram_max = 1;
    cfg.max_df = 1.0;
    cfg.min_df = 0.0;
    cfg.use_bow = false;
    VocabularyModel vm = fit_vocabularies(corpus, cfg);
    const std::size_t full = vm.ngram_dim();
    vm.set_selection({0, 2});
    CHECK(vm.output_dim() == 2);
    CHECK(vm.output_column(0) == 0u);
    CHECK_FALSE(vm.output_column(1).has_value());
    CHECK(vm.output_column(2) == 1u);
    CHECK(vm.ngram_dim() == full);
  }

  TEST_CASE("vocabulary JSON round trip") {
    std::vector<ProcessedSegment> corpus = {
        labeled({"mucho", "cuidar"}, Emotion::Precaution),
        labeled({"vez", "NUMBER"}, Emotion::Opportunity),
        labeled({"hoy", "bolsa"}, Emotion::Neutral),
    };
    VocabularyModel vm = fit_vocabularies(corpus, {});
    vm.set_selection({1, 3, 5});
    const VocabularyModel back = VocabularyModel::from_json(vm.to_json());
    CHECK(back.to_json() == vm.to_json());
    for (const auto& p : corpus) {
      CHECK(to_json(vectorize(p, back, {}, true)) == to_json(vectorize(p, vm, {}, true)));
    }
  }

  TEST_CASE("numeric features on short posts") {
    const LexiconSet& lx = sample_lexicons();
    auto p = processed("BBVA cae -3,5% y pierde 2 euros ¿y ahora? ¡no!", "BBVA");
    auto x = extract_numeric(p, p.pre_clean_text, lx);
    CHECK(x[kNegNum] == 0);
    CHECK(x[kPosNum] == 1);
    CHECK(x[kTotalNum] == 1);
    CHECK(x[kNegPerc] == 1);
    CHECK(x[kTotalPerc] == 1);
    CHECK(x[kInterrogation] == 2);
    CHECK(x[kExclamation] == 2);
    CHECK(x[kAdverbsNeg] == 1);
    CHECK(x[kLenTweet] == static_cast<int>(p.raw_len));

    p = processed("Telefónica anuncia una OPA y sube el PER", "TEF");
    x = extract_numeric(p, p.pre_clean_text, lx);
    CHECK(x[kFinAbbr] == 2);
  }

  TEST_CASE("working days") {
    const std::set<sys_days> holidays = {day(2020, 1, 6)};
    CHECK_FALSE(is_working_day(day(2020, 1, 4), {}));
    CHECK(is_working_day(day(2020, 1, 6), {}));
    CHECK_FALSE(is_working_day(day(2020, 1, 6), holidays));
    CHECK(next_working_day(day(2020, 1, 3), holidays) == day(2020, 1, 7));
    CHECK(previous_working_day(day(2020, 1, 7), holidays) == day(2020, 1, 3));
  }

  TEST_CASE("trend compares the working days around the post") {
    PriceSeries prices;
    prices.add("IBEX35", day(2019, 7, 29), 9310.5);
    prices.add("IBEX35", day(2019, 7, 31), 9080.2);
    prices.add("IBEX35", day(2020, 6, 4), 7580.0);
    prices.add("IBEX35", day(2020, 6, 8), 7800.1);
    CHECK_FALSE(compute_trend("IBEX35", noon(2019, 7, 30), prices));
    // Friday: Thursday against the following Monday.
    CHECK(compute_trend("IBEX35", noon(2020, 6, 5), prices));
    // Weekend posts: Friday against Monday.
    prices.add("IBEX35", day(2020, 6, 5), 7900.0);
    CHECK_FALSE(compute_trend("IBEX35", noon(2020, 6, 6), prices));
    CHECK_FALSE(compute_trend("IBEX35", noon(2020, 6, 7), prices));
    CHECK_THROWS_AS(compute_trend("IBEX35", noon(2020, 6, 4), prices), TrendUnavailable);
    CHECK_THROWS_AS(compute_trend("BBVA", noon(2019, 7, 30), prices), TrendUnavailable);
  }

  TEST_CASE("equal closes read as downward") {
    PriceSeries prices;
    prices.add("SAN", day(2020, 3, 2), 3.0);
    prices.add("SAN", day(2020, 3, 4), 3.0);
    CHECK_FALSE(compute_trend("SAN", noon(2020, 3, 3), prices));
  }

  TEST_CASE("price CSV loading") {
    const auto dir = test::scratch_dir("prices");
    test::write_file(dir / "p.csv", "ticker,date,close\nBBVA,2020-01-02,5.1\nBBVA,2020-01-03,5.3\n");
    const PriceSeries ps = load_prices(dir / "p.csv");
    CHECK(ps.size() == 2);
    CHECK(ps.close("BBVA", day(2020, 1, 3)) == doctest::Approx(5.3));
    test::write_file(dir / "bad.csv", "ticker,date,close\nBBVA,2020-13-02,5.1\n");
    CHECK_THROWS(load_prices(dir / "bad.csv"));
  }

  TEST_CASE("vectorization is deterministic") {
    const auto stream = test::planted_stream(3, {.instances = 300});
    std::vector<ProcessedSegment> corpus;
    for (const auto& s : stream) corpus.push_back(s.processed);
    const VocabularyModel a = fit_vocabularies(corpus, {});
    const VocabularyModel b = fit_vocabularies(corpus, {});
    CHECK(a.to_json() == b.to_json());
    for (std::size_t i = 0; i < 20; ++i) {
      const FeatureVector fa = vectorize(stream[i].processed, a, stream[i].numeric, true);
      CHECK(std::is_sorted(fa.sparse.begin(), fa.sparse.end()));
      CHECK(to_json(fa) == to_json(vectorize(stream[i].processed, b, stream[i].numeric, true)));
    }
  }
}
