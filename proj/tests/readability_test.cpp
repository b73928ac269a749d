#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <string>

#include "generators.hpp"
#include "oracles.hpp"
#include "satcap/readability.hpp"

namespace satcap {
namespace {

Corpus captions(std::vector<std::string> caps) {
  std::vector<ImageRecord> recs;
  for (std::size_t i = 0; i < caps.size(); ++i) {
    auto id = "i" + std::to_string(i);
    recs.push_back({id, Split::unassigned, std::nullopt, {{id, caps[i], {}}}});
  }
  return Corpus(std::move(recs), "t");
}

TEST(Syllables, FrozenFixtures) {
  EXPECT_EQ(count_syllables("tree"), 1u);
  EXPECT_EQ(count_syllables("a"), 1u);
  // frozen from the regex vowel-group oracle: "eau", "i", "u"
  EXPECT_EQ(oracle::syllables("beautiful"), 3u);
  EXPECT_EQ(count_syllables("beautiful"), 3u);
  EXPECT_EQ(count_syllables("table"), 2u);
  EXPECT_EQ(count_syllables("whale"), 1u);
  EXPECT_EQ(count_syllables("airport"), 2u);
  EXPECT_EQ(count_syllables("residential"), 4u);
  EXPECT_EQ(count_syllables("12"), 1u);
}

TEST(SyllablesProperty, AgreesWithOracleAndFloorsAtOne) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> len(1, 12), letter(0, 25);
  for (int i = 0; i < 5000; ++i) {
    std::string w(static_cast<std::size_t>(len(rng)), 'a');
    for (auto& c : w) c = static_cast<char>('a' + letter(rng));
    const auto n = count_syllables(w);
    ASSERT_GE(n, 1u);
    ASSERT_EQ(n, oracle::syllables(w)) << w;
  }
}

TEST(Aggregates, TableFourFogColumns) {
  EXPECT_NEAR(report_from_aggregates(9.62, 1.42, 7.70).fog, 6.93, 0.01);
  EXPECT_NEAR(report_from_aggregates(10.25, 1.40, 8.07).fog, 7.33, 0.01);
  EXPECT_NEAR(report_from_aggregates(10.96, 1.48, 10.39).fog, 8.54, 0.01);
}

TEST(Aggregates, RoundedRatiosGiveKnownFkAndFlesch) {
  auto r = report_from_aggregates(9.62, 1.42, 7.70);
  EXPECT_NEAR(r.fk, 4.92, 0.005);
  EXPECT_NEAR(r.flesch, 76.94, 0.005);
}

TEST(Aggregates, UnitPoint) {
  auto r = report_from_aggregates(1.0, 1.0, 0.0);
  EXPECT_DOUBLE_EQ(r.fog, 0.4);
  EXPECT_NEAR(r.flesch, 121.22, 1e-9);
  EXPECT_NEAR(r.fk, -3.40, 1e-9);
  EXPECT_THROW(report_from_aggregates(0.0, 1.0, 0.0), DegenerateInputError);
}

TEST(Report, SingleShortCaption) {
  auto r = report(captions({"a sea"}));
  EXPECT_EQ(r.words, 2u);
  EXPECT_EQ(r.sentences, 1u);
  EXPECT_EQ(r.syllables, 2u);
  EXPECT_EQ(r.complex_words, 0u);
  EXPECT_EQ(r.characters, 4u);
  EXPECT_DOUBLE_EQ(r.fog, 0.8);
  EXPECT_NEAR(r.flesch, 206.835 - 1.015 * 2 - 84.6, 1e-9);
  EXPECT_NEAR(r.fk, 0.39 * 2 + 11.8 - 15.59, 1e-9);
}

TEST(Report, CaptionWithTerminatorsIsSeveralSentences) {
  auto r = report(captions({"a beach. a desert.", "many residential buildings"}));
  EXPECT_EQ(r.sentences, 3u);
  EXPECT_EQ(r.words, 7u);
  EXPECT_EQ(r.unique_words, 6u);
  EXPECT_EQ(r.complex_words, 1u);  // residential
}

TEST(Report, DegenerateInput) {
  EXPECT_THROW(report(captions({"...", "!"})), DegenerateInputError);
  EXPECT_THROW(report(Corpus({}, "t")), DegenerateInputError);
}

TEST(Report, TableLayout) {
  std::ostringstream os;
  auto r = report(captions({"a sea"}));
  write_table({{"left", r}, {"right", r}}, os);
  const auto text = os.str();
  EXPECT_NE(text.find("Fog grade level"), std::string::npos);
  EXPECT_NE(text.find("Flesch-Kincaid level"), std::string::npos);
  EXPECT_NE(text.find("left"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 11);
}

TEST(ReportProperty, ConsistencyAndMonotonicity) {
  gen::Rng rng(11);
  const std::vector<std::string> words{"a", "residential", "area", "beautiful", "airport", "sea.", "buildings", "many"};
  for (int i = 0; i < 200; ++i) {
    auto c = gen::corpus(rng, gen::uniform(rng, 1, 10), words);
    auto r = report(c);
    ASSERT_NEAR(r.words_per_sentence * static_cast<double>(r.sentences), static_cast<double>(r.words), 1e-9);
    ASSERT_EQ(r.fog, 0.4 * (r.words_per_sentence + r.complex_pct));
    ASSERT_GE(r.complex_pct, 0.0);
    ASSERT_LE(r.complex_pct, 100.0);
    ASSERT_GE(r.syllables_per_word, 1.0);
    ASSERT_EQ(report(c, 4).fk, r.fk);

    auto agg = report_from_aggregates(r.words_per_sentence, r.syllables_per_word, r.complex_pct);
    ASSERT_EQ(agg.fog, r.fog);
    ASSERT_NEAR(agg.flesch, r.flesch, 1e-9);
    ASSERT_NEAR(agg.fk, r.fk, 1e-9);

    // appending a monosyllabic word to every caption
    std::vector<ImageRecord> recs = c.records();
    for (auto& rec : recs)
      for (auto& cap : rec.captions) cap.raw += " sun";
    auto r2 = report(Corpus(recs, "t"));
    if (r.syllables_per_word > 1.0) {
      ASSERT_LT(r2.syllables_per_word, r.syllables_per_word);
    }
    ASSERT_GE(r2.syllables_per_word, 1.0);
    ASSERT_LE(r2.complex_pct, r.complex_pct);
  }
}

}  // namespace
}  // namespace satcap
