#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <string>

#include "generators.hpp"
#include "oracles.hpp"
#include "satcap/augment.hpp"

namespace satcap {
namespace {

const std::string kData = SATCAP_TEST_DATA_DIR;
using Entries = std::map<std::string, std::vector<std::string>>;

Corpus one_image(std::vector<std::string> caps, std::string id = "img") {
  ImageRecord r{id, Split::train, std::nullopt, {}};
  for (auto& c : caps) r.captions.push_back({id, std::move(c), CaptionSource::human});
  return Corpus({r}, "fixture");
}

std::set<std::string> vocabulary(const Corpus& c) {
  std::set<std::string> v;
  for (const auto& rec : c.records())
    for (const auto& cap : rec.captions)
      for (auto& t : tokenize(cap.raw).tokens) v.insert(t);
  return v;
}

CorrectionRules fixture_rules() {
  return load_correction_rules(kData + "/dictionary.txt", kData + "/merge_rules.tsv", kData + "/overrides.tsv");
}

TEST(EditDistance, AgreesWithRecursiveDefinition) {
  EXPECT_EQ(edit_distance("bulding", "building"), 1u);
  EXPECT_EQ(edit_distance("ca", "ac"), 1u);
  EXPECT_EQ(edit_distance("", "abc"), 3u);
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> len(0, 6), letter(0, 3);
  for (int i = 0; i < 2000; ++i) {
    std::string a(static_cast<std::size_t>(len(rng)), 'a'), b(static_cast<std::size_t>(len(rng)), 'a');
    for (auto& c : a) c = static_cast<char>('a' + letter(rng));
    for (auto& c : b) c = static_cast<char>('a' + letter(rng));
    ASSERT_EQ(edit_distance(a, b), oracle::osa(a, b)) << a << " / " << b;
  }
}

TEST(Correct, MergesBrokenCompound) {
  CorrectionLog log;
  auto out = correct(one_image({"A beach with c shape waves."}), fixture_rules(), false, &log);
  EXPECT_EQ(out.records()[0].captions[0].raw, "a beach with c-shaped waves");
  EXPECT_EQ(log.merges, 1u);
  EXPECT_EQ(out.provenance(), "fixture-corrected");
}

TEST(Correct, SpellingFixWithinDistanceOne) {
  const std::set<std::string> dict{"building", "on", "a", "beach"};
  ASSERT_TRUE(oracle::edits1("bulding").contains("building"));
  ASSERT_EQ(oracle::osa("bulding", "building"), 1u);
  CorrectionLog log;
  auto out = correct(one_image({"a bulding on a beach"}), CorrectionRules(dict, {}, {}), false, &log);
  EXPECT_EQ(out.records()[0].captions[0].raw, "a building on a beach");
  EXPECT_EQ(log.spelling_fixes, 1u);
}

TEST(Correct, TiesPreferFrequentThenLexicographic) {
  // "cat" is distance 1 from both "bat" and "hat"
  const std::set<std::string> dict{"bat", "hat"};
  auto out = correct(one_image({"cat", "hat hat", "bat"}), CorrectionRules(dict, {}, {}), false);
  EXPECT_EQ(out.records()[0].captions[0].raw, "hat");
  auto out2 = correct(one_image({"cat"}), CorrectionRules(dict, {}, {}), false);
  EXPECT_EQ(out2.records()[0].captions[0].raw, "bat");
}

TEST(Correct, FarTokensAreLoggedAndKept) {
  CorrectionLog log;
  auto out = correct(one_image({"a xylophone"}), CorrectionRules({"a"}, {}, {}), false, &log);
  EXPECT_EQ(out.records()[0].captions[0].raw, "a xylophone");
  EXPECT_EQ(log.unresolved.at("xylophone"), 1u);
}

TEST(Correct, PruneKeepsFirstOfIdenticalCaptions) {
  CorrectionLog log;
  auto out = correct(one_image(std::vector<std::string>(5, "many planes")), CorrectionRules({"many", "planes"}, {}, {}),
                     true, &log);
  EXPECT_EQ(out.caption_count(), 1u);
  EXPECT_EQ(log.pruned_captions, 4u);
}

TEST(Correct, PruneIsCorpusWideAndDropsEmptiedRecords) {
  ImageRecord a{"a", Split::train, std::nullopt, {{"a", "a sea", {}}}};
  ImageRecord b{"b", Split::train, std::nullopt, {{"b", "A sea.", {}}}};
  CorrectionLog log;
  auto out = correct(Corpus({a, b}, "x"), CorrectionRules({"a", "sea"}, {}, {}), true, &log);
  EXPECT_EQ(out.size(), 1u);
  EXPECT_EQ(log.dropped_records, std::vector<std::string>{"b"});
}

TEST(Correct, EmptyDictionaryIsConfigError) {
  EXPECT_THROW(correct(one_image({"x"}), CorrectionRules(), false), ConfigError);
}

TEST(Correct, OverrideCycleIsConfigError) {
  CorrectionRules rules({"a"}, {}, {{"x", "y"}, {"y", "x"}});
  EXPECT_THROW(correct(one_image({"x"}), rules, false), ConfigError);
}

TEST(Correct, FixtureIsIdempotentAndValid) {
  auto corpus = ingest_captions(kData + "/captions_3x5.jsonl", CaptionFormat::jsonl);
  const auto rules = fixture_rules();
  for (bool prune : {false, true}) {
    auto once = correct(corpus, rules, prune);
    auto twice = correct(once, rules, prune);
    EXPECT_EQ(once, twice);
    EXPECT_EQ(twice.provenance(), once.provenance());
    EXPECT_LE(once.caption_count(), corpus.caption_count());
    EXPECT_TRUE(validate(once, false).empty());
  }
  auto fixed = correct(corpus, rules, false);
  EXPECT_EQ(fixed.find("beach_7")->captions[3].raw, "several people on a building beach");
  EXPECT_EQ(fixed.find("river_3")->captions[3].raw, "a river with a t-road beside it");
}

TEST(CorrectProperty, IdempotentOnRandomCorpora) {
  gen::Rng rng(41);
  const std::vector<std::string> words{"a", "sea", "se", "beach", "baech", "c", "shape", "trees", "tres", "12", "x"};
  CorrectionRules rules({"a", "sea", "beach", "trees", "shape"}, {{"c", "shape", "c-shaped"}}, {{"tres", "trees"}});
  for (int i = 0; i < 100; ++i) {
    auto c = gen::corpus(rng, gen::uniform(rng, 1, 8), words);
    for (bool prune : {false, true}) {
      auto once = correct(c, rules, prune);
      ASSERT_EQ(correct(once, rules, prune), once);
      ASSERT_TRUE(validate(once, false).empty());
    }
  }
}

TEST(Synonym, SingleChoiceIsDeterministic) {
  Thesaurus thes(Entries{{"several", {"some"}}});
  auto out = synonym_expand(one_image({"several buildings"}), thes, 1, 1);
  ASSERT_EQ(out.caption_count(), 2u);
  EXPECT_EQ(out.records()[0].captions[1].raw, "some buildings");
  EXPECT_EQ(out.records()[0].captions[1].source, CaptionSource::augmented);
  EXPECT_EQ(out.provenance(), "fixture-synonym");
}

TEST(Synonym, UncoveredCaptionGainsNothing) {
  Thesaurus thes(Entries{{"several", {"some"}}});
  auto out = synonym_expand(one_image({"a river"}), thes, 2, 1);
  EXPECT_EQ(out.caption_count(), 1u);
}

TEST(Synonym, Errors) {
  EXPECT_THROW(synonym_expand(one_image({"a"}), Thesaurus(Entries{}), 1, 1), ConfigError);
  EXPECT_THROW(synonym_expand(one_image({"a"}), Thesaurus(Entries{{"a", {"b"}}}), 0, 1), ConfigError);
  EXPECT_THROW(Thesaurus(Entries{{"a", {"a"}}}), ConfigError);
  EXPECT_THROW(Thesaurus(Entries{{"a", {}}}), ConfigError);
}

TEST(Synonym, FixtureGrowsSentencesAndVocabulary) {
  auto corpus = ingest_captions(kData + "/captions_3x5.jsonl", CaptionFormat::jsonl);
  auto thes = load_thesaurus(kData + "/thesaurus.tsv");
  auto a = synonym_expand(corpus, thes, 2, 7);
  auto b = synonym_expand(corpus, thes, 2, 7);
  EXPECT_EQ(a, b);
  std::ostringstream sa, sb;
  write_captions_jsonl(a, sa);
  write_captions_jsonl(b, sb);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_GT(a.caption_count(), corpus.caption_count());
  auto before = vocabulary(corpus), after = vocabulary(a);
  EXPECT_GT(after.size(), before.size());
  EXPECT_TRUE(std::includes(after.begin(), after.end(), before.begin(), before.end()));
  EXPECT_TRUE(validate(a, false).empty());
}

TEST(SynonymProperty, SeedDeterminismAndSuperset) {
  gen::Rng rng(5);
  const std::vector<std::string> words{"a", "beach", "several", "trees", "near", "river"};
  Thesaurus thes(Entries{{"several", {"some", "various"}}, {"trees", {"woods"}}, {"beach", {"shore", "coast"}}});
  bool differed = false;
  for (int i = 0; i < 100; ++i) {
    auto c = gen::corpus(rng, gen::uniform(rng, 1, 6), words);
    const auto seed = rng();
    auto a = synonym_expand(c, thes, 2, seed);
    ASSERT_EQ(a, synonym_expand(c, thes, 2, seed));
    differed = differed || !(a == synonym_expand(c, thes, 2, seed + 1));
    ASSERT_GE(a.caption_count(), c.caption_count());
    auto before = vocabulary(c), after = vocabulary(a);
    ASSERT_TRUE(std::includes(after.begin(), after.end(), before.begin(), before.end()));
    ASSERT_TRUE(validate(a, false).empty());
  }
  EXPECT_TRUE(differed);
}

TEST(Chain, Validation) {
  MockTranslator mock;
  EXPECT_EQ(TranslationChain(TranslationChain::default_hops(), mock).languages(),
            (std::vector<std::string>{"en", "es", "de", "fr", "en"}));
  EXPECT_THROW(TranslationChain({}, mock), ConfigError);
  EXPECT_THROW(TranslationChain({"es", "es"}, mock), ConfigError);
  EXPECT_THROW(TranslationChain({"EN"}, mock), ConfigError);
  EXPECT_THROW(TranslationChain({" "}, mock), ConfigError);
}

TEST(BackTranslate, IdentityMockIsFixedPoint) {
  auto corpus = ingest_captions(kData + "/captions_3x5.jsonl", CaptionFormat::jsonl);
  MockTranslator mock;
  BackTranslateLog log;
  auto out = back_translate(corpus, TranslationChain(TranslationChain::default_hops(), mock), {}, &log);
  EXPECT_EQ(out, corpus);
  EXPECT_EQ(log.variants_added, 0u);
  EXPECT_EQ(out.provenance(), corpus.provenance() + "-backtranslated");
  EXPECT_GT(mock.calls(), 0u);
}

TEST(BackTranslate, KnownRowsUnderDefaultMock) {
  auto mock = MockTranslator::with_default_rewrites();
  TranslationChain chain(TranslationChain::default_hops(), mock);
  EXPECT_EQ(chain.run("Many trees behind a school bus"), "Many trees behind a school bus");
  EXPECT_EQ(chain.run("Island next to crashing waves"), "Island with waves");
  EXPECT_EQ(chain.run("many planes are parked in an airport."), "many aircraft are parked at an airport.");

  auto out = back_translate(one_image({"Many trees behind a school bus", "Island next to crashing waves"}), chain);
  ASSERT_EQ(out.caption_count(), 3u);
  EXPECT_EQ(out.records()[0].captions[2].raw, "Island with waves");
}

class FlakyTranslator : public Translator {
 public:
  std::string translate(const std::string& text, const std::string&, const std::string& target) override {
    std::lock_guard lock(mu_);
    if (text.find("broken") != std::string::npos) throw TranslationError("no route");
    if (text.find("busy") != std::string::npos && busy_failures_-- > 0) throw TransientTranslationError("busy");
    return target == "en" ? text + " again" : text;
  }
  int busy_failures_ = 2;

 private:
  std::mutex mu_;
};

TEST(BackTranslate, PerCaptionFailuresAreLogged) {
  FlakyTranslator t;
  TranslationChain chain({"es"}, t);
  BackTranslateOptions opt;
  opt.initial_backoff = std::chrono::milliseconds(0);
  opt.concurrency = 3;
  BackTranslateLog log;
  auto out = back_translate(one_image({"a broken one", "a busy one", "a fine one"}), chain, opt, &log);
  ASSERT_EQ(log.failures.size(), 1u);
  EXPECT_EQ(log.failures[0].caption_index, 0u);
  EXPECT_EQ(out.caption_count(), 5u);
  EXPECT_EQ(out.records()[0].captions[3].raw, "a busy one again");
}

TEST(BackTranslate, RetriesExhaustAndAllFailedThrows) {
  FlakyTranslator t;
  t.busy_failures_ = 10;
  BackTranslateOptions opt;
  opt.initial_backoff = std::chrono::milliseconds(0);
  opt.max_retries = 2;
  TranslationChain chain({"es"}, t);
  EXPECT_THROW(back_translate(one_image({"busy", "broken"}), chain, opt), OperationError);
}

}  // namespace
}  // namespace satcap
