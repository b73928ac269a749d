#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "generators.hpp"
#include "oracles.hpp"
#include "satcap/discover.hpp"

namespace satcap {
namespace {

const std::string kData = SATCAP_TEST_DATA_DIR;

InvertedIndex small_index() {
  return build_index(std::map<std::string, std::string>{
      {"airport_1", "many planes are parked in an airport"},
      {"beach_7", "a white beach with waves near the sea"},
      {"river_3", "a river goes through the green forest near a bridge"},
      {"river_9", "a bridge is over a river"}});
}

TEST(Query, ConjunctiveLookups) {
  auto idx = small_index();
  EXPECT_EQ(idx.doc_count(), 4u);
  EXPECT_EQ(query(idx, {"river", "bridge"}), (std::vector<std::string>{"river_3", "river_9"}));
  EXPECT_EQ(query(idx, {"bridge", "green"}), std::vector<std::string>{"river_3"});
  EXPECT_EQ(query(idx, {"Near"}), (std::vector<std::string>{"beach_7", "river_3"}));
  EXPECT_TRUE(query(idx, {"river", "planes"}).empty());
  EXPECT_TRUE(query(idx, {"volcano"}).empty());
  EXPECT_EQ(query(idx, {"river", "river,"}), query(idx, {"river"}));
  EXPECT_THROW(query(idx, {}), QueryError);
  EXPECT_THROW(query(idx, {"...", " "}), QueryError);
}

TEST(Query, CorpusDocumentsPoolCaptions) {
  auto corpus = ingest_captions(kData + "/captions_3x5.jsonl", CaptionFormat::jsonl);
  auto idx = build_index(corpus);
  EXPECT_EQ(idx.doc_count(), 3u);
  EXPECT_EQ(query(idx, {"bridge", "trees"}), std::vector<std::string>{"river_3"});
  EXPECT_EQ(query(idx, {"a"}), (std::vector<std::string>{"airport_1", "beach_7", "river_3"}));
}

TEST(Query, EmptyIndex) {
  auto idx = build_index(std::map<std::string, std::string>{});
  EXPECT_EQ(idx.doc_count(), 0u);
  EXPECT_TRUE(query(idx, {"x"}).empty());
}

TEST(QueryProperty, EqualsFullScan) {
  gen::Rng rng(1000);
  auto docs = gen::index_documents(rng, 1000);
  auto idx = build_index(docs, 4);
  std::vector<std::pair<std::string, oracle::Tokens>> tokenized;
  for (const auto& [id, text] : docs) tokenized.emplace_back(id, tokenize(text).tokens);
  const auto vocab = gen::index_vocabulary();
  for (int q = 0; q < 200; ++q) {
    auto terms = gen::tokens(rng, vocab, 1, 4);
    auto got = query(idx, terms);
    ASSERT_EQ(got, oracle::scan(tokenized, terms));
    // adding a term can only narrow the result
    auto wider = terms;
    wider.pop_back();
    if (!wider.empty()) {
      auto sup = query(idx, wider);
      ASSERT_TRUE(std::includes(sup.begin(), sup.end(), got.begin(), got.end()));
    }
  }
}

TEST(IndexProperty, InputOrderAndWorkersDoNotMatter) {
  gen::Rng rng(3);
  auto docs = gen::index_documents(rng, 300);
  auto a = build_index(docs, 1);
  std::shuffle(docs.begin(), docs.end(), rng);
  auto b = build_index(docs, 7);
  EXPECT_EQ(a, b);
  std::ostringstream sa, sb;
  write_index(a, sa);
  write_index(b, sb);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Persistence, RoundTrip) {
  gen::Rng rng(12);
  auto idx = build_index(gen::index_documents(rng, 500));
  const auto path = std::filesystem::temp_directory_path() / "satcap_index_roundtrip.json";
  save_index(idx, path);
  EXPECT_EQ(load_index(path), idx);
  std::filesystem::remove(path);
}

TEST(Persistence, RejectsOtherVersions) {
  std::ostringstream os;
  write_index(small_index(), os);
  auto j = nlohmann::json::parse(os.str());
  j["version"] = kIndexFormatVersion + 1;
  std::istringstream in(j.dump());
  EXPECT_THROW(read_index(in), IncompatibleVersionError);
}

TEST(Persistence, RejectsCorruptFiles) {
  for (const auto* text : {"", "{", "[]", R"({"version":1})", R"({"version":1,"doc_count":1,"postings":{"a":["y","x"]}})",
                           R"({"version":1,"doc_count":1,"postings":{"a":["x"],"b":["y"]}})",
                           R"({"version":1,"doc_count":2,"postings":{"a":[3]}})"}) {
    std::istringstream in(text);
    EXPECT_THROW(read_index(in), FormatError) << text;
  }
}

}  // namespace
}  // namespace satcap
