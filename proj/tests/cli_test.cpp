#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "pipeline.hpp"

namespace {

const std::string kData = SATCAP_TEST_DATA_DIR;
using pipeline::run;

TEST(Cli, HelpForEverySubcommand) {
  for (std::vector<std::string> args :
       {std::vector<std::string>{"--help"}, {"ingest", "--help"}, {"validate", "--help"}, {"stats", "--help"},
        {"readability", "--help"}, {"bleu", "--help"}, {"augment", "--help"}, {"augment", "correct", "--help"},
        {"augment", "synonym", "--help"}, {"augment", "backtranslate", "--help"}, {"score-confusion", "--help"},
        {"index", "--help"}, {"index", "build", "--help"}, {"index", "query", "--help"}}) {
    auto r = run(args);
    EXPECT_EQ(r.code, 0) << args.front();
    EXPECT_NE(r.out.find("--"), std::string::npos);
  }
  EXPECT_NE(run({"stats", "--help"}).out.find("jsonl"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"stats", "--captions", kData + "/captions_3x5.jsonl", "--bogus"}).code, 2);
  EXPECT_EQ(run({"augment", "synonym", "--captions", kData + "/captions_3x5.jsonl", "--thesaurus",
                 kData + "/thesaurus.tsv"}).code,
            2);  // seed is mandatory
  auto missing = run({"stats", "--captions", kData + "/does_not_exist.jsonl"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("error:"), std::string::npos);
  EXPECT_EQ(run({"stats", "--captions", kData + "/empty.jsonl"}).code, 2);
}

TEST(Cli, IngestRsicdToJsonl) {
  auto r = run({"ingest", "--captions", kData + "/rsicd_small.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto first = nlohmann::json::parse(r.out.substr(0, r.out.find('\n')));
  EXPECT_EQ(first["image_id"], "airport_1.jpg");
}

TEST(Cli, ValidateStrictExitsOneOnFindings) {
  auto dir = pipeline::scratch("cli_validate");
  {
    std::ofstream f(dir / "short.jsonl");
    f << R"({"image_id":"x","captions":["one caption"]})" << '\n';
  }
  auto lenient = run({"validate", "--captions", (dir / "short.jsonl").string()});
  EXPECT_EQ(lenient.code, 0);
  auto strict = run({"validate", "--strict", "--captions", (dir / "short.jsonl").string()});
  EXPECT_EQ(strict.code, 1);
  auto j = nlohmann::json::parse(strict.out);
  EXPECT_EQ(j["findings"].size(), 1u);
  EXPECT_EQ(run({"validate", "--strict", "--captions", kData + "/captions_3x5.jsonl"}).code, 0);
}

TEST(Cli, StatsJsonAndCsv) {
  auto dir = pipeline::scratch("cli_stats");
  auto r = run({"stats", "--captions", kData + "/captions_3x5.jsonl", "--top-k", "3", "--top-k", "10", "--csv",
                (dir / "f.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["total_captions"], 15);
  EXPECT_EQ(pipeline::read_file(dir / "f.csv").rfind("rank,token,count,cumulative_fraction\n", 0), 0u);
}

TEST(Cli, ReadabilityCompareAndTable) {
  auto r = run({"readability", "--captions", kData + "/captions_3x5.jsonl", "--compare", kData + "/rsicd_small.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["columns"], (nlohmann::json{"captions_3x5", "rsicd_small"}));
  EXPECT_EQ(j["rows"]["Sentences"].size(), 2u);
  auto t = run({"readability", "--table", "--captions", kData + "/captions_3x5.jsonl"});
  EXPECT_NE(t.out.find("Flesch reading ease"), std::string::npos);
}

TEST(Cli, BleuAgainstReferences) {
  auto dir = pipeline::scratch("cli_bleu");
  auto r = run({"bleu", "--predictions", kData + "/predictions_3.jsonl", "--references", kData + "/captions_3x5.jsonl",
                "--per-image", (dir / "per.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_GT(j["bleu1"].get<double>(), 0.5);
  EXPECT_LE(j["bleu4"].get<double>(), j["bleu1"].get<double>());
  EXPECT_EQ(pipeline::read_file(dir / "per.csv").rfind("image_id,bleu1", 0), 0u);
  // airport_1 prediction is verbatim a reference caption
  EXPECT_NE(pipeline::read_file(dir / "per.csv").find("airport_1,1.0,1.0,1.0,1.0,1.0,"), std::string::npos);
}

TEST(Cli, ScoreConfusionWritesExports) {
  auto dir = pipeline::scratch("cli_confusion");
  {
    std::ofstream f(dir / "labels.jsonl");
    f << R"({"image_id":"airport_1","scene":"airport"})" << '\n'
      << R"({"image_id":"beach_7","scene":"beach"})" << '\n'
      << R"({"image_id":"river_3","scene":"river"})" << '\n';
  }
  auto r = run({"score-confusion", "--predictions", kData + "/predictions_3.jsonl", "--labels",
                (dir / "labels.jsonl").string(), "--scenes", kData + "/scenes.tsv", "--attributes",
                kData + "/attributes.txt", "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["diagonal_accuracy"], 1.0);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "confusion_matrix.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "attribute_table.csv"));
  EXPECT_EQ(pipeline::read_file(dir / "out" / "confusion.json"), r.out);
}

TEST(Cli, IndexBuildAndQuery) {
  auto dir = pipeline::scratch("cli_index");
  auto idx = (dir / "idx.json").string();
  ASSERT_EQ(run({"index", "build", "--captions", kData + "/captions_3x5.jsonl", "--out", idx}).code, 0);
  auto q = run({"index", "query", "--index", idx, "river", "bridge"});
  EXPECT_EQ(q.code, 0);
  EXPECT_EQ(q.out, "river_3\n");
  EXPECT_EQ(run({"index", "query", "--index", idx, "..."}).code, 2);
  EXPECT_EQ(run({"index", "build", "--out", idx}).code, 2);
}

TEST(Cli, BacktranslateNeedsOneTranslator) {
  EXPECT_EQ(run({"augment", "backtranslate", "--captions", kData + "/captions_3x5.jsonl"}).code, 2);
  auto r = run({"augment", "backtranslate", "--mock-identity", "--captions", kData + "/captions_3x5.jsonl"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, run({"ingest", "--captions", kData + "/captions_3x5.jsonl"}).out);
  auto m = run({"augment", "backtranslate", "--mock", "--captions", kData + "/captions_3x5.jsonl"});
  EXPECT_NE(m.out.find("aircraft"), std::string::npos);
}

TEST(Cli, PipelineIsDeterministic) {
  auto a = pipeline::full_run(kData, pipeline::scratch("cli_pipe_a"));
  auto b = pipeline::full_run(kData, pipeline::scratch("cli_pipe_b"));
  ASSERT_TRUE(a.contains("readability.json")) << a.begin()->first << ": " << a.begin()->second;
  EXPECT_EQ(a, b);
  auto syn = nlohmann::json::parse(a["synonym_log.json"]);
  EXPECT_GT(syn["captions_after"].get<int>(), syn["captions_before"].get<int>());
}

}  // namespace
