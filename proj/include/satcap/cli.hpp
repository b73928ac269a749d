#pragma once

// Command-line front end. `run` is the whole program minus process setup so
// tests can drive it in-process.
//
// Exit codes: 0 success, 1 findings under --strict, 2 usage, configuration
// or parse errors.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "satcap/augment.hpp"
#include "satcap/bleu.hpp"
#include "satcap/confusion.hpp"
#include "satcap/corpus.hpp"
#include "satcap/discover.hpp"
#include "satcap/error.hpp"
#include "satcap/http_translator.hpp"
#include "satcap/readability.hpp"
#include "satcap/vocabstats.hpp"

namespace satcap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFindings = 1;
inline constexpr int kExitError = 2;

inline constexpr const char* kApiKeyEnv = "SATCAP_TRANSLATE_API_KEY";

namespace schema {
inline constexpr const char* kCaptions =
    "Caption input (--format, inferred from the extension when omitted):\n"
    "  jsonl       one object per line: {\"image_id\": str, \"split\"?: str, \"scene\"?: str, \"captions\": [str, ...]}\n"
    "  rsicd_json  {\"images\": [{\"filename\": str, \"split\": str, \"sentences\": [{\"raw\": str}, ...], \"class\"?: str}]}\n";
inline constexpr const char* kPredictions = "Predictions: JSONL {\"image_id\": str, \"caption\": str} per line.\n";
inline constexpr const char* kLabels = "Labels: JSONL {\"image_id\": str, \"scene\": str, \"objects\": [str, ...]} per line.\n";
inline constexpr const char* kScenes = "Scene keywords: TSV scene<TAB>trigger1,trigger2,... (no triggers = the scene name).\n";
inline constexpr const char* kAttributes = "Attributes: one token per line.\n";
inline constexpr const char* kRules =
    "Dictionary: one lower-case word per line. Merge rules: TSV 'bigram<TAB>replacement'.\n"
    "Overrides: TSV 'misspelled<TAB>replacement'. Thesaurus: TSV 'word<TAB>syn1,syn2,...'.\n";
inline constexpr const char* kIndex = "Index file: JSON {\"version\": 1, \"doc_count\": N, \"postings\": {token: [ids...]}}.\n";
}  // namespace schema

struct CaptionInput {
  std::string path;
  std::string format;

  void add_to(CLI::App* app, bool required = true) {
    auto* opt = app->add_option("--captions", path, "caption corpus file");
    if (required) opt->required();
    app->add_option("--format", format, "rsicd_json | jsonl")->check(CLI::IsMember({"rsicd_json", "rsicd", "jsonl"}));
  }

  CaptionFormat resolved_format() const { return resolve(path, format); }

  static CaptionFormat resolve(const std::string& path, const std::string& format) {
    if (!format.empty()) return *parse_caption_format(format);
    return std::filesystem::path(path).extension() == ".json" ? CaptionFormat::rsicd_json : CaptionFormat::jsonl;
  }

  Corpus load(bool enforce = true) const {
    return ingest_captions(path, resolved_format(), std::nullopt, enforce);
  }
};

namespace detail {

/// Writes `text` to `path` when non-empty, else to `out`.
inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  auto f = satcap::detail::open_output(path);
  f << text;
  satcap::detail::write_or_throw(f, path);
}

inline std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

inline std::string corpus_jsonl(const Corpus& c) {
  std::ostringstream os;
  write_captions_jsonl(c, os);
  return os.str();
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (auto t = satcap::detail::trim(item); !t.empty()) out.emplace_back(t);
  return out;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"satcap: caption corpus profiling, augmentation, BLEU/readability scoring, "
               "caption confusion matrices and keyword discovery"};
  app.require_subcommand(1);
  std::size_t workers = 1;
  app.add_option("--workers", workers, "worker threads for parallel stages")->check(CLI::PositiveNumber);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load a caption corpus and write it back as normalized JSONL");
  ingest->footer(schema::kCaptions);
  CaptionInput ingest_in;
  std::string ingest_out;
  ingest_in.add_to(ingest);
  ingest->add_option("--out", ingest_out, "output JSONL (default stdout)");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Report data-model findings for a caption corpus");
  validate_cmd->footer(schema::kCaptions);
  CaptionInput validate_in;
  bool strict = false;
  std::string validate_out;
  validate_in.add_to(validate_cmd);
  validate_cmd->add_flag("--strict", strict, "require exactly five captions per image; findings exit 1");
  validate_cmd->add_option("--out", validate_out, "output JSON (default stdout)");

  // stats
  auto* stats = app.add_subcommand("stats", "Vocabulary profile: frequencies, coverage, hapax and duplicates");
  stats->footer(schema::kCaptions);
  CaptionInput stats_in;
  std::vector<std::size_t> top_k{30};
  std::string stats_csv, stats_out;
  stats_in.add_to(stats);
  stats->add_option("--top-k", top_k, "coverage cut-offs")->check(CLI::PositiveNumber)->capture_default_str();
  stats->add_option("--csv", stats_csv, "write rank,token,count,cumulative_fraction CSV");
  stats->add_option("--out", stats_out, "output JSON (default stdout)");

  // readability
  auto* read_cmd = app.add_subcommand("readability", "Readability metric panel, optionally side by side");
  read_cmd->footer(schema::kCaptions);
  CaptionInput read_in;
  std::vector<std::string> compare;
  bool table = false;
  std::string read_out;
  read_in.add_to(read_cmd);
  read_cmd->add_option("--compare", compare, "further corpora for additional columns");
  read_cmd->add_flag("--table", table, "print a text table instead of JSON");
  read_cmd->add_option("--out", read_out, "output file (default stdout)");

  // bleu
  auto* bleu_cmd = app.add_subcommand("bleu", "Corpus BLEU-1..4 of predictions against reference captions");
  bleu_cmd->footer(std::string(schema::kPredictions) + "References: a caption corpus, every caption a reference.\n" +
                   schema::kCaptions);
  std::string bleu_pred, bleu_refs, bleu_refs_format, bleu_per_image, bleu_out;
  bleu_cmd->add_option("--predictions", bleu_pred, "predictions JSONL")->required();
  bleu_cmd->add_option("--references", bleu_refs, "reference caption corpus")->required();
  bleu_cmd->add_option("--format", bleu_refs_format, "reference format: rsicd_json | jsonl")
      ->check(CLI::IsMember({"rsicd_json", "rsicd", "jsonl"}));
  bleu_cmd->add_option("--per-image", bleu_per_image, "write per-image sentence-level CSV");
  bleu_cmd->add_option("--out", bleu_out, "output JSON (default stdout)");

  // augment
  auto* augment = app.add_subcommand("augment", "Vocabulary strategies producing a new corpus");
  augment->require_subcommand(1);
  CaptionInput aug_in;
  std::string aug_out, aug_log;
  auto add_aug_common = [&](CLI::App* sub) {
    sub->footer(std::string(schema::kCaptions) + schema::kRules);
    aug_in.add_to(sub);
    sub->add_option("--out", aug_out, "output JSONL corpus (default stdout)");
    sub->add_option("--log", aug_log, "write a JSON log of the run");
  };

  auto* correct_cmd = augment->add_subcommand("correct", "Merge broken bigrams, apply overrides, spell-correct");
  add_aug_common(correct_cmd);
  std::string dictionary, rules, overrides;
  bool prune = false;
  correct_cmd->add_option("--dictionary", dictionary, "accepted words, one per line")->required();
  correct_cmd->add_option("--rules", rules, "merge rules TSV");
  correct_cmd->add_option("--overrides", overrides, "manual overrides TSV");
  correct_cmd->add_flag("--prune", prune, "drop captions already seen corpus-wide");

  auto* synonym_cmd = augment->add_subcommand("synonym", "Append one seeded synonym variant per distinct caption");
  add_aug_common(synonym_cmd);
  std::string thesaurus_path;
  std::uint64_t seed = 0;
  std::size_t replacements = 1;
  synonym_cmd->add_option("--thesaurus", thesaurus_path, "thesaurus TSV")->required();
  synonym_cmd->add_option("--seed", seed, "random seed (required)")->required();
  synonym_cmd->add_option("--replacements", replacements, "synonym swaps per caption")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* bt_cmd = augment->add_subcommand("backtranslate", "Round-trip captions through pivot languages");
  add_aug_common(bt_cmd);
  std::string chain = "es,de,fr", endpoint;
  bool mock = false, mock_identity = false;
  std::size_t timeout_ms = 10000, retries = 3, concurrency = 1, backoff_ms = 200;
  bt_cmd->add_option("--chain", chain, "pivot languages, comma separated")->capture_default_str();
  bt_cmd->add_flag("--mock", mock, "offline paraphrasing mock translator");
  bt_cmd->add_flag("--mock-identity", mock_identity, "offline identity translator");
  bt_cmd->add_option("--endpoint", endpoint, std::string("translation service URL; API key from $") + kApiKeyEnv);
  bt_cmd->add_option("--timeout-ms", timeout_ms, "per-request timeout")->capture_default_str();
  bt_cmd->add_option("--retries", retries, "retries on transient failures")->capture_default_str();
  bt_cmd->add_option("--backoff-ms", backoff_ms, "initial retry backoff, doubled per retry")->capture_default_str();
  bt_cmd->add_option("--concurrency", concurrency, "concurrent requests")->check(CLI::PositiveNumber)->capture_default_str();

  // score-confusion
  auto* conf_cmd = app.add_subcommand("score-confusion", "Scene-mention confusion matrix and attribute table");
  conf_cmd->footer(std::string(schema::kPredictions) + schema::kLabels + schema::kScenes + schema::kAttributes);
  std::string conf_pred, conf_labels, conf_scenes, conf_attrs, conf_out;
  bool no_fold = false;
  conf_cmd->add_option("--predictions", conf_pred, "predictions JSONL")->required();
  conf_cmd->add_option("--labels", conf_labels, "labels JSONL")->required();
  conf_cmd->add_option("--scenes", conf_scenes, "scene keyword TSV")->required();
  conf_cmd->add_option("--attributes", conf_attrs, "attribute list");
  conf_cmd->add_option("--out", conf_out, "output directory")->required();
  conf_cmd->add_flag("--no-plural-fold", no_fold, "disable trailing-s folding");

  // index
  auto* index_cmd = app.add_subcommand("index", "Build or query a caption inverted index");
  index_cmd->require_subcommand(1);
  auto* build_cmd = index_cmd->add_subcommand("build", "Build an index from captions or predictions");
  build_cmd->footer(std::string(schema::kCaptions) + schema::kPredictions + schema::kIndex);
  CaptionInput build_in;
  std::string build_pred, build_out;
  build_in.add_to(build_cmd, false);
  build_cmd->add_option("--predictions", build_pred, "index generated captions instead");
  build_cmd->add_option("--out", build_out, "index JSON")->required();
  auto* query_cmd = index_cmd->add_subcommand("query", "Conjunctive keyword query; prints one image id per line");
  query_cmd->footer(schema::kIndex);
  std::string query_index;
  std::vector<std::string> terms;
  query_cmd->add_option("--index", query_index, "index JSON")->required();
  query_cmd->add_option("terms", terms, "query terms (all must match)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitError;
  }

  try {
    if (*ingest) {
      detail::emit(detail::corpus_jsonl(ingest_in.load()), ingest_out, out);
      return kExitOk;
    }

    if (*validate_cmd) {
      auto corpus = validate_in.load(false);
      auto findings = satcap::validate(corpus, strict);
      nlohmann::ordered_json j;
      j["records"] = corpus.size();
      j["captions"] = corpus.caption_count();
      j["strict"] = strict;
      j["findings"] = findings_to_json(findings);
      detail::emit(detail::dump(j), validate_out, out);
      return strict && !findings.empty() ? kExitFindings : kExitOk;
    }

    if (*stats) {
      auto p = profile(stats_in.load(), workers);
      if (!stats_csv.empty()) frequency_export(p, stats_csv);
      detail::emit(detail::dump(to_json(p, top_k)), stats_out, out);
      return kExitOk;
    }

    if (*read_cmd) {
      std::vector<std::pair<std::string, ReadabilityReport>> columns;
      auto base = read_in.load();
      columns.emplace_back(base.provenance(), report(base, workers));
      for (const auto& path : compare) {
        auto c = ingest_captions(path, CaptionInput::resolve(path, read_in.format));
        columns.emplace_back(c.provenance(), report(c, workers));
      }
      std::string text;
      if (table) {
        std::ostringstream os;
        write_table(columns, os);
        text = os.str();
      } else if (columns.size() == 1) {
        auto j = to_json(columns.front().second);
        text = detail::dump(j);
      } else {
        nlohmann::ordered_json j;
        auto names = nlohmann::ordered_json::array();
        for (const auto& [name, r] : columns) names.push_back(name);
        j["columns"] = std::move(names);
        nlohmann::ordered_json rows;
        for (const auto& [name, r] : columns) {
          const auto col = to_json(r);
          for (const auto& [row, value] : col.items()) rows[row].push_back(value);
        }
        j["rows"] = std::move(rows);
        text = detail::dump(j);
      }
      detail::emit(text, read_out, out);
      return kExitOk;
    }

    if (*bleu_cmd) {
      auto preds = ingest_predictions(bleu_pred);
      auto refs = ingest_captions(bleu_refs, CaptionInput::resolve(bleu_refs, bleu_refs_format));
      std::vector<std::string> ids;
      std::vector<std::vector<std::string>> cands;
      std::vector<std::vector<std::vector<std::string>>> references;
      std::size_t unmatched = 0;
      for (const auto& [id, caption] : preds.entries()) {
        const auto* rec = refs.find(id);
        if (!rec) {
          ++unmatched;
          continue;
        }
        ids.push_back(id);
        cands.push_back(tokenize(caption).tokens);
        auto& r = references.emplace_back();
        for (const auto& c : rec->captions) r.push_back(tokenize(c.raw).tokens);
      }
      if (unmatched) err << "warning: " << unmatched << " prediction(s) have no reference record and were skipped\n";
      auto result = bleu_score(cands, references, workers);
      if (!bleu_per_image.empty()) {
        std::ostringstream csv;
        csv << "image_id,bleu1,bleu2,bleu3,bleu4,bp,zero_order\n";
        for (std::size_t i = 0; i < ids.size(); ++i) {
          auto s = sentence_bleu(cands[i], references[i]);
          csv << satcap::detail::csv_field(ids[i]);
          for (double b : s.bleu) csv << ',' << satcap::detail::format_fraction(b);
          csv << ',' << satcap::detail::format_fraction(s.brevity_penalty) << ','
              << (s.first_zero_order ? std::to_string(*s.first_zero_order) : std::string()) << '\n';
        }
        detail::emit(csv.str(), bleu_per_image, out);
      }
      detail::emit(detail::dump(to_json(result)), bleu_out, out);
      return kExitOk;
    }

    if (*augment) {
      auto corpus = aug_in.load();
      Corpus result;
      nlohmann::ordered_json log;
      if (*correct_cmd) {
        auto r = load_correction_rules(dictionary, rules.empty() ? std::nullopt : std::optional<std::filesystem::path>(rules),
                                       overrides.empty() ? std::nullopt : std::optional<std::filesystem::path>(overrides));
        CorrectionLog cl;
        result = correct(corpus, r, prune, &cl);
        log["merges"] = cl.merges;
        log["overrides"] = cl.overrides;
        log["spelling_fixes"] = cl.spelling_fixes;
        log["pruned_captions"] = cl.pruned_captions;
        log["dropped_records"] = cl.dropped_records;
        log["unresolved"] = cl.unresolved;
      } else if (*synonym_cmd) {
        result = synonym_expand(corpus, load_thesaurus(thesaurus_path), replacements, seed);
        log["seed"] = seed;
        log["replacements"] = replacements;
        log["captions_before"] = corpus.caption_count();
        log["captions_after"] = result.caption_count();
      } else {
        if (mock + mock_identity + !endpoint.empty() != 1)
          throw ConfigError("backtranslate needs exactly one of --mock, --mock-identity, --endpoint");
        std::optional<MockTranslator> mock_tr;
        std::optional<HttpTranslator> http_tr;
        Translator* tr = nullptr;
        if (mock) tr = &mock_tr.emplace(MockTranslator::with_default_rewrites());
        else if (mock_identity) tr = &mock_tr.emplace();
        else {
          const char* key = std::getenv(kApiKeyEnv);
          tr = &http_tr.emplace(HttpTranslatorConfig{endpoint, key ? key : "", std::chrono::milliseconds(timeout_ms)});
        }
        TranslationChain ch(detail::split_list(chain), *tr);
        BackTranslateOptions opt{concurrency, retries, std::chrono::milliseconds(backoff_ms)};
        BackTranslateLog bl;
        result = back_translate(corpus, ch, opt, &bl);
        log["chain"] = ch.languages();
        log["requests"] = bl.requests;
        log["variants_added"] = bl.variants_added;
        auto fails = nlohmann::ordered_json::array();
        for (const auto& f : bl.failures)
          fails.push_back({{"image_id", f.image_id}, {"caption_index", f.caption_index}, {"message", f.message}});
        log["failures"] = std::move(fails);
      }
      log["provenance"] = result.provenance();
      if (!aug_log.empty()) detail::emit(detail::dump(log), aug_log, out);
      detail::emit(detail::corpus_jsonl(result), aug_out, out);
      return kExitOk;
    }

    if (*conf_cmd) {
      auto preds = ingest_predictions(conf_pred);
      auto labels = ingest_labels(conf_labels);
      auto keywords = load_scene_keywords(conf_scenes);
      auto attrs = conf_attrs.empty() ? std::vector<std::string>{} : load_attribute_list(conf_attrs);
      auto r = evaluate(preds, labels, keywords, attrs, MatchOptions{!no_fold});
      matrix_export(r, conf_out);
      auto text = detail::dump(to_json(r));
      detail::emit(text, (std::filesystem::path(conf_out) / "confusion.json").string(), out);
      out << text;
      return kExitOk;
    }

    if (*build_cmd) {
      if (build_in.path.empty() == build_pred.empty())
        throw ConfigError("index build needs exactly one of --captions, --predictions");
      auto idx = build_pred.empty() ? build_index(build_in.load(), workers)
                                    : build_index(ingest_predictions(build_pred), workers);
      save_index(idx, build_out);
      return kExitOk;
    }

    if (*query_cmd) {
      for (const auto& id : query(load_index(query_index), terms)) out << id << '\n';
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace satcap::cli
