#pragma once

// Readability panel over a caption corpus: characters, words, unique words,
// complex-word percentage, syllables per word, sentences, words per sentence,
// and the Gunning Fog, Flesch Reading Ease and Flesch-Kincaid indices.
//
// Syllables come from a vowel-group heuristic, so every syllable-dependent
// number is relative to that heuristic, not to a pronunciation dictionary.

#include <cstddef>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "satcap/corpus.hpp"
#include "satcap/detail/parallel.hpp"
#include "satcap/error.hpp"
#include "satcap/tokenize.hpp"

namespace satcap {

namespace detail {

inline bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

inline bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

}  // namespace detail

/// Contiguous vowel groups (a e i o u y), minus one for a silent final 'e'
/// unless the word ends in consonant + "le". Never less than 1.
inline std::size_t count_syllables(std::string_view word) {
  const auto w = detail::to_lower(word);
  std::size_t groups = 0;
  bool in_group = false;
  for (char c : w) {
    const bool v = detail::is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  if (!w.empty() && w.back() == 'e') {
    const auto n = w.size();
    const bool consonant_le = n >= 3 && w[n - 2] == 'l' && detail::is_letter(w[n - 3]) && !detail::is_vowel(w[n - 3]);
    if (!consonant_le && groups > 0) --groups;
  }
  return groups == 0 ? 1 : groups;
}

inline constexpr std::size_t kComplexWordSyllables = 3;

struct ReadabilityIndices {
  double fog = 0.0;
  double flesch = 0.0;
  double fk = 0.0;
};

/// The three grade formulas from already-aggregated ratios.
inline ReadabilityIndices report_from_aggregates(double words_per_sentence, double syllables_per_word,
                                                 double complex_pct) {
  if (!(words_per_sentence > 0.0) || !(syllables_per_word > 0.0) || !(complex_pct >= 0.0))
    throw DegenerateInputError("readability aggregates must be positive");
  ReadabilityIndices r;
  r.fog = 0.4 * (words_per_sentence + complex_pct);
  r.flesch = 206.835 - 1.015 * words_per_sentence - 84.6 * syllables_per_word;
  r.fk = 0.39 * words_per_sentence + 11.8 * syllables_per_word - 15.59;
  return r;
}

struct ReadabilityReport {
  std::size_t characters = 0;
  std::size_t words = 0;
  std::size_t unique_words = 0;
  std::size_t complex_words = 0;
  std::size_t syllables = 0;
  std::size_t sentences = 0;

  double complex_pct = 0.0;
  double syllables_per_word = 0.0;
  double words_per_sentence = 0.0;
  double fog = 0.0;
  double flesch = 0.0;
  double fk = 0.0;
};

/// Builds the derived ratios and indices from raw counts.
inline ReadabilityReport finish_report(ReadabilityReport r) {
  if (r.words == 0) throw DegenerateInputError("no words to score");
  if (r.sentences == 0) throw DegenerateInputError("no sentences to score");
  const auto w = static_cast<double>(r.words);
  r.complex_pct = 100.0 * static_cast<double>(r.complex_words) / w;
  r.syllables_per_word = static_cast<double>(r.syllables) / w;
  r.words_per_sentence = w / static_cast<double>(r.sentences);
  const auto idx = report_from_aggregates(r.words_per_sentence, r.syllables_per_word, r.complex_pct);
  r.fog = idx.fog;
  r.flesch = idx.flesch;
  r.fk = idx.fk;
  return r;
}

/// A sentence is a `split_sentences` segment with at least one token, so a
/// caption without inner terminators is one sentence.
inline ReadabilityReport report(const Corpus& corpus, std::size_t workers = 1) {
  struct Partial {
    ReadabilityReport counts;
    std::set<std::string> vocab;
  };
  const auto& records = corpus.records();
  std::vector<Partial> partials(std::max<std::size_t>(1, std::min(workers, records.size())));
  detail::for_each_chunk(records.size(), partials.size(), [&](std::size_t wk, std::size_t b, std::size_t e) {
    auto& p = partials[wk];
    for (std::size_t i = b; i < e; ++i) {
      for (const auto& cap : records[i].captions) {
        p.counts.characters += tokenize(cap.raw).char_count;
        for (const auto& sentence : split_sentences(cap.raw)) {
          auto toks = tokenize(sentence).tokens;
          if (toks.empty()) continue;
          ++p.counts.sentences;
          for (auto& t : toks) {
            const auto syl = count_syllables(t);
            p.counts.syllables += syl;
            if (syl >= kComplexWordSyllables) ++p.counts.complex_words;
            ++p.counts.words;
            p.vocab.insert(std::move(t));
          }
        }
      }
    }
  });

  ReadabilityReport r;
  std::set<std::string> vocab;
  for (auto& p : partials) {
    r.characters += p.counts.characters;
    r.words += p.counts.words;
    r.complex_words += p.counts.complex_words;
    r.syllables += p.counts.syllables;
    r.sentences += p.counts.sentences;
    vocab.merge(p.vocab);
  }
  r.unique_words = vocab.size();
  return finish_report(r);
}

inline nlohmann::ordered_json to_json(const ReadabilityReport& r) {
  nlohmann::ordered_json j;
  j["Characters"] = r.characters;
  j["Words"] = r.words;
  j["Unique Words"] = r.unique_words;
  j["Complex Word %"] = r.complex_pct;
  j["Avg. Syllables / Word"] = r.syllables_per_word;
  j["Sentences"] = r.sentences;
  j["Avg. Words/ Sentence"] = r.words_per_sentence;
  j["Fog grade level"] = r.fog;
  j["Flesch reading ease"] = r.flesch;
  j["Flesch-Kincaid level"] = r.fk;
  return j;
}

namespace detail {

inline std::string with_thousands(std::size_t n) {
  auto digits = std::to_string(n);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

inline std::string fixed2(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

}  // namespace detail

/// Side-by-side text table, one column per named corpus.
inline void write_table(const std::vector<std::pair<std::string, ReadabilityReport>>& columns, std::ostream& out) {
  using Row = std::pair<std::string, std::vector<std::string>>;
  std::vector<Row> rows = {{"Counts", {}},
                           {"Characters", {}},
                           {"Words", {}},
                           {"Unique Words", {}},
                           {"Complex Word %", {}},
                           {"Avg. Syllables / Word", {}},
                           {"Sentences", {}},
                           {"Avg. Words/ Sentence", {}},
                           {"Fog grade level", {}},
                           {"Flesch reading ease", {}},
                           {"Flesch-Kincaid level", {}}};
  for (const auto& [name, r] : columns) {
    rows[0].second.push_back(name);
    rows[1].second.push_back(detail::with_thousands(r.characters));
    rows[2].second.push_back(detail::with_thousands(r.words));
    rows[3].second.push_back(detail::with_thousands(r.unique_words));
    rows[4].second.push_back(detail::fixed2(r.complex_pct));
    rows[5].second.push_back(detail::fixed2(r.syllables_per_word));
    rows[6].second.push_back(detail::with_thousands(r.sentences));
    rows[7].second.push_back(detail::fixed2(r.words_per_sentence));
    rows[8].second.push_back(detail::fixed2(r.fog));
    rows[9].second.push_back(detail::fixed2(r.flesch));
    rows[10].second.push_back(detail::fixed2(r.fk));
  }

  std::size_t label_width = 0;
  std::vector<std::size_t> widths(columns.size(), 0);
  for (const auto& [label, cells] : rows) {
    label_width = std::max(label_width, label.size());
    for (std::size_t c = 0; c < cells.size(); ++c) widths[c] = std::max(widths[c], cells[c].size());
  }
  for (const auto& [label, cells] : rows) {
    out << std::left << std::setw(static_cast<int>(label_width)) << label;
    for (std::size_t c = 0; c < cells.size(); ++c)
      out << "  " << std::right << std::setw(static_cast<int>(widths[c])) << cells[c];
    out << '\n';
  }
}

}  // namespace satcap
