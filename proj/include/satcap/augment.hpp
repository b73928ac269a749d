#pragma once

// Vocabulary strategies. Each one returns a new Corpus and appends a suffix
// to the provenance label.
//
//   correct         merge broken bigrams, apply manual overrides, spell-correct
//                   against a dictionary, optionally prune duplicate captions
//   synonym_expand  one seeded synonym variant per distinct caption
//   back_translate  English -> pivot languages -> English through a Translator

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "satcap/corpus.hpp"
#include "satcap/detail/io.hpp"
#include "satcap/error.hpp"
#include "satcap/tokenize.hpp"

namespace satcap {

namespace detail {

inline std::string with_suffix(const std::string& provenance, std::string_view suffix) {
  if (provenance.ends_with(suffix)) return provenance;
  return provenance + std::string(suffix);
}

/// True when `word` is exactly one token under `tokenize`, i.e. it survives
/// re-tokenization unchanged.
inline bool is_single_token(std::string_view word) {
  auto t = tokenize(word).tokens;
  return t.size() == 1 && t.front() == word;
}

inline bool has_letter(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || u >= 0x80;
  });
}

/// Splits "key<TAB>value" lines, skipping blank lines and '#' comments.
inline std::vector<std::pair<std::string, std::string>> read_tsv_pairs(std::istream& in, std::string_view what) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(in)) {
    ++line_no;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw FormatError(std::string(what) + ": expected '<key>\\t<value>'", line_no);
    out.emplace_back(std::string(trim(std::string_view(line).substr(0, tab))),
                     std::string(trim(std::string_view(line).substr(tab + 1))));
  }
  return out;
}

inline std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    auto piece = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!piece.empty()) out.push_back(to_lower(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Uniform integer in [0, n) from a raw 64-bit engine. The standard
/// distributions are implementation-defined; this keeps seeded output
/// identical across standard libraries.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Edit distance

/// Optimal string alignment distance: insertions, deletions, substitutions
/// and adjacent transpositions, each costing 1.
inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  const auto n = a.size(), m = b.size();
  std::vector<std::size_t> prev2(m + 1), prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) cur[j] = std::min(cur[j], prev2[j - 2] + 1);
    }
    std::swap(prev2, prev);
    std::swap(prev, cur);
  }
  return prev[m];
}

// ---------------------------------------------------------------------------
// Correction

struct MergeRule {
  std::string first;
  std::string second;
  std::string merged;
};

/// Spell-correction and repair rules. Merge rules apply in order; the first
/// rule matching at a position wins.
class CorrectionRules {
 public:
  CorrectionRules() = default;
  CorrectionRules(std::set<std::string> dictionary, std::vector<MergeRule> merge_patterns,
                  std::map<std::string, std::string> manual_overrides)
      : dictionary_(std::move(dictionary)),
        merge_patterns_(std::move(merge_patterns)),
        manual_overrides_(std::move(manual_overrides)) {
    for (const auto& r : merge_patterns_) {
      if (r.first.empty() || r.second.empty()) throw ConfigError("merge rule with an empty bigram half");
      if (!detail::is_single_token(r.merged))
        throw ConfigError("merge result '" + r.merged + "' must be a single lower-case token");
    }
    for (const auto& [from, to] : manual_overrides_) {
      if (from.empty()) throw ConfigError("override with an empty source token");
      if (!detail::is_single_token(to))
        throw ConfigError("override replacement '" + to + "' must be a single lower-case token");
    }
  }

  const std::set<std::string>& dictionary() const noexcept { return dictionary_; }
  const std::vector<MergeRule>& merge_patterns() const noexcept { return merge_patterns_; }
  const std::map<std::string, std::string>& manual_overrides() const noexcept { return manual_overrides_; }

 private:
  std::set<std::string> dictionary_;
  std::vector<MergeRule> merge_patterns_;
  std::map<std::string, std::string> manual_overrides_;
};

/// One lower-case word per line.
inline std::set<std::string> read_dictionary(std::istream& in) {
  std::set<std::string> words;
  for (const auto& line : detail::read_lines(in)) {
    auto w = detail::trim(line);
    if (w.empty() || w.front() == '#') continue;
    words.insert(detail::to_lower(w));
  }
  return words;
}

/// TSV `bigram<TAB>replacement`, e.g. "c shape\tc-shaped".
inline std::vector<MergeRule> read_merge_rules(std::istream& in) {
  std::vector<MergeRule> rules;
  for (auto& [bigram, merged] : detail::read_tsv_pairs(in, "merge rules")) {
    auto toks = tokenize(bigram).tokens;
    if (toks.size() != 2) throw ConfigError("merge rule '" + bigram + "' is not a two-token bigram");
    rules.push_back({toks[0], toks[1], detail::to_lower(merged)});
  }
  return rules;
}

/// TSV `misspelled<TAB>replacement`.
inline std::map<std::string, std::string> read_overrides(std::istream& in) {
  std::map<std::string, std::string> out;
  for (auto& [from, to] : detail::read_tsv_pairs(in, "overrides")) out[detail::to_lower(from)] = detail::to_lower(to);
  return out;
}

inline CorrectionRules load_correction_rules(const std::filesystem::path& dictionary,
                                             const std::optional<std::filesystem::path>& merge_rules,
                                             const std::optional<std::filesystem::path>& overrides) {
  auto din = detail::open_input(dictionary);
  auto dict = read_dictionary(din);
  std::vector<MergeRule> merges;
  if (merge_rules) {
    auto in = detail::open_input(*merge_rules);
    merges = read_merge_rules(in);
  }
  std::map<std::string, std::string> over;
  if (overrides) {
    auto in = detail::open_input(*overrides);
    over = read_overrides(in);
  }
  return CorrectionRules(std::move(dict), std::move(merges), std::move(over));
}

struct CorrectionLog {
  /// Out-of-dictionary tokens with no candidate within distance 2, by occurrence count.
  std::map<std::string, std::size_t> unresolved;
  std::size_t merges = 0;
  std::size_t overrides = 0;
  std::size_t spelling_fixes = 0;
  std::size_t pruned_captions = 0;
  /// Records whose every caption was pruned as a duplicate.
  std::vector<std::string> dropped_records;
};

inline constexpr std::size_t kMaxSpellingDistance = 2;

namespace detail {

class SpellCorrector {
 public:
  SpellCorrector(const CorrectionRules& rules, const std::unordered_map<std::string, std::size_t>& corpus_freq)
      : rules_(rules), freq_(corpus_freq) {
    for (const auto& w : rules.dictionary()) {
      by_length_[w.size()].push_back(w);
      accepted_.insert(w);
    }
    for (const auto& r : rules.merge_patterns()) accepted_.insert(r.merged);
    for (const auto& [from, to] : rules.manual_overrides()) resolved_overrides_[from] = resolve_override(from);
    for (const auto& [from, to] : resolved_overrides_) accepted_.insert(to);
  }

  enum class Action { kept, overridden, corrected, unresolved };

  /// Maps a single token, caching lookups.
  std::pair<std::string, Action> fix(const std::string& token) {
    if (accepted_.contains(token) || !has_letter(token)) return {token, Action::kept};
    if (auto it = resolved_overrides_.find(token); it != resolved_overrides_.end())
      return {it->second, Action::overridden};
    auto [it, inserted] = cache_.try_emplace(token);
    if (inserted) it->second = nearest(token);
    if (it->second) return {*it->second, Action::corrected};
    return {token, Action::unresolved};
  }

 private:
  std::string resolve_override(const std::string& from) const {
    std::set<std::string> visited{from};
    std::string cur = rules_.manual_overrides().at(from);
    while (true) {
      auto it = rules_.manual_overrides().find(cur);
      if (it == rules_.manual_overrides().end()) return cur;
      if (!visited.insert(cur).second) throw ConfigError("override cycle through '" + from + "'");
      cur = it->second;
    }
  }

  std::size_t frequency(const std::string& w) const {
    auto it = freq_.find(w);
    return it == freq_.end() ? 0 : it->second;
  }

  std::optional<std::string> nearest(const std::string& token) const {
    const std::string* best = nullptr;
    std::size_t best_d = kMaxSpellingDistance + 1;
    const auto lo = token.size() > kMaxSpellingDistance ? token.size() - kMaxSpellingDistance : 0;
    for (auto len = lo; len <= token.size() + kMaxSpellingDistance; ++len) {
      auto bucket = by_length_.find(len);
      if (bucket == by_length_.end()) continue;
      for (const auto& w : bucket->second) {
        const auto d = edit_distance(token, w);
        if (d > kMaxSpellingDistance) continue;
        bool better = d < best_d;
        if (!better && d == best_d) {
          const auto fw = frequency(w), fb = frequency(*best);
          better = fw > fb || (fw == fb && w < *best);
        }
        if (better) {
          best = &w;
          best_d = d;
        }
      }
    }
    return best ? std::optional<std::string>(*best) : std::nullopt;
  }

  const CorrectionRules& rules_;
  const std::unordered_map<std::string, std::size_t>& freq_;
  std::map<std::size_t, std::vector<std::string>> by_length_;
  std::unordered_set<std::string> accepted_;
  std::map<std::string, std::string> resolved_overrides_;
  std::unordered_map<std::string, std::optional<std::string>> cache_;
};

/// One left-to-right merge pass; returns the number of merges.
inline std::size_t merge_pass(std::vector<std::string>& tokens, const std::vector<MergeRule>& rules) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  std::size_t merges = 0;
  for (std::size_t i = 0; i < tokens.size();) {
    const MergeRule* hit = nullptr;
    if (i + 1 < tokens.size())
      for (const auto& r : rules)
        if (tokens[i] == r.first && tokens[i + 1] == r.second) {
          hit = &r;
          break;
        }
    if (hit) {
      out.push_back(hit->merged);
      ++merges;
      i += 2;
    } else {
      out.push_back(std::move(tokens[i]));
      ++i;
    }
  }
  tokens = std::move(out);
  return merges;
}

}  // namespace detail

/// Corrects every caption to a fixed point of (merge, override, spell-fix),
/// so applying `correct` twice with the same rules changes nothing.
/// Corrected captions are rewritten as their normalized token sequence.
inline Corpus correct(const Corpus& corpus, const CorrectionRules& rules, bool prune_duplicates,
                      CorrectionLog* log = nullptr) {
  if (rules.dictionary().empty()) throw ConfigError("correction dictionary is empty");
  CorrectionLog local;
  auto& lg = log ? *log : local;

  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& rec : corpus.records())
    for (const auto& cap : rec.captions)
      for (auto& t : tokenize(cap.raw).tokens) ++freq[std::move(t)];

  detail::SpellCorrector speller(rules, freq);
  std::unordered_set<std::string> seen;
  std::vector<ImageRecord> records;
  records.reserve(corpus.size());

  for (const auto& rec : corpus.records()) {
    ImageRecord out = rec;
    out.captions.clear();
    for (const auto& cap : rec.captions) {
      auto tokens = tokenize(cap.raw).tokens;
      std::set<std::string> unresolved_here;
      for (bool changed = true; changed;) {
        changed = false;
        while (auto n = detail::merge_pass(tokens, rules.merge_patterns())) lg.merges += n;
        for (auto& t : tokens) {
          auto [fixed, action] = speller.fix(t);
          switch (action) {
            case detail::SpellCorrector::Action::overridden: ++lg.overrides; break;
            case detail::SpellCorrector::Action::corrected: ++lg.spelling_fixes; break;
            case detail::SpellCorrector::Action::unresolved: unresolved_here.insert(t); break;
            case detail::SpellCorrector::Action::kept: break;
          }
          if (fixed != t) {
            t = std::move(fixed);
            changed = true;
          }
        }
      }
      for (const auto& t : tokens)
        if (unresolved_here.contains(t)) ++lg.unresolved[t];

      Caption fixed = cap;
      if (!tokens.empty()) fixed.raw = detail::join(tokens);
      if (prune_duplicates && !seen.insert(normalize(fixed.raw)).second) {
        ++lg.pruned_captions;
        continue;
      }
      out.captions.push_back(std::move(fixed));
    }
    if (out.captions.empty()) {
      lg.dropped_records.push_back(rec.image_id);
      continue;
    }
    records.push_back(std::move(out));
  }
  return Corpus(std::move(records), detail::with_suffix(corpus.provenance(), "-corrected"));
}

// ---------------------------------------------------------------------------
// Synonyms

class Thesaurus {
 public:
  Thesaurus() = default;
  explicit Thesaurus(std::map<std::string, std::vector<std::string>> entries) : entries_(std::move(entries)) {
    for (const auto& [word, syns] : entries_) {
      if (syns.empty()) throw ConfigError("thesaurus entry '" + word + "' has no synonyms");
      for (const auto& s : syns) {
        if (s.empty()) throw ConfigError("thesaurus entry '" + word + "' has an empty synonym");
        if (s == word) throw ConfigError("thesaurus entry '" + word + "' lists itself");
      }
    }
  }

  const std::map<std::string, std::vector<std::string>>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  const std::vector<std::string>* find(const std::string& word) const {
    auto it = entries_.find(word);
    return it == entries_.end() ? nullptr : &it->second;
  }

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

/// TSV `word<TAB>syn1,syn2,...`; repeated words append to the same list.
inline Thesaurus read_thesaurus(std::istream& in) {
  std::map<std::string, std::vector<std::string>> entries;
  for (auto& [word, syns] : detail::read_tsv_pairs(in, "thesaurus")) {
    auto& list = entries[detail::to_lower(word)];
    for (auto& s : detail::split_commas(syns))
      if (std::find(list.begin(), list.end(), s) == list.end()) list.push_back(std::move(s));
  }
  return Thesaurus(std::move(entries));
}

inline Thesaurus load_thesaurus(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_thesaurus(in);
}

/// For each distinct normalized caption (first occurrence, corpus-wide) with
/// at least one thesaurus-covered token, appends one variant to the same
/// record: up to `replacements_per_caption` covered positions are drawn
/// without replacement and each is swapped for a uniformly drawn synonym.
/// Output depends only on (corpus, thesaurus, replacements, seed).
inline Corpus synonym_expand(const Corpus& corpus, const Thesaurus& thesaurus, std::size_t replacements_per_caption,
                             std::uint64_t seed) {
  if (thesaurus.empty()) throw ConfigError("thesaurus is empty");
  if (replacements_per_caption == 0) throw ConfigError("replacements per caption must be >= 1");

  std::mt19937_64 rng(seed);
  std::unordered_set<std::string> seen;
  std::vector<ImageRecord> records;
  records.reserve(corpus.size());

  for (const auto& rec : corpus.records()) {
    ImageRecord out = rec;
    for (const auto& cap : rec.captions) {
      auto tokens = tokenize(cap.raw).tokens;
      if (!seen.insert(detail::join(tokens)).second) continue;

      std::vector<std::size_t> covered;
      for (std::size_t i = 0; i < tokens.size(); ++i)
        if (thesaurus.find(tokens[i])) covered.push_back(i);
      if (covered.empty()) continue;

      const auto picks = std::min(replacements_per_caption, covered.size());
      for (std::size_t k = 0; k < picks; ++k) {
        const auto j = k + detail::uniform_below(rng, covered.size() - k);
        std::swap(covered[k], covered[j]);
        const auto pos = covered[k];
        const auto& syns = *thesaurus.find(tokens[pos]);
        tokens[pos] = syns[detail::uniform_below(rng, syns.size())];
      }
      out.captions.push_back({rec.image_id, detail::join(tokens), CaptionSource::augmented});
    }
    records.push_back(std::move(out));
  }
  return Corpus(std::move(records), detail::with_suffix(corpus.provenance(), "-synonym"));
}

// ---------------------------------------------------------------------------
// Back-translation

/// Implementations must be safe to call concurrently when used with
/// `BackTranslateOptions::concurrency > 1`.
class Translator {
 public:
  virtual ~Translator() = default;
  virtual std::string translate(const std::string& text, const std::string& source, const std::string& target) = 0;
};

inline constexpr std::string_view kHomeLanguage = "en";

/// English -> hops... -> English.
class TranslationChain {
 public:
  TranslationChain(std::vector<std::string> hops, Translator& translator) : hops_(std::move(hops)), translator_(&translator) {
    if (hops_.empty()) throw ConfigError("translation chain needs at least one hop");
    for (auto& h : hops_) {
      h = detail::to_lower(detail::trim(h));
      if (h.empty()) throw ConfigError("empty language code in translation chain");
    }
    const auto path = languages();
    for (std::size_t i = 1; i < path.size(); ++i)
      if (path[i] == path[i - 1]) throw ConfigError("translation chain repeats '" + path[i] + "' consecutively");
  }

  /// Default cycle: Spanish, German, French.
  static std::vector<std::string> default_hops() { return {"es", "de", "fr"}; }

  const std::vector<std::string>& hops() const noexcept { return hops_; }
  Translator& translator() const noexcept { return *translator_; }

  /// Full language path including the English endpoints.
  std::vector<std::string> languages() const {
    std::vector<std::string> path{std::string(kHomeLanguage)};
    path.insert(path.end(), hops_.begin(), hops_.end());
    path.emplace_back(kHomeLanguage);
    return path;
  }

  std::string run(const std::string& text) const {
    const auto path = languages();
    std::string cur = text;
    for (std::size_t i = 1; i < path.size(); ++i) cur = translator_->translate(cur, path[i - 1], path[i]);
    return cur;
  }

 private:
  std::vector<std::string> hops_;
  Translator* translator_;
};

struct BackTranslateOptions {
  std::size_t concurrency = 1;
  /// Retries after the first attempt, for transient failures only.
  std::size_t max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
};

struct CaptionFailure {
  std::string image_id;
  std::size_t caption_index = 0;
  std::string message;
};

struct BackTranslateLog {
  std::vector<CaptionFailure> failures;
  std::size_t requests = 0;
  std::size_t variants_added = 0;
};

namespace detail {

inline std::string translate_with_retry(const TranslationChain& chain, const std::string& text,
                                        const BackTranslateOptions& opt) {
  auto backoff = opt.initial_backoff;
  for (std::size_t attempt = 0;; ++attempt) {
    try {
      return chain.run(text);
    } catch (const TransientTranslationError&) {
      if (attempt >= opt.max_retries) throw;
      if (backoff.count() > 0) std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
}

}  // namespace detail

/// Sends every caption round the chain and appends the result as a new
/// caption unless it normalizes to the original. A caption whose chain
/// fails keeps only its original and is logged; if every caption fails the
/// whole operation throws OperationError.
inline Corpus back_translate(const Corpus& corpus, const TranslationChain& chain, const BackTranslateOptions& opt = {},
                             BackTranslateLog* log = nullptr) {
  BackTranslateLog local;
  auto& lg = log ? *log : local;

  // Identical texts are sent once.
  std::vector<std::string> texts;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& rec : corpus.records())
    for (const auto& cap : rec.captions)
      if (slot.try_emplace(cap.raw, texts.size()).second) texts.push_back(cap.raw);

  struct Outcome {
    std::optional<std::string> text;
    std::string error;
  };
  std::vector<Outcome> outcomes(texts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < texts.size();) {
      try {
        outcomes[i].text = detail::translate_with_retry(chain, texts[i], opt);
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
    }
  };
  {
    const auto n = std::max<std::size_t>(1, std::min(opt.concurrency, texts.size()));
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  lg.requests += texts.size();

  std::size_t failed = 0;
  for (const auto& o : outcomes)
    if (!o.text) ++failed;
  if (!texts.empty() && failed == texts.size())
    throw OperationError("back-translation failed for every caption: " + outcomes.front().error);

  std::vector<ImageRecord> records;
  records.reserve(corpus.size());
  for (const auto& rec : corpus.records()) {
    ImageRecord out = rec;
    for (std::size_t i = 0; i < rec.captions.size(); ++i) {
      const auto& cap = rec.captions[i];
      const auto& o = outcomes[slot.at(cap.raw)];
      if (!o.text) {
        lg.failures.push_back({rec.image_id, i, o.error});
        continue;
      }
      if (detail::trim(*o.text).empty() || normalize(*o.text) == normalize(cap.raw)) continue;
      out.captions.push_back({rec.image_id, *o.text, CaptionSource::augmented});
      ++lg.variants_added;
    }
    records.push_back(std::move(out));
  }
  return Corpus(std::move(records), detail::with_suffix(corpus.provenance(), "-backtranslated"));
}

/// Offline translator for tests and dry runs. Outbound hops pass text
/// through; on the hop back into English it applies phrase rewrites
/// (word swaps and function-word simplifications). With no rewrites it is
/// the identity.
class MockTranslator : public Translator {
 public:
  MockTranslator() = default;

  /// A small built-in paraphrase table.
  static MockTranslator with_default_rewrites() {
    MockTranslator m;
    m.add_rewrite("next to crashing", "with");
    m.add_rewrite("next to", "near");
    m.add_rewrite("planes", "aircraft");
    m.add_rewrite("plane", "aircraft");
    m.add_rewrite("in an airport", "at an airport");
    return m;
  }

  MockTranslator(const MockTranslator& o) : rewrites_(o.rewrites_), calls_(o.calls_.load()) {}

  /// Rewrites are tried in insertion order at each position; longest first is the caller's job.
  void add_rewrite(std::string_view from, std::string_view to) {
    auto from_tokens = tokenize(from).tokens;
    if (from_tokens.empty()) throw ConfigError("empty rewrite pattern");
    std::vector<std::string> to_words;
    for (auto w = detail::trim(to); !w.empty();) {
      auto sp = w.find(' ');
      to_words.emplace_back(w.substr(0, sp));
      w = sp == std::string_view::npos ? std::string_view{} : detail::trim(w.substr(sp));
    }
    rewrites_.push_back({std::move(from_tokens), std::move(to_words)});
  }

  std::size_t calls() const noexcept { return calls_.load(); }

  std::string translate(const std::string& text, const std::string&, const std::string& target) override {
    ++calls_;
    if (target != kHomeLanguage || rewrites_.empty()) return text;

    std::vector<std::string> words;
    for (std::string_view rest = text; !(rest = detail::trim(rest)).empty();) {
      std::size_t j = 0;
      while (j < rest.size() && !detail::is_space(static_cast<unsigned char>(rest[j]))) ++j;
      words.emplace_back(rest.substr(0, j));
      rest.remove_prefix(j);
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < words.size();) {
      const Rewrite* hit = nullptr;
      for (const auto& rw : rewrites_) {
        if (i + rw.from.size() > words.size()) continue;
        bool match = true;
        for (std::size_t k = 0; k < rw.from.size() && match; ++k)
          match = normalize(words[i + k]) == rw.from[k];
        if (match) {
          hit = &rw;
          break;
        }
      }
      if (!hit) {
        out.push_back(words[i++]);
        continue;
      }
      // Keep trailing punctuation of the last replaced word ("planes." -> "aircraft.").
      const auto& last = words[i + hit->from.size() - 1];
      const auto stripped = detail::strip_punct(last);
      const auto tail = last.substr(static_cast<std::size_t>(stripped.data() - last.data()) + stripped.size());
      out.insert(out.end(), hit->to.begin(), hit->to.end());
      if (!out.empty()) out.back() += tail;
      i += hit->from.size();
    }
    return detail::join(out);
  }

 private:
  struct Rewrite {
    std::vector<std::string> from;
    std::vector<std::string> to;
  };
  std::vector<Rewrite> rewrites_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace satcap
