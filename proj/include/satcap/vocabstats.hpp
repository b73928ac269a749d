#pragma once

// Vocabulary diagnostics: token frequency distribution, top-k coverage,
// hapax ratio and duplicate-caption counts.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "satcap/corpus.hpp"
#include "satcap/detail/io.hpp"
#include "satcap/detail/parallel.hpp"
#include "satcap/error.hpp"
#include "satcap/tokenize.hpp"

namespace satcap {

struct TokenCount {
  std::string token;
  std::size_t count = 0;

  friend bool operator==(const TokenCount&, const TokenCount&) = default;
};

struct VocabularyProfile {
  std::size_t total_tokens = 0;
  std::size_t unique_tokens = 0;
  std::size_t hapax_count = 0;
  std::size_t total_captions = 0;
  /// Distinct normalized captions, corpus-wide.
  std::size_t unique_captions = 0;
  std::size_t duplicate_captions = 0;
  /// Duplicates counted only against earlier captions of the same image.
  std::size_t within_image_duplicates = 0;
  std::map<std::string, std::size_t> freq;
  /// Descending count, ties lexicographic.
  std::vector<TokenCount> ranked;

  double duplicate_fraction() const {
    return total_captions == 0 ? 0.0 : static_cast<double>(duplicate_captions) / static_cast<double>(total_captions);
  }

  friend bool operator==(const VocabularyProfile&, const VocabularyProfile&) = default;
};

struct Coverage {
  double fraction = 0.0;
  std::size_t covered_tokens = 0;
};

/// Ranks a frequency table: count descending, then token ascending.
inline std::vector<TokenCount> rank_frequencies(const std::map<std::string, std::size_t>& freq) {
  std::vector<TokenCount> ranked;
  ranked.reserve(freq.size());
  for (const auto& [tok, n] : freq) ranked.push_back({tok, n});
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const TokenCount& a, const TokenCount& b) { return a.count > b.count; });
  return ranked;
}

inline VocabularyProfile profile(const Corpus& corpus, std::size_t workers = 1) {
  if (corpus.empty()) throw DegenerateInputError("cannot profile an empty corpus");

  struct Partial {
    std::map<std::string, std::size_t> freq;
    std::set<std::string> normalized;
    std::size_t captions = 0;
    std::size_t within_dupes = 0;
  };

  const auto& records = corpus.records();
  std::vector<Partial> partials(std::max<std::size_t>(1, std::min(workers, records.size())));
  detail::for_each_chunk(records.size(), partials.size(), [&](std::size_t w, std::size_t b, std::size_t e) {
    auto& part = partials[w];
    for (std::size_t i = b; i < e; ++i) {
      std::set<std::string> local;
      for (const auto& cap : records[i].captions) {
        auto toks = tokenize(cap.raw).tokens;
        for (const auto& t : toks) ++part.freq[t];
        auto norm = detail::join(toks);
        if (!local.insert(norm).second) ++part.within_dupes;
        part.normalized.insert(std::move(norm));
        ++part.captions;
      }
    }
  });

  // Count merging is commutative, so the chunking never shows in the result.
  VocabularyProfile p;
  std::set<std::string> normalized;
  for (auto& part : partials) {
    for (const auto& [tok, n] : part.freq) p.freq[tok] += n;
    normalized.merge(part.normalized);
    p.total_captions += part.captions;
    p.within_image_duplicates += part.within_dupes;
  }
  for (const auto& [tok, n] : p.freq) {
    p.total_tokens += n;
    if (n == 1) ++p.hapax_count;
  }
  p.unique_tokens = p.freq.size();
  p.unique_captions = normalized.size();
  p.duplicate_captions = p.total_captions - p.unique_captions;
  p.ranked = rank_frequencies(p.freq);
  return p;
}

/// Share of all token occurrences taken by the k highest-ranked tokens.
/// k beyond the vocabulary size is full coverage.
inline Coverage top_k_coverage(const VocabularyProfile& p, std::size_t k) {
  if (k == 0) throw ConfigError("top-k coverage needs k >= 1");
  if (p.total_tokens == 0) throw DegenerateInputError("profile has no tokens");
  Coverage c;
  const auto n = std::min(k, p.ranked.size());
  for (std::size_t i = 0; i < n; ++i) c.covered_tokens += p.ranked[i].count;
  c.fraction = static_cast<double>(c.covered_tokens) / static_cast<double>(p.total_tokens);
  return c;
}

inline double hapax_ratio(const VocabularyProfile& p) {
  if (p.unique_tokens == 0) throw DegenerateInputError("profile has no tokens");
  return static_cast<double>(p.hapax_count) / static_cast<double>(p.unique_tokens);
}

/// CSV `rank,token,count,cumulative_fraction` in rank order.
inline void write_frequency_csv(const VocabularyProfile& p, std::ostream& out) {
  out << "rank,token,count,cumulative_fraction\n";
  std::size_t cumulative = 0;
  for (std::size_t i = 0; i < p.ranked.size(); ++i) {
    const auto& [tok, n] = p.ranked[i];
    cumulative += n;
    // Tokens never contain whitespace but may contain commas or quotes.
    std::string field = tok;
    if (field.find_first_of(",\"") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : field) quoted += (c == '"') ? std::string("\"\"") : std::string(1, c);
      field = quoted + "\"";
    }
    out << (i + 1) << ',' << field << ',' << n << ','
        << detail::format_fraction(static_cast<double>(cumulative) / static_cast<double>(p.total_tokens)) << '\n';
  }
}

inline void frequency_export(const VocabularyProfile& p, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  write_frequency_csv(p, out);
  detail::write_or_throw(out, path);
}

inline nlohmann::ordered_json to_json(const VocabularyProfile& p, const std::vector<std::size_t>& coverage_ks = {30}) {
  nlohmann::ordered_json j;
  j["total_tokens"] = p.total_tokens;
  j["unique_tokens"] = p.unique_tokens;
  j["hapax_count"] = p.hapax_count;
  j["hapax_ratio"] = p.unique_tokens ? hapax_ratio(p) : 0.0;
  j["total_captions"] = p.total_captions;
  j["unique_captions"] = p.unique_captions;
  j["duplicate_captions"] = p.duplicate_captions;
  j["duplicate_fraction"] = p.duplicate_fraction();
  j["within_image_duplicates"] = p.within_image_duplicates;
  auto cov = nlohmann::ordered_json::array();
  if (p.total_tokens > 0) {
    for (auto k : coverage_ks) {
      auto c = top_k_coverage(p, k);
      cov.push_back({{"k", k}, {"fraction", c.fraction}, {"covered_tokens", c.covered_tokens}});
    }
  }
  j["top_k_coverage"] = std::move(cov);
  auto freq = nlohmann::ordered_json::array();
  for (const auto& tc : p.ranked) freq.push_back({tc.token, tc.count});
  j["freq"] = std::move(freq);
  return j;
}

}  // namespace satcap
