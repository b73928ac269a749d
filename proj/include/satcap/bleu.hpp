#pragma once

// BLEU-1..4 with multiple references per candidate.
//
// Corpus mode pools clipped n-gram matches and candidate n-gram totals over
// all candidates before dividing. Sentence mode is the same computation on a
// single candidate. No smoothing: a vanished precision zeroes every BLEU
// order that includes it, and `first_zero_order` says which one vanished.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "satcap/detail/parallel.hpp"
#include "satcap/error.hpp"

namespace satcap {

inline constexpr std::size_t kMaxBleuOrder = 4;

template <class Token>
using Ngram = std::vector<Token>;

template <class Token>
using NgramCounts = std::map<Ngram<Token>, std::size_t>;

/// Multiset of contiguous n-grams; empty when the sequence is shorter than n.
template <class Token>
NgramCounts<Token> ngram_counts(const std::vector<Token>& tokens, std::size_t n) {
  NgramCounts<Token> counts;
  if (n == 0 || tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[Ngram<Token>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                          tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return counts;
}

struct NgramMatches {
  std::size_t clipped = 0;
  std::size_t total = 0;

  friend bool operator==(const NgramMatches&, const NgramMatches&) = default;
};

namespace detail {

/// Candidate n-gram counts clipped at their maximum count in any one reference.
template <class Token>
NgramMatches clipped_matches(const std::vector<Token>& candidate, const std::vector<std::vector<Token>>& refs,
                             std::size_t n) {
  NgramMatches m;
  const auto cand = ngram_counts(candidate, n);
  if (cand.empty()) return m;
  NgramCounts<Token> max_ref;
  for (const auto& ref : refs)
    for (const auto& [g, k] : ngram_counts(ref, n)) {
      auto& slot = max_ref[g];
      slot = std::max(slot, k);
    }
  for (const auto& [g, k] : cand) {
    m.total += k;
    if (auto it = max_ref.find(g); it != max_ref.end()) m.clipped += std::min(k, it->second);
  }
  return m;
}

/// Reference length closest to `c`; ties go to the shorter reference.
template <class Token>
std::size_t closest_ref_length(std::size_t c, const std::vector<std::vector<Token>>& refs) {
  std::size_t best = refs.front().size();
  for (const auto& ref : refs) {
    const auto len = ref.size();
    const auto d = len > c ? len - c : c - len;
    const auto bd = best > c ? best - c : c - best;
    if (d < bd || (d == bd && len < best)) best = len;
  }
  return best;
}

template <class Token>
void check_inputs(const std::vector<std::vector<Token>>& candidates,
                  const std::vector<std::vector<std::vector<Token>>>& references) {
  if (candidates.empty()) throw DegenerateInputError("no candidates to score");
  if (candidates.size() != references.size())
    throw ConfigError("candidate and reference lists differ in length");
  for (const auto& refs : references)
    if (refs.empty()) throw ConfigError("every candidate needs at least one reference");
}

}  // namespace detail

/// Corpus-pooled clipped matches and candidate n-gram totals for one order.
template <class Token>
NgramMatches modified_precision(const std::vector<std::vector<Token>>& candidates,
                                const std::vector<std::vector<std::vector<Token>>>& references, std::size_t n) {
  detail::check_inputs(candidates, references);
  if (n == 0) throw ConfigError("n-gram order must be >= 1");
  NgramMatches sum;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto m = detail::clipped_matches(candidates[i], references[i], n);
    sum.clipped += m.clipped;
    sum.total += m.total;
  }
  return sum;
}

struct BleuResult {
  std::array<NgramMatches, kMaxBleuOrder> matches{};
  std::array<double, kMaxBleuOrder> precisions{};
  double brevity_penalty = 0.0;
  std::size_t candidate_len = 0;
  std::size_t effective_ref_len = 0;
  /// bleu[k-1] is BLEU-k.
  std::array<double, kMaxBleuOrder> bleu{};
  /// Lowest order (1-based) whose precision is zero, if any.
  std::optional<std::size_t> first_zero_order;
};

/// Brevity penalty and BLEU-1..4 from pooled statistics.
inline BleuResult finish_bleu(const std::array<NgramMatches, kMaxBleuOrder>& matches, std::size_t c, std::size_t r) {
  BleuResult res;
  res.matches = matches;
  res.candidate_len = c;
  res.effective_ref_len = r;
  for (std::size_t n = 0; n < kMaxBleuOrder; ++n) {
    const auto& m = matches[n];
    res.precisions[n] = m.total == 0 ? 0.0 : static_cast<double>(m.clipped) / static_cast<double>(m.total);
    if (res.precisions[n] == 0.0 && !res.first_zero_order) res.first_zero_order = n + 1;
  }
  res.brevity_penalty =
      c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  double log_sum = 0.0;
  for (std::size_t k = 1; k <= kMaxBleuOrder; ++k) {
    if (res.precisions[k - 1] == 0.0) break;  // this and every higher order stay 0
    log_sum += std::log(res.precisions[k - 1]);
    res.bleu[k - 1] = res.brevity_penalty * std::exp(log_sum / static_cast<double>(k));
  }
  return res;
}

/// Corpus-level BLEU. Every candidate must be non-empty.
template <class Token>
BleuResult bleu_score(const std::vector<std::vector<Token>>& candidates,
                      const std::vector<std::vector<std::vector<Token>>>& references, std::size_t workers = 1) {
  detail::check_inputs(candidates, references);
  for (const auto& cand : candidates)
    if (cand.empty()) throw DegenerateInputError("empty candidate sentence");

  struct Partial {
    std::array<NgramMatches, kMaxBleuOrder> matches{};
    std::size_t c = 0;
    std::size_t r = 0;
  };
  std::vector<Partial> partials(std::max<std::size_t>(1, std::min(workers, candidates.size())));
  detail::for_each_chunk(candidates.size(), partials.size(), [&](std::size_t w, std::size_t b, std::size_t e) {
    auto& p = partials[w];
    for (std::size_t i = b; i < e; ++i) {
      p.c += candidates[i].size();
      p.r += detail::closest_ref_length(candidates[i].size(), references[i]);
      for (std::size_t n = 1; n <= kMaxBleuOrder; ++n) {
        auto m = detail::clipped_matches(candidates[i], references[i], n);
        p.matches[n - 1].clipped += m.clipped;
        p.matches[n - 1].total += m.total;
      }
    }
  });

  std::array<NgramMatches, kMaxBleuOrder> matches{};
  std::size_t c = 0, r = 0;
  for (const auto& p : partials) {
    c += p.c;
    r += p.r;
    for (std::size_t n = 0; n < kMaxBleuOrder; ++n) {
      matches[n].clipped += p.matches[n].clipped;
      matches[n].total += p.matches[n].total;
    }
  }
  return finish_bleu(matches, c, r);
}

template <class Token>
BleuResult sentence_bleu(const std::vector<Token>& candidate, const std::vector<std::vector<Token>>& references) {
  return bleu_score(std::vector<std::vector<Token>>{candidate}, std::vector<std::vector<std::vector<Token>>>{references});
}

inline nlohmann::ordered_json to_json(const BleuResult& r) {
  nlohmann::ordered_json j;
  for (std::size_t k = 0; k < kMaxBleuOrder; ++k) j["bleu" + std::to_string(k + 1)] = r.bleu[k];
  for (std::size_t k = 0; k < kMaxBleuOrder; ++k) j["p" + std::to_string(k + 1)] = r.precisions[k];
  j["bp"] = r.brevity_penalty;
  j["c"] = r.candidate_len;
  j["r"] = r.effective_ref_len;
  return j;
}

}  // namespace satcap
