#pragma once

// Inverted index over captions with conjunctive (AND) keyword queries.
// Results are image ids in ascending order; there is no ranking.
//
// Persisted form: {"version":1, "doc_count":N, "postings":{token:[ids...]}}

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <iterator>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "satcap/corpus.hpp"
#include "satcap/detail/io.hpp"
#include "satcap/detail/parallel.hpp"
#include "satcap/error.hpp"
#include "satcap/tokenize.hpp"

namespace satcap {

inline constexpr int kIndexFormatVersion = 1;

using Postings = std::vector<std::string>;

class InvertedIndex {
 public:
  InvertedIndex() = default;
  InvertedIndex(std::map<std::string, Postings> postings, std::size_t doc_count, int version = kIndexFormatVersion)
      : postings_(std::move(postings)), doc_count_(doc_count), version_(version) {}

  const std::map<std::string, Postings>& postings() const noexcept { return postings_; }
  std::size_t doc_count() const noexcept { return doc_count_; }
  int version() const noexcept { return version_; }

  /// Postings for a token, or an empty list.
  const Postings& lookup(const std::string& token) const {
    static const Postings kEmpty;
    auto it = postings_.find(token);
    return it == postings_.end() ? kEmpty : it->second;
  }

  friend bool operator==(const InvertedIndex&, const InvertedIndex&) = default;

 private:
  std::map<std::string, Postings> postings_;
  std::size_t doc_count_ = 0;
  int version_ = kIndexFormatVersion;
};

namespace detail {

inline void merge_postings(std::map<std::string, Postings>& into, std::map<std::string, Postings>&& from) {
  for (auto& [tok, ids] : from) {
    auto& dst = into[tok];
    Postings merged;
    merged.reserve(dst.size() + ids.size());
    std::set_union(dst.begin(), dst.end(), ids.begin(), ids.end(), std::back_inserter(merged));
    dst = std::move(merged);
  }
}

}  // namespace detail

/// Documents are (image id, caption text) pairs. Repeated ids are one
/// document whose text is the union of its captions. Insertion order never
/// affects the result.
inline InvertedIndex build_index(const std::vector<std::pair<std::string, std::string>>& documents,
                                 std::size_t workers = 1) {
  std::vector<std::map<std::string, Postings>> partials(std::max<std::size_t>(1, std::min(workers, documents.size())));
  detail::for_each_chunk(documents.size(), partials.size(), [&](std::size_t w, std::size_t b, std::size_t e) {
    std::map<std::string, std::set<std::string>> local;
    for (std::size_t i = b; i < e; ++i)
      for (auto& t : tokenize(documents[i].second).tokens) local[std::move(t)].insert(documents[i].first);
    for (auto& [tok, ids] : local) partials[w][tok].assign(ids.begin(), ids.end());
  });

  std::map<std::string, Postings> postings;
  for (auto& p : partials) detail::merge_postings(postings, std::move(p));
  std::set<std::string_view> ids;
  for (const auto& [id, text] : documents) ids.insert(id);
  return InvertedIndex(std::move(postings), ids.size());
}

inline InvertedIndex build_index(const std::map<std::string, std::string>& documents, std::size_t workers = 1) {
  return build_index(std::vector<std::pair<std::string, std::string>>(documents.begin(), documents.end()), workers);
}

/// One document per record: all captions of an image.
inline InvertedIndex build_index(const Corpus& corpus, std::size_t workers = 1) {
  std::vector<std::pair<std::string, std::string>> docs;
  for (const auto& rec : corpus.records())
    for (const auto& cap : rec.captions) docs.emplace_back(rec.image_id, cap.raw);
  return build_index(docs, workers);
}

inline InvertedIndex build_index(const PredictionSet& predictions, std::size_t workers = 1) {
  return build_index(predictions.entries(), workers);
}

/// Ids whose captions contain every term. Terms are run through the
/// tokenizer first; nothing left after tokenization is a QueryError.
inline std::vector<std::string> query(const InvertedIndex& index, const std::vector<std::string>& terms) {
  std::vector<std::string> tokens;
  for (const auto& t : terms)
    for (auto& tok : tokenize(t).tokens) tokens.push_back(std::move(tok));
  if (tokens.empty()) throw QueryError("query has no terms after tokenization");
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());

  std::vector<const Postings*> lists;
  for (const auto& t : tokens) lists.push_back(&index.lookup(t));
  std::sort(lists.begin(), lists.end(), [](const Postings* a, const Postings* b) { return a->size() < b->size(); });

  Postings result = *lists.front();
  for (std::size_t i = 1; i < lists.size() && !result.empty(); ++i) {
    Postings next;
    std::set_intersection(result.begin(), result.end(), lists[i]->begin(), lists[i]->end(), std::back_inserter(next));
    result = std::move(next);
  }
  return result;
}

inline nlohmann::ordered_json to_json(const InvertedIndex& index) {
  nlohmann::ordered_json j;
  j["version"] = index.version();
  j["doc_count"] = index.doc_count();
  auto postings = nlohmann::ordered_json::object();
  for (const auto& [tok, ids] : index.postings()) postings[tok] = ids;
  j["postings"] = std::move(postings);
  return j;
}

inline void write_index(const InvertedIndex& index, std::ostream& out) { out << to_json(index).dump() << '\n'; }

inline void save_index(const InvertedIndex& index, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  write_index(index, out);
  detail::write_or_throw(out, path);
}

inline InvertedIndex read_index(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::slurp(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("corrupt index: ") + e.what(), 0, e.byte);
  }
  if (!j.is_object()) throw FormatError("corrupt index: not a JSON object");
  auto v = j.find("version");
  if (v == j.end() || !v->is_number_integer()) throw FormatError("corrupt index: missing version");
  if (v->get<long long>() != kIndexFormatVersion)
    throw IncompatibleVersionError("index format version " + std::to_string(v->get<long long>()) +
                                   " is not supported (expected " + std::to_string(kIndexFormatVersion) + ")");
  auto dc = j.find("doc_count");
  auto ps = j.find("postings");
  if (dc == j.end() || !dc->is_number_unsigned()) throw FormatError("corrupt index: bad doc_count");
  if (ps == j.end() || !ps->is_object()) throw FormatError("corrupt index: bad postings");

  std::map<std::string, Postings> postings;
  std::set<std::string> all_ids;
  for (const auto& [tok, ids] : ps->items()) {
    if (!ids.is_array()) throw FormatError("corrupt index: postings for '" + tok + "' is not an array");
    Postings list;
    for (const auto& id : ids) {
      if (!id.is_string()) throw FormatError("corrupt index: non-string id under '" + tok + "'");
      auto s = id.get<std::string>();
      if (!list.empty() && !(list.back() < s))
        throw FormatError("corrupt index: postings for '" + tok + "' not strictly sorted");
      all_ids.insert(s);
      list.push_back(std::move(s));
    }
    postings.emplace(tok, std::move(list));
  }
  const auto doc_count = dc->get<std::size_t>();
  if (all_ids.size() > doc_count) throw FormatError("corrupt index: more distinct ids than doc_count");
  return InvertedIndex(std::move(postings), doc_count);
}

inline InvertedIndex load_index(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_index(in);
}

}  // namespace satcap
