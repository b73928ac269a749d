#pragma once

// Reference-free caption evaluation: cross-tabulates the scene keywords a
// generated caption mentions against the image's known scene label, plus a
// table of descriptive attribute mentions per scene.
//
// Orientation is fixed: rows are ground-truth scenes, columns are mentioned
// scene keywords. Counts are presence-based (at most one per image per
// column). A caption mentioning two scenes increments two cells.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "satcap/corpus.hpp"
#include "satcap/detail/csv.hpp"
#include "satcap/detail/io.hpp"
#include "satcap/error.hpp"
#include "satcap/tokenize.hpp"

namespace satcap {

/// Trigger-token sets per scene, in configuration order.
class SceneKeywords {
 public:
  SceneKeywords() = default;

  /// An empty trigger set defaults to the scene name itself.
  void add(std::string scene, std::set<std::string> triggers = {}) {
    scene = detail::to_lower(detail::trim(scene));
    if (scene.empty()) throw ConfigError("empty scene name");
    if (index_.contains(scene)) throw ConfigError("scene '" + scene + "' configured twice");
    if (triggers.empty()) triggers.insert(scene);
    std::set<std::string> norm;
    for (const auto& t : triggers) {
      auto lt = detail::to_lower(detail::trim(t));
      if (lt.empty()) throw ConfigError("empty trigger for scene '" + scene + "'");
      norm.insert(std::move(lt));
    }
    index_.emplace(scene, scenes_.size());
    scenes_.push_back(std::move(scene));
    triggers_.push_back(std::move(norm));
  }

  const std::vector<std::string>& scenes() const noexcept { return scenes_; }
  const std::set<std::string>& triggers(std::size_t i) const { return triggers_.at(i); }
  bool contains(const std::string& scene) const { return index_.contains(scene); }
  std::size_t index_of(const std::string& scene) const { return index_.at(scene); }
  std::size_t size() const noexcept { return scenes_.size(); }

 private:
  std::vector<std::string> scenes_;
  std::vector<std::set<std::string>> triggers_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// TSV `scene<TAB>trigger1,trigger2,...`. A line with only a scene name uses
/// the name as its trigger.
inline SceneKeywords read_scene_keywords(std::istream& in) {
  SceneKeywords kw;
  std::size_t line_no = 0;
  for (const auto& line : detail::read_lines(in)) {
    ++line_no;
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto tab = line.find('\t');
    std::set<std::string> triggers;
    std::string scene;
    if (tab == std::string::npos) {
      scene = std::string(t);
    } else {
      scene = std::string(detail::trim(std::string_view(line).substr(0, tab)));
      std::string_view rest = std::string_view(line).substr(tab + 1);
      std::size_t start = 0;
      while (start <= rest.size()) {
        auto comma = rest.find(',', start);
        auto piece = detail::trim(rest.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (!piece.empty()) triggers.insert(detail::to_lower(piece));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
    }
    kw.add(std::move(scene), std::move(triggers));
  }
  return kw;
}

inline SceneKeywords load_scene_keywords(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_scene_keywords(in);
}

/// One token per line, order kept, duplicates dropped.
inline std::vector<std::string> read_attribute_list(std::istream& in) {
  std::vector<std::string> attrs;
  std::set<std::string> seen;
  for (const auto& line : detail::read_lines(in)) {
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto a = detail::to_lower(t);
    if (seen.insert(a).second) attrs.push_back(std::move(a));
  }
  return attrs;
}

inline std::vector<std::string> load_attribute_list(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_attribute_list(in);
}

struct MatchOptions {
  /// "airports" matches trigger "airport" and vice versa.
  bool fold_plural = true;
};

inline bool token_matches(const std::string& token, const std::string& trigger, const MatchOptions& opt = {}) {
  if (token == trigger) return true;
  if (!opt.fold_plural) return false;
  if (token.size() == trigger.size() + 1 && token.back() == 's' && token.starts_with(trigger)) return true;
  if (trigger.size() == token.size() + 1 && trigger.back() == 's' && trigger.starts_with(token)) return true;
  return false;
}

inline bool mentions(const std::unordered_set<std::string>& caption_tokens, const std::set<std::string>& triggers,
                     const MatchOptions& opt) {
  for (const auto& trig : triggers) {
    if (caption_tokens.contains(trig)) return true;
    if (opt.fold_plural) {
      if (caption_tokens.contains(trig + "s")) return true;
      if (trig.size() > 1 && trig.back() == 's' && caption_tokens.contains(trig.substr(0, trig.size() - 1))) return true;
    }
  }
  return false;
}

struct AttributeTable {
  std::vector<std::string> attributes;
  std::vector<std::string> scenes;
  /// counts[a][s]: images of true scene s whose caption contains attribute a.
  std::vector<std::vector<std::size_t>> counts;

  std::size_t at(const std::string& attribute, const std::string& scene) const {
    auto a = std::find(attributes.begin(), attributes.end(), attribute);
    auto s = std::find(scenes.begin(), scenes.end(), scene);
    if (a == attributes.end() || s == scenes.end()) return 0;
    return counts[static_cast<std::size_t>(a - attributes.begin())][static_cast<std::size_t>(s - scenes.begin())];
  }

  friend bool operator==(const AttributeTable&, const AttributeTable&) = default;
};

struct ConfusionReport {
  std::vector<std::string> scenes;
  /// scene_matrix[t][m]: images of true scene t whose caption mentions scene m.
  std::vector<std::vector<std::size_t>> scene_matrix;
  std::vector<std::size_t> per_scene_totals;
  double diagonal_accuracy = 0.0;
  AttributeTable attribute_table;
  /// Labeled images with no prediction; skipped.
  std::vector<std::string> missing_ids;

  std::size_t cell(const std::string& true_scene, const std::string& mentioned) const {
    auto t = std::find(scenes.begin(), scenes.end(), true_scene);
    auto m = std::find(scenes.begin(), scenes.end(), mentioned);
    if (t == scenes.end() || m == scenes.end()) return 0;
    return scene_matrix[static_cast<std::size_t>(t - scenes.begin())][static_cast<std::size_t>(m - scenes.begin())];
  }

  std::size_t total(const std::string& scene) const {
    auto t = std::find(scenes.begin(), scenes.end(), scene);
    return t == scenes.end() ? 0 : per_scene_totals[static_cast<std::size_t>(t - scenes.begin())];
  }
};

namespace detail {

inline double diagonal_accuracy(const std::vector<std::vector<std::size_t>>& m, const std::vector<std::size_t>& totals) {
  std::size_t diag = 0, all = 0;
  for (std::size_t i = 0; i < totals.size(); ++i) {
    diag += m[i][i];
    all += totals[i];
  }
  return all == 0 ? 0.0 : static_cast<double>(diag) / static_cast<double>(all);
}

inline std::unordered_set<std::string> token_set(const std::string& caption) {
  auto toks = tokenize(caption).tokens;
  return {std::make_move_iterator(toks.begin()), std::make_move_iterator(toks.end())};
}

}  // namespace detail

/// Scene-mention matrix. Every label scene must be configured.
inline ConfusionReport scene_matrix(const PredictionSet& predictions, const std::vector<LabelRecord>& labels,
                                    const SceneKeywords& keywords, const MatchOptions& opt = {}) {
  for (const auto& l : labels)
    if (!keywords.contains(l.scene)) throw ConfigError("scene '" + l.scene + "' has no keyword set");

  ConfusionReport r;
  r.scenes = keywords.scenes();
  const auto n = r.scenes.size();
  r.scene_matrix.assign(n, std::vector<std::size_t>(n, 0));
  r.per_scene_totals.assign(n, 0);

  for (const auto& l : labels) {
    const auto* caption = predictions.find(l.image_id);
    if (!caption) {
      r.missing_ids.push_back(l.image_id);
      continue;
    }
    const auto t = keywords.index_of(l.scene);
    ++r.per_scene_totals[t];
    const auto toks = detail::token_set(*caption);
    for (std::size_t m = 0; m < n; ++m)
      if (mentions(toks, keywords.triggers(m), opt)) ++r.scene_matrix[t][m];
  }
  std::sort(r.missing_ids.begin(), r.missing_ids.end());
  r.diagonal_accuracy = detail::diagonal_accuracy(r.scene_matrix, r.per_scene_totals);
  return r;
}

/// Attribute mentions per true scene. Scenes follow `scene_order` when given
/// (unlisted label scenes are appended lexicographically), otherwise
/// lexicographic.
inline AttributeTable attribute_table(const PredictionSet& predictions, const std::vector<LabelRecord>& labels,
                                      const std::vector<std::string>& attributes,
                                      const std::vector<std::string>& scene_order = {}, const MatchOptions& opt = {}) {
  AttributeTable t;
  t.attributes = attributes;
  t.scenes = scene_order;
  std::set<std::string> extra;
  for (const auto& l : labels)
    if (std::find(t.scenes.begin(), t.scenes.end(), l.scene) == t.scenes.end()) extra.insert(l.scene);
  t.scenes.insert(t.scenes.end(), extra.begin(), extra.end());

  std::unordered_map<std::string, std::size_t> scene_index;
  for (std::size_t i = 0; i < t.scenes.size(); ++i) scene_index.emplace(t.scenes[i], i);
  t.counts.assign(attributes.size(), std::vector<std::size_t>(t.scenes.size(), 0));

  for (const auto& l : labels) {
    const auto* caption = predictions.find(l.image_id);
    if (!caption) continue;
    const auto s = scene_index.at(l.scene);
    const auto toks = detail::token_set(*caption);
    for (std::size_t a = 0; a < attributes.size(); ++a)
      if (mentions(toks, {attributes[a]}, opt)) ++t.counts[a][s];
  }
  return t;
}

/// Scene matrix and attribute table together, sharing the configured scene order.
inline ConfusionReport evaluate(const PredictionSet& predictions, const std::vector<LabelRecord>& labels,
                                const SceneKeywords& keywords, const std::vector<std::string>& attributes,
                                const MatchOptions& opt = {}) {
  auto r = scene_matrix(predictions, labels, keywords, opt);
  r.attribute_table = attribute_table(predictions, labels, attributes, keywords.scenes(), opt);
  return r;
}

inline nlohmann::ordered_json to_json(const ConfusionReport& r) {
  nlohmann::ordered_json j;
  j["axes"] = {{"rows", "true_scene"}, {"columns", "mentioned_scene"}};
  j["scenes"] = r.scenes;
  j["scene_matrix"] = r.scene_matrix;
  j["per_scene_totals"] = r.per_scene_totals;
  j["diagonal_accuracy"] = r.diagonal_accuracy;
  j["attributes"] = r.attribute_table.attributes;
  j["attribute_scenes"] = r.attribute_table.scenes;
  j["attribute_table"] = r.attribute_table.counts;
  j["missing_ids"] = r.missing_ids;
  return j;
}

inline constexpr std::string_view kMatrixCsv = "confusion_matrix.csv";
inline constexpr std::string_view kAttributeCsv = "attribute_table.csv";

/// Header `true_scene\mentioned_scene,<scenes...>,total`.
inline void write_matrix_csv(const ConfusionReport& r, std::ostream& out) {
  out << "true_scene\\mentioned_scene";
  for (const auto& s : r.scenes) out << ',' << detail::csv_field(s);
  out << ",total\n";
  for (std::size_t i = 0; i < r.scenes.size(); ++i) {
    out << detail::csv_field(r.scenes[i]);
    for (auto v : r.scene_matrix[i]) out << ',' << v;
    out << ',' << r.per_scene_totals[i] << '\n';
  }
}

/// Header `attribute\true_scene,<scenes...>`.
inline void write_attribute_csv(const AttributeTable& t, std::ostream& out) {
  out << "attribute\\true_scene";
  for (const auto& s : t.scenes) out << ',' << detail::csv_field(s);
  out << '\n';
  for (std::size_t a = 0; a < t.attributes.size(); ++a) {
    out << detail::csv_field(t.attributes[a]);
    for (auto v : t.counts[a]) out << ',' << v;
    out << '\n';
  }
}

/// Writes confusion_matrix.csv and attribute_table.csv into `dir`.
inline void matrix_export(const ConfusionReport& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  {
    const auto p = dir / kMatrixCsv;
    auto out = detail::open_output(p);
    write_matrix_csv(r, out);
    detail::write_or_throw(out, p);
  }
  {
    const auto p = dir / kAttributeCsv;
    auto out = detail::open_output(p);
    write_attribute_csv(r.attribute_table, out);
    detail::write_or_throw(out, p);
  }
}

namespace detail {

inline std::size_t parse_count(const std::string& s, std::size_t line_no) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw FormatError("expected a count, got '" + s + "'", line_no);
  return static_cast<std::size_t>(std::stoull(s));
}

}  // namespace detail

/// Reads back the two CSVs written by `matrix_export`. Missing ids are not
/// part of the CSV form.
inline ConfusionReport read_matrix_export(const std::filesystem::path& dir) {
  ConfusionReport r;
  {
    auto in = detail::open_input(dir / kMatrixCsv);
    auto lines = detail::read_lines(in);
    if (lines.empty()) throw FormatError("empty confusion matrix CSV");
    auto header = detail::parse_csv_line(lines[0], 1);
    if (header.size() < 2 || header.back() != "total") throw FormatError("bad confusion matrix header", 1);
    r.scenes.assign(header.begin() + 1, header.end() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      auto f = detail::parse_csv_line(lines[i], i + 1);
      if (f.size() != header.size()) throw FormatError("wrong number of fields", i + 1);
      if (f[0] != r.scenes[r.scene_matrix.size()]) throw FormatError("row order differs from header", i + 1);
      std::vector<std::size_t> row;
      for (std::size_t k = 1; k + 1 < f.size(); ++k) row.push_back(detail::parse_count(f[k], i + 1));
      r.scene_matrix.push_back(std::move(row));
      r.per_scene_totals.push_back(detail::parse_count(f.back(), i + 1));
    }
    if (r.scene_matrix.size() != r.scenes.size()) throw FormatError("confusion matrix is not square");
  }
  {
    auto in = detail::open_input(dir / kAttributeCsv);
    auto lines = detail::read_lines(in);
    if (lines.empty()) throw FormatError("empty attribute CSV");
    auto header = detail::parse_csv_line(lines[0], 1);
    r.attribute_table.scenes.assign(header.begin() + 1, header.end());
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      auto f = detail::parse_csv_line(lines[i], i + 1);
      if (f.size() != header.size()) throw FormatError("wrong number of fields", i + 1);
      r.attribute_table.attributes.push_back(f[0]);
      std::vector<std::size_t> row;
      for (std::size_t k = 1; k < f.size(); ++k) row.push_back(detail::parse_count(f[k], i + 1));
      r.attribute_table.counts.push_back(std::move(row));
    }
  }
  r.diagonal_accuracy = detail::diagonal_accuracy(r.scene_matrix, r.per_scene_totals);
  return r;
}

}  // namespace satcap
