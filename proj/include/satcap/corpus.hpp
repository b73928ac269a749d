#pragma once

// Caption corpora, detection label sets and model prediction files.
//
// Two caption formats are read:
//   rsicd_json  { "images": [ { "filename", "split", "sentences": [ {"raw"} ], "class"? } ] }
//   jsonl       { "image_id", "split"?, "scene"?, "captions": [str, ...] } per line
// Labels are JSONL { "image_id", "scene", "objects": [str] } and predictions
// JSONL { "image_id", "caption" }. Unknown fields are ignored everywhere.
//
// Image ids, scene names and object names are lower-cased on ingest. Caption
// text is kept verbatim; normalization is the tokenizer's job.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "satcap/detail/io.hpp"
#include "satcap/error.hpp"
#include "satcap/tokenize.hpp"

namespace satcap {

enum class CaptionSource { human, generated, augmented };
enum class Split { train, dev, test, unassigned };
enum class CaptionFormat { rsicd_json, jsonl };

inline std::string_view to_string(CaptionSource s) {
  switch (s) {
    case CaptionSource::human: return "human";
    case CaptionSource::generated: return "generated";
    case CaptionSource::augmented: return "augmented";
  }
  return "human";
}

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
    case Split::unassigned: return "unassigned";
  }
  return "unassigned";
}

/// Unrecognized or missing split names map to `unassigned`.
inline Split parse_split(std::string_view name) {
  auto s = detail::to_lower(detail::trim(name));
  if (s == "train") return Split::train;
  if (s == "dev" || s == "val" || s == "valid" || s == "validation") return Split::dev;
  if (s == "test") return Split::test;
  return Split::unassigned;
}

inline std::optional<CaptionSource> parse_caption_source(std::string_view name) {
  if (name == "human") return CaptionSource::human;
  if (name == "generated") return CaptionSource::generated;
  if (name == "augmented") return CaptionSource::augmented;
  return std::nullopt;
}

inline std::optional<CaptionFormat> parse_caption_format(std::string_view name) {
  if (name == "rsicd_json" || name == "rsicd") return CaptionFormat::rsicd_json;
  if (name == "jsonl") return CaptionFormat::jsonl;
  return std::nullopt;
}

struct Caption {
  std::string image_id;
  std::string raw;
  CaptionSource source = CaptionSource::human;

  friend bool operator==(const Caption&, const Caption&) = default;
};

struct ImageRecord {
  std::string image_id;
  Split split = Split::unassigned;
  std::optional<std::string> scene_class;
  std::vector<Caption> captions;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// An ordered, immutable collection of image records. Transformations build
/// a new Corpus; nothing mutates one in place.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<ImageRecord> records, std::string provenance)
      : records_(std::move(records)), provenance_(std::move(provenance)) {
    for (std::size_t i = 0; i < records_.size(); ++i) index_.emplace(records_[i].image_id, i);
  }

  const std::vector<ImageRecord>& records() const noexcept { return records_; }
  const std::string& provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  std::size_t caption_count() const noexcept {
    std::size_t n = 0;
    for (const auto& r : records_) n += r.captions.size();
    return n;
  }

  /// First record with this id, or nullptr.
  const ImageRecord* find(std::string_view image_id) const {
    auto it = index_.find(std::string(image_id));
    return it == index_.end() ? nullptr : &records_[it->second];
  }

  /// Record-level equality; provenance is a label and does not participate.
  friend bool operator==(const Corpus& a, const Corpus& b) { return a.records_ == b.records_; }

 private:
  std::vector<ImageRecord> records_;
  std::string provenance_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct LabelRecord {
  std::string image_id;
  std::string scene;
  std::set<std::string> objects;

  friend bool operator==(const LabelRecord&, const LabelRecord&) = default;
};

/// Generated captions keyed by image id.
class PredictionSet {
 public:
  PredictionSet() = default;
  explicit PredictionSet(std::map<std::string, std::string> entries) : entries_(std::move(entries)) {}

  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  const std::string* find(const std::string& image_id) const {
    auto it = entries_.find(image_id);
    return it == entries_.end() ? nullptr : &it->second;
  }

  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;

 private:
  std::map<std::string, std::string> entries_;
};

// ---------------------------------------------------------------------------
// Validation

struct Finding {
  enum class Kind { empty_image_id, empty_caption, duplicate_id, no_captions, caption_count };

  Kind kind;
  std::string image_id;
  std::string message;
};

inline std::string_view to_string(Finding::Kind k) {
  switch (k) {
    case Finding::Kind::empty_image_id: return "empty_image_id";
    case Finding::Kind::empty_caption: return "empty_caption";
    case Finding::Kind::duplicate_id: return "duplicate_id";
    case Finding::Kind::no_captions: return "no_captions";
    case Finding::Kind::caption_count: return "caption_count";
  }
  return "unknown";
}

inline constexpr std::size_t kRsicdCaptionsPerImage = 5;

/// Report-only check. Empty captions, empty or duplicate ids and caption-less
/// records are always flagged; `strict_rsicd` also flags any record without
/// exactly five captions.
inline std::vector<Finding> validate(const Corpus& corpus, bool strict_rsicd) {
  std::vector<Finding> findings;
  std::unordered_set<std::string> seen;
  for (const auto& rec : corpus.records()) {
    if (detail::trim(rec.image_id).empty())
      findings.push_back({Finding::Kind::empty_image_id, rec.image_id, "record has an empty image id"});
    if (!seen.insert(rec.image_id).second)
      findings.push_back({Finding::Kind::duplicate_id, rec.image_id, "duplicate image id '" + rec.image_id + "'"});
    if (rec.captions.empty())
      findings.push_back({Finding::Kind::no_captions, rec.image_id, "record '" + rec.image_id + "' has no captions"});
    for (std::size_t i = 0; i < rec.captions.size(); ++i) {
      if (detail::trim(rec.captions[i].raw).empty())
        findings.push_back({Finding::Kind::empty_caption, rec.image_id,
                            "record '" + rec.image_id + "' caption " + std::to_string(i) + " is empty"});
    }
    if (strict_rsicd && !rec.captions.empty() && rec.captions.size() != kRsicdCaptionsPerImage)
      findings.push_back({Finding::Kind::caption_count, rec.image_id,
                          "record '" + rec.image_id + "' has " + std::to_string(rec.captions.size()) +
                              " captions, expected " + std::to_string(kRsicdCaptionsPerImage)});
  }
  return findings;
}

inline nlohmann::ordered_json findings_to_json(const std::vector<Finding>& findings) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& f : findings)
    arr.push_back({{"kind", to_string(f.kind)}, {"image_id", f.image_id}, {"message", f.message}});
  return arr;
}

// ---------------------------------------------------------------------------
// Ingest

namespace detail {

using json = nlohmann::json;

inline json parse_json_line(const std::string& line, std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed JSON: ") + e.what(), line_no, e.byte);
  }
}

inline const json& require_field(const json& obj, const char* name, std::size_t line_no,
                                 const std::string& where) {
  if (!obj.is_object()) throw FormatError(where + " is not a JSON object", line_no);
  auto it = obj.find(name);
  if (it == obj.end()) throw FormatError(where + " is missing field '" + name + "'", line_no);
  return *it;
}

inline std::string require_string(const json& obj, const char* name, std::size_t line_no,
                                  const std::string& where) {
  const auto& v = require_field(obj, name, line_no, where);
  if (!v.is_string()) throw FormatError(where + " field '" + name + "' must be a string", line_no);
  return v.get<std::string>();
}

inline std::optional<std::string> optional_string(const json& obj, const char* name, std::size_t line_no,
                                                  const std::string& where) {
  auto it = obj.find(name);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw FormatError(where + " field '" + name + "' must be a string", line_no);
  return it->get<std::string>();
}

/// Ingest-time invariants: anything `validate` reports outside strict mode is fatal here.
inline void enforce_ingest_invariants(const Corpus& corpus) {
  for (const auto& f : validate(corpus, false)) throw ValidationError(f.message);
}

inline Corpus read_rsicd_json(std::istream& in, std::string provenance, bool enforce) {
  auto text = slurp(in);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed RSICD JSON: ") + e.what(), 0, e.byte);
  }
  const auto& images = require_field(doc, "images", 0, "document");
  if (!images.is_array()) throw FormatError("'images' must be an array");

  std::vector<ImageRecord> records;
  records.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto where = "images[" + std::to_string(i) + "]";
    const auto& img = images[i];
    ImageRecord rec;
    rec.image_id = to_lower(trim(require_string(img, "filename", 0, where)));
    rec.split = parse_split(optional_string(img, "split", 0, where).value_or(""));
    if (auto cls = optional_string(img, "class", 0, where)) rec.scene_class = to_lower(trim(*cls));
    const auto& sentences = require_field(img, "sentences", 0, where);
    if (!sentences.is_array()) throw FormatError(where + ".sentences must be an array");
    for (std::size_t j = 0; j < sentences.size(); ++j) {
      auto raw = require_string(sentences[j], "raw", 0, where + ".sentences[" + std::to_string(j) + "]");
      rec.captions.push_back({rec.image_id, std::move(raw), CaptionSource::human});
    }
    records.push_back(std::move(rec));
  }
  Corpus corpus(std::move(records), std::move(provenance));
  if (enforce) enforce_ingest_invariants(corpus);
  return corpus;
}

inline Corpus read_captions_jsonl(std::istream& in, std::string provenance, bool enforce) {
  std::vector<ImageRecord> records;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(in)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto obj = parse_json_line(line, line_no);
    const std::string where = "record";
    ImageRecord rec;
    rec.image_id = to_lower(trim(require_string(obj, "image_id", line_no, where)));
    rec.split = parse_split(optional_string(obj, "split", line_no, where).value_or(""));
    if (auto scene = optional_string(obj, "scene", line_no, where)) rec.scene_class = to_lower(trim(*scene));
    const auto& caps = require_field(obj, "captions", line_no, where);
    if (!caps.is_array()) throw FormatError("'captions' must be an array", line_no);

    std::vector<CaptionSource> sources(caps.size(), CaptionSource::human);
    if (auto it = obj.find("sources"); it != obj.end() && it->is_array()) {
      if (it->size() != caps.size()) throw FormatError("'sources' length differs from 'captions'", line_no);
      for (std::size_t k = 0; k < it->size(); ++k) {
        auto src = (*it)[k].is_string() ? parse_caption_source((*it)[k].get<std::string>()) : std::nullopt;
        if (!src) throw FormatError("unknown caption source in 'sources'", line_no);
        sources[k] = *src;
      }
    }
    for (std::size_t k = 0; k < caps.size(); ++k) {
      if (!caps[k].is_string()) throw FormatError("'captions' entries must be strings", line_no);
      rec.captions.push_back({rec.image_id, caps[k].get<std::string>(), sources[k]});
    }
    records.push_back(std::move(rec));
  }
  Corpus corpus(std::move(records), std::move(provenance));
  if (enforce) enforce_ingest_invariants(corpus);
  return corpus;
}

}  // namespace detail

/// With `enforce_invariants` off, duplicate ids and empty captions are kept
/// so that `validate` can report them instead of ingest failing.
inline Corpus read_captions(std::istream& in, CaptionFormat format, std::string provenance,
                            bool enforce_invariants = true) {
  return format == CaptionFormat::rsicd_json
             ? detail::read_rsicd_json(in, std::move(provenance), enforce_invariants)
             : detail::read_captions_jsonl(in, std::move(provenance), enforce_invariants);
}

/// Loads a caption corpus. Provenance defaults to the file stem.
inline Corpus ingest_captions(const std::filesystem::path& path, CaptionFormat format,
                              std::optional<std::string> provenance = std::nullopt,
                              bool enforce_invariants = true) {
  auto in = detail::open_input(path);
  return read_captions(in, format, provenance.value_or(path.stem().string()), enforce_invariants);
}

/// One JSON object per record, in corpus order. `sources` is written only
/// when some caption is not human-authored.
inline void write_captions_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const auto& rec : corpus.records()) {
    nlohmann::ordered_json obj;
    obj["image_id"] = rec.image_id;
    if (rec.split != Split::unassigned) obj["split"] = to_string(rec.split);
    if (rec.scene_class) obj["scene"] = *rec.scene_class;
    auto caps = nlohmann::ordered_json::array();
    bool all_human = true;
    for (const auto& c : rec.captions) {
      caps.push_back(c.raw);
      all_human = all_human && c.source == CaptionSource::human;
    }
    obj["captions"] = std::move(caps);
    if (!all_human) {
      auto srcs = nlohmann::ordered_json::array();
      for (const auto& c : rec.captions) srcs.push_back(to_string(c.source));
      obj["sources"] = std::move(srcs);
    }
    out << obj.dump() << '\n';
  }
}

inline void save_captions_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  write_captions_jsonl(corpus, out);
  detail::write_or_throw(out, path);
}

inline std::vector<LabelRecord> read_labels(std::istream& in) {
  std::vector<LabelRecord> labels;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  for (const auto& line : detail::read_lines(in)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto obj = detail::parse_json_line(line, line_no);
    if (!obj.is_object()) throw FormatError("label line is not a JSON object", line_no);
    LabelRecord rec;
    rec.image_id = detail::to_lower(detail::trim(detail::require_string(obj, "image_id", line_no, "label")));
    auto scene = detail::optional_string(obj, "scene", line_no, "label");
    if (!scene || detail::trim(*scene).empty())
      throw ValidationError("label '" + rec.image_id + "' is missing a scene (line " + std::to_string(line_no) + ")");
    rec.scene = detail::to_lower(detail::trim(*scene));
    if (auto it = obj.find("objects"); it != obj.end() && !it->is_null()) {
      if (!it->is_array()) throw FormatError("'objects' must be an array", line_no);
      for (const auto& o : *it) {
        if (!o.is_string()) throw FormatError("'objects' entries must be strings", line_no);
        auto name = detail::to_lower(detail::trim(o.get<std::string>()));
        if (!name.empty()) rec.objects.insert(std::move(name));
      }
    }
    if (!seen.insert(rec.image_id).second)
      throw ValidationError("duplicate image id '" + rec.image_id + "' in labels (line " + std::to_string(line_no) + ")");
    labels.push_back(std::move(rec));
  }
  return labels;
}

inline std::vector<LabelRecord> ingest_labels(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_labels(in);
}

inline PredictionSet read_predictions(std::istream& in) {
  std::map<std::string, std::string> entries;
  std::size_t line_no = 0;
  for (const auto& line : detail::read_lines(in)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto obj = detail::parse_json_line(line, line_no);
    auto id = detail::to_lower(detail::trim(detail::require_string(obj, "image_id", line_no, "prediction")));
    auto caption = detail::require_string(obj, "caption", line_no, "prediction");
    if (id.empty()) throw ValidationError("prediction with empty image id (line " + std::to_string(line_no) + ")");
    if (detail::trim(caption).empty())
      throw ValidationError("prediction '" + id + "' has an empty caption (line " + std::to_string(line_no) + ")");
    if (!entries.emplace(id, std::move(caption)).second)
      throw ValidationError("duplicate image id '" + id + "' in predictions (line " + std::to_string(line_no) + ")");
  }
  return PredictionSet(std::move(entries));
}

inline PredictionSet ingest_predictions(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_predictions(in);
}

}  // namespace satcap
