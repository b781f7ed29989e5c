#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "modgate/errors.hpp"
#include "modgate/evalkit.hpp"
#include "modgate/outparse.hpp"
#include "modgate/taxonomy.hpp"
#include "modgate/text.hpp"

namespace modgate {

// Flag written for responses the parser rejected. Such comments are scored
// as Neutral predictions with no labels.
inline constexpr std::string_view kParseFailedFlag = "parse_failed";

/// One classified comment of a run.
struct CommentResult {
  std::string id;
  Category gold = Category::Neutral;
  Category primary = Category::Neutral;
  std::vector<LabelScore> labels;
  std::string reasoning;
  std::vector<std::string> flags;
  std::string prompt_version;
  std::string model_id;
  bool from_cache = false;
  std::string raw;  // model output, verbatim

  bool has_flag(std::string_view f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
  }
  bool parse_failed() const { return has_flag(kParseFailedFlag); }
};

inline CommentResult make_result(std::string id, Category gold, const std::string& raw,
                                 const Taxonomy& taxonomy) {
  CommentResult r;
  r.id = std::move(id);
  r.gold = gold;
  r.raw = raw;
  try {
    Classification c = parse_response_text(raw, taxonomy);
    r.labels = c.labels;
    r.primary = primary_label(c);
    r.reasoning = c.reasoning;
    r.flags = c.flags.names();
  } catch (const ParseError&) {
    r.primary = Category::Neutral;
    r.flags.emplace_back(kParseFailedFlag);
  }
  return r;
}

inline nlohmann::ordered_json result_to_json(const CommentResult& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["gold"] = name_of(r.gold);
  j["labels"] = nlohmann::ordered_json::array();
  for (const auto& l : r.labels) {
    j["labels"].push_back({{"category", name_of(l.category)}, {"confidence", l.confidence}});
  }
  j["primary"] = name_of(r.primary);
  j["reasoning"] = r.reasoning;
  j["flags"] = r.flags;
  j["prompt_version"] = r.prompt_version;
  j["model_id"] = r.model_id;
  j["from_cache"] = r.from_cache;
  j["raw"] = r.raw;
  return j;
}

inline std::string serialize_results(const std::vector<CommentResult>& results) {
  std::string out;
  for (const auto& r : results) {
    out += result_to_json(r).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

namespace detail {

inline Category category_field(const nlohmann::json& j, const char* field, std::size_t line) {
  if (!j.contains(field) || !j[field].is_string()) {
    throw RecordError(line, RecordError::Cause::Malformed, std::string("missing ") + field);
  }
  auto c = category_from_name(j[field].get<std::string>());
  if (!c) throw RecordError(line, RecordError::Cause::BadLabel, j[field].get<std::string>());
  return *c;
}

}  // namespace detail

/// Reads a run file written by serialize_results. Labels must use
/// canonical category names.
inline std::vector<CommentResult> parse_results(std::string_view content) {
  using Cause = RecordError::Cause;
  std::vector<CommentResult> out;
  std::unordered_set<std::string> ids;
  std::size_t lineno = 0;
  for (std::string_view line : split_lines(content)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw RecordError(lineno, Cause::Malformed, "not a JSON object");
    try {
      CommentResult r;
      r.id = j.at("id").get<std::string>();
      r.gold = detail::category_field(j, "gold", lineno);
      r.primary = detail::category_field(j, "primary", lineno);
      for (const auto& l : j.value("labels", nlohmann::json::array())) {
        r.labels.push_back({detail::category_field(l, "category", lineno),
                            l.at("confidence").get<double>()});
      }
      r.reasoning = j.value("reasoning", std::string());
      r.flags = j.value("flags", std::vector<std::string>());
      r.prompt_version = j.value("prompt_version", std::string());
      r.model_id = j.value("model_id", std::string());
      r.from_cache = j.value("from_cache", false);
      r.raw = j.value("raw", std::string());
      if (!ids.insert(r.id).second) throw RecordError(lineno, Cause::DuplicateId, r.id);
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw RecordError(lineno, Cause::Malformed, e.what());
    }
  }
  return out;
}

inline std::vector<CommentResult> load_results(const std::filesystem::path& path) {
  return parse_results(read_file(path));
}

inline ConfusionMatrix results_matrix(const std::vector<CommentResult>& results) {
  ConfusionMatrix m;
  for (const auto& r : results) m.add(r.gold, r.primary);
  return m;
}

/// Provenance written next to a run file as `<run>.manifest.json`.
struct RunManifest {
  std::string run_id;
  std::string corpus_path;
  std::string corpus_digest;
  std::string prompt_version;
  std::string prompt_digest;
  nlohmann::ordered_json model;  // ModelConfig fields
  std::string cache_path;
  std::optional<std::uint64_t> seed;
  std::string started_at;
  std::string finished_at;
  std::uint64_t comments = 0;
  std::uint64_t provider_calls = 0;
  std::uint64_t cache_hits = 0;
};

inline std::filesystem::path manifest_path(const std::filesystem::path& run) {
  std::filesystem::path p = run;
  p += ".manifest.json";
  return p;
}

inline nlohmann::ordered_json manifest_to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["run_id"] = m.run_id;
  j["corpus"] = {{"path", m.corpus_path}, {"sha256", m.corpus_digest}};
  j["prompt_version"] = m.prompt_version;
  j["prompt_sha256"] = m.prompt_digest;
  j["model"] = m.model;
  j["cache"] = m.cache_path;
  j["seed"] = m.seed ? nlohmann::ordered_json(*m.seed) : nlohmann::ordered_json();
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["comments"] = m.comments;
  j["provider_calls"] = m.provider_calls;
  j["cache_hits"] = m.cache_hits;
  return j;
}

inline RunManifest manifest_from_json(const nlohmann::ordered_json& j) {
  RunManifest m;
  try {
    m.run_id = j.at("run_id").get<std::string>();
    m.corpus_path = j.at("corpus").value("path", std::string());
    m.corpus_digest = j.at("corpus").value("sha256", std::string());
    m.prompt_version = j.value("prompt_version", std::string());
    m.prompt_digest = j.value("prompt_sha256", std::string());
    m.model = j.value("model", nlohmann::ordered_json::object());
    m.cache_path = j.value("cache", std::string());
    if (j.contains("seed") && j["seed"].is_number_unsigned()) m.seed = j["seed"].get<std::uint64_t>();
    m.started_at = j.value("started_at", std::string());
    m.finished_at = j.value("finished_at", std::string());
    m.comments = j.value("comments", std::uint64_t{0});
    m.provider_calls = j.value("provider_calls", std::uint64_t{0});
    m.cache_hits = j.value("cache_hits", std::uint64_t{0});
  } catch (const nlohmann::ordered_json::exception& e) {
    throw SchemaError(std::string("manifest: ") + e.what());
  }
  return m;
}

inline RunManifest load_manifest(const std::filesystem::path& path) {
  auto j = nlohmann::ordered_json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw SchemaError(path.string() + ": not a JSON object");
  return manifest_from_json(j);
}

}  // namespace modgate
