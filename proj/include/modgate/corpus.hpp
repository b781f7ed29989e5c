#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "modgate/errors.hpp"
#include "modgate/taxonomy.hpp"
#include "modgate/text.hpp"

namespace modgate {

enum class Source { Original, Augmented, SyntheticFixture };

inline std::string_view source_name(Source s) noexcept {
  switch (s) {
    case Source::Original: return "original";
    case Source::Augmented: return "augmented";
    case Source::SyntheticFixture: return "synthetic-fixture";
  }
  return "original";
}

inline std::optional<Source> source_from_name(std::string_view s) {
  if (s == "original") return Source::Original;
  if (s == "augmented") return Source::Augmented;
  if (s == "synthetic-fixture") return Source::SyntheticFixture;
  return std::nullopt;
}

struct LabeledComment {
  std::string id;
  std::string text;  // normalized
  Category gold = Category::Neutral;
  Source source = Source::Original;

  friend bool operator==(const LabeledComment&, const LabeledComment&) = default;
};

struct Corpus {
  std::vector<LabeledComment> comments;
  std::optional<std::uint64_t> seed;  // set when produced by balance_sample

  std::size_t size() const noexcept { return comments.size(); }
  bool empty() const noexcept { return comments.empty(); }
};

using CategoryCounts = std::array<std::size_t, kCategoryCount>;

inline CategoryCounts corpus_stats(const Corpus& corpus) {
  CategoryCounts counts{};
  for (const auto& c : corpus.comments) ++counts[index_of(c.gold)];
  return counts;
}

/// Parses line-delimited records `{"id", "text", "label", "source"?}`.
/// Blank lines are skipped; line numbers in errors are 1-based.
inline Corpus parse_corpus(std::string_view content, const Taxonomy& taxonomy) {
  using Cause = RecordError::Cause;
  Corpus corpus;
  std::unordered_set<std::string> ids;
  std::size_t lineno = 0;
  for (std::string_view line : split_lines(content)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw RecordError(lineno, Cause::Malformed, "not a JSON object");
    }
    if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
      throw RecordError(lineno, Cause::Malformed, "missing id");
    }
    if (!j.contains("text") || !j["text"].is_string()) {
      throw RecordError(lineno, Cause::Malformed, "missing text");
    }
    if (!j.contains("label")) throw RecordError(lineno, Cause::Malformed, "missing label");
    if (!j["label"].is_string()) {
      // Multi-label or non-textual gold labels are not accepted.
      throw RecordError(lineno, Cause::BadLabel, "label must be a single string");
    }

    LabeledComment c;
    c.id = j["id"].get<std::string>();
    auto gold = taxonomy.find(j["label"].get<std::string>());
    if (!gold) throw RecordError(lineno, Cause::BadLabel, j["label"].get<std::string>());
    c.gold = *gold;
    c.text = normalize_text(j["text"].get<std::string>());
    if (c.text.empty()) throw RecordError(lineno, Cause::EmptyText, c.id);
    if (j.contains("source")) {
      auto src = j["source"].is_string() ? source_from_name(j["source"].get<std::string>())
                                         : std::nullopt;
      if (!src) throw RecordError(lineno, Cause::Malformed, "unknown source");
      c.source = *src;
    }
    if (!ids.insert(c.id).second) throw RecordError(lineno, Cause::DuplicateId, c.id);
    corpus.comments.push_back(std::move(c));
  }
  return corpus;
}

inline Corpus load_corpus(const std::filesystem::path& path, const Taxonomy& taxonomy) {
  return parse_corpus(read_file(path), taxonomy);
}

// Fixed field order, one record per line, '\n' terminated.
inline std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& c : corpus.comments) {
    nlohmann::ordered_json j;
    j["id"] = c.id;
    j["text"] = c.text;
    j["label"] = name_of(c.gold);
    j["source"] = source_name(c.source);
    out += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

inline void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  write_file(path, serialize_corpus(corpus));
}

namespace detail {

// Uniform integer in [0, bound) by rejection; avoids the
// implementation-defined behaviour of std::uniform_int_distribution so that
// samples are identical across standard libraries.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::mt19937_64::max() - (std::mt19937_64::max() % bound);
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace detail

/// Draws exactly `per_category` comments from every harmful category and
/// `neutral` Neutral comments, uniformly without replacement. Categories are
/// drawn in canonical order from one generator seeded with `seed`; the
/// result keeps the input order.
inline Corpus balance_sample(const Corpus& corpus, std::size_t per_category,
                             std::size_t neutral, std::uint64_t seed) {
  std::array<std::vector<std::size_t>, kCategoryCount> pools;
  for (std::size_t i = 0; i < corpus.comments.size(); ++i) {
    pools[index_of(corpus.comments[i].gold)].push_back(i);
  }
  for (Category c : kAllCategories) {
    std::size_t need = is_harmful(c) ? per_category : neutral;
    if (pools[index_of(c)].size() < need) {
      throw Underfull(std::string(name_of(c)), pools[index_of(c)].size(), need);
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<bool> keep(corpus.comments.size(), false);
  for (Category c : kAllCategories) {
    auto& pool = pools[index_of(c)];
    std::size_t need = is_harmful(c) ? per_category : neutral;
    // Partial Fisher-Yates: the first `need` slots become the sample.
    for (std::size_t k = 0; k < need; ++k) {
      std::size_t j = k + detail::bounded(rng, pool.size() - k);
      std::swap(pool[k], pool[j]);
      keep[pool[k]] = true;
    }
  }

  Corpus out;
  out.seed = seed;
  out.comments.reserve(kHarmfulCount * per_category + neutral);
  for (std::size_t i = 0; i < corpus.comments.size(); ++i) {
    if (keep[i]) out.comments.push_back(corpus.comments[i]);
  }
  return out;
}

}  // namespace modgate
