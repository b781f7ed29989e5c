#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "modgate/errors.hpp"
#include "modgate/text.hpp"

namespace modgate {

// Canonical order doubles as the confusion-matrix axis order and the
// tie-break order for primary labels. Neutral is last.
enum class Category : std::uint8_t {
  Discredit,
  Stereotyping,
  SexualHarassment,
  ThreatsOfViolence,
  MaternalInsults,
  SexualObjectification,
  AntiLGBTQ,
  PhysicalAppearance,
  Dominance,
  Damning,
  Dismissing,
  Neutral,
};

inline constexpr std::size_t kCategoryCount = 12;
inline constexpr std::size_t kHarmfulCount = kCategoryCount - 1;

inline constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "Discredit",         "Stereotyping",          "SexualHarassment",
    "ThreatsOfViolence", "MaternalInsults",       "SexualObjectification",
    "AntiLGBTQ",         "PhysicalAppearance",    "Dominance",
    "Damning",           "Dismissing",            "Neutral",
};

inline constexpr std::array<Category, kCategoryCount> kAllCategories = {
    Category::Discredit,         Category::Stereotyping,
    Category::SexualHarassment,  Category::ThreatsOfViolence,
    Category::MaternalInsults,   Category::SexualObjectification,
    Category::AntiLGBTQ,         Category::PhysicalAppearance,
    Category::Dominance,         Category::Damning,
    Category::Dismissing,        Category::Neutral,
};

constexpr std::size_t index_of(Category c) noexcept {
  return static_cast<std::size_t>(c);
}

constexpr Category category_at(std::size_t i) noexcept {
  return kAllCategories[i];
}

constexpr std::string_view name_of(Category c) noexcept {
  return kCategoryNames[index_of(c)];
}

constexpr bool is_harmful(Category c) noexcept {
  return c != Category::Neutral;
}

// Exact match against canonical machine names only.
inline std::optional<Category> category_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryCount; ++i) {
    if (kCategoryNames[i] == name) return category_at(i);
  }
  return std::nullopt;
}

struct CategoryDef {
  Category category;
  std::string display_name;
  std::string definition;
  std::vector<std::string> behavioral_cues;
  std::vector<std::string> aliases;
};

/// The closed 12-category schema with label canonicalization.
///
/// Lookup keys are the case-folded canonical name, display name and every
/// alias of each category. A key may resolve to one category only.
class Taxonomy {
 public:
  explicit Taxonomy(std::vector<CategoryDef> defs) {
    std::array<bool, kCategoryCount> seen{};
    for (const auto& d : defs) {
      auto i = index_of(d.category);
      if (seen[i]) {
        throw SchemaError("duplicate category: " + std::string(name_of(d.category)));
      }
      seen[i] = true;
      if (trim(d.definition).empty()) {
        throw SchemaError("empty definition for " + std::string(name_of(d.category)));
      }
    }
    for (std::size_t i = 0; i < kCategoryCount; ++i) {
      if (!seen[i]) {
        throw SchemaError("missing category: " + std::string(kCategoryNames[i]));
      }
    }
    std::sort(defs.begin(), defs.end(), [](const auto& a, const auto& b) {
      return index_of(a.category) < index_of(b.category);
    });
    defs_ = std::move(defs);

    for (const auto& d : defs_) {
      add_key(name_of(d.category), d.category);
      if (!d.display_name.empty()) add_key(d.display_name, d.category);
      for (const auto& a : d.aliases) add_key(a, d.category);
    }
  }

  const std::vector<CategoryDef>& defs() const noexcept { return defs_; }

  const CategoryDef& def(Category c) const { return defs_[index_of(c)]; }

  const std::string& display_name(Category c) const {
    const auto& d = def(c);
    return d.display_name.empty() ? canonical_names_[index_of(c)] : d.display_name;
  }

  std::optional<Category> find(std::string_view raw) const {
    auto it = lookup_.find(casefold(trim(raw)));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  // Trims, case-folds and resolves names and aliases.
  Category canonicalize(std::string_view raw) const {
    if (auto c = find(raw)) return *c;
    throw UnknownLabel(std::string(raw));
  }

  // Every lookup key, for scanners that search free text for labels.
  const std::unordered_map<std::string, Category>& keys() const noexcept {
    return lookup_;
  }

 private:
  void add_key(std::string_view raw, Category c) {
    std::string key = casefold(trim(raw));
    if (key.empty()) throw SchemaError("empty alias for " + std::string(name_of(c)));
    auto [it, inserted] = lookup_.emplace(key, c);
    if (!inserted && it->second != c) {
      throw SchemaError("duplicate alias \"" + std::string(trim(raw)) + "\" used by " +
                        std::string(name_of(it->second)) + " and " +
                        std::string(name_of(c)));
    }
  }

  inline static const std::array<std::string, kCategoryCount> canonical_names_ = [] {
    std::array<std::string, kCategoryCount> out;
    for (std::size_t i = 0; i < kCategoryCount; ++i) out[i] = std::string(kCategoryNames[i]);
    return out;
  }();

  std::vector<CategoryDef> defs_;
  std::unordered_map<std::string, Category> lookup_;
};

inline Category canonicalize_label(std::string_view raw, const Taxonomy& taxonomy) {
  return taxonomy.canonicalize(raw);
}

namespace detail {

inline std::vector<std::string> string_list(const nlohmann::json& j, const char* field,
                                            std::string_view owner) {
  std::vector<std::string> out;
  if (!j.contains(field)) return out;
  const auto& v = j.at(field);
  if (!v.is_array()) {
    throw SchemaError(std::string(owner) + ": field '" + field + "' must be a list");
  }
  for (const auto& item : v) {
    if (!item.is_string()) {
      throw SchemaError(std::string(owner) + ": field '" + field + "' must hold strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

inline std::string required_string(const nlohmann::json& j, const char* field,
                                   std::string_view owner) {
  if (!j.contains(field) || !j.at(field).is_string()) {
    throw SchemaError(std::string(owner) + ": missing string field '" + field + "'");
  }
  return j.at(field).get<std::string>();
}

}  // namespace detail

/// Parses a schema document:
///
///     {"categories": [{"canonical_name": "...", "display_name": "...",
///                      "definition": "...", "cues": [...], "aliases": [...]}, ...]}
inline Taxonomy parse_taxonomy(std::string_view document) {
  nlohmann::json j = nlohmann::json::parse(document, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("categories") ||
      !j.at("categories").is_array()) {
    throw SchemaError("taxonomy document must be an object with a 'categories' list");
  }
  std::vector<CategoryDef> defs;
  for (const auto& rec : j.at("categories")) {
    if (!rec.is_object()) throw SchemaError("category record must be an object");
    std::string name = detail::required_string(rec, "canonical_name", "category");
    auto cat = category_from_name(name);
    if (!cat) throw SchemaError("unknown category: " + name);
    CategoryDef d{*cat,
                  rec.contains("display_name") ? detail::required_string(rec, "display_name", name)
                                               : std::string(name),
                  detail::required_string(rec, "definition", name),
                  detail::string_list(rec, "cues", name),
                  detail::string_list(rec, "aliases", name)};
    defs.push_back(std::move(d));
  }
  return Taxonomy(std::move(defs));
}

inline Taxonomy load_taxonomy(const std::filesystem::path& path) {
  return parse_taxonomy(read_file(path));
}

}  // namespace modgate
