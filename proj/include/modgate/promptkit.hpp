#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "modgate/digest.hpp"
#include "modgate/errors.hpp"
#include "modgate/taxonomy.hpp"
#include "modgate/text.hpp"

namespace modgate {

inline constexpr std::size_t kMaxReasoningWords = 20;

inline constexpr std::string_view kTargetOpen = "<<<COMMENT>>>";
inline constexpr std::string_view kTargetClose = "<<<END COMMENT>>>";

struct LabelScore {
  Category category = Category::Neutral;
  double confidence = 0.0;

  friend bool operator==(const LabelScore&, const LabelScore&) = default;
};

struct FewShotExample {
  std::string text;
  std::vector<LabelScore> labels;
  std::string reasoning;

  friend bool operator==(const FewShotExample&, const FewShotExample&) = default;
};

struct PromptSpec {
  std::string version_id;
  std::string role_text;
  std::string task_text;
  // Label shown to the model for each category; every entry canonicalizes
  // back to its category through the taxonomy.
  std::array<std::string, kCategoryCount> labels;
  std::array<std::string, kCategoryCount> definitions;
  std::vector<FewShotExample> examples;
  std::vector<std::string> guidelines;
  std::string output_format;
  std::optional<std::string> parent;
  std::string changelog;

  bool zero_shot() const noexcept { return examples.empty(); }
  const std::string& label(Category c) const { return labels[index_of(c)]; }
};

// Confidences are always printed with two decimals.
inline std::string format_confidence(double confidence) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", confidence);
  return buf;
}

// One answer line of the output grammar. The reason field is omitted when
// empty.
inline std::string format_label_line(std::string_view label, double confidence,
                                     std::string_view reason) {
  std::string line = "label: ";
  line += label;
  line += "; confidence: ";
  line += format_confidence(confidence);
  if (!reason.empty()) {
    line += "; reason: ";
    line += reason;
  }
  return line;
}

/// Backslash-escapes the comment so it can never contain a run of three
/// '<' or '>' characters, which keeps the sentinel lines unique. Every '\'
/// is doubled, so the mapping is invertible.
inline std::string escape_target(std::string_view text) {
  std::string out;
  out.reserve(text.size() + 8);
  for (std::size_t i = 0; i < text.size();) {
    char c = text[i];
    if (c == '\\') {
      out += "\\\\";
      ++i;
      continue;
    }
    if (c == '<' || c == '>') {
      std::size_t j = i;
      while (j < text.size() && text[j] == c) ++j;
      bool escape = (j - i) >= 3;
      for (; i < j; ++i) {
        if (escape) out += '\\';
        out += c;
      }
      continue;
    }
    out += c;
    ++i;
  }
  return out;
}

inline std::string unescape_target(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size()) {
      out += text[++i];
    } else {
      out += text[i];
    }
  }
  return out;
}

// The two halves of a rendered prompt; system + user is the full prompt.
struct PromptMessages {
  std::string system;  // role, task, definitions
  std::string user;    // examples, guidelines, output format, target

  std::string joined() const { return system + user; }
};

inline PromptMessages render_messages(const PromptSpec& spec, std::string_view comment_text) {
  PromptMessages m;
  std::string& s = m.system;
  s += "# Role\n";
  s += spec.role_text;
  s += "\n\n# Task\n";
  s += spec.task_text;
  s += "\n\n# Category definitions\n";
  for (std::size_t i = 0; i < kCategoryCount; ++i) {
    s += std::to_string(i + 1);
    s += ". ";
    s += spec.labels[i];
    s += ": ";
    s += spec.definitions[i];
    s += '\n';
  }
  s += '\n';

  std::string& u = m.user;
  if (!spec.examples.empty()) {
    u += "# Examples\n";
    for (std::size_t i = 0; i < spec.examples.size(); ++i) {
      const auto& ex = spec.examples[i];
      u += "Example ";
      u += std::to_string(i + 1);
      u += "\nComment: ";
      u += ex.text;
      u += "\nAnswer:\n";
      for (std::size_t k = 0; k < ex.labels.size(); ++k) {
        u += format_label_line(spec.label(ex.labels[k].category), ex.labels[k].confidence,
                               k == 0 ? std::string_view(ex.reasoning) : std::string_view());
        u += '\n';
      }
      u += '\n';
    }
  }
  u += "# Classification guidelines\n";
  for (const auto& g : spec.guidelines) {
    u += "- ";
    u += g;
    u += '\n';
  }
  u += "\n# Output format\n";
  u += spec.output_format;
  u += "\n\n# Comment to classify\n";
  u += kTargetOpen;
  u += '\n';
  u += escape_target(comment_text);
  u += '\n';
  u += kTargetClose;
  u += '\n';
  return m;
}

/// Renders role, task, the 12 definitions, examples, guidelines, output
/// format and the delimited target comment, in that order.
inline std::string render_prompt(const PromptSpec& spec, std::string_view comment_text) {
  return render_messages(spec, comment_text).joined();
}

// Recovers the target comment from a rendered prompt.
inline std::optional<std::string> extract_target(std::string_view rendered) {
  std::string open = "\n" + std::string(kTargetOpen) + "\n";
  std::string close = "\n" + std::string(kTargetClose) + "\n";
  auto b = rendered.find(open);
  if (b == std::string_view::npos || rendered.find(open, b + 1) != std::string_view::npos) {
    return std::nullopt;
  }
  b += open.size();
  auto e = rendered.find(close, b);
  if (e == std::string_view::npos) return std::nullopt;
  return unescape_target(rendered.substr(b, e - b));
}

inline std::string prompt_hash(const PromptSpec& spec, std::string_view comment_text) {
  return sha256_hex(render_prompt(spec, comment_text));
}

struct SpecDiff {
  bool role_changed = false;
  bool task_changed = false;
  bool output_format_changed = false;
  std::vector<Category> changed_definitions;
  std::vector<Category> renamed_labels;
  std::vector<std::string> added_examples;
  std::vector<std::string> removed_examples;
  std::vector<std::string> changed_examples;
  std::vector<std::string> added_guidelines;
  std::vector<std::string> removed_guidelines;
  std::size_t examples_before = 0;
  std::size_t examples_after = 0;

  bool empty() const noexcept {
    return !role_changed && !task_changed && !output_format_changed &&
           changed_definitions.empty() && renamed_labels.empty() && added_examples.empty() &&
           removed_examples.empty() && changed_examples.empty() && added_guidelines.empty() &&
           removed_guidelines.empty();
  }

  // One human-readable line per kind of change, e.g. "+8 examples".
  std::vector<std::string> summary() const {
    std::vector<std::string> out;
    auto count = [&](std::size_t n, char sign, const char* what) {
      if (n) out.push_back(std::string(1, sign) + std::to_string(n) + " " + what);
    };
    if (role_changed) out.emplace_back("role changed");
    if (task_changed) out.emplace_back("task changed");
    for (Category c : renamed_labels) out.push_back("renamed label " + std::string(name_of(c)));
    count(changed_definitions.size(), '~', "definitions");
    count(added_examples.size(), '+', "examples");
    count(removed_examples.size(), '-', "examples");
    count(changed_examples.size(), '~', "examples");
    if (examples_before != examples_after) {
      out.push_back("example count " + std::to_string(examples_before) + " -> " +
                    std::to_string(examples_after));
    }
    count(added_guidelines.size(), '+', "guidelines");
    count(removed_guidelines.size(), '-', "guidelines");
    if (output_format_changed) out.emplace_back("output format changed");
    return out;
  }
};

/// Structured change summary from `a` to `b`. Examples are matched by
/// comment text and guidelines by exact wording.
inline SpecDiff diff_specs(const PromptSpec& a, const PromptSpec& b) {
  SpecDiff d;
  d.role_changed = a.role_text != b.role_text;
  d.task_changed = a.task_text != b.task_text;
  d.output_format_changed = a.output_format != b.output_format;
  for (Category c : kAllCategories) {
    if (a.definitions[index_of(c)] != b.definitions[index_of(c)]) d.changed_definitions.push_back(c);
    if (a.labels[index_of(c)] != b.labels[index_of(c)]) d.renamed_labels.push_back(c);
  }
  std::map<std::string_view, const FewShotExample*> before;
  std::map<std::string_view, const FewShotExample*> after;
  for (const auto& e : a.examples) before.emplace(e.text, &e);
  for (const auto& e : b.examples) after.emplace(e.text, &e);
  for (const auto& e : b.examples) {
    auto it = before.find(e.text);
    if (it == before.end()) {
      d.added_examples.push_back(e.text);
    } else if (!(*it->second == e)) {
      d.changed_examples.push_back(e.text);
    }
  }
  for (const auto& e : a.examples) {
    if (!after.count(e.text)) d.removed_examples.push_back(e.text);
  }
  for (const auto& g : b.guidelines) {
    if (std::find(a.guidelines.begin(), a.guidelines.end(), g) == a.guidelines.end()) {
      d.added_guidelines.push_back(g);
    }
  }
  for (const auto& g : a.guidelines) {
    if (std::find(b.guidelines.begin(), b.guidelines.end(), g) == b.guidelines.end()) {
      d.removed_guidelines.push_back(g);
    }
  }
  d.examples_before = a.examples.size();
  d.examples_after = b.examples.size();
  return d;
}

namespace detail {

inline std::string spec_string(const nlohmann::json& j, const char* field,
                               const std::string& owner, bool required = true) {
  if (!j.contains(field) || j.at(field).is_null()) {
    if (required) throw SpecError(owner + ": missing field '" + field + "'");
    return {};
  }
  if (!j.at(field).is_string()) throw SpecError(owner + ": field '" + field + "' must be text");
  return j.at(field).get<std::string>();
}

inline void reject_sentinel(std::string_view text, const std::string& owner) {
  if (text.find("<<<") != std::string_view::npos || text.find(">>>") != std::string_view::npos) {
    throw SpecError(owner + ": text may not contain '<<<' or '>>>'");
  }
}

}  // namespace detail

/// Parses a prompt-spec document. See data/specs/ for the layout; the
/// fields are version_id, parent, changelog, role, task, labels (optional
/// per-category display overrides), definitions, examples, guidelines and
/// output_format.
inline PromptSpec parse_prompt_spec(std::string_view document, const Taxonomy& taxonomy) {
  auto j = nlohmann::json::parse(document, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw SpecError("prompt spec must be a JSON object");

  PromptSpec spec;
  spec.version_id = detail::spec_string(j, "version_id", "spec");
  if (spec.version_id.empty()) throw SpecError("spec: empty version_id");
  const std::string& who = spec.version_id;
  spec.role_text = detail::spec_string(j, "role", who);
  spec.task_text = detail::spec_string(j, "task", who);
  spec.output_format = detail::spec_string(j, "output_format", who);
  std::string parent = detail::spec_string(j, "parent", who, false);
  if (!parent.empty()) spec.parent = parent;
  spec.changelog = detail::spec_string(j, "changelog", who, false);
  if (spec.parent && trim(spec.changelog).empty()) {
    throw SpecError(who + ": changelog is mandatory when a parent is set");
  }

  auto resolve = [&](const std::string& raw, const std::string& where) {
    auto c = taxonomy.find(raw);
    if (!c) throw SpecError(who + ": unknown category '" + raw + "' in " + where);
    return *c;
  };

  for (Category c : kAllCategories) spec.labels[index_of(c)] = taxonomy.display_name(c);
  if (j.contains("labels")) {
    if (!j["labels"].is_object()) throw SpecError(who + ": 'labels' must be an object");
    for (const auto& [key, value] : j["labels"].items()) {
      Category c = resolve(key, "labels");
      if (!value.is_string()) throw SpecError(who + ": label for " + key + " must be text");
      std::string shown = value.get<std::string>();
      auto back = taxonomy.find(shown);
      if (!back || *back != c) {
        throw SpecError(who + ": label '" + shown + "' does not resolve to " +
                        std::string(name_of(c)));
      }
      spec.labels[index_of(c)] = shown;
    }
  }

  if (!j.contains("definitions") || !j["definitions"].is_object()) {
    throw SpecError(who + ": missing definitions");
  }
  std::array<bool, kCategoryCount> defined{};
  for (const auto& [key, value] : j["definitions"].items()) {
    Category c = resolve(key, "definitions");
    if (defined[index_of(c)]) {
      throw SpecError(who + ": duplicate definition for " + std::string(name_of(c)));
    }
    if (!value.is_string() || trim(value.get<std::string>()).empty()) {
      throw SpecError(who + ": empty definition for " + std::string(name_of(c)));
    }
    defined[index_of(c)] = true;
    spec.definitions[index_of(c)] = value.get<std::string>();
  }
  for (Category c : kAllCategories) {
    if (!defined[index_of(c)]) {
      throw SpecError(who + ": missing definition for " + std::string(name_of(c)));
    }
  }

  if (j.contains("examples")) {
    if (!j["examples"].is_array()) throw SpecError(who + ": 'examples' must be a list");
    std::size_t n = 0;
    for (const auto& e : j["examples"]) {
      ++n;
      std::string where = who + " example " + std::to_string(n);
      if (!e.is_object()) throw SpecError(where + ": must be an object");
      FewShotExample ex;
      ex.text = detail::spec_string(e, "text", where);
      if (trim(ex.text).empty()) throw SpecError(where + ": empty text");
      ex.reasoning = detail::spec_string(e, "reasoning", where);
      if (word_count(ex.reasoning) > kMaxReasoningWords) {
        throw SpecError(where + ": reasoning has " + std::to_string(word_count(ex.reasoning)) +
                        " words, limit is " + std::to_string(kMaxReasoningWords));
      }
      if (!e.contains("labels") || !e["labels"].is_array() || e["labels"].empty()) {
        throw SpecError(where + ": needs at least one label");
      }
      for (const auto& l : e["labels"]) {
        if (!l.is_object() || !l.contains("confidence") || !l["confidence"].is_number()) {
          throw SpecError(where + ": label needs category and numeric confidence");
        }
        LabelScore s{resolve(detail::spec_string(l, "category", where), where),
                     l["confidence"].get<double>()};
        if (!(s.confidence >= 0.0 && s.confidence <= 1.0)) {
          throw SpecError(where + ": confidence out of range [0,1]");
        }
        ex.labels.push_back(s);
      }
      detail::reject_sentinel(ex.text, where);
      detail::reject_sentinel(ex.reasoning, where);
      spec.examples.push_back(std::move(ex));
    }
  }

  if (j.contains("guidelines")) {
    if (!j["guidelines"].is_array()) throw SpecError(who + ": 'guidelines' must be a list");
    for (const auto& g : j["guidelines"]) {
      if (!g.is_string()) throw SpecError(who + ": guidelines must be text");
      spec.guidelines.push_back(g.get<std::string>());
    }
  }

  detail::reject_sentinel(spec.role_text, who);
  detail::reject_sentinel(spec.task_text, who);
  detail::reject_sentinel(spec.output_format, who);
  for (const auto& d : spec.definitions) detail::reject_sentinel(d, who);
  for (const auto& g : spec.guidelines) detail::reject_sentinel(g, who);
  return spec;
}

inline PromptSpec load_prompt_spec(const std::filesystem::path& path, const Taxonomy& taxonomy) {
  return parse_prompt_spec(read_file(path), taxonomy);
}

/// All prompt versions found in a directory (`*.json`), keyed by version id.
class SpecStore {
 public:
  SpecStore() = default;

  static SpecStore load(const std::filesystem::path& dir, const Taxonomy& taxonomy) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
      throw FileError(dir.string(), "not a spec directory");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    SpecStore store;
    for (const auto& f : files) store.add(load_prompt_spec(f, taxonomy));
    store.check_lineage();
    return store;
  }

  void add(PromptSpec spec) {
    std::string id = spec.version_id;
    if (!specs_.emplace(id, std::move(spec)).second) {
      throw SpecError("duplicate version_id " + id);
    }
  }

  void check_lineage() const {
    for (const auto& [id, spec] : specs_) {
      if (spec.parent && !specs_.count(*spec.parent)) {
        throw SpecError(id + ": parent " + *spec.parent + " not found");
      }
    }
  }

  const PromptSpec& get(const std::string& version) const {
    auto it = specs_.find(version);
    if (it == specs_.end()) throw SpecError("unknown prompt version " + version);
    return it->second;
  }

  bool contains(const std::string& version) const { return specs_.count(version) != 0; }
  std::size_t size() const noexcept { return specs_.size(); }
  const std::map<std::string, PromptSpec>& all() const noexcept { return specs_; }

 private:
  std::map<std::string, PromptSpec> specs_;
};

}  // namespace modgate
