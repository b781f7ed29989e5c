#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modgate/errors.hpp"
#include "modgate/promptkit.hpp"
#include "modgate/response.hpp"
#include "modgate/taxonomy.hpp"
#include "modgate/text.hpp"

namespace modgate {

enum class Flag : std::uint8_t {
  LowNeutralConfidence,
  Truncated,
  CoercedFormat,
  MultiLabel,
  LongReasoning,
};

inline constexpr std::array<std::string_view, 5> kFlagNames = {
    "low_neutral_confidence", "truncated", "coerced_format", "multi_label", "long_reasoning"};

class FlagSet {
 public:
  void set(Flag f) noexcept { bits_ |= bit(f); }
  bool has(Flag f) const noexcept { return (bits_ & bit(f)) != 0; }
  bool empty() const noexcept { return bits_ == 0; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < kFlagNames.size(); ++i) {
      if (bits_ & (1u << i)) out.emplace_back(kFlagNames[i]);
    }
    return out;
  }

  friend bool operator==(const FlagSet&, const FlagSet&) = default;

 private:
  static constexpr std::uint32_t bit(Flag f) noexcept {
    return 1u << static_cast<unsigned>(f);
  }
  std::uint32_t bits_ = 0;
};

inline constexpr double kNeutralConfidenceFloor = 0.95;

// Confidence assigned when the tolerant fallback finds a label but no number.
inline constexpr double kFallbackConfidence = 0.5;

struct Classification {
  std::vector<LabelScore> labels;  // distinct categories, confidence descending
  std::string reasoning;
  FlagSet flags;
};

/// Max confidence wins; exact ties go to the earlier category in canonical
/// order, so a harmful label beats Neutral on a tie.
inline Category primary_label(const Classification& c) {
  if (c.labels.empty()) throw Error("primary_label: classification has no labels");
  const LabelScore* best = &c.labels.front();
  for (const auto& l : c.labels) {
    if (l.confidence > best->confidence ||
        (l.confidence == best->confidence && index_of(l.category) < index_of(best->category))) {
      best = &l;
    }
  }
  return best->category;
}

// Renders a classification in the output grammar: one line per label, the
// reasoning on the first line.
inline std::string serialize_classification(const Classification& c) {
  std::string reason = c.reasoning;
  std::replace(reason.begin(), reason.end(), '\n', ' ');
  std::replace(reason.begin(), reason.end(), '\r', ' ');
  std::string out;
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    out += format_label_line(name_of(c.labels[i].category), c.labels[i].confidence,
                             i == 0 ? std::string_view(reason) : std::string_view());
    out += '\n';
  }
  return out;
}

namespace detail {

inline char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Consumes `key` case-insensitively, then optional spaces and ':'.
inline bool eat_key(std::string_view& s, std::string_view key) {
  s = trim(s);
  if (s.size() < key.size()) return false;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (ascii_lower(s[i]) != key[i]) return false;
  }
  s.remove_prefix(key.size());
  s = trim(s);
  if (s.empty() || s.front() != ':') return false;
  s.remove_prefix(1);
  return true;
}

struct NumberParse {
  double value = 0.0;
  bool coerced = false;
};

inline std::optional<NumberParse> parse_confidence(std::string_view tok) {
  tok = trim(tok);
  bool percent = false;
  if (!tok.empty() && tok.back() == '%') {
    percent = true;
    tok.remove_suffix(1);
  }
  if (tok.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
  NumberParse n{v, percent};
  if (percent) n.value /= 100.0;
  if (std::isnan(n.value)) {
    n.value = 0.0;
    n.coerced = true;
  } else if (n.value < 0.0 || n.value > 1.0) {
    n.value = std::clamp(n.value, 0.0, 1.0);
    n.coerced = true;
  }
  return n;
}

struct LineParse {
  std::string label;
  NumberParse confidence;
  std::string reason;
};

// Strict grammar: label: <name>; confidence: <number>[; reason: <text>]
// An optional "- " or "* " bullet is tolerated.
inline std::optional<LineParse> parse_line(std::string_view line) {
  std::string_view s = trim(line);
  if (s.size() >= 2 && (s[0] == '-' || s[0] == '*') && s[1] == ' ') s.remove_prefix(2);
  if (!eat_key(s, "label")) return std::nullopt;
  auto semi = s.find(';');
  if (semi == std::string_view::npos) return std::nullopt;
  LineParse p;
  p.label = std::string(trim(s.substr(0, semi)));
  s.remove_prefix(semi + 1);
  if (!eat_key(s, "confidence")) return std::nullopt;
  semi = s.find(';');
  auto num = parse_confidence(s.substr(0, semi));
  if (!num) return std::nullopt;
  p.confidence = *num;
  if (semi != std::string_view::npos) {
    s.remove_prefix(semi + 1);
    if (!eat_key(s, "reason")) return std::nullopt;
    p.reason = std::string(trim(s));
  }
  return p;
}

inline bool starts_with_label_key(std::string_view line) {
  std::string_view s = trim(line);
  if (s.size() >= 2 && (s[0] == '-' || s[0] == '*') && s[1] == ' ') s.remove_prefix(2);
  if (s.size() < 5) return false;
  for (std::size_t i = 0; i < 5; ++i) {
    if (ascii_lower(s[i]) != "label"[i]) return false;
  }
  return true;
}

struct Found {
  Category category;
  std::size_t end;  // offset just past the match in the folded text
};

// Earliest whole-word occurrence of any taxonomy key; the longest key wins
// at equal offsets.
inline std::optional<Found> scan_for_label(std::string_view folded, const Taxonomy& taxonomy) {
  std::optional<std::size_t> best_pos;
  std::size_t best_len = 0;
  Category best_cat = Category::Neutral;
  for (const auto& [key, cat] : taxonomy.keys()) {
    std::size_t from = 0;
    while (true) {
      auto pos = folded.find(key, from);
      if (pos == std::string_view::npos) break;
      std::size_t end = pos + key.size();
      bool left_ok = pos == 0 || !is_word_char(folded[pos - 1]) || !is_word_char(key.front());
      bool right_ok =
          end >= folded.size() || !is_word_char(folded[end]) || !is_word_char(key.back());
      if (left_ok && right_ok) {
        if (!best_pos || pos < *best_pos || (pos == *best_pos && key.size() > best_len)) {
          best_pos = pos;
          best_len = key.size();
          best_cat = cat;
        }
        break;
      }
      from = pos + 1;
    }
  }
  if (!best_pos) return std::nullopt;
  return Found{best_cat, *best_pos + best_len};
}

// First decimal number (optionally with '%') at or after `from`.
inline std::optional<NumberParse> scan_for_number(std::string_view s, std::size_t from) {
  for (std::size_t i = from; i < s.size(); ++i) {
    bool digit = s[i] >= '0' && s[i] <= '9';
    bool lead_dot = s[i] == '.' && i + 1 < s.size() && s[i + 1] >= '0' && s[i + 1] <= '9';
    if (!digit && !lead_dot) continue;
    std::size_t j = i;
    bool seen_dot = false;
    while (j < s.size() && ((s[j] >= '0' && s[j] <= '9') || (s[j] == '.' && !seen_dot))) {
      if (s[j] == '.') seen_dot = true;
      ++j;
    }
    if (j < s.size() && s[j] == '%') ++j;
    std::string tok(s.substr(i, j - i));
    if (tok.back() == '.') tok.pop_back();
    if (lead_dot) tok.insert(tok.begin(), '0');
    return parse_confidence(tok);
  }
  return std::nullopt;
}

inline void finish(Classification& c) {
  // Deduplicate by category keeping the max confidence, then order by
  // confidence descending with canonical order breaking ties.
  std::vector<LabelScore> merged;
  for (const auto& l : c.labels) {
    auto it = std::find_if(merged.begin(), merged.end(),
                           [&](const LabelScore& m) { return m.category == l.category; });
    if (it == merged.end()) {
      merged.push_back(l);
    } else {
      it->confidence = std::max(it->confidence, l.confidence);
    }
  }
  std::sort(merged.begin(), merged.end(), [](const LabelScore& a, const LabelScore& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return index_of(a.category) < index_of(b.category);
  });
  c.labels = std::move(merged);
  if (c.labels.size() > 1) c.flags.set(Flag::MultiLabel);
  if (c.labels.size() == 1 && c.labels.front().category == Category::Neutral &&
      c.labels.front().confidence < kNeutralConfidenceFloor) {
    c.flags.set(Flag::LowNeutralConfidence);
  }
  if (word_count(c.reasoning) > kMaxReasoningWords) c.flags.set(Flag::LongReasoning);
}

}  // namespace detail

/// Parses model output into a classification.
///
/// Every non-blank line should follow the answer grammar. Lines that do not
/// are skipped and the result is flagged coerced_format; if no line parses,
/// the first recognizable label anywhere in the text (and the first number
/// after it) is used instead. Throws ParseError when no label is found.
inline Classification parse_response_text(std::string_view content, const Taxonomy& taxonomy) {
  Classification c;
  bool any_bad = false;
  std::string_view last_nonblank;
  std::vector<std::string> reasons;
  for (std::string_view line : split_lines(content)) {
    if (trim(line).empty()) continue;
    last_nonblank = line;
    auto p = detail::parse_line(line);
    std::optional<Category> cat;
    if (p) cat = taxonomy.find(p->label);
    if (!cat) {
      any_bad = true;
      continue;
    }
    c.labels.push_back({*cat, p->confidence.value});
    if (p->confidence.coerced) c.flags.set(Flag::CoercedFormat);
    if (!p->reason.empty() &&
        std::find(reasons.begin(), reasons.end(), p->reason) == reasons.end()) {
      reasons.push_back(p->reason);
    }
  }
  bool truncated = !last_nonblank.empty() && detail::starts_with_label_key(last_nonblank) &&
                   !detail::parse_line(last_nonblank);
  if (truncated) c.flags.set(Flag::Truncated);

  if (!c.labels.empty()) {
    if (any_bad) c.flags.set(Flag::CoercedFormat);
    for (std::size_t i = 0; i < reasons.size(); ++i) {
      if (i) c.reasoning += ' ';
      c.reasoning += reasons[i];
    }
  } else {
    std::string folded = casefold(content);
    auto found = detail::scan_for_label(folded, taxonomy);
    if (!found) throw ParseError("no recognizable label in response", std::string(content));
    auto num = detail::scan_for_number(folded, found->end);
    c.labels.push_back({found->category, num ? num->value : kFallbackConfidence});
    c.flags.set(Flag::CoercedFormat);
  }
  detail::finish(c);
  return c;
}

inline Classification parse_response(const RawResponse& raw, const Taxonomy& taxonomy) {
  return parse_response_text(raw.content, taxonomy);
}

}  // namespace modgate
