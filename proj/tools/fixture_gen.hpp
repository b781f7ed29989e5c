#pragma once

// Deterministic generator for the offline fixtures under fixtures/.

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "modgate/modgate.hpp"

namespace modgate::fixtures {

inline constexpr std::size_t kSourcePerCategory = 60;
inline constexpr std::size_t kSourceNeutral = 1200;
inline constexpr std::uint64_t kEvalSeed = 2025;
inline constexpr std::string_view kModelId = "gpt-4o";

using Row = std::vector<std::pair<Category, std::uint64_t>>;
using Matrix = std::array<Row, kCategoryCount>;  // indexed by gold

// Best run (P19). Rows sum to 40 (1000 for Neutral); the target cells
// are 37/40 AntiLGBTQ, 34/40 Dismissing, 994 Neutral, SexualHarassment ->
// AntiLGBTQ 15, SexualObjectification -> Neutral 16, 6 binary false
// positives and 103 false negatives.
inline Matrix best_run_matrix() {
  using C = Category;
  return {{
      {{C::Discredit, 7}, {C::Neutral, 21}, {C::Damning, 5}, {C::Stereotyping, 4}, {C::Dismissing, 3}},
      {{C::Stereotyping, 3}, {C::Neutral, 8}, {C::Discredit, 10}, {C::SexualObjectification, 7},
       {C::Dominance, 6}, {C::Dismissing, 6}},
      {{C::SexualHarassment, 4}, {C::AntiLGBTQ, 15}, {C::Neutral, 5}, {C::SexualObjectification, 9},
       {C::Discredit, 7}},
      {{C::ThreatsOfViolence, 4}, {C::Neutral, 4}, {C::Damning, 16}, {C::Dominance, 9}, {C::Discredit, 7}},
      {{C::MaternalInsults, 4}, {C::Neutral, 6}, {C::Discredit, 10}, {C::PhysicalAppearance, 10},
       {C::Damning, 10}},
      {{C::SexualObjectification, 4}, {C::Neutral, 16}, {C::Discredit, 15}, {C::SexualHarassment, 5}},
      {{C::AntiLGBTQ, 37}, {C::Neutral, 2}, {C::SexualHarassment, 1}},
      {{C::PhysicalAppearance, 3}, {C::Neutral, 22}, {C::SexualObjectification, 8}, {C::Discredit, 7}},
      {{C::Dominance, 4}, {C::Neutral, 7}, {C::Discredit, 12}, {C::Dismissing, 10}, {C::Damning, 7}},
      {{C::Damning, 3}, {C::Neutral, 8}, {C::Discredit, 13}, {C::Dismissing, 10}, {C::Dominance, 6}},
      {{C::Dismissing, 34}, {C::Neutral, 4}, {C::Discredit, 2}},
      {{C::Neutral, 994}, {C::Dominance, 2}, {C::SexualHarassment, 1}, {C::SexualObjectification, 1},
       {C::Discredit, 1}, {C::Damning, 1}},
  }};
}

// Zero-shot baseline (P00) for the same model.
inline Matrix zero_shot_matrix() {
  using C = Category;
  return {{
      {{C::Discredit, 2}, {C::Neutral, 24}, {C::Damning, 6}, {C::Stereotyping, 4}, {C::Dominance, 4}},
      {{C::Stereotyping, 2}, {C::Neutral, 16}, {C::Discredit, 10}, {C::SexualObjectification, 6},
       {C::Dominance, 6}},
      {{C::SexualHarassment, 1}, {C::AntiLGBTQ, 16}, {C::Neutral, 11}, {C::SexualObjectification, 8},
       {C::Discredit, 4}},
      {{C::ThreatsOfViolence, 3}, {C::Neutral, 11}, {C::Damning, 14}, {C::Dominance, 8}, {C::Discredit, 4}},
      {{C::MaternalInsults, 1}, {C::Neutral, 14}, {C::Discredit, 9}, {C::PhysicalAppearance, 8},
       {C::Damning, 8}},
      {{C::SexualObjectification, 3}, {C::Neutral, 20}, {C::Discredit, 12}, {C::SexualHarassment, 5}},
      {{C::AntiLGBTQ, 25}, {C::Neutral, 11}, {C::SexualHarassment, 4}},
      {{C::PhysicalAppearance, 1}, {C::Neutral, 27}, {C::SexualObjectification, 6}, {C::Discredit, 6}},
      {{C::Dominance, 3}, {C::Neutral, 14}, {C::Discredit, 13}, {C::Damning, 10}},
      {{C::Damning, 1}, {C::Neutral, 16}, {C::Discredit, 13}, {C::Dominance, 10}},
      {{C::Neutral, 27}, {C::Discredit, 9}, {C::Dominance, 4}},
      {{C::Neutral, 988}, {C::Dominance, 4}, {C::SexualHarassment, 2}, {C::SexualObjectification, 2},
       {C::Discredit, 3}, {C::Damning, 1}},
  }};
}

// Reference MCC per (prompt stage, model) for the cross-model table.
struct TableCell {
  std::string_view version;
  std::string_view model;
  double mcc;
};

inline constexpr std::array<TableCell, 9> kMccTable = {{
    {"P00", "gpt-4o", 0.349},      {"P00", "llama-3.3", 0.354}, {"P00", "mistral-7b", 0.270},
    {"P01", "gpt-4o", 0.367},      {"P01", "llama-3.3", 0.343}, {"P01", "mistral-7b", 0.306},
    {"P19", "gpt-4o", 0.501},      {"P19", "llama-3.3", 0.451}, {"P19", "mistral-7b", 0.362},
}};

namespace detail {

inline constexpr std::array<std::string_view, 12> kTopics = {
    "the build script",      "the release notes",   "the parser module", "this pull request",
    "the CI configuration",  "the issue template",  "the test suite",    "the new API",
    "the docs site",         "the benchmark",       "the code review",   "the roadmap thread"};

inline constexpr std::array<std::string_view, 6> kOpeners = {
    "Comment", "Reply", "Review note", "Follow-up", "Issue comment", "Thread reply"};

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = modgate::detail::bounded(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

inline std::string number(std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, n);
  return buf;
}

}  // namespace detail

// Raw source corpus: 60 per harmful category and 1,200 Neutral, interleaved.
// Some texts carry typographic quotes and stray whitespace so loading
// exercises normalization.
inline std::string source_corpus_jsonl() {
  std::vector<Category> golds;
  for (Category c : kAllCategories) {
    golds.insert(golds.end(), is_harmful(c) ? kSourcePerCategory : kSourceNeutral, c);
  }
  std::mt19937_64 rng(7);
  detail::shuffle(golds, rng);
  std::string out;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    std::string text = std::string(detail::kOpeners[i % detail::kOpeners.size()]) + " " +
                       detail::number(i + 1, 4) + " on " +
                       std::string(detail::kTopics[(i * 7) % detail::kTopics.size()]) + ".";
    if (i % 9 == 0) text = "“" + text + "”";
    if (i % 13 == 0) text = "  " + text + "\t\n";
    if (i % 17 == 0) text += "!!!!";
    nlohmann::ordered_json j;
    j["id"] = "fx-" + detail::number(i + 1, 5);
    j["text"] = text;
    j["label"] = name_of(golds[i]);
    j["source"] = "synthetic-fixture";
    out += j.dump(-1, ' ', false) + "\n";
  }
  return out;
}

inline std::string model_config_text() {
  return "# Offline replay of recorded gpt-4o responses\n"
         "provider = replay\n"
         "model_id = gpt-4o\n"
         "temperature = 0.1\n"
         "top_p = 0.9\n"
         "max_tokens = 150\n"
         "concurrency_limit = 8\n"
         "replay_path = replay_gpt-4o.jsonl\n";
}

namespace detail {

inline std::string reason_for(Category predicted) {
  if (predicted == Category::Neutral) return "Ordinary project discussion with nothing personal.";
  return "Personal remark that fits this category.";
}

// Response text whose primary label is `predicted`. `k` picks the surface
// form so the replay exercises multi-label, loose and unparseable answers.
inline std::string response_for(const PromptSpec& spec, Category predicted, std::size_t k,
                                 bool allow_unparseable) {
  const std::string& shown = spec.label(predicted);
  if (predicted == Category::Neutral) {
    if (allow_unparseable) return "I am not able to classify this text.";
    if (k % 13 == 5) return format_label_line(shown, 0.9, reason_for(predicted)) + "\n";
  }
  if (k % 11 == 3) {
    return "Category: " + shown + ". Confidence about " + format_confidence(0.8) +
           ", since the remark is personal.";
  }
  if (k % 7 == 2) {
    Category other = predicted == Category::Discredit ? Category::Dismissing : Category::Discredit;
    return format_label_line(shown, 0.85, reason_for(predicted)) + "\n" +
           format_label_line(spec.label(other), 0.4, "") + "\n";
  }
  return format_label_line(shown, predicted == Category::Neutral ? 0.97 : 0.88,
                           reason_for(predicted)) +
         "\n";
}

}  // namespace detail

// Replay records `{digest, model_id, content}` such that classifying
// `corpus` with `spec` reproduces `matrix`. Predictions within a gold row
// are dealt in a seeded shuffled order.
inline std::string replay_records(const PromptSpec& spec, const Corpus& corpus,
                                  const Matrix& matrix, const ModelConfig& cfg,
                                  std::size_t unparseable) {
  std::array<std::vector<Category>, kCategoryCount> deck;
  for (Category g : kAllCategories) {
    for (const auto& [p, n] : matrix[index_of(g)]) deck[index_of(g)].insert(deck[index_of(g)].end(), n, p);
    std::string h = Sha256().field(spec.version_id).field(name_of(g)).hex();
    std::mt19937_64 rng(std::stoull(h.substr(0, 16), nullptr, 16));
    detail::shuffle(deck[index_of(g)], rng);
  }
  std::array<std::size_t, kCategoryCount> next{};
  std::string out;
  std::size_t neutral_seen = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& c = corpus.comments[i];
    auto& d = deck[index_of(c.gold)];
    std::size_t& pos = next[index_of(c.gold)];
    if (pos >= d.size()) throw Error("fixture matrix row smaller than corpus category");
    Category predicted = d[pos++];
    bool bad = false;
    if (predicted == Category::Neutral && c.gold == Category::Neutral) {
      bad = neutral_seen++ < unparseable;
    }
    nlohmann::ordered_json j;
    j["digest"] = request_digest(cfg, render_prompt(spec, c.text));
    j["model_id"] = cfg.model_id;
    j["content"] = detail::response_for(spec, predicted, i, bad);
    out += j.dump(-1, ' ', false) + "\n";
  }
  for (Category g : kAllCategories) {
    if (next[index_of(g)] != deck[index_of(g)].size()) {
      throw Error("fixture matrix row larger than corpus category");
    }
  }
  return out;
}

// Evaluation summaries carrying only the reference MCC values.
inline std::vector<std::pair<std::string, std::string>> table_reports() {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& cell : kMccTable) {
    RunRecord run;
    run.prompt_version = cell.version;
    run.model_id = cell.model;
    run.run_id = std::string(cell.version) + "-" + std::string(cell.model) + "-table";
    run.metrics.mcc = cell.mcc;
    files.emplace_back("table/" + run.run_id + ".json", evaluation_to_json(run).dump(2) + "\n");
  }
  return files;
}

/// Writes every fixture file under `out_dir`. Returns the relative paths
/// written, in order.
inline std::vector<std::string> write_all(const std::filesystem::path& data_dir,
                                          const std::filesystem::path& out_dir) {
  Taxonomy tax = load_taxonomy(data_dir / "taxonomy.json");
  SpecStore specs = SpecStore::load(data_dir / "specs", tax);
  std::vector<std::string> written;
  auto emit = [&](const std::string& rel, const std::string& content) {
    write_file(out_dir / rel, content);
    written.push_back(rel);
  };

  std::string source = source_corpus_jsonl();
  emit("source_corpus.jsonl", source);
  Corpus eval = balance_sample(parse_corpus(source, tax), 40, 1000, kEvalSeed);
  emit("eval_corpus.jsonl", serialize_corpus(eval));

  std::string conf = model_config_text();
  emit("gpt-4o.conf", conf);
  ModelConfig cfg = parse_model_config(conf, out_dir);
  emit("replay_gpt-4o.jsonl",
       replay_records(specs.get("P19"), eval, best_run_matrix(), cfg, 2) +
           replay_records(specs.get("P00"), eval, zero_shot_matrix(), cfg, 0));

  for (const auto& [rel, content] : table_reports()) emit(rel, content);
  return written;
}

}  // namespace modgate::fixtures
