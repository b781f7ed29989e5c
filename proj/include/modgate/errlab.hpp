#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "modgate/errors.hpp"
#include "modgate/evalkit.hpp"
#include "modgate/records.hpp"
#include "modgate/taxonomy.hpp"

namespace modgate {

struct RunRecord {
  std::string run_id;
  std::string prompt_version;
  std::string model_id;
  std::vector<CommentResult> results;  // may be empty for summary-only runs
  MetricsReport metrics;
};

inline RunRecord make_run_record(std::string run_id, std::vector<CommentResult> results) {
  if (results.empty()) throw EmptyMatrix();
  RunRecord run;
  run.run_id = std::move(run_id);
  run.prompt_version = results.front().prompt_version;
  run.model_id = results.front().model_id;
  run.metrics = evaluate(results_matrix(results));
  run.results = std::move(results);
  return run;
}

struct Confusion {
  Category gold;
  Category predicted;
  std::uint64_t count;

  friend bool operator==(const Confusion&, const Confusion&) = default;
};

// The k largest off-diagonal cells, largest first; ties in canonical
// (gold, predicted) order. Zero cells are never listed.
inline std::vector<Confusion> top_confusions(const ConfusionMatrix& m, std::size_t k) {
  if (k < 1) throw Error("top_confusions: k must be >= 1");
  std::vector<Confusion> cells;
  for (Category g : kAllCategories) {
    for (Category p : kAllCategories) {
      if (g != p && m.at(g, p) > 0) cells.push_back({g, p, m.at(g, p)});
    }
  }
  std::stable_sort(cells.begin(), cells.end(),
                   [](const Confusion& a, const Confusion& b) { return a.count > b.count; });
  if (cells.size() > k) cells.resize(k);
  return cells;
}

struct Misclassified {
  std::string id;
  Category gold;
  Category predicted;
  std::string reasoning;
  std::vector<std::string> flags;
};

struct MisclassificationReport {
  std::string run_id;
  std::string prompt_version;
  std::string model_id;
  std::vector<Misclassified> false_positives;  // Neutral gold, harmful prediction
  std::vector<Misclassified> false_negatives;  // harmful gold, Neutral prediction
  std::vector<std::pair<Category, std::size_t>> fn_by_category;  // descending
  std::vector<Confusion> top;
  std::size_t parse_failed = 0;
};

/// Binary false positives and false negatives of a run, in run order, with
/// the model's reasoning kept verbatim.
inline MisclassificationReport misclassification_report(const RunRecord& run,
                                                        std::size_t top_k = 10) {
  MisclassificationReport rep;
  rep.run_id = run.run_id;
  rep.prompt_version = run.prompt_version;
  rep.model_id = run.model_id;
  std::array<std::size_t, kCategoryCount> fn_counts{};
  for (const auto& r : run.results) {
    if (r.parse_failed()) ++rep.parse_failed;
    bool gold_harmful = is_harmful(r.gold);
    bool pred_harmful = is_harmful(r.primary);
    if (gold_harmful == pred_harmful) continue;
    Misclassified e{r.id, r.gold, r.primary, r.reasoning, r.flags};
    if (gold_harmful) {
      ++fn_counts[index_of(r.gold)];
      rep.false_negatives.push_back(std::move(e));
    } else {
      rep.false_positives.push_back(std::move(e));
    }
  }
  for (Category c : kAllCategories) {
    if (fn_counts[index_of(c)] > 0) rep.fn_by_category.emplace_back(c, fn_counts[index_of(c)]);
  }
  std::stable_sort(rep.fn_by_category.begin(), rep.fn_by_category.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (!run.results.empty()) rep.top = top_confusions(results_matrix(run.results), top_k);
  return rep;
}

inline nlohmann::ordered_json report_to_json(const MisclassificationReport& rep) {
  auto entries = [](const std::vector<Misclassified>& list) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const auto& e : list) {
      a.push_back({{"id", e.id},
                   {"gold", name_of(e.gold)},
                   {"predicted", name_of(e.predicted)},
                   {"reasoning", e.reasoning},
                   {"flags", e.flags}});
    }
    return a;
  };
  nlohmann::ordered_json j;
  j["run_id"] = rep.run_id;
  j["prompt_version"] = rep.prompt_version;
  j["model_id"] = rep.model_id;
  j["false_positive_count"] = rep.false_positives.size();
  j["false_negative_count"] = rep.false_negatives.size();
  j["parse_failed"] = rep.parse_failed;
  j["false_negatives_by_category"] = nlohmann::ordered_json::array();
  for (const auto& [c, n] : rep.fn_by_category) {
    j["false_negatives_by_category"].push_back({{"category", name_of(c)}, {"count", n}});
  }
  j["top_confusions"] = nlohmann::ordered_json::array();
  for (const auto& t : rep.top) {
    j["top_confusions"].push_back(
        {{"gold", name_of(t.gold)}, {"predicted", name_of(t.predicted)}, {"count", t.count}});
  }
  j["false_positives"] = entries(rep.false_positives);
  j["false_negatives"] = entries(rep.false_negatives);
  return j;
}

namespace detail {

// Keeps table cells on one line and pipes from splitting columns.
inline std::string md_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n' || c == '\r') out += ' ';
    else out += c;
  }
  return out;
}

inline void md_entries(std::string& out, const std::vector<Misclassified>& list) {
  if (list.empty()) {
    out += "None.\n";
    return;
  }
  out += "| id | gold | predicted | reasoning |\n|---|---|---|---|\n";
  for (const auto& e : list) {
    out += "| " + md_cell(e.id) + " | " + std::string(name_of(e.gold)) + " | " +
           std::string(name_of(e.predicted)) + " | " + md_cell(e.reasoning) + " |\n";
  }
}

}  // namespace detail

inline std::string report_to_markdown(const MisclassificationReport& rep) {
  std::string out = "# Misclassifications: " + rep.run_id + "\n\n";
  out += "Prompt `" + rep.prompt_version + "`, model `" + rep.model_id + "`.\n\n";
  out += "- false positives: " + std::to_string(rep.false_positives.size()) + "\n";
  out += "- false negatives: " + std::to_string(rep.false_negatives.size()) + "\n";
  out += "- unparseable responses: " + std::to_string(rep.parse_failed) + "\n\n";
  out += "## False negatives by category\n\n";
  if (rep.fn_by_category.empty()) {
    out += "None.\n";
  } else {
    out += "| category | count |\n|---|---:|\n";
    for (const auto& [c, n] : rep.fn_by_category) {
      out += "| " + std::string(name_of(c)) + " | " + std::to_string(n) + " |\n";
    }
  }
  out += "\n## Top confusions\n\n";
  if (rep.top.empty()) {
    out += "None.\n";
  } else {
    out += "| gold | predicted | count |\n|---|---|---:|\n";
    for (const auto& t : rep.top) {
      out += "| " + std::string(name_of(t.gold)) + " | " + std::string(name_of(t.predicted)) +
             " | " + std::to_string(t.count) + " |\n";
    }
  }
  out += "\n## False positives\n\n";
  detail::md_entries(out, rep.false_positives);
  out += "\n## False negatives\n\n";
  detail::md_entries(out, rep.false_negatives);
  return out;
}

struct Comparison {
  std::vector<std::string> versions;  // sorted
  std::vector<std::string> models;    // first-seen order
  // mcc[v][m]; empty when that pair was not run.
  std::vector<std::vector<std::optional<double>>> mcc;

  struct Delta {
    std::string model;
    std::string from;
    std::string to;
    double delta;
  };
  std::vector<Delta> deltas;
};

/// MCC table keyed by (prompt_version, model_id), using only the stored
/// metrics of each run, plus per-model deltas between consecutive versions.
inline Comparison compare_runs(std::span<const RunRecord> runs) {
  if (runs.empty()) throw Error("compare_runs: no runs");
  Comparison cmp;
  std::vector<std::string> ids;
  for (const auto& r : runs) {
    if (std::find(ids.begin(), ids.end(), r.run_id) != ids.end()) {
      throw DuplicateRun("duplicate run_id " + r.run_id);
    }
    ids.push_back(r.run_id);
    if (std::find(cmp.versions.begin(), cmp.versions.end(), r.prompt_version) ==
        cmp.versions.end()) {
      cmp.versions.push_back(r.prompt_version);
    }
    if (std::find(cmp.models.begin(), cmp.models.end(), r.model_id) == cmp.models.end()) {
      cmp.models.push_back(r.model_id);
    }
  }
  std::sort(cmp.versions.begin(), cmp.versions.end());
  cmp.mcc.assign(cmp.versions.size(), std::vector<std::optional<double>>(cmp.models.size()));
  auto pos = [](const std::vector<std::string>& v, const std::string& s) {
    return static_cast<std::size_t>(std::find(v.begin(), v.end(), s) - v.begin());
  };
  for (const auto& r : runs) {
    auto& cell = cmp.mcc[pos(cmp.versions, r.prompt_version)][pos(cmp.models, r.model_id)];
    if (cell) {
      throw DuplicateRun("two runs for prompt " + r.prompt_version + " and model " + r.model_id);
    }
    cell = r.metrics.mcc;
  }
  for (std::size_t m = 0; m < cmp.models.size(); ++m) {
    std::optional<std::size_t> prev;
    for (std::size_t v = 0; v < cmp.versions.size(); ++v) {
      if (!cmp.mcc[v][m]) continue;
      if (prev) {
        cmp.deltas.push_back({cmp.models[m], cmp.versions[*prev], cmp.versions[v],
                              *cmp.mcc[v][m] - *cmp.mcc[*prev][m]});
      }
      prev = v;
    }
  }
  return cmp;
}

inline std::string signed_fixed(double v, int decimals) {
  std::string s = fixed(v, decimals);
  if (s.front() != '-') s.insert(s.begin(), '+');
  return s;
}

inline std::string comparison_to_text(const Comparison& cmp) {
  using detail::pad;
  std::size_t first = 16;
  for (const auto& v : cmp.versions) first = std::max(first, v.size() + 2);
  std::string out = pad("prompt_version", first);
  std::vector<std::size_t> widths;
  for (const auto& m : cmp.models) {
    widths.push_back(std::max<std::size_t>(m.size() + 2, 8));
    out += pad(m, widths.back(), true);
  }
  out += "\n";
  for (std::size_t v = 0; v < cmp.versions.size(); ++v) {
    out += pad(cmp.versions[v], first);
    for (std::size_t m = 0; m < cmp.models.size(); ++m) {
      out += pad(cmp.mcc[v][m] ? fixed(*cmp.mcc[v][m], 3) : "-", widths[m], true);
    }
    out += "\n";
  }
  if (!cmp.deltas.empty()) {
    out += "\nMCC change between consecutive prompt versions\n";
    for (const auto& d : cmp.deltas) {
      out += "  " + d.model + "  " + d.from + " -> " + d.to + "  " + signed_fixed(d.delta, 3) +
             "\n";
    }
  }
  return out;
}

/// Long format: prompt_version,model_id,mcc,delta. Values use the shortest
/// representation that reads back to the same double.
inline std::string comparison_to_csv(const Comparison& cmp) {
  auto num = [](double v) { return nlohmann::json(v).dump(); };
  std::string out = "prompt_version,model_id,mcc,delta\n";
  for (std::size_t m = 0; m < cmp.models.size(); ++m) {
    for (std::size_t v = 0; v < cmp.versions.size(); ++v) {
      if (!cmp.mcc[v][m]) continue;
      std::string delta;
      for (const auto& d : cmp.deltas) {
        if (d.model == cmp.models[m] && d.to == cmp.versions[v]) delta = num(d.delta);
      }
      out += cmp.versions[v] + "," + cmp.models[m] + "," + num(*cmp.mcc[v][m]) + "," + delta +
             "\n";
    }
  }
  return out;
}

/// Evaluation summary of a run: identity, flag counts, metrics and the
/// confusion matrix. compare_runs reads these back.
inline nlohmann::ordered_json evaluation_to_json(const RunRecord& run) {
  nlohmann::ordered_json j;
  j["run_id"] = run.run_id;
  j["prompt_version"] = run.prompt_version;
  j["model_id"] = run.model_id;
  j["comments"] = run.results.size();
  nlohmann::ordered_json flags = nlohmann::ordered_json::object();
  for (std::string_view f : kFlagNames) flags[std::string(f)] = 0;
  flags[std::string(kParseFailedFlag)] = 0;
  for (const auto& r : run.results) {
    for (const auto& f : r.flags) flags[f] = flags.value(f, 0) + 1;
  }
  j["flag_counts"] = flags;
  j["metrics"] = metrics_to_json(run.metrics);
  j["confusion"] = matrix_to_json(results_matrix(run.results));
  return j;
}

inline RunRecord evaluation_from_json(const nlohmann::json& j) {
  RunRecord run;
  try {
    run.run_id = j.at("run_id").get<std::string>();
    run.prompt_version = j.at("prompt_version").get<std::string>();
    run.model_id = j.at("model_id").get<std::string>();
    run.metrics = metrics_from_json(j.at("metrics"));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("evaluation report: ") + e.what());
  }
  return run;
}

inline std::string evaluation_to_text(const RunRecord& run) {
  std::size_t parse_failed = 0;
  std::size_t flagged = 0;
  for (const auto& r : run.results) {
    if (r.parse_failed()) ++parse_failed;
    if (!r.flags.empty()) ++flagged;
  }
  std::string out = "run " + run.run_id + "  prompt " + run.prompt_version + "  model " +
                    run.model_id + "\n";
  out += "flagged responses: " + std::to_string(flagged) +
         " (unparseable, scored as Neutral: " + std::to_string(parse_failed) + ")\n\n";
  out += metrics_to_text(run.metrics);
  return out;
}

}  // namespace modgate
