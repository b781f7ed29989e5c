#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "modgate/errors.hpp"
#include "modgate/taxonomy.hpp"

namespace modgate {

/// Gold-by-predicted counts over the 12 categories in canonical order.
class ConfusionMatrix {
 public:
  using Count = std::uint64_t;

  void add(Category gold, Category predicted, Count n = 1) noexcept {
    cells_[index_of(gold) * kCategoryCount + index_of(predicted)] += n;
  }

  Count at(Category gold, Category predicted) const noexcept {
    return cells_[index_of(gold) * kCategoryCount + index_of(predicted)];
  }

  Count row_sum(Category gold) const noexcept {
    Count s = 0;
    for (Category p : kAllCategories) s += at(gold, p);
    return s;
  }

  Count col_sum(Category predicted) const noexcept {
    Count s = 0;
    for (Category g : kAllCategories) s += at(g, predicted);
    return s;
  }

  Count diagonal() const noexcept {
    Count s = 0;
    for (Category c : kAllCategories) s += at(c, c);
    return s;
  }

  Count total() const noexcept {
    Count s = 0;
    for (Count v : cells_) s += v;
    return s;
  }

  // Row-major view, rows = gold.
  std::span<const Count> cells() const noexcept { return cells_; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::array<Count, kCategoryCount * kCategoryCount> cells_{};
};

inline ConfusionMatrix build_confusion(std::span<const std::pair<Category, Category>> records) {
  ConfusionMatrix m;
  for (const auto& [gold, predicted] : records) m.add(gold, predicted);
  return m;
}

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
  bool degenerate = false;  // some ratio was 0/0 and reported as 0
};

namespace detail {

inline double ratio(std::uint64_t num, std::uint64_t den, bool& degenerate) {
  if (den == 0) {
    degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

inline double harmonic(double p, double r, bool& degenerate) {
  if (p + r == 0.0) {
    degenerate = true;
    return 0.0;
  }
  return 2.0 * p * r / (p + r);
}

}  // namespace detail

inline std::array<ClassScores, kCategoryCount> per_class_prf(const ConfusionMatrix& m) {
  std::array<ClassScores, kCategoryCount> out{};
  for (Category c : kAllCategories) {
    ClassScores& s = out[index_of(c)];
    s.support = m.row_sum(c);
    s.precision = detail::ratio(m.at(c, c), m.col_sum(c), s.degenerate);
    s.recall = detail::ratio(m.at(c, c), s.support, s.degenerate);
    s.f1 = detail::harmonic(s.precision, s.recall, s.degenerate);
  }
  return out;
}

/// K-class Matthews correlation over a row-major K x K count matrix
/// (rows = gold). Returns 0.0 when either variance factor is zero.
inline double mcc_from_counts(std::span<const std::uint64_t> cells, std::size_t k) {
  if (cells.size() != k * k) throw Error("mcc_from_counts: matrix is not K x K");
  std::vector<double> gold(k, 0.0);
  std::vector<double> pred(k, 0.0);
  double correct = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double v = static_cast<double>(cells[i * k + j]);
      gold[i] += v;
      pred[j] += v;
      total += v;
      if (i == j) correct += v;
    }
  }
  double pt = 0.0;
  double pp = 0.0;
  double tt = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    pt += pred[i] * gold[i];
    pp += pred[i] * pred[i];
    tt += gold[i] * gold[i];
  }
  double s2 = total * total;
  double cov_pred = s2 - pp;
  double cov_gold = s2 - tt;
  if (cov_pred == 0.0 || cov_gold == 0.0) return 0.0;
  double r = (correct * total - pt) / std::sqrt(cov_pred * cov_gold);
  return std::clamp(r, -1.0, 1.0);
}

inline double multiclass_mcc(const ConfusionMatrix& m) {
  return mcc_from_counts(m.cells(), kCategoryCount);
}

inline double accuracy(const ConfusionMatrix& m) {
  if (m.total() == 0) throw EmptyMatrix();
  return static_cast<double>(m.diagonal()) / static_cast<double>(m.total());
}

// Pooled recall: sum of per-class true positives over the summed supports.
inline double micro_recall(const ConfusionMatrix& m) {
  std::uint64_t tp = 0;
  std::uint64_t support = 0;
  for (Category c : kAllCategories) {
    tp += m.at(c, c);
    support += m.row_sum(c);
  }
  if (support == 0) throw EmptyMatrix();
  return static_cast<double>(tp) / static_cast<double>(support);
}

struct BinaryCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  friend bool operator==(const BinaryCounts&, const BinaryCounts&) = default;
};

/// Harmful vs Neutral. Any harmful prediction on a harmful comment is a true
/// positive, even when the category is wrong.
inline BinaryCounts binary_collapse(const ConfusionMatrix& m) {
  BinaryCounts b;
  for (Category g : kAllCategories) {
    for (Category p : kAllCategories) {
      auto v = m.at(g, p);
      if (is_harmful(g)) {
        (is_harmful(p) ? b.tp : b.fn) += v;
      } else {
        (is_harmful(p) ? b.fp : b.tn) += v;
      }
    }
  }
  return b;
}

struct BinaryScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
  bool degenerate = false;
};

inline double binary_mcc(const BinaryCounts& c, bool& degenerate) {
  double tp = static_cast<double>(c.tp);
  double fp = static_cast<double>(c.fp);
  double fn = static_cast<double>(c.fn);
  double tn = static_cast<double>(c.tn);
  double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (den == 0.0) {
    degenerate = true;
    return 0.0;
  }
  return (tp * tn - fp * fn) / std::sqrt(den);
}

inline BinaryScores binary_prf(const BinaryCounts& c) {
  BinaryScores s;
  s.precision = detail::ratio(c.tp, c.tp + c.fp, s.degenerate);
  s.recall = detail::ratio(c.tp, c.tp + c.fn, s.degenerate);
  s.f1 = detail::harmonic(s.precision, s.recall, s.degenerate);
  s.mcc = binary_mcc(c, s.degenerate);
  return s;
}

struct MetricsReport {
  std::array<ClassScores, kCategoryCount> per_class{};
  std::uint64_t total = 0;
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double mcc = 0.0;
  BinaryCounts binary_counts;
  BinaryScores binary;
};

inline MetricsReport evaluate(const ConfusionMatrix& m) {
  MetricsReport r;
  r.total = m.total();
  r.accuracy = accuracy(m);
  r.per_class = per_class_prf(m);
  for (const auto& s : r.per_class) {
    r.macro_precision += s.precision;
    r.macro_recall += s.recall;
    r.macro_f1 += s.f1;
  }
  r.macro_precision /= kCategoryCount;
  r.macro_recall /= kCategoryCount;
  r.macro_f1 /= kCategoryCount;
  r.mcc = multiclass_mcc(m);
  r.binary_counts = binary_collapse(m);
  r.binary = binary_prf(r.binary_counts);
  return r;
}

/// Fraction as a percentage string rounded half-up to two decimals,
/// e.g. 0.982507 -> "98.25%".
inline std::string percent(double fraction) {
  double scaled = std::floor(fraction * 10000.0 + 0.5 + 1e-9);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", scaled / 100.0);
  return buf;
}

inline std::string fixed(double v, int decimals) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline nlohmann::ordered_json matrix_to_json(const ConfusionMatrix& m) {
  nlohmann::ordered_json j;
  j["axes"] = nlohmann::ordered_json::array();
  for (Category c : kAllCategories) j["axes"].push_back(name_of(c));
  j["counts"] = nlohmann::ordered_json::array();
  for (Category g : kAllCategories) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Category p : kAllCategories) row.push_back(m.at(g, p));
    j["counts"].push_back(row);
  }
  return j;
}

inline ConfusionMatrix matrix_from_json(const nlohmann::json& j) {
  ConfusionMatrix m;
  const auto& rows = j.at("counts");
  if (!rows.is_array() || rows.size() != kCategoryCount) throw Error("matrix must be 12 x 12");
  for (std::size_t g = 0; g < kCategoryCount; ++g) {
    if (!rows[g].is_array() || rows[g].size() != kCategoryCount) {
      throw Error("matrix must be 12 x 12");
    }
    for (std::size_t p = 0; p < kCategoryCount; ++p) {
      m.add(category_at(g), category_at(p), rows[g][p].get<std::uint64_t>());
    }
  }
  return m;
}

inline nlohmann::ordered_json metrics_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["total"] = r.total;
  j["accuracy"] = r.accuracy;
  j["macro_precision"] = r.macro_precision;
  j["macro_recall"] = r.macro_recall;
  j["macro_f1"] = r.macro_f1;
  j["mcc"] = r.mcc;
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (Category c : kAllCategories) {
    const auto& s = r.per_class[index_of(c)];
    per[std::string(name_of(c))] = {{"precision", s.precision},
                                    {"recall", s.recall},
                                    {"f1", s.f1},
                                    {"support", s.support},
                                    {"degenerate", s.degenerate}};
  }
  j["per_class"] = per;
  j["binary"] = {{"tp", r.binary_counts.tp},
                 {"fp", r.binary_counts.fp},
                 {"fn", r.binary_counts.fn},
                 {"tn", r.binary_counts.tn},
                 {"precision", r.binary.precision},
                 {"recall", r.binary.recall},
                 {"f1", r.binary.f1},
                 {"mcc", r.binary.mcc},
                 {"degenerate", r.binary.degenerate}};
  return j;
}

inline MetricsReport metrics_from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.total = j.at("total").get<std::uint64_t>();
  r.accuracy = j.at("accuracy").get<double>();
  r.macro_precision = j.value("macro_precision", 0.0);
  r.macro_recall = j.value("macro_recall", 0.0);
  r.macro_f1 = j.at("macro_f1").get<double>();
  r.mcc = j.at("mcc").get<double>();
  for (Category c : kAllCategories) {
    const auto& s = j.at("per_class").at(std::string(name_of(c)));
    auto& out = r.per_class[index_of(c)];
    out.precision = s.at("precision").get<double>();
    out.recall = s.at("recall").get<double>();
    out.f1 = s.at("f1").get<double>();
    out.support = s.at("support").get<std::uint64_t>();
    out.degenerate = s.value("degenerate", false);
  }
  const auto& b = j.at("binary");
  r.binary_counts = {b.at("tp").get<std::uint64_t>(), b.at("fp").get<std::uint64_t>(),
                     b.at("fn").get<std::uint64_t>(), b.at("tn").get<std::uint64_t>()};
  r.binary.precision = b.at("precision").get<double>();
  r.binary.recall = b.at("recall").get<double>();
  r.binary.f1 = b.at("f1").get<double>();
  r.binary.mcc = b.at("mcc").get<double>();
  r.binary.degenerate = b.value("degenerate", false);
  return r;
}

namespace detail {

inline std::string pad(std::string s, std::size_t width, bool right = false) {
  if (s.size() >= width) return s;
  std::string fill(width - s.size(), ' ');
  return right ? fill + s : s + fill;
}

}  // namespace detail

// Aligned plain-text rendering of a metrics report.
inline std::string metrics_to_text(const MetricsReport& r) {
  using detail::pad;
  std::string out;
  out += pad("category", 24) + pad("precision", 11, true) + pad("recall", 9, true) +
         pad("f1", 8, true) + pad("support", 9, true) + "\n";
  for (Category c : kAllCategories) {
    const auto& s = r.per_class[index_of(c)];
    out += pad(std::string(name_of(c)), 24) + pad(fixed(s.precision, 3), 11, true) +
           pad(fixed(s.recall, 3), 9, true) + pad(fixed(s.f1, 3), 8, true) +
           pad(std::to_string(s.support), 9, true) + (s.degenerate ? "  (degenerate)" : "") +
           "\n";
  }
  out += "\n";
  out += pad("comments", 24) + std::to_string(r.total) + "\n";
  out += pad("accuracy", 24) + percent(r.accuracy) + "\n";
  out += pad("macro F1", 24) + fixed(r.macro_f1, 3) + "\n";
  out += pad("MCC", 24) + fixed(r.mcc, 3) + "\n";
  out += "\nbinary (harmful vs Neutral)\n";
  out += pad("  tp / fp / fn / tn", 24) + std::to_string(r.binary_counts.tp) + " / " +
         std::to_string(r.binary_counts.fp) + " / " + std::to_string(r.binary_counts.fn) +
         " / " + std::to_string(r.binary_counts.tn) + "\n";
  out += pad("  precision", 24) + percent(r.binary.precision) + "\n";
  out += pad("  recall", 24) + percent(r.binary.recall) + "\n";
  out += pad("  F1", 24) + percent(r.binary.f1) + "\n";
  out += pad("  MCC", 24) + fixed(r.binary.mcc, 3) + "\n";
  return out;
}

}  // namespace modgate
