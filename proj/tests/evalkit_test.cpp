#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "modgate/evalkit.hpp"
#include "oracles.hpp"

using namespace modgate;
using C = Category;

namespace {

ConfusionMatrix diagonal_matrix(std::uint64_t n) {
  ConfusionMatrix m;
  for (Category c : kAllCategories) m.add(c, c, n);
  return m;
}

}  // namespace

TEST(ConfusionMatrix, SumsAndTotals) {
  ConfusionMatrix m;
  m.add(C::Discredit, C::Neutral, 3);
  m.add(C::Neutral, C::Neutral, 5);
  m.add(C::AntiLGBTQ, C::SexualHarassment);
  EXPECT_EQ(m.total(), 9u);
  EXPECT_EQ(m.row_sum(C::Discredit), 3u);
  EXPECT_EQ(m.col_sum(C::Neutral), 8u);
  EXPECT_EQ(m.diagonal(), 5u);
}

TEST(ConfusionMatrix, BuildFromPairs) {
  std::vector<std::pair<Category, Category>> recs = {
      {C::Damning, C::Damning}, {C::Damning, C::Neutral}, {C::Neutral, C::Neutral}};
  auto m = build_confusion(recs);
  EXPECT_EQ(m.at(C::Damning, C::Neutral), 1u);
  EXPECT_EQ(m.total(), 3u);
}

TEST(PerClass, ZeroDenominatorsAreZeroAndFlagged) {
  ConfusionMatrix m;
  m.add(C::Neutral, C::Neutral, 10);
  m.add(C::Discredit, C::Neutral, 2);
  auto s = per_class_prf(m);
  const auto& d = s[index_of(C::Discredit)];
  EXPECT_EQ(d.precision, 0.0);
  EXPECT_EQ(d.recall, 0.0);
  EXPECT_EQ(d.f1, 0.0);
  EXPECT_TRUE(d.degenerate);
  EXPECT_EQ(d.support, 2u);
  const auto& n = s[index_of(C::Neutral)];
  EXPECT_DOUBLE_EQ(n.precision, 10.0 / 12.0);
  EXPECT_DOUBLE_EQ(n.recall, 1.0);
  EXPECT_FALSE(n.degenerate);
}

TEST(Mcc, PerfectIsExactlyOne) {
  EXPECT_EQ(multiclass_mcc(diagonal_matrix(40)), 1.0);
  ConfusionMatrix m;
  m.add(C::Neutral, C::Neutral, 1000);
  m.add(C::Dismissing, C::Dismissing, 7);
  EXPECT_EQ(multiclass_mcc(m), 1.0);
}

TEST(Mcc, ConstantPredictorIsExactlyZero) {
  ConfusionMatrix m;
  for (Category c : kAllCategories) m.add(c, C::Neutral, 40);
  EXPECT_EQ(multiclass_mcc(m), 0.0);
}

TEST(Mcc, EmptyMatrixIsZero) { EXPECT_EQ(multiclass_mcc(ConfusionMatrix{}), 0.0); }

TEST(Mcc, RejectsNonSquareInput) {
  std::vector<std::uint64_t> cells(5, 1);
  EXPECT_THROW(mcc_from_counts(cells, 2), Error);
}

TEST(Mcc, MatchesPearsonOracleOnRandomMatrices) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t k = 2 + rng() % 11;
    std::vector<std::uint64_t> cells(k * k);
    for (auto& v : cells) v = rng() % 51;
    EXPECT_NEAR(mcc_from_counts(cells, k), oracle::pearson_one_hot_mcc(cells, k), 1e-9)
        << "k=" << k;
  }
}

TEST(Mcc, TwoByTwoMatchesClosedForm) {
  for (std::uint64_t tp = 0; tp < 6; ++tp)
    for (std::uint64_t fn = 0; fn < 6; ++fn)
      for (std::uint64_t fp = 0; fp < 6; ++fp)
        for (std::uint64_t tn = 0; tn < 6; ++tn) {
          std::vector<std::uint64_t> cells = {tp, fn, fp, tn};
          double want = oracle::binary_closed_form(tp, fn, fp, tn);
          EXPECT_NEAR(mcc_from_counts(cells, 2), want, 1e-12);
          bool deg = false;
          EXPECT_NEAR(binary_mcc({tp, fp, fn, tn}, deg), want, 1e-12);
        }
}

TEST(Mcc, InverseDiagonalIsMinusOne) {
  std::vector<std::uint64_t> cells = {0, 5, 5, 0};
  EXPECT_DOUBLE_EQ(mcc_from_counts(cells, 2), -1.0);
}

TEST(Accuracy, EmptyThrows) { EXPECT_THROW(accuracy(ConfusionMatrix{}), EmptyMatrix); }

TEST(Accuracy, AllNeutralOnBalancedCorpus) {
  ConfusionMatrix m;
  for (Category c : kAllCategories) m.add(c, C::Neutral, is_harmful(c) ? 40 : 1000);
  EXPECT_NEAR(accuracy(m), 1000.0 / 1440.0, 1e-12);
  EXPECT_EQ(multiclass_mcc(m), 0.0);
}

TEST(MicroRecall, EqualsAccuracy) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    ConfusionMatrix m;
    for (Category g : kAllCategories)
      for (Category p : kAllCategories) m.add(g, p, rng() % 9);
    if (m.total() == 0) continue;
    EXPECT_EQ(micro_recall(m), accuracy(m));
  }
}

TEST(Binary, CollapseCountsHarmfulConfusionsAsHits) {
  ConfusionMatrix m;
  m.add(C::Discredit, C::Damning, 4);
  m.add(C::Discredit, C::Neutral, 1);
  m.add(C::Neutral, C::Dominance, 2);
  m.add(C::Neutral, C::Neutral, 7);
  EXPECT_EQ(binary_collapse(m), (BinaryCounts{4, 2, 1, 7}));
}

TEST(Binary, ReferenceCounts) {
  auto s = binary_prf({337, 6, 103, 994});
  EXPECT_EQ(percent(s.precision), "98.25%");
  EXPECT_EQ(percent(s.recall), "76.59%");
  EXPECT_EQ(percent(s.f1), "86.08%");
  EXPECT_FALSE(s.degenerate);
}

TEST(Binary, NoPositivesIsDegenerate) {
  auto s = binary_prf({0, 0, 0, 10});
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(s.mcc, 0.0);
  EXPECT_TRUE(s.degenerate);
}

TEST(Format, PercentRoundsHalfUp) {
  EXPECT_EQ(percent(0.12345), "12.35%");
  EXPECT_EQ(percent(0.0), "0.00%");
  EXPECT_EQ(percent(1.0), "100.00%");
  EXPECT_EQ(fixed(0.50062, 3), "0.501");
}

TEST(Report, JsonRoundTrip) {
  ConfusionMatrix m = diagonal_matrix(3);
  m.add(C::Damning, C::Neutral, 2);
  auto r = evaluate(m);
  auto back = metrics_from_json(nlohmann::json::parse(metrics_to_json(r).dump()));
  EXPECT_EQ(back.mcc, r.mcc);
  EXPECT_EQ(back.total, r.total);
  EXPECT_EQ(back.binary_counts, r.binary_counts);
  EXPECT_EQ(back.per_class[index_of(C::Damning)].recall, r.per_class[index_of(C::Damning)].recall);
  auto mj = matrix_to_json(m);
  EXPECT_EQ(matrix_from_json(nlohmann::json::parse(mj.dump())), m);
}

TEST(Report, MatrixJsonRejectsWrongShape) {
  auto j = nlohmann::json::parse(R"({"counts": [[1, 2], [3, 4]]})");
  EXPECT_THROW(matrix_from_json(j), Error);
}

TEST(Report, TextMentionsHeadlineNumbers) {
  ConfusionMatrix m = diagonal_matrix(2);
  auto text = metrics_to_text(evaluate(m));
  EXPECT_NE(text.find("MCC"), std::string::npos);
  EXPECT_NE(text.find("1.000"), std::string::npos);
  EXPECT_NE(text.find("100.00%"), std::string::npos);
}
