#include <random>
#include <string>

#include <gtest/gtest.h>

#include "modgate/outparse.hpp"

using namespace modgate;
using C = Category;

namespace {

const Taxonomy& tax() {
  static const Taxonomy t = load_taxonomy(MODGATE_DATA_DIR "/taxonomy.json");
  return t;
}

Classification parse(std::string_view s) { return parse_response_text(s, tax()); }

}  // namespace

TEST(Parse, StrictSingleLine) {
  auto c = parse("label: Anti-LGBTQ+; confidence: 0.92; reason: slur aimed at a contributor");
  ASSERT_EQ(c.labels.size(), 1u);
  EXPECT_EQ(c.labels[0].category, C::AntiLGBTQ);
  EXPECT_DOUBLE_EQ(c.labels[0].confidence, 0.92);
  EXPECT_EQ(c.reasoning, "slur aimed at a contributor");
  EXPECT_TRUE(c.flags.empty());
}

TEST(Parse, MultiLabelSortedAndFlagged) {
  auto c = parse("label: Stereotyping; confidence: 0.6\nlabel: Dominance; confidence: 0.9; reason: r");
  ASSERT_EQ(c.labels.size(), 2u);
  EXPECT_EQ(c.labels[0].category, C::Dominance);
  EXPECT_TRUE(c.flags.has(Flag::MultiLabel));
  EXPECT_EQ(primary_label(c), C::Dominance);
}

TEST(Parse, DuplicateCategoryKeepsMaxConfidence) {
  auto c = parse("label: Damning; confidence: 0.3\nlabel: damning; confidence: 0.7");
  ASSERT_EQ(c.labels.size(), 1u);
  EXPECT_DOUBLE_EQ(c.labels[0].confidence, 0.7);
  EXPECT_FALSE(c.flags.has(Flag::MultiLabel));
}

TEST(Parse, HistoricalLabelNames) {
  EXPECT_EQ(parse("label: Victim Blaming; confidence: 0.8").labels[0].category, C::Dismissing);
  EXPECT_EQ(parse("LABEL : deflection ; CONFIDENCE : 80%").labels[0].category, C::Dismissing);
}

TEST(Parse, PercentAndOutOfRangeConfidence) {
  auto p = parse("label: Damning; confidence: 85%");
  EXPECT_DOUBLE_EQ(p.labels[0].confidence, 0.85);
  EXPECT_TRUE(p.flags.has(Flag::CoercedFormat));
  auto hi = parse("label: Damning; confidence: 7");
  EXPECT_DOUBLE_EQ(hi.labels[0].confidence, 1.0);
  EXPECT_TRUE(hi.flags.has(Flag::CoercedFormat));
  auto nan = parse("label: Damning; confidence: nan");
  EXPECT_EQ(nan.labels[0].confidence, 0.0);
}

TEST(Parse, BulletsAndNoiseLines) {
  auto c = parse("Here is my answer:\n- label: Discredit; confidence: 0.7; reason: x\n");
  EXPECT_EQ(c.labels[0].category, C::Discredit);
  EXPECT_TRUE(c.flags.has(Flag::CoercedFormat));
}

TEST(Parse, TruncatedLastLine) {
  auto c = parse("label: Discredit; confidence: 0.7; reason: x\nlabel: Damn");
  EXPECT_EQ(c.labels.size(), 1u);
  EXPECT_TRUE(c.flags.has(Flag::Truncated));
}

TEST(Parse, LowConfidenceNeutral) {
  EXPECT_TRUE(parse("label: Neutral; confidence: 0.94").flags.has(Flag::LowNeutralConfidence));
  EXPECT_FALSE(parse("label: Neutral; confidence: 0.95").flags.has(Flag::LowNeutralConfidence));
  EXPECT_FALSE(parse("label: Neutral; confidence: 0.5\nlabel: Damning; confidence: 0.2")
                   .flags.has(Flag::LowNeutralConfidence));
}

TEST(Parse, LongReasoningFlag) {
  auto c = parse("label: Damning; confidence: 0.9; reason: a b c d e f g h i j k l m n o p q r s t u");
  EXPECT_TRUE(c.flags.has(Flag::LongReasoning));
}

TEST(Parse, FallbackFindsEarliestLabelAndNumber) {
  auto c = parse("I think this is Sexual Harassment, maybe Damning. Confidence around 0.7.");
  ASSERT_EQ(c.labels.size(), 1u);
  EXPECT_EQ(c.labels[0].category, C::SexualHarassment);
  EXPECT_DOUBLE_EQ(c.labels[0].confidence, 0.7);
  EXPECT_TRUE(c.flags.has(Flag::CoercedFormat));
}

TEST(Parse, FallbackWithoutNumberUsesDefault) {
  auto c = parse("Clearly physical appearance.");
  EXPECT_EQ(c.labels[0].category, C::PhysicalAppearance);
  EXPECT_DOUBLE_EQ(c.labels[0].confidence, kFallbackConfidence);
}

TEST(Parse, FallbackRespectsWordBoundaries) {
  // "threatsome" must not match the "threats" alias.
  EXPECT_THROW(parse("threatsome words"), ParseError);
}

TEST(Parse, NoLabelThrowsWithRawText) {
  try {
    parse("I cannot help with that.");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.raw(), "I cannot help with that.");
  }
  EXPECT_THROW(parse(""), ParseError);
}

TEST(Primary, TieGoesToCanonicalOrder) {
  Classification c;
  c.labels = {{C::Neutral, 0.5}, {C::Damning, 0.5}, {C::Discredit, 0.5}};
  EXPECT_EQ(primary_label(c), C::Discredit);
  EXPECT_THROW(primary_label(Classification{}), Error);
}

TEST(Serialize, RoundTripsRandomClassifications) {
  std::mt19937 rng(21);
  for (int t = 0; t < 2000; ++t) {
    Classification c;
    std::size_t n = 1 + rng() % 3;
    for (std::size_t i = 0; i < n; ++i) {
      Category cat = category_at(rng() % kCategoryCount);
      bool dup = false;
      for (const auto& l : c.labels) dup |= l.category == cat;
      if (!dup) c.labels.push_back({cat, (rng() % 101) / 100.0});
    }
    c.reasoning = (rng() % 2) ? "" : "short reason " + std::to_string(t);
    auto back = parse(serialize_classification(c));
    auto expect = c;
    detail::finish(expect);
    ASSERT_EQ(back.labels, expect.labels);
    ASSERT_EQ(back.reasoning, expect.reasoning);
    ASSERT_EQ(primary_label(back), primary_label(expect));
  }
}

TEST(Fuzz, RandomBytesParseOrThrowParseError) {
  std::mt19937 rng(77);
  const std::string pieces[] = {"label", ":", ";", "confidence", "reason", "0.5", "%", "\n",
                                "Damning", "Anti-LGBTQ+", " ", "-", "nan", "1e309", "\xff"};
  for (int t = 0; t < 3000; ++t) {
    std::string s;
    for (std::size_t i = 0, n = rng() % 12; i < n; ++i) {
      if (rng() % 3 == 0) s += static_cast<char>(rng() % 256);
      else s += pieces[rng() % std::size(pieces)];
    }
    try {
      auto c = parse(s);
      ASSERT_FALSE(c.labels.empty());
      for (const auto& l : c.labels) ASSERT_TRUE(l.confidence >= 0.0 && l.confidence <= 1.0);
    } catch (const ParseError&) {
    }
  }
}

TEST(Flags, NamesInDeclarationOrder) {
  FlagSet f;
  f.set(Flag::MultiLabel);
  f.set(Flag::Truncated);
  EXPECT_EQ(f.names(), (std::vector<std::string>{"truncated", "multi_label"}));
}
