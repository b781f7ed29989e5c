#include <set>
#include <string>

#include <gtest/gtest.h>

#include "modgate/corpus.hpp"

using namespace modgate;
using C = Category;

namespace {

const Taxonomy& tax() {
  static const Taxonomy t = load_taxonomy(MODGATE_DATA_DIR "/taxonomy.json");
  return t;
}

Corpus synthetic(std::size_t per_category, std::size_t neutral) {
  Corpus c;
  std::size_t n = 0;
  for (Category cat : kAllCategories) {
    std::size_t count = is_harmful(cat) ? per_category : neutral;
    for (std::size_t i = 0; i < count; ++i) {
      c.comments.push_back({"c" + std::to_string(n++), "text " + std::to_string(n), cat,
                            Source::SyntheticFixture});
    }
  }
  return c;
}

RecordError::Cause cause_of(std::string_view jsonl) {
  try {
    parse_corpus(jsonl, tax());
  } catch (const RecordError& e) {
    return e.cause();
  }
  ADD_FAILURE() << "no error for " << jsonl;
  return RecordError::Cause::Malformed;
}

}  // namespace

TEST(ParseCorpus, ReadsRecordsAndCanonicalizesLabels) {
  auto c = parse_corpus(
      "{\"id\":\"a\",\"text\":\"  hi   there \",\"label\":\"victim blaming\"}\n"
      "\n"
      "{\"id\":\"b\",\"text\":\"ok\",\"label\":\"None\",\"source\":\"augmented\"}\n",
      tax());
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.comments[0].text, "hi there");
  EXPECT_EQ(c.comments[0].gold, C::Dismissing);
  EXPECT_EQ(c.comments[0].source, Source::Original);
  EXPECT_EQ(c.comments[1].gold, C::Neutral);
  EXPECT_EQ(c.comments[1].source, Source::Augmented);
}

TEST(ParseCorpus, ErrorCauses) {
  using K = RecordError::Cause;
  EXPECT_EQ(cause_of(R"({"id":"a","text":"x","label":"Rude"})"), K::BadLabel);
  EXPECT_EQ(cause_of(R"({"id":"a","text":"x","label":["Damning","Discredit"]})"), K::BadLabel);
  EXPECT_EQ(cause_of(R"({"id":"a","text":" \u0001 ","label":"Damning"})"), K::EmptyText);
  EXPECT_EQ(cause_of("{\"id\":\"a\",\"text\":\"x\",\"label\":\"Damning\"}\n"
                     "{\"id\":\"a\",\"text\":\"y\",\"label\":\"Damning\"}"),
            K::DuplicateId);
  EXPECT_EQ(cause_of("not json"), K::Malformed);
  EXPECT_EQ(cause_of(R"({"text":"x","label":"Damning"})"), K::Malformed);
  EXPECT_EQ(cause_of(R"({"id":"a","text":"x","label":"Damning","source":"web"})"), K::Malformed);
}

TEST(ParseCorpus, ErrorReportsLineNumber) {
  try {
    parse_corpus("{\"id\":\"a\",\"text\":\"x\",\"label\":\"Damning\"}\n\n{\"id\":\"b\"}", tax());
    FAIL();
  } catch (const RecordError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(SerializeCorpus, RoundTrips) {
  Corpus c = synthetic(2, 3);
  c.comments[0].text = "quote \" and unicode é";
  Corpus back = parse_corpus(serialize_corpus(c), tax());
  EXPECT_EQ(back.comments, c.comments);
}

TEST(Stats, CountsPerCategory) {
  auto s = corpus_stats(synthetic(3, 7));
  EXPECT_EQ(s[index_of(C::Damning)], 3u);
  EXPECT_EQ(s[index_of(C::Neutral)], 7u);
}

TEST(Balance, ExactCountsAndStableOrder) {
  Corpus src = synthetic(60, 1200);
  Corpus out = balance_sample(src, 40, 1000, 11);
  EXPECT_EQ(out.size(), 1440u);
  EXPECT_EQ(out.seed, 11u);
  auto s = corpus_stats(out);
  for (Category c : kAllCategories) EXPECT_EQ(s[index_of(c)], is_harmful(c) ? 40u : 1000u);
  // Input order is kept: ids are increasing.
  for (std::size_t i = 1; i < out.size(); ++i) {
    EXPECT_LT(std::stoul(out.comments[i - 1].id.substr(1)), std::stoul(out.comments[i].id.substr(1)));
  }
  std::set<std::string> ids;
  for (const auto& c : out.comments) ids.insert(c.id);
  EXPECT_EQ(ids.size(), out.size());
}

TEST(Balance, SameSeedSameSampleDifferentSeedDiffers) {
  Corpus src = synthetic(60, 1200);
  EXPECT_EQ(balance_sample(src, 40, 1000, 3).comments, balance_sample(src, 40, 1000, 3).comments);
  EXPECT_NE(balance_sample(src, 40, 1000, 3).comments, balance_sample(src, 40, 1000, 4).comments);
}

TEST(Balance, ExactSupplyTakesEverything) {
  Corpus src = synthetic(40, 1000);
  EXPECT_EQ(balance_sample(src, 40, 1000, 1).comments, src.comments);
}

TEST(Balance, UnderfullNamesCategory) {
  Corpus src = synthetic(60, 1200);
  int dropped = 0;
  std::erase_if(src.comments, [&dropped](const LabeledComment& c) {
    return c.gold == C::Damning && dropped++ < 21;
  });
  try {
    balance_sample(src, 40, 1000, 1);
    FAIL();
  } catch (const Underfull& e) {
    EXPECT_STREQ(e.what(), "Underfull Damning 39/40");
  }
}

TEST(Balance, UnderfullNeutral) {
  EXPECT_THROW(balance_sample(synthetic(40, 999), 40, 1000, 1), Underfull);
}
