#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "modgate/errors.hpp"
#include "modgate/text.hpp"

using namespace modgate;

TEST(Normalize, MapsTypographicPunctuation) {
  EXPECT_EQ(normalize_text("“quoted” ‘x’ a—b"), "\"quoted\" 'x' a-b");
}

TEST(Normalize, CollapsesWhitespaceAndTrims) {
  EXPECT_EQ(normalize_text("  a \t\n b  c  "), "a b c");
}

TEST(Normalize, DropsControlCharacters) {
  EXPECT_EQ(normalize_text(std::string("a\x01" "b\x7f" "c", 5)), "abc");
  EXPECT_EQ(normalize_text("line1\r\nline2"), "line1 line2");
}

TEST(Normalize, CollapsesRepeatedPunctuation) {
  EXPECT_EQ(normalize_text("what?!!!! no..."), "what?! no.");
  EXPECT_EQ(normalize_text("ok.."), "ok..");
  EXPECT_EQ(normalize_text("aaaa"), "aaaa");
}

TEST(Normalize, ComposesToNfc) {
  EXPECT_EQ(normalize_text("é"), "é");
  // A control character between base and mark must not block composition.
  EXPECT_EQ(normalize_text("e\x01́"), "é");
}

TEST(Normalize, EmptyAndBlank) {
  EXPECT_EQ(normalize_text(""), "");
  EXPECT_EQ(normalize_text(" \t\n"), "");
}

TEST(Normalize, InvalidUtf8BecomesReplacementCharacter) {
  EXPECT_EQ(normalize_text("a\xff" "b"), "a�" "b");
}

TEST(Normalize, IdempotentOnRandomInput) {
  std::mt19937 rng(1234);
  const std::u32string alphabet = U"ab .!?\t\n ’“́e—　\x01";
  for (int t = 0; t < 2000; ++t) {
    std::u32string s;
    std::size_t n = rng() % 24;
    for (std::size_t i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
    std::string utf8;
    for (char32_t c : s) {
      if (c < 0x80) {
        utf8 += static_cast<char>(c);
      } else if (c < 0x800) {
        utf8 += static_cast<char>(0xC0 | (c >> 6));
        utf8 += static_cast<char>(0x80 | (c & 0x3F));
      } else {
        utf8 += static_cast<char>(0xE0 | (c >> 12));
        utf8 += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
        utf8 += static_cast<char>(0x80 | (c & 0x3F));
      }
    }
    std::string once = normalize_text(utf8);
    ASSERT_EQ(normalize_text(once), once) << "input #" << t;
  }
}

TEST(Casefold, HandlesNonAscii) {
  EXPECT_EQ(casefold("ANTI-LGBTQ+"), "anti-lgbtq+");
  EXPECT_EQ(casefold("Straße"), "strasse");
}

TEST(WordCount, SplitsOnWhitespace) {
  EXPECT_EQ(word_count(""), 0u);
  EXPECT_EQ(word_count("  one two\tthree\n"), 3u);
}

TEST(SplitLines, StripsCarriageReturns) {
  auto lines = split_lines("a\r\nb\n\nc\r");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "a");
  EXPECT_EQ(lines[2], "");
  EXPECT_EQ(lines[3], "c");
  EXPECT_TRUE(split_lines("").empty());
}

TEST(Files, WriteThenReadRoundTrips) {
  auto dir = std::filesystem::temp_directory_path() / "modgate_text_test";
  std::filesystem::remove_all(dir);
  auto path = dir / "nested" / "out.txt";
  write_file(path, "hello\n");
  EXPECT_EQ(read_file(path), "hello\n");
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove_all(dir);
}

TEST(Files, MissingFileThrowsFileError) {
  try {
    read_file("/nonexistent/modgate/file");
    FAIL();
  } catch (const FileError& e) {
    EXPECT_EQ(e.path(), "/nonexistent/modgate/file");
  }
}
