#include <gtest/gtest.h>

#include "amforge/ethiopic.hpp"
#include "amforge/utf8.hpp"
#include "support.hpp"

namespace et = amforge::ethiopic;
namespace u8 = amforge::utf8;

TEST(Utf8, RoundTripsEthiopicAndAscii) {
  const std::string s = "ሰላም hello ፀሐይ";
  EXPECT_TRUE(u8::is_valid(s));
  EXPECT_EQ(u8::encode(u8::decode(s)), s);
  EXPECT_EQ(u8::length("ሰላም"), 3u);
}

TEST(Utf8, InvalidByteBecomesReplacementAndAdvancesOne) {
  const std::string bad = "a\xFF" "b";
  EXPECT_FALSE(u8::is_valid(bad));
  const auto cps = u8::decode(bad);
  ASSERT_EQ(cps.size(), 3u);
  EXPECT_EQ(cps[1], U'�');
}

TEST(Normalize, UnmappedTextOnlyCollapsesWhitespace) {
  EXPECT_EQ(et::normalize("  ሰላም \t\n  ዓለም  "), "ሰላም አለም");
  EXPECT_EQ(et::normalize("abc   def"), "abc def");
  EXPECT_EQ(et::normalize(""), "");
  EXPECT_EQ(et::normalize(" \t "), "");
}

TEST(Normalize, HomophoneExamples) {
  EXPECT_EQ(et::normalize("ኃይል"), "ሀይል");
  EXPECT_EQ(et::normalize("ሐበሻ"), "ሀበሻ");
  EXPECT_EQ(et::normalize("ሠላም"), "ሰላም");
  EXPECT_EQ(et::normalize("ዐይን"), "አይን");
  EXPECT_EQ(et::normalize("ፀሐይ"), "ጸሀይ");
  EXPECT_EQ(et::normalize("ኸ"), "ሀ");
}

TEST(Normalize, TableValuesAreNeverKeys) {
  const auto& m = et::NormalizationTable::builtin().mapping();
  ASSERT_FALSE(m.empty());
  for (const auto& [from, to] : m) EXPECT_EQ(m.count(to), 0u) << std::hex << static_cast<int>(from);
}

TEST(Normalize, IdempotentOnRandomStrings) {
  support::Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto s = support::messy_ethiopic(rng);
    const auto once = et::normalize(s);
    ASSERT_EQ(et::normalize(once), once) << s;
  }
}

TEST(NormalizationTable, ParsesTwoColumnFile) {
  const auto t = et::NormalizationTable::parse("# comment\nሐ ሀ\n\nሠ\tሰ\r\n");
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(et::normalize("ሐሠ", t), "ሀሰ");
  EXPECT_EQ(et::normalize("ኀ", t), "ኀ");
}

TEST(NormalizationTable, RejectsChainsAndBadLines) {
  EXPECT_THROW(et::NormalizationTable::parse("ሐ ሀ\nሀ ለ\n"), amforge::DataError);
  EXPECT_THROW(et::NormalizationTable::parse("ሐ\n"), amforge::DataError);
  EXPECT_THROW(et::NormalizationTable::parse("ሐሐ ሀ\n"), amforge::DataError);
  EXPECT_THROW(et::NormalizationTable::load("/nonexistent/table.tsv"), amforge::DataError);
}

TEST(IsEthiopic, Examples) {
  EXPECT_FALSE(et::is_ethiopic("hello"));
  EXPECT_TRUE(et::is_ethiopic("ሰላም ዓለም።"));
  EXPECT_FALSE(et::is_ethiopic(""));
  EXPECT_FALSE(et::is_ethiopic(" ።!"));
  // 5 Ethiopic + 5 Latin letters: ratio exactly 0.5.
  const std::string half = "ሀለሐመሠabcde";
  EXPECT_TRUE(et::is_ethiopic(half, 0.5));
  EXPECT_FALSE(et::is_ethiopic(half, 0.6));
  EXPECT_THROW(et::is_ethiopic(half, 1.5), amforge::ValidationError);
}

TEST(WordTokenize, Examples) {
  using V = std::vector<std::string>;
  EXPECT_EQ(et::word_tokenize("ሀ ለ።"), (V{"ሀ", "ለ", "።"}));
  EXPECT_EQ(et::word_tokenize(""), V{});
  EXPECT_EQ(et::word_tokenize("a  b"), (V{"a", "b"}));
  EXPECT_EQ(et::word_tokenize("ሰላም፣ዓለም? yes!"), (V{"ሰላም", "፣", "ዓለም", "?", "yes", "!"}));
}

TEST(WordTokenize, JoinThenTokenizeIsFixedPoint) {
  support::Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const auto toks = et::word_tokenize(support::messy_ethiopic(rng));
    ASSERT_EQ(et::word_tokenize(support::join(toks)), toks);
  }
}

TEST(CharNgrams, Examples) {
  using M = et::NgramCounts;
  EXPECT_EQ(et::char_ngrams("abc", 2), (M{{"ab", 1}, {"bc", 1}}));
  EXPECT_EQ(et::char_ngrams("a b", 2), (M{{"ab", 1}}));
  EXPECT_TRUE(et::char_ngrams("ab", 3).empty());
  EXPECT_EQ(et::char_ngrams("aaa", 2), (M{{"aa", 2}}));
  EXPECT_THROW(et::char_ngrams("abc", 0), amforge::ValidationError);
}

TEST(CharNgrams, CountMatchesStrippedLength) {
  support::Rng rng(13);
  for (int i = 0; i < 500; ++i) {
    const auto s = support::messy_ethiopic(rng);
    std::size_t stripped = 0;
    for (char32_t cp : u8::decode(s)) stripped += et::is_space(cp) ? 0 : 1;
    for (std::size_t n = 1; n <= 6; ++n) {
      std::size_t total = 0;
      for (const auto& kv : et::char_ngrams(s, n)) total += kv.second;
      ASSERT_EQ(total, stripped >= n ? stripped - n + 1 : 0) << s << " n=" << n;
    }
  }
}
