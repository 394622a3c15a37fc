#include <gtest/gtest.h>

#include "amforge/ingest.hpp"
#include "support.hpp"

namespace ig = amforge::ingest;
using amforge::TaskRecord;
using support::TempDir;

namespace {

ig::SourceSpec spec_for(ig::SourceFormat f, std::vector<std::filesystem::path> paths,
                        std::map<std::string, std::string> map = {}) {
  return ig::SourceSpec{"t", f, std::move(paths), std::move(map)};
}

// Hand-applied BIO rules: a B-PER or a PER tag after a non-PER tag starts a
// span, I-PER continues it, anything else closes it.
std::vector<std::vector<std::string>> bio_spans(const std::vector<std::pair<std::string, std::string>>& s) {
  std::vector<std::vector<std::string>> spans;
  bool open = false;
  for (const auto& [tok, tag] : s) {
    const bool per = tag == "B-PER" || tag == "I-PER";
    if (!per) {
      open = false;
    } else if (tag == "B-PER" || !open) {
      spans.push_back({tok});
      open = true;
    } else {
      spans.back().push_back(tok);
    }
  }
  return spans;
}

}  // namespace

TEST(ReadClassification, ThreeRowsKeepLabels) {
  TempDir d("cls");
  support::write(d / "s.tsv", "text\tlabel\nጥሩ ነው\tpositive\nመጥፎ ነው\tnegative\nእሺ\tneutral\n");
  const auto recs = ig::read_classification(spec_for(ig::SourceFormat::ClassificationTsv, {d / "s.tsv"}));
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[0].field("label"), "positive");
  EXPECT_EQ(recs[1].field("label"), "negative");
  EXPECT_EQ(recs[2].field("label"), "neutral");
  EXPECT_EQ(recs[2].field("text"), "እሺ");
  EXPECT_EQ(recs[2].source_index, 2u);
}

TEST(ReadClassification, EmptyFileGivesNothing) {
  TempDir d("cls");
  support::write(d / "e.tsv", "");
  EXPECT_TRUE(ig::read_classification(spec_for(ig::SourceFormat::ClassificationTsv, {d / "e.tsv"})).empty());
}

TEST(ReadClassification, MissingLabelNamesRow2) {
  TempDir d("cls");
  support::write(d / "m.tsv", "text\tlabel\nonly text\n");
  try {
    ig::read_classification(spec_for(ig::SourceFormat::ClassificationTsv, {d / "m.tsv"}));
    FAIL() << "expected an error";
  } catch (const amforge::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
}

TEST(ReadClassification, CustomColumnsAndMissingHeader) {
  TempDir d("cls");
  support::write(d / "c.tsv", "tweet\tsentiment\nሰላም\tpos\n");
  const auto recs = ig::read_classification(spec_for(ig::SourceFormat::ClassificationTsv, {d / "c.tsv"},
                                                     {{"tweet", "text"}, {"sentiment", "label"}}));
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].field("label"), "pos");
  EXPECT_THROW(ig::read_classification(spec_for(ig::SourceFormat::ClassificationTsv, {d / "c.tsv"})),
               amforge::DataError);
  EXPECT_THROW(ig::read_classification(spec_for(ig::SourceFormat::ClassificationTsv, {d / "c.tsv"},
                                                {{"tweet", "text"}})),
               amforge::ValidationError);
}

TEST(ReadQa, CountsAndFields) {
  TempDir d("qa");
  std::string body;
  for (int i = 0; i < 299; ++i) {
    body += R"({"question":"ጥያቄ )" + std::to_string(i) + R"(","context":"አውድ","answer":"መልስ"})" "\n";
  }
  support::write(d / "qa.jsonl", body);
  const auto recs = ig::read_qa(spec_for(ig::SourceFormat::KeyedJsonl, {d / "qa.jsonl"}));
  ASSERT_EQ(recs.size(), 299u);
  EXPECT_EQ(recs[0].fields.size(), 3u);
  EXPECT_EQ(recs[298].field("question"), "ጥያቄ 298");
}

TEST(ReadQa, MissingContextIsAnError) {
  TempDir d("qa");
  support::write(d / "qa.jsonl", R"({"question":"q","answer":"a"})" "\n");
  EXPECT_THROW(ig::read_qa(spec_for(ig::SourceFormat::KeyedJsonl, {d / "qa.jsonl"})), amforge::DataError);
}

TEST(ReadQa, DeterministicAcrossRuns) {
  TempDir d("qa");
  support::write(d / "qa.jsonl", R"({"question":"q","context":"c","answer":1})" "\n\n"
                                 R"({"question":"q2","context":"c2","answer":true})" "\n");
  const auto spec = spec_for(ig::SourceFormat::KeyedJsonl, {d / "qa.jsonl"});
  const auto a = ig::read_qa(spec);
  EXPECT_EQ(a, ig::read_qa(spec));
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].field("answer"), "1");
  EXPECT_EQ(a[1].field("answer"), "true");
}

TEST(ReadConll, BioSpans) {
  TempDir d("ner");
  const std::vector<std::vector<std::pair<std::string, std::string>>> sentences = {
      {{"አበበ", "B-PER"}, {"ከበደ", "I-PER"}, {"መጣ", "O"}},
      {{"ዛሬ", "O"}, {"ዝናብ", "O"}},
      {{"ሰላም", "B-PER"}, {"እና", "O"}, {"ጫላ", "B-PER"}, {"ቶላ", "I-PER"}, {"አዲስ", "B-LOC"}},
  };
  std::string body = "-DOCSTART- O\n\n";
  for (const auto& s : sentences) {
    for (const auto& [tok, tag] : s) body += tok + " " + tag + "\n";
    body += "\n";
  }
  support::write(d / "ner.txt", body);
  const auto recs = ig::read_conll_person_names(spec_for(ig::SourceFormat::ConllNer, {d / "ner.txt"}));
  ASSERT_EQ(recs.size(), sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    std::string expected;
    for (const auto& span : bio_spans(sentences[i])) {
      if (!expected.empty()) expected += "፣ ";
      expected += support::join(span);
    }
    if (expected.empty()) expected = std::string(ig::kDefaultNoneMarker);
    EXPECT_EQ(recs[i].field("names"), expected) << i;
  }
  EXPECT_EQ(recs[0].field("names"), "አበበ ከበደ");
  EXPECT_EQ(recs[0].field("text"), "አበበ ከበደ መጣ");
  EXPECT_EQ(recs[2].field("names"), "ሰላም፣ ጫላ ቶላ");
}

TEST(ReadConll, StrayInsideTagOpensSpanAndBadTagsFail) {
  TempDir d("ner");
  support::write(d / "a.txt", "x O\ny I-PER\nz I-PER\n");
  const auto recs = ig::read_conll_person_names(spec_for(ig::SourceFormat::ConllNer, {d / "a.txt"}), "none");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].field("names"), "y z");
  support::write(d / "b.txt", "x PER\n");
  EXPECT_THROW(ig::read_conll_person_names(spec_for(ig::SourceFormat::ConllNer, {d / "b.txt"})),
               amforge::DataError);
}

TEST(ReadParallel, AlignedAndMismatched) {
  TempDir d("mt");
  support::write(d / "a.am", "1\n2\n3\n4\n5\n");
  support::write(d / "a.en", "one\ntwo\nthree\nfour\nfive\n");
  support::write(d / "b.en", "one\ntwo\nthree\nfour\n");
  EXPECT_EQ(ig::read_parallel(spec_for(ig::SourceFormat::ParallelPair, {d / "a.am", d / "a.en"})).size(), 5u);
  try {
    ig::read_parallel(spec_for(ig::SourceFormat::ParallelPair, {d / "a.am", d / "b.en"}));
    FAIL();
  } catch (const amforge::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("5 vs 4"), std::string::npos) << e.what();
  }
}

TEST(ReadParallel, ValidationSplitSize) {
  TempDir d("mt");
  std::string src, tgt;
  for (int i = 0; i < 997; ++i) {
    src += "ዓረፍተ ነገር " + std::to_string(i) + "\n";
    tgt += "sentence " + std::to_string(i) + "\n";
  }
  support::write(d / "v.am", src);
  support::write(d / "v.en", tgt);
  const auto recs = ig::read_parallel(spec_for(ig::SourceFormat::ParallelPair, {d / "v.am", d / "v.en"}));
  ASSERT_EQ(recs.size(), 997u);
  EXPECT_EQ(recs[996].field("target"), "sentence 996");
}

TEST(TextBlocks, SplitExamples) {
  using V = std::vector<std::string>;
  EXPECT_EQ(ig::split_text_blocks("A\nB\n\nC"), (V{"A\nB", "C"}));
  EXPECT_EQ(ig::split_text_blocks("one\ntwo\nthree"), (V{"one\ntwo\nthree"}));
  EXPECT_EQ(ig::split_text_blocks("\n\nX\n\n\nY\n\n"), (V{"X", "Y"}));
  EXPECT_EQ(ig::split_text_blocks(""), V{});
}

TEST(TextBlocks, JoinSplitFixedPointAndNoEmptyBlocks) {
  support::Rng rng(21);
  const std::vector<std::string> seps = {"\n", "\n\n", "\n \n", "\n\n\n"};
  for (int i = 0; i < 500; ++i) {
    std::string raw;
    const std::size_t lines = 1 + support::pick(rng, 10);
    for (std::size_t l = 0; l < lines; ++l) {
      raw += support::ethiopic_word(rng) + seps[support::pick(rng, seps.size())];
    }
    const auto blocks = ig::split_text_blocks(raw);
    for (const auto& b : blocks) ASSERT_FALSE(b.empty());
    ASSERT_EQ(ig::split_text_blocks(ig::join_blocks(blocks)), blocks);
  }
}

TEST(Completion, Examples) {
  const auto r = ig::derive_completion_records({"V1", "V2", "V3"});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->field("prompt"), "V1");
  EXPECT_EQ(r->field("continuation"), "V2\n\nV3");
  EXPECT_FALSE(ig::derive_completion_records({"only"}));
  const auto ab = ig::derive_completion_records({"A", "B"});
  ASSERT_TRUE(ab);
  EXPECT_EQ(ab->field("continuation"), "B");
}

TEST(Expansion, SwapCountsAndInvolution) {
  EXPECT_TRUE(ig::derive_expansion_records({}).empty());
  const TaskRecord r{"sum", {{"text", "T"}, {"summary", "S"}}, 4};
  const auto once = ig::derive_expansion_records({r});
  ASSERT_EQ(once.size(), 1u);
  EXPECT_EQ(once[0].fields, (std::map<std::string, std::string>{{"text", "S"}, {"expansion", "T"}}));
  EXPECT_EQ(once[0].source_index, 4u);
  EXPECT_EQ(ig::derive_expansion_records(once)[0], r);

  std::vector<TaskRecord> many;
  for (std::size_t i = 0; i < 719; ++i) many.push_back({"sum", {{"text", "t"}, {"summary", "s"}}, i});
  EXPECT_EQ(ig::derive_expansion_records(many).size(), 719u);
  EXPECT_THROW(ig::derive_expansion_records({TaskRecord{"x", {{"text", "t"}}, 0}}), amforge::DataError);
}

TEST(ReadTextBlocks, DocumentAndCompletionModes) {
  TempDir d("blk");
  support::write(d / "docs/b.txt", "ርዕስ\nአካል አንድ\n\nአካል ሁለት\n");
  support::write(d / "docs/a.txt", "ብቻ\n");
  auto recs = ig::read_text_blocks(spec_for(ig::SourceFormat::PlainTextBlocks, {d / "docs"}),
                                   ig::BlockMode::Document);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].field("title"), "ርዕስ");
  EXPECT_EQ(recs[0].field("body"), "አካል አንድ\n\nአካል ሁለት");
  EXPECT_EQ(recs[0].source_index, 1u);

  recs = ig::read_text_blocks(spec_for(ig::SourceFormat::PlainTextBlocks, {d / "docs"}),
                              ig::BlockMode::Completion);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].field("prompt"), "ርዕስ\nአካል አንድ");
  EXPECT_EQ(recs[0].field("continuation"), "አካል ሁለት");
}

TEST(SourceSpec, RejectsUnknownOrDuplicateTargets) {
  EXPECT_THROW((ig::SourceSpec{"t", ig::SourceFormat::KeyedJsonl, {}, {{"a", "bogus"}}}.validate()),
               amforge::ValidationError);
  EXPECT_THROW((ig::SourceSpec{"t", ig::SourceFormat::KeyedJsonl, {}, {{"a", "text"}, {"b", "text"}}}.validate()),
               amforge::ValidationError);
  EXPECT_THROW(ig::parse_format("csv"), amforge::ValidationError);
  EXPECT_EQ(ig::parse_format("conll-ner"), ig::SourceFormat::ConllNer);
}
