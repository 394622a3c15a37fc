#include <gtest/gtest.h>

#include "amforge/template.hpp"
#include "support.hpp"

using namespace amforge;

namespace {

std::string qa_template_file(int n) {
  std::string out;
  for (int i = 0; i < n; ++i) {
    out += R"({"template_id":"qa-)" + std::to_string(i) +
           R"(","task_id":"qa","pattern":"ጥያቄ: {question} አውድ: {context}","lang_mode":"amharic"})" "\n";
  }
  out += R"({"template_id":"other-0","task_id":"sentiment","pattern":"{text}"})" "\n";
  return out;
}

}  // namespace

TEST(ParseTemplates, FourteenForOneTask) {
  const auto ts = parse_templates(qa_template_file(14), "qa");
  ASSERT_EQ(ts.size(), 14u);
  EXPECT_EQ(ts[3].template_id, "qa-3");
  EXPECT_EQ(ts[3].lang_mode, LangMode::Amharic);
  EXPECT_EQ(parse_templates(qa_template_file(14), "sentiment").size(), 1u);
}

TEST(ParseTemplates, Errors) {
  EXPECT_THROW(parse_templates(R"({"template_id":"a","task_id":"t","pattern":"{unknownfield}"})", "t"),
               ValidationError);
  EXPECT_THROW(parse_templates(R"({"template_id":"a","task_id":"t","pattern":"  "})", "t"), ValidationError);
  EXPECT_THROW(parse_templates(R"({"template_id":"a","task_id":"t","pattern":"x {text"})", "t"), ValidationError);
  EXPECT_THROW(parse_templates("{\"template_id\":\"a\",\"task_id\":\"t\",\"pattern\":\"x\"}\n"
                               "{\"template_id\":\"a\",\"task_id\":\"t\",\"pattern\":\"y\"}\n",
                               "t"),
               ValidationError);
  EXPECT_THROW(parse_templates("not json", "t"), ValidationError);
  EXPECT_THROW(parse_templates(R"({"template_id":"a","task_id":"t","pattern":"x","lang_mode":"fr"})", "t"),
               ValidationError);
}

TEST(ParseTemplates, NoPlaceholdersIsValid) {
  const auto ts = parse_templates(R"({"template_id":"a","task_id":"t","pattern":"ይህን ጽሑፍ ተርጉም"})", "t");
  ASSERT_EQ(ts.size(), 1u);
  EXPECT_TRUE(placeholders(ts[0].pattern).empty());
}

TEST(Render, DirectSubstitution) {
  const InstructionTemplate t{"c0", "sent", "Classify: {text}", LangMode::Amharic};
  const TaskRecord r{"sent", {{"text", "T"}, {"label", "positive-am"}}, 0};
  const auto p = render(t, r, Binding{"label", std::nullopt});
  EXPECT_EQ(p.instruction, "Classify: T");
  EXPECT_EQ(p.input, "");
  EXPECT_EQ(p.output, "positive-am");
  EXPECT_EQ(render(t, r, Binding{"label", std::nullopt}), p);
}

TEST(Render, MissingFieldNamesPlaceholderAndRecord) {
  const InstructionTemplate t{"c0", "qa", "{question} {context}", LangMode::Amharic};
  const TaskRecord r{"qa", {{"question", "q"}, {"answer", "a"}}, 7};
  try {
    render(t, r, Binding{"answer", std::nullopt});
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("context"), std::string::npos) << msg;
    EXPECT_NE(msg.find("7"), std::string::npos) << msg;
  }
  const InstructionTemplate ok{"c1", "qa", "{question}", LangMode::Amharic};
  EXPECT_THROW(render(ok, r, Binding{"label", std::nullopt}), DataError);
  EXPECT_THROW(render(ok, r, Binding{"answer", std::string("context")}), DataError);
}

TEST(Render, ValuesAreNotRescanned) {
  const InstructionTemplate t{"c0", "x", "A {text} B", LangMode::Amharic};
  const TaskRecord r{"x", {{"text", "{label}"}, {"label", "L"}}, 0};
  EXPECT_EQ(render(t, r, Binding{"label", std::nullopt}).instruction, "A {label} B");
}

TEST(Render, NoPlaceholderSurvivesRandomRecords) {
  support::Rng rng(31);
  const InstructionTemplate t{"c0", "qa", "{question}\n{context}? {question}", LangMode::Amharic};
  for (int i = 0; i < 300; ++i) {
    const TaskRecord r{"qa",
                       {{"question", support::messy_ethiopic(rng)},
                        {"context", support::messy_ethiopic(rng)},
                        {"answer", support::ethiopic_word(rng)}},
                       static_cast<std::size_t>(i)};
    const auto p = render(t, r, Binding{"answer", std::string("context")});
    for (auto name : kPlaceholderVocabulary) {
      ASSERT_EQ(p.instruction.find("{" + std::string(name) + "}"), std::string::npos);
    }
    ASSERT_NE(p.instruction.find(r.field("question")), std::string::npos);
    EXPECT_EQ(p.input, r.field("context"));
  }
}

TEST(CodeMix, PrefixesPreambleLine) {
  const RenderedPrompt p{"X", "in", "out"};
  const auto m = code_mix(p, kDefaultPreamble);
  EXPECT_EQ(m.instruction,
            "Below is an instruction that describes a task. Write a response that appropriately "
            "completes the request.\nX");
  EXPECT_EQ(m.input, p.input);
  EXPECT_EQ(m.output, p.output);
  EXPECT_EQ(m.instruction.size(), p.instruction.size() + kDefaultPreamble.size() + 1);
  EXPECT_EQ(m.instruction.substr(m.instruction.find('\n') + 1), p.instruction);
  EXPECT_THROW(code_mix(p, ""), ValidationError);
}
