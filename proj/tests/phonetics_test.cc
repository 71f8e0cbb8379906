// tests/phonetics_test.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "prosody/phonetics.h"

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oracles.h"
#include "prosody/error.h"

using namespace prosody;
using prosody::testing::RandomWord;
using prosody::testing::SmallClassTable;
using prosody::testing::SmallPhoneSet;

namespace {

using ClassMap = std::map<std::string, std::set<std::string>>;

WordEntry Word(std::vector<std::string> phones, std::vector<int> breaks = {0},
               std::optional<int> stress = std::nullopt) {
  return WordEntry{"w", std::move(phones), std::move(breaks), stress};
}

Question Q(QuestionKind kind, std::optional<int> i = std::nullopt,
           std::optional<std::string> c = std::nullopt) {
  return Question{0, kind, i, std::move(c)};
}

}  // namespace

TEST_CASE("PhonemeCountGt is a strict inequality") {
  const auto classes = SmallClassTable();
  const auto q = Q(QuestionKind::kPhonemeCountGt, 4);
  CHECK(AnswerQuestion(q, Word({"K", "AE", "T", "S", "AA"}), classes));
  CHECK_FALSE(AnswerQuestion(q, Word({"K", "AE", "T", "S"}), classes));
}

TEST_CASE("EndsClosedSyllable looks at the final phoneme") {
  const PhonemeClassTable classes(ClassMap{{"Vowel", {"AE"}}});
  const auto q = Q(QuestionKind::kEndsClosedSyllable);
  CHECK(AnswerQuestion(q, Word({"K", "AE", "T"}), classes));
  CHECK_FALSE(AnswerQuestion(q, Word({"K", "AE"}), classes));
}

TEST_CASE("class and syllable questions") {
  const auto classes = SmallClassTable();
  const auto w = Word({"S", "AA", "M", "IY", "T"}, {0, 2}, 1);
  CHECK(AnswerQuestion(Q(QuestionKind::kStartsWithClass, {}, "Fricative"), w, classes));
  CHECK_FALSE(AnswerQuestion(Q(QuestionKind::kStartsWithClass, {}, "Vowel"), w, classes));
  CHECK(AnswerQuestion(Q(QuestionKind::kEndsWithClass, {}, "Plosive"), w, classes));
  CHECK(AnswerQuestion(Q(QuestionKind::kContainsClass, {}, "Nasal"), w, classes));
  CHECK(AnswerQuestion(Q(QuestionKind::kSyllableCountGt, 1), w, classes));
  CHECK_FALSE(AnswerQuestion(Q(QuestionKind::kSyllableCountGt, 2), w, classes));
  CHECK(AnswerQuestion(Q(QuestionKind::kStressOnSyllable, 1), w, classes));
  CHECK_FALSE(AnswerQuestion(Q(QuestionKind::kStressOnSyllable, 0), w, classes));
  CHECK_FALSE(AnswerQuestion(Q(QuestionKind::kStressOnSyllable, 0),
                             Word({"AA"}), classes));
}

TEST_CASE("unknown class is a configuration error naming the class") {
  const auto classes = SmallClassTable();
  const auto q = Q(QuestionKind::kContainsClass, {}, "Glide");
  CHECK_THROWS_WITH_AS(q.Validate(classes), doctest::Contains("Glide"), ConfigError);
  CHECK_THROWS_WITH_AS(AnswerQuestion(q, Word({"AA"}), classes),
                       doctest::Contains("Glide"), ConfigError);
}

TEST_CASE("class table requires Vowel and non-empty classes") {
  CHECK_THROWS_AS(PhonemeClassTable(ClassMap{{"Nasal", {"M"}}}), ConfigError);
  CHECK_THROWS_AS(PhonemeClassTable(ClassMap{{"Vowel", {"AA"}}, {"Nasal", {}}}), ConfigError);
}

TEST_CASE("word entry invariants") {
  CHECK_NOTHROW(Word({"K", "AE", "T"}, {0, 1}, 1).Validate());
  CHECK_THROWS_AS(Word({}).Validate(), ValidationError);
  CHECK_THROWS_AS(Word({"K"}, {1}).Validate(), ValidationError);
  CHECK_THROWS_AS(Word({"K", "AE"}, {0, 0}).Validate(), ValidationError);
  CHECK_THROWS_AS(Word({"K", "AE"}, {0, 2}).Validate(), ValidationError);
  CHECK_THROWS_AS(Word({"K", "AE"}, {0}, 1).Validate(), ValidationError);
}

TEST_CASE("LoadLexicon") {
  SUBCASE("one valid line") {
    std::istringstream is(
        R"({"word":"cat","phonemes":["K","AE","T"],"syllable_breaks":[0],"stress_syllable":0})"
        "\n");
    const auto lex = LoadLexicon(is);
    REQUIRE(lex.size() == 1);
    CHECK(lex[0].word == "cat");
    CHECK(lex[0].stress_syllable == 0);
  }
  SUBCASE("empty stream") {
    std::istringstream is("");
    CHECK(LoadLexicon(is).empty());
  }
  SUBCASE("syllable break past the end") {
    std::istringstream is(
        R"({"word":"tack","phonemes":["T","AE","K","S"],"syllable_breaks":[0,5],"stress_syllable":null})");
    CHECK_THROWS_WITH_AS(LoadLexicon(is), doctest::Contains("tack"), ValidationError);
  }
  SUBCASE("malformed line reports its number") {
    std::istringstream is(
        R"({"word":"a","phonemes":["AA"],"syllable_breaks":[0],"stress_syllable":null})"
        "\n{not json\n");
    try {
      LoadLexicon(is);
      FAIL("expected a parse error");
    } catch (const ParseError &e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("duplicate word") {
    std::istringstream is(
        R"({"word":"a","phonemes":["AA"],"syllable_breaks":[0],"stress_syllable":null})"
        "\n"
        R"({"word":"a","phonemes":["AE"],"syllable_breaks":[0],"stress_syllable":null})");
    CHECK_THROWS_AS(LoadLexicon(is), ValidationError);
  }
}

TEST_CASE("LoadQuestions") {
  const auto classes = SmallClassTable();
  SUBCASE("two questions") {
    std::istringstream is(
        R"({"id":0,"kind":"PhonemeCountGt","int_param":4,"class_param":null})"
        "\n"
        R"({"id":1,"kind":"EndsClosedSyllable","int_param":null,"class_param":null})");
    CHECK(LoadQuestions(is, classes).size() == 2);
  }
  SUBCASE("duplicate id") {
    std::istringstream is(
        R"({"id":0,"kind":"PhonemeCountGt","int_param":4,"class_param":null})"
        "\n"
        R"({"id":0,"kind":"PhonemeCountGt","int_param":5,"class_param":null})");
    CHECK_THROWS_AS(LoadQuestions(is, classes), ConfigError);
  }
  SUBCASE("unknown kind") {
    std::istringstream is(R"({"id":0,"kind":"RhymesWith","int_param":null,"class_param":null})");
    CHECK_THROWS_AS(LoadQuestions(is, classes), ConfigError);
  }
  SUBCASE("unknown class") {
    const PhonemeClassTable vowels_only(ClassMap{{"Vowel", {"AA"}}});
    std::istringstream is(R"({"id":0,"kind":"ContainsClass","int_param":null,"class_param":"Nasal"})");
    CHECK_THROWS_WITH_AS(LoadQuestions(is, vowels_only), doctest::Contains("Nasal"),
                         ConfigError);
  }
  SUBCASE("negative threshold") {
    std::istringstream is(R"({"id":0,"kind":"PhonemeCountGt","int_param":-1,"class_param":null})");
    CHECK_THROWS_AS(LoadQuestions(is, classes), ConfigError);
  }
}

TEST_CASE("shipped default question set loads against the default classes") {
  std::ifstream cls(PROSODY_DATA_DIR "/default_classes.json");
  std::ifstream qs(PROSODY_DATA_DIR "/default_questions.jsonl");
  REQUIRE(cls);
  REQUIRE(qs);
  const auto classes = LoadClassTable(cls);
  const auto questions = LoadQuestions(qs, classes);
  CHECK(questions.size() >= 20);
  std::set<QuestionKind> kinds;
  for (const auto &q : questions) kinds.insert(q.kind);
  CHECK(kinds.size() == std::size(kAllQuestionKinds));
}

TEST_CASE("property: every question kind answers both ways on random words") {
  std::mt19937_64 rng(11);
  const auto classes = SmallClassTable();
  std::vector<WordEntry> words;
  for (int i = 0; i < 500; ++i)
    words.push_back(RandomWord(rng, SmallPhoneSet(), "w" + std::to_string(i)));
  const std::vector<Question> probes = {
      Q(QuestionKind::kPhonemeCountGt, 4),   Q(QuestionKind::kSyllableCountGt, 1),
      Q(QuestionKind::kEndsClosedSyllable),  Q(QuestionKind::kStartsWithClass, {}, "Vowel"),
      Q(QuestionKind::kEndsWithClass, {}, "Plosive"),
      Q(QuestionKind::kContainsClass, {}, "Nasal"), Q(QuestionKind::kStressOnSyllable, 0)};
  for (const auto &q : probes) {
    int yes = 0;
    for (const auto &w : words) {
      w.Validate();
      const bool a = AnswerQuestion(q, w, classes);
      CHECK(a == AnswerQuestion(q, w, classes));
      yes += a;
    }
    INFO(q.ToString());
    CHECK(yes > 0);
    CHECK(yes < static_cast<int>(words.size()));
  }
}

TEST_CASE("property: lexicon and question files round-trip") {
  std::mt19937_64 rng(5);
  std::vector<WordEntry> words;
  for (int i = 0; i < 200; ++i)
    words.push_back(RandomWord(rng, SmallPhoneSet(), "w" + std::to_string(i)));
  std::stringstream ss;
  WriteLexicon(ss, words);
  CHECK(LoadLexicon(ss) == words);

  const auto classes = SmallClassTable();
  std::vector<Question> questions;
  for (int i = 0; i < 50; ++i) questions.push_back(testing::RandomQuestion(rng, i));
  std::stringstream qs;
  WriteQuestions(qs, questions);
  CHECK(LoadQuestions(qs, classes) == questions);

  std::stringstream cs;
  WriteClassTable(cs, classes);
  CHECK(LoadClassTable(cs) == classes);
}
