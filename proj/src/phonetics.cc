// src/phonetics.cc

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

#include <algorithm>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "prosody/error.h"
#include "prosody/json_lines.h"

namespace prosody {

using nlohmann::json;

void WordEntry::Validate() const {
  auto fail = [this](const std::string &why) {
    throw ValidationError("word '" + word + "': " + why);
  };
  if (word.empty()) throw ValidationError("word entry with empty identifier");
  if (phonemes.empty()) fail("phoneme list is empty");
  for (const auto &p : phonemes)
    if (p.empty()) fail("empty phoneme symbol");
  if (syllable_breaks.empty() || syllable_breaks.front() != 0)
    fail("syllable_breaks must start at 0");
  for (std::size_t i = 1; i < syllable_breaks.size(); ++i)
    if (syllable_breaks[i] <= syllable_breaks[i - 1])
      fail("syllable_breaks must be strictly increasing");
  if (syllable_breaks.back() >= NumPhonemes())
    fail("syllable break " + std::to_string(syllable_breaks.back()) +
         " out of range for " + std::to_string(NumPhonemes()) + " phonemes");
  if (stress_syllable &&
      (*stress_syllable < 0 || *stress_syllable >= NumSyllables()))
    fail("stress_syllable " + std::to_string(*stress_syllable) +
         " out of range for " + std::to_string(NumSyllables()) + " syllables");
}

PhonemeClassTable::PhonemeClassTable(
    std::map<std::string, std::set<std::string>> classes) {
  for (auto &[name, members] : classes) {
    if (members.empty())
      throw ConfigError("phoneme class '" + name + "' is empty");
    classes_.emplace(name, std::move(members));
  }
  if (!classes_.contains("Vowel"))
    throw ConfigError("phoneme class table must define 'Vowel'");
}

bool PhonemeClassTable::HasClass(std::string_view name) const {
  return classes_.find(name) != classes_.end();
}

const std::set<std::string> &PhonemeClassTable::Members(
    std::string_view name) const {
  auto it = classes_.find(name);
  if (it == classes_.end())
    throw ConfigError("unknown phoneme class '" + std::string(name) + "'");
  return it->second;
}

bool PhonemeClassTable::InClass(std::string_view name,
                                const std::string &phoneme) const {
  return Members(name).contains(phoneme);
}

namespace {

struct KindName {
  QuestionKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {QuestionKind::kPhonemeCountGt, "PhonemeCountGt"},
    {QuestionKind::kSyllableCountGt, "SyllableCountGt"},
    {QuestionKind::kEndsClosedSyllable, "EndsClosedSyllable"},
    {QuestionKind::kStartsWithClass, "StartsWithClass"},
    {QuestionKind::kEndsWithClass, "EndsWithClass"},
    {QuestionKind::kContainsClass, "ContainsClass"},
    {QuestionKind::kStressOnSyllable, "StressOnSyllable"},
};

bool NeedsInt(QuestionKind k) {
  return k == QuestionKind::kPhonemeCountGt ||
         k == QuestionKind::kSyllableCountGt ||
         k == QuestionKind::kStressOnSyllable;
}

bool NeedsClass(QuestionKind k) {
  return k == QuestionKind::kStartsWithClass ||
         k == QuestionKind::kEndsWithClass ||
         k == QuestionKind::kContainsClass;
}

}  // namespace

std::string_view QuestionKindName(QuestionKind kind) {
  for (const auto &kn : kKindNames)
    if (kn.kind == kind) return kn.name;
  return "?";
}

QuestionKind ParseQuestionKind(std::string_view name) {
  for (const auto &kn : kKindNames)
    if (kn.name == name) return kn.kind;
  throw ConfigError("unknown question kind '" + std::string(name) + "'");
}

void Question::Validate(const PhonemeClassTable &classes) const {
  const std::string label = "question " + std::to_string(id) + " (" +
                            std::string(QuestionKindName(kind)) + ")";
  if (id < 0) throw ConfigError(label + ": id must be non-negative");
  if (NeedsInt(kind)) {
    if (!int_param) throw ConfigError(label + ": int_param required");
    if (*int_param < 0) throw ConfigError(label + ": int_param must be >= 0");
  }
  if (NeedsClass(kind)) {
    if (!class_param) throw ConfigError(label + ": class_param required");
    if (!classes.HasClass(*class_param))
      throw ConfigError(label + ": unknown phoneme class '" + *class_param +
                        "'");
  }
}

std::string Question::ToString() const {
  std::string s(QuestionKindName(kind));
  if (NeedsInt(kind) && int_param) return s + "(" + std::to_string(*int_param) + ")";
  if (NeedsClass(kind) && class_param) return s + "(" + *class_param + ")";
  return s;
}

bool AnswerQuestion(const Question &q, const WordEntry &w,
                    const PhonemeClassTable &classes) {
  switch (q.kind) {
    case QuestionKind::kPhonemeCountGt:
      return w.NumPhonemes() > q.int_param.value_or(0);
    case QuestionKind::kSyllableCountGt:
      return w.NumSyllables() > q.int_param.value_or(0);
    case QuestionKind::kEndsClosedSyllable:
      return !classes.InClass("Vowel", w.phonemes.back());
    case QuestionKind::kStartsWithClass:
      return classes.InClass(q.class_param.value_or(""), w.phonemes.front());
    case QuestionKind::kEndsWithClass:
      return classes.InClass(q.class_param.value_or(""), w.phonemes.back());
    case QuestionKind::kContainsClass: {
      const auto &members = classes.Members(q.class_param.value_or(""));
      return std::any_of(w.phonemes.begin(), w.phonemes.end(),
                         [&](const std::string &p) { return members.contains(p); });
    }
    case QuestionKind::kStressOnSyllable:
      return w.stress_syllable && *w.stress_syllable == q.int_param.value_or(-1);
  }
  return false;
}

json ToJson(const WordEntry &w) {
  json j;
  j["word"] = w.word;
  j["phonemes"] = w.phonemes;
  j["syllable_breaks"] = w.syllable_breaks;
  j["stress_syllable"] =
      w.stress_syllable ? json(*w.stress_syllable) : json(nullptr);
  return j;
}

WordEntry WordEntryFromJson(const json &j) {
  WordEntry w;
  w.word = j.at("word").get<std::string>();
  w.phonemes = j.at("phonemes").get<std::vector<std::string>>();
  w.syllable_breaks = j.at("syllable_breaks").get<std::vector<int>>();
  if (auto it = j.find("stress_syllable"); it != j.end() && !it->is_null())
    w.stress_syllable = it->get<int>();
  return w;
}

json ToJson(const Question &q) {
  json j;
  j["id"] = q.id;
  j["kind"] = std::string(QuestionKindName(q.kind));
  j["int_param"] = q.int_param ? json(*q.int_param) : json(nullptr);
  j["class_param"] = q.class_param ? json(*q.class_param) : json(nullptr);
  return j;
}

Question QuestionFromJson(const json &j) {
  Question q;
  q.id = j.at("id").get<int>();
  q.kind = ParseQuestionKind(j.at("kind").get<std::string>());
  if (auto it = j.find("int_param"); it != j.end() && !it->is_null())
    q.int_param = it->get<int>();
  if (auto it = j.find("class_param"); it != j.end() && !it->is_null())
    q.class_param = it->get<std::string>();
  return q;
}

json ToJson(const PhonemeClassTable &classes) {
  json j = json::object();
  for (const auto &[name, members] : classes.classes())
    j[name] = std::vector<std::string>(members.begin(), members.end());
  return j;
}

PhonemeClassTable ClassTableFromJson(const json &j) {
  if (!j.is_object())
    throw ParseError("phoneme class table must be a JSON object");
  std::map<std::string, std::set<std::string>> classes;
  for (const auto &[name, members] : j.items()) {
    auto list = members.get<std::vector<std::string>>();
    classes[name] = std::set<std::string>(list.begin(), list.end());
  }
  return PhonemeClassTable(std::move(classes));
}

std::vector<WordEntry> LoadLexicon(std::istream &is) {
  std::vector<WordEntry> lexicon;
  std::unordered_set<std::string> seen;
  ForEachJsonLine(is, [&](const json &j, std::size_t line) {
    WordEntry w;
    try {
      w = WordEntryFromJson(j);
    } catch (const json::exception &e) {
      throw ParseError(std::string("bad lexicon entry: ") + e.what(), line);
    }
    w.Validate();
    if (!seen.insert(w.word).second)
      throw ValidationError("duplicate word '" + w.word + "' at line " +
                            std::to_string(line));
    lexicon.push_back(std::move(w));
  });
  return lexicon;
}

void WriteLexicon(std::ostream &os, std::span<const WordEntry> lexicon) {
  for (const auto &w : lexicon) os << ToJson(w).dump() << '\n';
}

void ValidateQuestionSet(std::span<const Question> questions,
                         const PhonemeClassTable &classes) {
  std::unordered_set<int> ids;
  for (const auto &q : questions) {
    q.Validate(classes);
    if (!ids.insert(q.id).second)
      throw ConfigError("duplicate question id " + std::to_string(q.id));
  }
}

std::vector<Question> LoadQuestions(std::istream &is,
                                    const PhonemeClassTable &classes) {
  std::vector<Question> questions;
  ForEachJsonLine(is, [&](const json &j, std::size_t line) {
    try {
      questions.push_back(QuestionFromJson(j));
    } catch (const json::exception &e) {
      throw ParseError(std::string("bad question: ") + e.what(), line);
    }
  });
  ValidateQuestionSet(questions, classes);
  return questions;
}

void WriteQuestions(std::ostream &os, std::span<const Question> questions) {
  for (const auto &q : questions) os << ToJson(q).dump() << '\n';
}

PhonemeClassTable LoadClassTable(std::istream &is) {
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception &e) {
    throw ParseError(std::string("bad class table: ") + e.what());
  }
  try {
    return ClassTableFromJson(j);
  } catch (const json::exception &e) {
    throw ParseError(std::string("bad class table: ") + e.what());
  }
}

void WriteClassTable(std::ostream &os, const PhonemeClassTable &classes) {
  os << ToJson(classes).dump(2) << '\n';
}

}  // namespace prosody
