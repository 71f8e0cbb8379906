// prosody/phonetics.h

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

#ifndef PROSODY_PHONETICS_H_
#define PROSODY_PHONETICS_H_

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace prosody {

/// A word type and its phonetic content. Phoneme symbols are opaque strings.
struct WordEntry {
  std::string word;
  std::vector<std::string> phonemes;
  /// Index of the first phoneme of each syllable; starts at 0.
  std::vector<int> syllable_breaks;
  std::optional<int> stress_syllable;

  int NumPhonemes() const { return static_cast<int>(phonemes.size()); }
  int NumSyllables() const { return static_cast<int>(syllable_breaks.size()); }

  /// Throws ValidationError naming the word if an invariant is violated.
  void Validate() const;

  bool operator==(const WordEntry &) const = default;
};

/// Named sets of phoneme symbols. "Vowel" must be present.
class PhonemeClassTable {
 public:
  PhonemeClassTable() = default;
  /// Throws ConfigError on an empty class or a missing "Vowel" class.
  explicit PhonemeClassTable(std::map<std::string, std::set<std::string>> classes);

  bool HasClass(std::string_view name) const;
  /// Throws ConfigError naming the class if it is unknown.
  const std::set<std::string> &Members(std::string_view name) const;
  bool InClass(std::string_view name, const std::string &phoneme) const;

  const std::map<std::string, std::set<std::string>, std::less<>> &classes() const {
    return classes_;
  }

  bool operator==(const PhonemeClassTable &) const = default;

 private:
  std::map<std::string, std::set<std::string>, std::less<>> classes_;
};

enum class QuestionKind {
  kPhonemeCountGt,
  kSyllableCountGt,
  kEndsClosedSyllable,
  kStartsWithClass,
  kEndsWithClass,
  kContainsClass,
  kStressOnSyllable,
};

inline constexpr QuestionKind kAllQuestionKinds[] = {
    QuestionKind::kPhonemeCountGt,  QuestionKind::kSyllableCountGt,
    QuestionKind::kEndsClosedSyllable, QuestionKind::kStartsWithClass,
    QuestionKind::kEndsWithClass,   QuestionKind::kContainsClass,
    QuestionKind::kStressOnSyllable};

std::string_view QuestionKindName(QuestionKind kind);
/// Throws ConfigError on an unknown name.
QuestionKind ParseQuestionKind(std::string_view name);

/// A boolean predicate over a word's phonetic content.
struct Question {
  int id = 0;
  QuestionKind kind = QuestionKind::kPhonemeCountGt;
  std::optional<int> int_param;
  std::optional<std::string> class_param;

  /// Checks parameter presence and that class_param names a known class.
  void Validate(const PhonemeClassTable &classes) const;
  /// Human-readable form, e.g. "PhonemeCountGt(4)".
  std::string ToString() const;

  bool operator==(const Question &) const = default;
};

bool AnswerQuestion(const Question &q, const WordEntry &w,
                    const PhonemeClassTable &classes);

// JSON-lines lexicon: {"word", "phonemes", "syllable_breaks", "stress_syllable"}.
std::vector<WordEntry> LoadLexicon(std::istream &is);
void WriteLexicon(std::ostream &os, std::span<const WordEntry> lexicon);

// JSON-lines question set: {"id", "kind", "int_param", "class_param"}.
std::vector<Question> LoadQuestions(std::istream &is,
                                    const PhonemeClassTable &classes);
void WriteQuestions(std::ostream &os, std::span<const Question> questions);

// Single JSON object: class name -> [phoneme symbols].
PhonemeClassTable LoadClassTable(std::istream &is);
void WriteClassTable(std::ostream &os, const PhonemeClassTable &classes);

nlohmann::json ToJson(const WordEntry &w);
nlohmann::json ToJson(const Question &q);
nlohmann::json ToJson(const PhonemeClassTable &classes);
WordEntry WordEntryFromJson(const nlohmann::json &j);
Question QuestionFromJson(const nlohmann::json &j);
PhonemeClassTable ClassTableFromJson(const nlohmann::json &j);

/// Validates a parsed question list: unique ids, every question well formed.
void ValidateQuestionSet(std::span<const Question> questions,
                         const PhonemeClassTable &classes);

}  // namespace prosody

#endif  // PROSODY_PHONETICS_H_
