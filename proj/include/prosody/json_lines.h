// prosody/json_lines.h

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

#ifndef PROSODY_JSON_LINES_H_
#define PROSODY_JSON_LINES_H_

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <string>

#include "json.hpp"
#include "prosody/error.h"

namespace prosody {

/// Calls fn(object, line_number) for every non-blank line of a JSON-lines
/// stream. Syntax errors become ParseError with the 1-based line number.
template <typename Fn>
void ForEachJsonLine(std::istream &is, Fn &&fn) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(is, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(e.what(), line);
    }
    if (!j.is_object()) throw ParseError("expected a JSON object", line);
    fn(j, line);
  }
}

std::ifstream OpenForRead(const std::filesystem::path &path,
                          std::ios::openmode mode = std::ios::in);

/// Writes through a sibling temporary file and renames it over `path` only
/// if `write` returns normally. On failure nothing is left at `path`.
void WriteFileAtomic(const std::filesystem::path &path,
                     const std::function<void(std::ostream &)> &write,
                     std::ios::openmode mode = std::ios::out);

}  // namespace prosody

#endif  // PROSODY_JSON_LINES_H_
