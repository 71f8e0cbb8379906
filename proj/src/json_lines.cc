// src/json_lines.cc

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

#include "prosody/json_lines.h"

#include <system_error>

namespace prosody {

std::ifstream OpenForRead(const std::filesystem::path &path,
                          std::ios::openmode mode) {
  std::ifstream is(path, mode | std::ios::in);
  if (!is) throw Error("cannot open '" + path.string() + "' for reading");
  return is;
}

void WriteFileAtomic(const std::filesystem::path &path,
                     const std::function<void(std::ostream &)> &write,
                     std::ios::openmode mode) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  try {
    {
      std::ofstream os(tmp, mode | std::ios::out | std::ios::trunc);
      if (!os) throw Error("cannot open '" + tmp.string() + "' for writing");
      write(os);
      os.flush();
      if (!os) throw Error("write to '" + tmp.string() + "' failed");
    }
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

}  // namespace prosody
