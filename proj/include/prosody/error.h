// prosody/error.h

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

#ifndef PROSODY_ERROR_H_
#define PROSODY_ERROR_H_

#include <stdexcept>
#include <string>

namespace prosody {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration: unknown phoneme class, out-of-range option.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text or bytes. Line numbers are 1-based when known.
class ParseError : public Error {
 public:
  using Error::Error;
  ParseError(const std::string &what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Log-likelihood requested for a node with no samples.
class EmptyNodeError : public Error {
 public:
  using Error::Error;
};

/// Statistics that should add up do not.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// A model file that is corrupt, inconsistent or of an unsupported version.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Synthetic corpus description that cannot be realized.
class SpecError : public Error {
 public:
  using Error::Error;
};

}  // namespace prosody

#endif  // PROSODY_ERROR_H_
