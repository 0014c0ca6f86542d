//
// Copyright 2026 The lmbias Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef LMBIAS_ERROR_HPP
#define LMBIAS_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lmbias {

// Base class for every error the library raises. The CLI maps InputError to
// exit code 2 and CoverageError to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input, invalid configuration, or a violated precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

// A line-addressed parse failure. Holds every diagnostic found in the file so
// the caller can report them all at once.
class ParseError : public InputError {
 public:
  struct Diagnostic {
    std::size_t line;
    std::string message;
  };

  explicit ParseError(std::vector<Diagnostic> diagnostics)
      : InputError(Summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  static std::string Summarize(const std::vector<Diagnostic>& diagnostics) {
    std::string out;
    for (const auto& d : diagnostics) {
      if (!out.empty()) out += '\n';
      out += "line " + std::to_string(d.line) + ": " + d.message;
    }
    return out;
  }

  std::vector<Diagnostic> diagnostics_;
};

// Probability records do not cover the probe set, or contradict it.
class CoverageError : public Error {
 public:
  CoverageError(std::string message, std::vector<std::string> probe_ids)
      : Error(std::move(message)), probe_ids_(std::move(probe_ids)) {}

  const std::vector<std::string>& probe_ids() const noexcept { return probe_ids_; }

 private:
  std::vector<std::string> probe_ids_;
};

}  // namespace lmbias

#endif  // LMBIAS_ERROR_HPP
