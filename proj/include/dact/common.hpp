// Copyright 2026 The dact Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dact {

using Index = std::ptrdiff_t;

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; carries the 1-based line number when one applies.
class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

// Inputs that are well-formed but inconsistent (dimension mismatch, empty corpus, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// A NaN or Inf escaped a numerical operation.
class NumericError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kPadToken = "<PAD>";
inline constexpr const char* kUnkToken = "<UNK>";
inline constexpr int kPadIndex = 0;
inline constexpr int kUnkIndex = 1;

inline constexpr const char* kVersion = "0.3.0";

}  // namespace dact
