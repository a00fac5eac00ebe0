//
// Copyright 2026 The uldp Authors
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

#ifndef ULDP_ERRORS_HPP_
#define ULDP_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace uldp {

// Root of every error the library raises. Callers that only care about
// "something about the input was wrong" can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an estimator was violated by the stream, e.g.
// non-contiguous arrival for the wishful estimator or a user exceeding m.
class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(std::string label, const std::string& what)
      : Error(what), label_(std::move(label)) {}
  const std::string& label() const { return label_; }

 private:
  std::string label_;
};

class InsufficientDiversity : public Error {
 public:
  using Error::Error;
};

class InfeasibleOrdering : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace uldp

#endif  // ULDP_ERRORS_HPP_
