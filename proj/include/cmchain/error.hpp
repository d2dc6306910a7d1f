// Copyright 2026 The cmchain Authors.
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

#ifndef CMCHAIN_ERROR_HPP_
#define CMCHAIN_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace cmchain {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An exhaustive enumeration would exceed its branch budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// Not enough regeneration cycles were supplied to cover the requested time.
class InsufficientCycles : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration problem; the message names the offending key/line.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A result file carries an unknown schema version.
class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

}  // namespace detail
}  // namespace cmchain

#endif  // CMCHAIN_ERROR_HPP_
