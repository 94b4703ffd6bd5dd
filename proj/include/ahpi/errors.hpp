// Copyright 2026 The AHPI Ranking Authors.
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

#include <stdexcept>
#include <string>

namespace ahpi {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Unknown entity or interaction type.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Root bracketing failed, fixed point diverged, etc.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

// Q-factor trimming exhausted the network before reaching the target.
class InfeasibleTarget : public Error {
 public:
  using Error::Error;
};

// A statistic is not defined for the given input (e.g. Kendall tau on < 2 items).
class UndefinedResult : public Error {
 public:
  using Error::Error;
};

}  // namespace ahpi
