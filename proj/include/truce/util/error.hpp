// Copyright 2026 the truce-ts authors
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

namespace truce {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible shapes or sizes; a programming or configuration mistake.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A numeric value became NaN or infinite.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (dataset, checkpoint, config).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Invalid argument or precondition violated by the caller.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

}  // namespace truce
