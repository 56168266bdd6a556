// Copyright 2026 The Stance Authors.
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

#ifndef STANCE_ERRORS_H_
#define STANCE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace stance {

// Numeric-layer errors.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class LabelError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Violated precondition of an API call (wrong tape, non-scalar loss, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class EmptyInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Data-layer errors. All of them map to the "data error" exit code.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateDataError : public DataError {
 public:
  using DataError::DataError;
};

class UnknownTargetError : public DataError {
 public:
  using DataError::DataError;
};

// Checkpoint loading failures.
class LoadError : public DataError {
 public:
  using DataError::DataError;
};

class VersionMismatchError : public LoadError {
 public:
  using LoadError::LoadError;
};

class TruncatedFileError : public LoadError {
 public:
  using LoadError::LoadError;
};

class ShapeMismatchError : public LoadError {
 public:
  using LoadError::LoadError;
};

}  // namespace stance

#endif  // STANCE_ERRORS_H_
