// Copyright 2026 The fincad Authors
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

namespace fincad {

// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorClass {
  kUsage,
  kData,
  kProvider,
  kCalibration,
  kPrompt,
  kStats,
  kParse,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), class_(cls) {}

  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what)
      : Error(ErrorClass::kUsage, what) {}
};

enum class DataErrorKind {
  kIo,
  kEmptyFile,
  kMissingColumn,
  kBadDate,
  kBadNumber,
  kInvalidValue,
  kDuplicateDate,
  kInsufficientHistory,
  kHorizon,
  kNotTradingDay,
  kEmptyDataset,
  kWindow,
};

class DataError : public Error {
 public:
  DataError(DataErrorKind kind, const std::string& what)
      : Error(ErrorClass::kData, what), kind_(kind) {}

  DataErrorKind kind() const noexcept { return kind_; }

 private:
  DataErrorKind kind_;
};

class StatsError : public Error {
 public:
  explicit StatsError(const std::string& what)
      : Error(ErrorClass::kStats, what) {}
};

class PromptError : public Error {
 public:
  explicit PromptError(const std::string& what)
      : Error(ErrorClass::kPrompt, what) {}
};

// Raised when a calibration sidecar or profile needed by a run is absent or
// unusable.
class CalibrationError : public Error {
 public:
  explicit CalibrationError(const std::string& what)
      : Error(ErrorClass::kCalibration, what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what)
      : Error(ErrorClass::kParse, what) {}
};

}  // namespace fincad
