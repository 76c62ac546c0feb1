/* Copyright 2026 The MetaInf Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>

namespace metainf {

// Categories map one-to-one onto CLI exit codes and HTTP status families.
enum class ErrorCategory {
  kUsage,       // bad arguments or configuration
  kData,        // malformed, conflicting or missing input data
  kInfeasible,  // no method fits the budget
  kProvider,    // embedding provider failure
  kIo,          // filesystem
  kIntegrity,   // internal consistency violated
};

const char* ToString(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message)
      : Error(ErrorCategory::kUsage, message) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& message)
      : Error(ErrorCategory::kData, message) {}
};

// Raised by one-hot encoding for an id outside the fitted universe.
class UnknownIdError : public DataError {
 public:
  explicit UnknownIdError(const std::string& id)
      : DataError("unknown id '" + id + "' (not in one-hot universe)"),
        id_(id) {}

  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorCategory::kIo, message) {}
};

class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& message)
      : Error(ErrorCategory::kIntegrity, message) {}
};

// `status` is the HTTP status, or 0 for transport failures and timeouts.
class ProviderError : public Error {
 public:
  ProviderError(int status, const std::string& message)
      : Error(ErrorCategory::kProvider, message), status_(status) {}

  int status() const { return status_; }

 private:
  int status_;
};

class InfeasibleError : public Error {
 public:
  InfeasibleError(double cheapest_cost, double budget);

  // Cost of the cheapest candidate; a budget at least this large succeeds.
  double cheapest_cost() const { return cheapest_cost_; }
  double budget() const { return budget_; }

 private:
  double cheapest_cost_;
  double budget_;
};

}  // namespace metainf
