// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace expseek {

enum class ErrorCode {
  MalformedDistribution,
  EmptyInput,
  DegenerateData,
  FitFailure,
  UnstableBoundary,
  InsufficientBootstrap,
  ParseError,
  StateError,
  BudgetError,
  CapabilityError,
  BackendError,
  ScriptUnderrun,
  ValidationError,
  ExtractionError,
  ConsistencyError,
  JudgeError,
  ConfigError,
  ToolError,
};

/// Typed error carrying a machine-checkable code. Every failure path in the
/// library throws this (or a subclass) so callers can branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failure with the offending span of input preserved for diagnostics.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string span)
      : Error(ErrorCode::ParseError, what), span_(std::move(span)) {}

  const std::string& span() const noexcept { return span_; }

 private:
  std::string span_;
};

}  // namespace expseek
