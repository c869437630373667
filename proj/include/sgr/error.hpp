/*
 * Copyright 2026 The sgretrieve Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sgr {

enum class ErrorKind {
  // Input data problems.
  MalformedRecord,
  IndexOutOfRange,
  EmptyGraph,
  DimensionMismatch,
  ParseError,
  EmptySet,
  UnknownImage,
  UnknownId,
  DuplicateId,
  MissingDecision,
  InsufficientAnnotators,
  IoError,
  VersionMismatch,
  CorruptFile,
  // Caller/configuration problems.
  Config,
  MissingStore,
  NonPositiveCutoff,
  // Broken internal contracts.
  ShapeMismatch,
  CacheMismatch,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::EmptyGraph: return "EmptyGraph";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::UnknownImage: return "UnknownImage";
    case ErrorKind::UnknownId: return "UnknownId";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::MissingDecision: return "MissingDecision";
    case ErrorKind::InsufficientAnnotators: return "InsufficientAnnotators";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::CorruptFile: return "CorruptFile";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::MissingStore: return "MissingStore";
    case ErrorKind::NonPositiveCutoff: return "NonPositiveCutoff";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::CacheMismatch: return "CacheMismatch";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace sgr
