// Copyright 2026 the tutoreval authors
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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tutoreval {

enum class ErrorCode {
  // transcript
  EmptyInput,
  MalformedLine,
  NoTutorTurns,
  InvalidTranscript,
  InvalidChunkParams,
  // files and config
  FileNotFound,
  ParseError,
  ValidationError,
  ConfigError,
  IoError,
  // llm_client
  InvalidRequest,
  AuthError,
  RateLimited,
  TransportError,
  MalformedResponse,
  ScriptExhausted,
  // rag_store
  EmbedderUnavailable,
  DimensionMismatch,
  DuplicateRecordId,
  EmptyStore,
  // strategies / assessment
  MissingBinding,
  UnknownPlaceholder,
  EmptyRubric,
  RagStoreMissing,
  // cost_ledger
  UnknownModel,
  // annotation
  InvalidCode,
  InconsistentNoInfo,
  Aborted,
  DanglingRunReference,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. The code is the stable, testable part;
/// the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Error(ErrorCode code, std::size_t line, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + " (line " + std::to_string(line) +
                           "): " + message),
        code_(code),
        line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  /// 1-based line number for errors tied to a position in an input file.
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace tutoreval
