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

#include "tutoreval/error.hpp"

namespace tutoreval {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::NoTutorTurns: return "NoTutorTurns";
    case ErrorCode::InvalidTranscript: return "InvalidTranscript";
    case ErrorCode::InvalidChunkParams: return "InvalidChunkParams";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
    case ErrorCode::AuthError: return "AuthError";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::ScriptExhausted: return "ScriptExhausted";
    case ErrorCode::EmbedderUnavailable: return "EmbedderUnavailable";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DuplicateRecordId: return "DuplicateRecordId";
    case ErrorCode::EmptyStore: return "EmptyStore";
    case ErrorCode::MissingBinding: return "MissingBinding";
    case ErrorCode::UnknownPlaceholder: return "UnknownPlaceholder";
    case ErrorCode::EmptyRubric: return "EmptyRubric";
    case ErrorCode::RagStoreMissing: return "RagStoreMissing";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::InvalidCode: return "InvalidCode";
    case ErrorCode::InconsistentNoInfo: return "InconsistentNoInfo";
    case ErrorCode::Aborted: return "Aborted";
    case ErrorCode::DanglingRunReference: return "DanglingRunReference";
  }
  return "Unknown";
}

}  // namespace tutoreval
