// Copyright 2026 The Deliberate Authors.
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

#include "deliberate/error.h"

namespace deliberate {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kValidation: return "VALIDATION";
    case ErrorCode::kStaleEdit: return "STALE_EDIT";
    case ErrorCode::kUnknownNode: return "UNKNOWN_NODE";
    case ErrorCode::kNotFound: return "NOT_FOUND";
    case ErrorCode::kUnknownRound: return "UNKNOWN_ROUND";
    case ErrorCode::kStageConflict: return "STAGE_CONFLICT";
    case ErrorCode::kPendingLabels: return "PENDING_LABELS";
    case ErrorCode::kPartialLabels: return "PARTIAL_LABELS";
    case ErrorCode::kAlreadyLabeled: return "ALREADY_LABELED";
    case ErrorCode::kTransport: return "TRANSPORT";
    case ErrorCode::kParse: return "PARSE";
    case ErrorCode::kBackendRefusal: return "BACKEND_REFUSAL";
    case ErrorCode::kDuplicateExhausted: return "DUPLICATE_EXHAUSTED";
    case ErrorCode::kPoolTooSmall: return "POOL_TOO_SMALL";
    case ErrorCode::kClusterExhausted: return "CLUSTER_EXHAUSTED";
    case ErrorCode::kAllSummariesEmpty: return "ALL_SUMMARIES_EMPTY";
    case ErrorCode::kManifest: return "MANIFEST";
    case ErrorCode::kConfig: return "CONFIG";
    case ErrorCode::kCorruptSession: return "CORRUPT_SESSION";
    case ErrorCode::kUnsupportedVersion: return "UNSUPPORTED_VERSION";
    case ErrorCode::kIo: return "IO";
    case ErrorCode::kInternal: return "INTERNAL";
  }
  return "INTERNAL";
}

bool IsBackendError(ErrorCode code) {
  return code == ErrorCode::kTransport || code == ErrorCode::kParse ||
         code == ErrorCode::kBackendRefusal ||
         code == ErrorCode::kDuplicateExhausted;
}

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kValidation:
    case ErrorCode::kStaleEdit:
    case ErrorCode::kUnknownNode:
    case ErrorCode::kPartialLabels:
    case ErrorCode::kManifest:
    case ErrorCode::kConfig:
      return 400;
    case ErrorCode::kNotFound:
    case ErrorCode::kUnknownRound:
      return 404;
    case ErrorCode::kStageConflict:
    case ErrorCode::kPendingLabels:
    case ErrorCode::kAlreadyLabeled:
    case ErrorCode::kPoolTooSmall:
    case ErrorCode::kClusterExhausted:
    case ErrorCode::kAllSummariesEmpty:
      return 409;
    case ErrorCode::kTransport:
    case ErrorCode::kParse:
    case ErrorCode::kBackendRefusal:
    case ErrorCode::kDuplicateExhausted:
      return 502;
    case ErrorCode::kCorruptSession:
    case ErrorCode::kUnsupportedVersion:
    case ErrorCode::kIo:
    case ErrorCode::kInternal:
      return 500;
  }
  return 500;
}

int ExitCodeFor(ErrorCode code) {
  if (code == ErrorCode::kConfig || code == ErrorCode::kManifest) return 2;
  if (IsBackendError(code)) return 3;
  return 4;
}

}  // namespace deliberate
