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

#ifndef DELIBERATE_ERROR_H_
#define DELIBERATE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace deliberate {

// Stable error taxonomy shared by the engine, the HTTP facade and the CLI.
enum class ErrorCode {
  kInvalidArgument,
  kValidation,
  kStaleEdit,
  kUnknownNode,
  kNotFound,
  kUnknownRound,
  kStageConflict,
  kPendingLabels,
  kPartialLabels,
  kAlreadyLabeled,
  kTransport,
  kParse,
  kBackendRefusal,
  kDuplicateExhausted,
  kPoolTooSmall,
  kClusterExhausted,
  kAllSummariesEmpty,
  kManifest,
  kConfig,
  kCorruptSession,
  kUnsupportedVersion,
  kIo,
  kInternal,
};

std::string_view ErrorCodeName(ErrorCode code);

// HTTP status for an engine error: validation 400, unknown 404,
// stage conflict 409, backend 502.
int HttpStatusFor(ErrorCode code);

// CLI exit code: 2 config error, 3 backend error, 4 engine error.
int ExitCodeFor(ErrorCode code);

bool IsBackendError(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

  // The raw model output for PARSE errors; empty otherwise.
  const std::string& raw_text() const { return raw_text_; }
  Error& set_raw_text(std::string raw) {
    raw_text_ = std::move(raw);
    return *this;
  }

 private:
  ErrorCode code_;
  std::string raw_text_;
};

}  // namespace deliberate

#endif  // DELIBERATE_ERROR_H_
