// Copyright 2026 The xasm Authors. All Rights Reserved.
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

#ifndef XASM_ERROR_HPP_
#define XASM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace xasm {

enum class ErrorCode {
  kEmptyInstruction,
  kMalformedRecord,
  kDuplicateBlockOrdinal,
  kEmptyCorpus,
  kZeroVocabulary,
  kUnknownToken,
  kArchMismatch,
  kOptMismatch,
  kBadFractions,
  kBadConfig,
  kEmptySequence,
  kDimMismatch,
  kEmptyBatch,
  kEmptyDataset,
  kEmptyPath,
  kDegenerateLabels,
  kInvalidArgument,
  kIo,
};

const char* ErrorCodeName(ErrorCode code);

// All data errors raised by the library carry one of the codes above. The
// CLI maps them to exit status 2.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace xasm

#endif  // XASM_ERROR_HPP_
