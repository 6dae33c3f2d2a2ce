// Copyright 2026 The FGRL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef FGRL_ERROR_HPP_
#define FGRL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace fgrl {

// Numeric values are part of the C ABI (see fgrl.h) and must not change.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kDisconnectedGraph = 2,
  kSelfLoop = 3,
  kIndexOutOfRange = 4,
  kNoActuator = 5,
  kEmptyCluster = 6,
  kUncoveredNode = 7,
  kInvalidPooledEdge = 8,
  kDimensionMismatch = 9,
  kNonFiniteInput = 10,
  kMissingGoal = 11,
  kNoParent = 12,
  kLengthMismatch = 13,
  kInvalidDimension = 14,
  kInvalidSigma = 15,
  kAskBeforeTell = 16,
  kTellWithoutAsk = 17,
  kNonFiniteFitness = 18,
  kInvalidConfig = 19,
  kActionDimensionMismatch = 20,
  kActionOutOfRange = 21,
  kGraphStateMismatch = 22,
  kInvalidLimbCount = 23,
  kIncompatibleCheckpoint = 24,
  kMissingCheckpoint = 25,
  kIo = 26,
  kParse = 27,
  kInternal = 28,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fgrl

#endif  // FGRL_ERROR_HPP_
