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
#include "fgrl/error.hpp"

namespace fgrl {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::kSelfLoop: return "SelfLoop";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kNoActuator: return "NoActuator";
    case ErrorCode::kEmptyCluster: return "EmptyCluster";
    case ErrorCode::kUncoveredNode: return "UncoveredNode";
    case ErrorCode::kInvalidPooledEdge: return "InvalidPooledEdge";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kMissingGoal: return "MissingGoal";
    case ErrorCode::kNoParent: return "NoParent";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kInvalidDimension: return "InvalidDimension";
    case ErrorCode::kInvalidSigma: return "InvalidSigma";
    case ErrorCode::kAskBeforeTell: return "AskBeforeTell";
    case ErrorCode::kTellWithoutAsk: return "TellWithoutAsk";
    case ErrorCode::kNonFiniteFitness: return "NonFiniteFitness";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kActionDimensionMismatch: return "ActionDimensionMismatch";
    case ErrorCode::kActionOutOfRange: return "ActionOutOfRange";
    case ErrorCode::kGraphStateMismatch: return "GraphStateMismatch";
    case ErrorCode::kInvalidLimbCount: return "InvalidLimbCount";
    case ErrorCode::kIncompatibleCheckpoint: return "IncompatibleCheckpoint";
    case ErrorCode::kMissingCheckpoint: return "MissingCheckpoint";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace fgrl
