// SPDX-License-Identifier: Apache-2.0
#include "sigmak/errors.hpp"

namespace sigmak {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConeViolation:     return "CONE_VIOLATION";
    case ErrorCode::NonpositiveValue:  return "NONPOSITIVE_VALUE";
    case ErrorCode::Domain:            return "DOMAIN";
    case ErrorCode::SingularCenter:    return "SINGULAR_CENTER";
    case ErrorCode::ConeExit:          return "CONE_EXIT";
    case ErrorCode::SingularJacobian:  return "SINGULAR_JACOBIAN";
    case ErrorCode::MaxIter:           return "MAX_ITER";
    case ErrorCode::ContinuationStall: return "CONTINUATION_STALL";
    case ErrorCode::NotFound:          return "NOT_FOUND";
    case ErrorCode::NotTouching:       return "NOT_TOUCHING";
    case ErrorCode::BadInput:          return "BAD_INPUT";
  }
  return "UNKNOWN";
}

}  // namespace sigmak
