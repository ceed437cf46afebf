// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sigmak {

enum class ErrorCode {
  ConeViolation,
  NonpositiveValue,
  Domain,
  SingularCenter,
  ConeExit,
  SingularJacobian,
  MaxIter,
  ContinuationStall,
  NotFound,
  NotTouching,
  BadInput,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg, std::vector<int> nodes = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + msg),
        code(code),
        nodes(std::move(nodes)) {}

  ErrorCode code;
  std::vector<int> nodes;  // offending grid nodes, when applicable
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg,
                              std::vector<int> nodes = {}) {
  throw Error(code, msg, std::move(nodes));
}

}  // namespace sigmak
