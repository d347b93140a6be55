// Copyright 2026 The entlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ENTLAB_ERROR_HPP
#define ENTLAB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace entlab {

enum class ErrorKind {
  kInvalidArgument,
  kWindowNotContained,
  kLocalDimMismatch,
  kDimensionOverflow,
  kNonHermitian,
  kNotPositive,
  kNotConverged,
  kCannotResolve,
  kCutOutOfRange,
  kNotNormalized,
  kRankExceeded,
  kHypothesisViolated,
  kDegeneratePeripheral,
  kOddOperator,
  kParse,
  kConfig,
  kIo,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (and
/// tests) can branch on the category without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the eigensolvers; carries the best residual reached.
class NotConvergedError : public Error {
 public:
  NotConvergedError(const std::string& what, double best_residual)
      : Error(ErrorKind::kNotConverged, what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kWindowNotContained: return "window-not-contained";
    case ErrorKind::kLocalDimMismatch: return "local-dim-mismatch";
    case ErrorKind::kDimensionOverflow: return "dimension-overflow";
    case ErrorKind::kNonHermitian: return "non-hermitian";
    case ErrorKind::kNotPositive: return "not-positive";
    case ErrorKind::kNotConverged: return "not-converged";
    case ErrorKind::kCannotResolve: return "cannot-resolve";
    case ErrorKind::kCutOutOfRange: return "cut-out-of-range";
    case ErrorKind::kNotNormalized: return "not-normalized";
    case ErrorKind::kRankExceeded: return "rank-exceeded";
    case ErrorKind::kHypothesisViolated: return "hypothesis-violated";
    case ErrorKind::kDegeneratePeripheral: return "degenerate-peripheral";
    case ErrorKind::kOddOperator: return "odd-operator";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace entlab

#endif  // ENTLAB_ERROR_HPP
