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

#ifndef ENTLAB_TYPES_HPP
#define ENTLAB_TYPES_HPP

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace entlab {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Largest state-vector dimension accepted by default (2^22 basis states).
inline constexpr std::int64_t kDefaultDimensionGuard = std::int64_t{1} << 22;

/// Largest side of a dense operator matrix we are willing to allocate.
inline constexpr std::int64_t kMaxDenseSide = std::int64_t{1} << 13;

}  // namespace entlab

#endif  // ENTLAB_TYPES_HPP
