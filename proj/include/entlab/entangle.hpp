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

// Schmidt spectra, entropies and the truncation bounds built on them.
//
// A cut at site c splits a window [a, b) into [a, c) and [c, b). Entropies
// use the natural logarithm and 0 ln 0 = 0.

#ifndef ENTLAB_ENTANGLE_HPP
#define ENTLAB_ENTANGLE_HPP

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "entlab/lattice.hpp"
#include "entlab/types.hpp"

namespace entlab {

inline constexpr double kSchmidtFloor = 1e-14;

struct SchmidtSpectrum {
  /// Descending weights above the floor.
  std::vector<double> weights;
  int cut = 0;
  /// Columns are xi_j (left) and eta_j (right) when requested.
  std::optional<Matrix> left_vectors;
  std::optional<Matrix> right_vectors;

  int rank() const { return static_cast<int>(weights.size()); }
};

SchmidtSpectrum schmidt_decompose(const PureStateVector& state, int cut,
                                  double floor = kSchmidtFloor,
                                  bool keep_vectors = false);

/// -sum w ln w.
double shannon_entropy(std::span<const double> weights);
double entanglement_entropy(const SchmidtSpectrum& spectrum);

struct TruncationReport {
  double epsilon = 0.0;
  int k = 0;
  double entropy = 0.0;
  double tail_mass = 0.0;
  double bound_k = 0.0;
  double bound_lambda1 = 0.0;
  double lambda1 = 0.0;
  double lambda_k = 0.0;

  /// k <= exp(S/eps) and lambda_1 >= lambda_k >= exp(-S/eps).
  bool bounds_hold() const {
    return k <= bound_k && lambda1 >= bound_lambda1 && lambda_k >= bound_lambda1;
  }
};

/// Smallest k with sum_{j>k} w_j < eps; then also sum_{j>=k} w_j >= eps.
TruncationReport truncation_index(std::span<const double> weights, double epsilon);
TruncationReport truncation_index(const SchmidtSpectrum& spectrum, double epsilon);

struct TruncatedState {
  PureStateVector state;
  /// ||Omega(N) - Omega||^2
  double distance_sq;
};

/// Normalized state built from the `keep` largest Schmidt terms.
TruncatedState truncate_state(const PureStateVector& state, int cut, int keep);

/// Unit-trace positive semidefinite matrix.
class DensityMatrix {
 public:
  /// Validates hermiticity (1e-12), spectrum >= -1e-12 and trace 1 (1e-12).
  explicit DensityMatrix(Matrix matrix);

  static DensityMatrix pure(const Vector& v);
  /// Reduced state of sites [first, first + length) of a pure state.
  static DensityMatrix reduced(const PureStateVector& state, int first, int length);

  const Matrix& matrix() const { return matrix_; }
  Eigen::Index dimension() const { return matrix_.rows(); }
  /// Descending eigenvalues.
  RealVector eigenvalues() const;
  double entropy() const;

 private:
  Matrix matrix_;
};

/// Sum of the k largest eigenvalues (the maximum of tr(rho E) over rank-k
/// projections E).
double minmax_top_k(const DensityMatrix& rho, int k);

/// Count of singular values above tol across the cut.
int schmidt_rank(const PureStateVector& state, int cut, double tol = 1e-10);

/// (|<probe|state>|^2, sum of the top K Schmidt weights of state). The probe
/// must have Schmidt rank <= K (rank-exceeded otherwise).
std::pair<double, double> rank_limited_overlap_bound(const PureStateVector& state,
                                                     const PureStateVector& probe,
                                                     int cut, int max_rank);

/// tr rho1 (ln rho1 - ln rho2); +inf unless support(rho1) is inside
/// support(rho2) (eigenvalue threshold 1e-12).
double relative_entropy(const DensityMatrix& rho1, const DensityMatrix& rho2);

/// S(rho1, rho2) minus the relative entropy of the two-outcome
/// distributions (phi_i(E), phi_i(1 - E)).
double binary_monotonicity_gap(const DensityMatrix& rho1, const DensityMatrix& rho2,
                               const LocalOperator& projector);

/// Entropy at every interior cut, as (cut, entropy) pairs.
std::vector<std::pair<int, double>> entropy_profile(const PureStateVector& state);

/// Entropy of the block [first, last] (inclusive) of a pure state.
double block_entropy(const PureStateVector& state, int first, int last);

/// s[j,k] + s[k+1,i] - s[j,i] for j <= k < i.
double subadditivity_check(const PureStateVector& state, int j, int k, int i);

struct TailBound {
  double lhs = 0.0;
  double rhs = 0.0;
  /// a has nonincreasing differences and a_1 = sum x: under these the
  /// inequality lhs <= rhs is guaranteed.
  bool sufficient = false;
};

/// lhs = sum -x ln x, rhs = sum_k -(a_k - a_{k+1}) ln(a_k - a_{k+1}) with
/// a_{n+1} = 0. Requires x positive nonincreasing, 0 <= a_{k+1} <= a_k <= 1
/// and sum_{j>=k} x_j <= a_k (hypothesis-violated otherwise).
TailBound entropy_tail_bounds(std::span<const double> x, std::span<const double> a);

/// Block bound over the first K-1 entries of a positive nonincreasing x:
/// lhs = sum -x_j ln x_j, rhs = X ln K - X ln X with X = sum x_j.
std::pair<double, double> entropy_block_bound(std::span<const double> x, int big_k);

struct EntropyDeviation {
  double s = 0.0;
  double d_hat = 0.0;
};

/// entropies[n-1] = s([0, n-1]); the rate s is the slope of a least-squares
/// fit over the last quarter (at least two points).
EntropyDeviation mean_entropy_deviation(std::span<const double> entropies);

}  // namespace entlab

#endif  // ENTLAB_ENTANGLE_HPP
