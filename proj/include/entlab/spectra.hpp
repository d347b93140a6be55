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

// Low-lying spectra of window Hamiltonians.
//
// The iterative solver is a block Lanczos process with full
// reorthogonalization, thick restarts and locking: eigenpairs are produced
// one at a time in ascending order, each converged vector is locked and
// projected out of the remaining search. Exact degeneracies (ground multiplets of
// frustration-free chains) are therefore resolved one vector at a time.

#ifndef ENTLAB_SPECTRA_HPP
#define ENTLAB_SPECTRA_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "entlab/lattice.hpp"
#include "entlab/types.hpp"

namespace entlab {

enum class SolverMethod { kAuto, kLanczos, kDense };

struct SolverOptions {
  /// Required residual ||H v - lambda v||.
  double tol = 1e-9;
  /// Cap on matrix-vector products over the whole solve.
  int max_iterations = 5000;
  std::uint64_t seed = 20260101;
  SolverMethod method = SolverMethod::kAuto;
  /// kAuto diagonalizes densely up to this dimension.
  std::int64_t dense_max = 512;
  /// Krylov basis size before a thick restart; 0 picks one from memory.
  int max_basis = 0;
  /// Independent Krylov sequences; multiplets up to this size are resolved
  /// without relying on rounding noise.
  int block_size = 4;
};

struct EigenResult {
  std::vector<double> eigenvalues;
  std::vector<PureStateVector> eigenvectors;
  std::vector<double> residuals;
  double multiplicity_tolerance = 1e-8;
  int iterations = 0;
};

/// Produces eigenpairs of h in ascending order on demand.
class EigenStream {
 public:
  EigenStream(const WindowHamiltonian& h, const SolverOptions& options = {});
  ~EigenStream();
  EigenStream(EigenStream&&) noexcept;
  EigenStream& operator=(EigenStream&&) noexcept;

  struct Pair {
    double value;
    Vector vector;
    double residual;
  };

  /// Next eigenpair; throws not-converged at the iteration cap and
  /// invalid-argument once the whole spectrum has been returned.
  Pair next();
  int returned() const;
  int iterations() const;
  bool exhausted() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

EigenResult lowest_eigenpairs(const WindowHamiltonian& h, int k,
                              const SolverOptions& options = {});

struct GapEstimate {
  double ground_energy = 0.0;
  double gap = 0.0;
  int ground_multiplicity = 1;
  int window_length = 0;
  double first_excited = 0.0;
};

/// Groups eigenvalues within degeneracy_tol of E0 and measures the distance
/// to the next level. Throws cannot-resolve when more than `max_pairs`
/// eigenpairs would be needed or the spectrum has a single level.
GapEstimate gap_estimate(const WindowHamiltonian& h, double degeneracy_tol = 1e-8,
                         const SolverOptions& options = {}, int max_pairs = 24);

/// phi(Q+[H,Q]) / (phi(Q+Q) - |phi(Q)|^2), +inf when the denominator is
/// below 1e-14. The probe window must lie inside the Hamiltonian window.
double variational_gap_witness(const PureStateVector& state,
                               const WindowHamiltonian& h,
                               const LocalOperator& probe);

}  // namespace entlab

#endif  // ENTLAB_SPECTRA_HPP
