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

// Local observables, finite-range interactions and window Hamiltonians.
//
// Basis convention used everywhere: the site with the smallest index is the
// slowest-varying tensor factor, and local state 0 is the highest weight
// (spin up for spin-1/2, m = +S in general).

#ifndef ENTLAB_LATTICE_HPP
#define ENTLAB_LATTICE_HPP

#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "entlab/kernels.hpp"
#include "entlab/types.hpp"

namespace entlab {

/// Contiguous block of sites [start, start + length) with local dimension d.
class LatticeWindow {
 public:
  LatticeWindow(int start, int length, int local_dim);

  int start() const { return start_; }
  int length() const { return length_; }
  int end() const { return start_ + length_; }
  int local_dim() const { return local_dim_; }

  /// d^length; throws dimension-overflow when above `guard`.
  std::int64_t dimension(std::int64_t guard = kDefaultDimensionGuard) const;

  bool contains_site(int site) const { return site >= start_ && site < end(); }
  bool contains(const LatticeWindow& other) const {
    return other.start_ >= start_ && other.end() <= end();
  }

  bool operator==(const LatticeWindow&) const = default;

 private:
  int start_;
  int length_;
  int local_dim_;
};

/// Dense operator on a window. Hermiticity is a predicate, not required.
class LocalOperator {
 public:
  LocalOperator(LatticeWindow window, Matrix matrix);

  static LocalOperator identity(const LatticeWindow& window);

  const LatticeWindow& window() const { return window_; }
  const Matrix& matrix() const { return matrix_; }

  double hermiticity_defect() const;
  bool is_hermitian(double tol = 1e-12) const {
    return hermiticity_defect() <= tol;
  }
  /// Largest singular value.
  double norm() const;

  LocalOperator adjoint() const { return {window_, matrix_.adjoint()}; }

 private:
  LatticeWindow window_;
  Matrix matrix_;
};

namespace ops {

Matrix identity(int d);
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
/// Spin-S operators in the basis m = S, S-1, ..., -S.
Matrix spin_x(int d);
Matrix spin_y(int d);
Matrix spin_z(int d);
Matrix spin_plus(int d);
Matrix spin_minus(int d);
Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace ops

/// op (x) identity on target \ op.window.
LocalOperator embed(const LocalOperator& op, const LatticeWindow& target);

/// Places `matrix` (first listed site slowest) on an ordered list of
/// distinct sites of `target`; the sites need not be contiguous or sorted.
LocalOperator embed_at_sites(const Matrix& matrix, std::span<const int> sites,
                             const LatticeWindow& target);

/// Normalized vector over the tensor basis of a window.
class PureStateVector {
 public:
  /// Requires unit norm within 1e-10 unless `normalize` is set.
  PureStateVector(LatticeWindow window, Vector amplitudes,
                  bool normalize = false);

  static PureStateVector product(const LatticeWindow& window,
                                 const std::vector<Vector>& site_states);
  static PureStateVector basis_state(const LatticeWindow& window,
                                     std::int64_t index);

  const LatticeWindow& window() const { return window_; }
  const Vector& amplitudes() const { return amplitudes_; }
  std::int64_t dimension() const { return amplitudes_.size(); }

 private:
  LatticeWindow window_;
  Vector amplitudes_;
};

/// Applies op (embedded) to a vector on `window` without materialising the
/// embedding.
Vector apply_local(const LocalOperator& op, const LatticeWindow& window,
                   const Vector& v);

cplx expectation(const PureStateVector& state, const LocalOperator& op);

/// Finite-range interaction: hermitian terms keyed by their support set X.
class Interaction {
 public:
  /// `ring_length > 0` measures diameters cyclically on a ring of that
  /// many sites starting at `ring_start`.
  Interaction(int local_dim, int range, int ring_start = 0,
              int ring_length = 0);

  int local_dim() const { return local_dim_; }
  int range() const { return range_; }
  bool is_ring() const { return ring_length_ > 0; }

  /// Adds a term acting on the ordered `sites`; duplicates of the same
  /// support set are summed. Throws non-hermitian or invalid-argument
  /// (range violation).
  void add_term(std::span<const int> sites, const Matrix& matrix);

  /// Support sets X (sorted) with their operators on X itself (side
  /// d^|X|, smallest site slowest).
  const std::map<std::vector<int>, Matrix>& terms() const { return terms_; }

  /// Term on X embedded on the contiguous hull [min X, max X].
  LocalOperator hull_operator(const std::vector<int>& support) const;

  int diameter(const std::vector<int>& support) const;

 private:
  int local_dim_;
  int range_;
  int ring_start_;
  int ring_length_;
  std::map<std::vector<int>, Matrix> terms_;
};

struct AssemblyOptions {
  /// Dense storage strictly below this dimension, CSR at and above.
  std::int64_t dense_below = std::int64_t{1} << 12;
  std::int64_t dimension_guard = kDefaultDimensionGuard;
  bool parallel = true;
};

/// Sum of the interaction terms contained in a window.
class WindowHamiltonian {
 public:
  WindowHamiltonian(LatticeWindow window, Matrix dense);
  WindowHamiltonian(LatticeWindow window, kernels::CsrMatrix sparse,
                    double norm_bound);

  const LatticeWindow& window() const { return window_; }
  std::int64_t dimension() const { return dim_; }
  bool is_dense() const { return std::holds_alternative<Matrix>(storage_); }

  /// y = H x
  void apply(const Vector& x, Vector& y) const;
  Vector apply(const Vector& x) const;

  /// Dense copy; throws dimension-overflow above kMaxDenseSide.
  Matrix to_dense() const;
  LocalOperator to_local_operator() const { return {window_, to_dense()}; }

  double hermiticity_defect() const;
  /// Upper bound on the operator norm (sum of term norms, or exact for
  /// dense storage).
  double norm_bound() const { return norm_bound_; }

  const kernels::CsrMatrix* sparse() const {
    return std::get_if<kernels::CsrMatrix>(&storage_);
  }

 private:
  LatticeWindow window_;
  std::int64_t dim_;
  std::variant<Matrix, kernels::CsrMatrix> storage_;
  double norm_bound_ = 0.0;
};

WindowHamiltonian assemble_hamiltonian(const Interaction& interaction,
                                       const LatticeWindow& window,
                                       const AssemblyOptions& options = {});

/// max_j sum_{X contains j, X in window} ||Psi(X)|| / |X|.
double boundedness_certificate(const Interaction& interaction,
                               const LatticeWindow& window);

/// <psi| H |psi>
double energy(const PureStateVector& state, const WindowHamiltonian& h);

}  // namespace entlab

#endif  // ENTLAB_LATTICE_HPP
