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

// Finitely correlated states from an isometry V : K -> C^d (x) K.
//
// V is stored as a (d n) x n matrix whose rows s n .. s n + n - 1 form the
// site matrix A_s, so V = sum_s |s> (x) A_s and
//
//   E_Q(R) = V* (Q (x) R) V = sum_{s,t} Q_st A_s* R A_t.
//
// A finite chain with configuration s_0 .. s_{L-1} has amplitude
// tr(A_{s_{L-1}} ... A_{s_0}) on a ring and <l| A_{s_{L-1}} ... A_{s_0} |r>
// with open boundaries.

#ifndef ENTLAB_MPS_HPP
#define ENTLAB_MPS_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "entlab/entangle.hpp"
#include "entlab/lattice.hpp"
#include "entlab/spectra.hpp"
#include "entlab/types.hpp"

namespace entlab {

class MpsSpec {
 public:
  /// Validates the isometry (1e-12). Without `psi` the invariant state is
  /// solved for; a supplied psi must be faithful and invariant (1e-10).
  MpsSpec(int phys_dim, int aux_dim, Matrix isometry,
          std::optional<Matrix> psi = std::nullopt);

  static MpsSpec aklt();
  /// Haar-like random isometry from a QR factorization.
  static MpsSpec random(int phys_dim, int aux_dim, std::uint64_t seed);
  /// n = 1 spec of a product state with the given (normalized) site vector.
  static MpsSpec product(const Vector& site_state);

  int phys_dim() const { return d_; }
  int aux_dim() const { return n_; }
  const Matrix& isometry() const { return v_; }
  const Matrix& psi() const { return psi_; }
  Matrix site_matrix(int s) const { return v_.middleRows(s * n_, n_); }

  double isometry_defect() const;
  /// max |psi(E_1(R)) - psi(R)| over matrix units R.
  double invariance_residual() const;

 private:
  int d_;
  int n_;
  Matrix v_;
  Matrix psi_;
};

Matrix cp_map_apply(const MpsSpec& spec, const Matrix& q, const Matrix& r);

/// R -> E_1(R) as an n^2 x n^2 matrix on column-major vec(R).
Matrix transfer_matrix(const MpsSpec& spec);

struct TransferSpectrum {
  /// Sorted by modulus, largest first.
  std::vector<cplx> eigenvalues;
  cplx leading;
  /// 1 - |lambda_2|.
  double gap = 0.0;
};

TransferSpectrum transfer_spectrum(const MpsSpec& spec);

/// Fixed point of the dual map rho -> sum_s A_s rho A_s*, unit trace.
/// Throws degenerate-peripheral unless exactly one eigenvalue has modulus
/// within 1e-8 of 1.
Matrix find_invariant_state(int phys_dim, int aux_dim, const Matrix& isometry);

using SiteOperator = std::pair<int, Matrix>;

/// psi(E_{Q_0} o ... o E_{Q_l}(1)) after sorting by offset and inserting
/// identities; factors on one offset multiply in list order.
cplx mps_expectation(const MpsSpec& spec, const std::vector<SiteOperator>& ops);

/// phi(h) for an operator h on w consecutive sites (side d^w, first site
/// slowest), placed at offset 0.
cplx mps_local_expectation(const MpsSpec& spec, const Matrix& h);

/// Exact expectation in the normalized ring state of `length` sites,
/// tr(T_{Q_{L-1}} ... T_{Q_0}) / tr(T_1^L) with T_Q = sum Q_st conj(A_s) (x) A_t.
cplx ring_expectation(const MpsSpec& spec, int length,
                      const std::vector<SiteOperator>& ops);

struct Closure {
  /// Both empty: ring. Otherwise open with <left| ... |right>.
  Vector left;
  Vector right;
  bool is_ring() const { return left.size() == 0 && right.size() == 0; }
};

PureStateVector mps_to_vector(const MpsSpec& spec, int length, const Closure& closure = {},
                              std::int64_t dimension_guard = kDefaultDimensionGuard);

struct FrustrationRecord {
  int length = 0;
  /// phi(tau_j(h)) in the ring state of this length, one per placement.
  std::vector<double> placement_values;
  /// The translation-invariant value phi(h).
  double infinite_value = 0.0;
  /// -1 when not computed.
  int kernel_dimension = -1;
  bool frustration_free = false;
};

struct FrustrationOptions {
  double tolerance = 1e-10;
  bool compute_kernel = true;
  double kernel_threshold = 1e-8;
  bool relative_threshold = true;
};

/// h is one term on sites [0, w); it is placed on every [j, j + w) of each
/// length. Throws not-positive / non-hermitian for an invalid term.
std::vector<FrustrationRecord> frustration_free_check(
    const LocalOperator& h, const MpsSpec& spec, const std::vector<int>& lengths,
    const FrustrationOptions& options = {});

/// Number of eigenvalues below threshold (times max(1, norm bound) when
/// `relative`). Throws not-positive if H has an eigenvalue below -1e-10
/// on that scale.
int kernel_dimension(const WindowHamiltonian& h, double threshold = 1e-8,
                     bool relative = true, const SolverOptions& options = {});

struct EdgeDiagnostics {
  /// |<xi_1(i), xi_1(j)>|
  RealMatrix gram;
  double max_off_diagonal = 0.0;
  double min_singular_value = 0.0;
  /// 1 / (number of states)
  double independence_threshold = 0.0;
  bool below_threshold = false;
  bool nonsingular = false;
};

/// Gram matrix of the leading left Schmidt vectors across `cut`.
EdgeDiagnostics edge_vector_diagnostics(const std::vector<PureStateVector>& states,
                                        int cut);

/// JSON (schema "entlab-mps/1"): d, n, V as rows of [re, im], optional psi,
/// or {"builtin": "aklt"}.
MpsSpec parse_mps_json(const std::string& text);
MpsSpec load_mps(const std::string& path);
std::string mps_to_json(const MpsSpec& spec);

struct Observable {
  std::string name;
  std::vector<SiteOperator> ops;
};

/// {"observables": [{"name": .., "factors": [{"offset": k, "op": "sz"} or
/// {"offset": k, "matrix": [[..]]}]}]}; named ops: id, sx, sy, sz, sp, sm.
std::vector<Observable> parse_observables_json(const std::string& text, int phys_dim);
std::vector<Observable> load_observables(const std::string& path, int phys_dim);

}  // namespace entlab

#endif  // ENTLAB_MPS_HPP
