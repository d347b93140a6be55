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

// Spinless fermions on a finite window and the Jordan-Wigner map.
//
// Occupation basis: local state 0 is "occupied" and local state 1 is
// "empty", so that sigma_z = 2 n - 1 is the ordinary diag(+1, -1) in the
// spin basis of lattice.hpp. A creation or annihilation operator on site j
// acts with sign (-1)^(number of occupied sites i < j in the window).

#ifndef ENTLAB_FERMION_HPP
#define ENTLAB_FERMION_HPP

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "entlab/lattice.hpp"
#include "entlab/types.hpp"

namespace entlab {

struct FermionFactor {
  int site;
  bool creation;

  bool operator==(const FermionFactor&) const = default;
};

/// Product of factors (leftmost first) times a coefficient; any order.
struct RawMonomial {
  cplx coeff{1.0, 0.0};
  std::vector<FermionFactor> factors;
};

/// c+_{C1} ... c+_{Cp} c_{A1} ... c_{Aq} with C and A strictly ascending.
struct NormalMonomial {
  std::vector<int> creations;
  std::vector<int> annihilations;

  auto operator<=>(const NormalMonomial&) const = default;
  int degree() const {
    return static_cast<int>(creations.size() + annihilations.size());
  }
  int charge() const {
    return static_cast<int>(creations.size()) -
           static_cast<int>(annihilations.size());
  }
  std::vector<FermionFactor> factors() const;
};

enum class Parity { kEven, kOdd, kMixed };

/// Normal-ordered sum of CAR monomials.
class FermionOperator {
 public:
  FermionOperator() = default;

  static FermionOperator identity(cplx coeff = 1.0);
  static FermionOperator creation(int site);
  static FermionOperator annihilation(int site);
  static FermionOperator number(int site);

  const std::map<NormalMonomial, cplx>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  /// Adds coeff * monomial (which must already be normal ordered).
  void add(const NormalMonomial& m, cplx coeff);

  FermionOperator operator+(const FermionOperator& other) const;
  FermionOperator operator-(const FermionOperator& other) const;
  FermionOperator operator*(const FermionOperator& other) const;
  FermionOperator operator*(cplx s) const;
  bool operator==(const FermionOperator&) const = default;

  FermionOperator adjoint() const;
  /// Largest |coefficient| of this - other.
  double distance(const FermionOperator& other) const;

  Parity parity() const;
  bool is_even() const { return parity() == Parity::kEven; }
  /// Removes coefficients with modulus <= tol.
  FermionOperator pruned(double tol) const;

  /// Smallest and largest site referenced; nullopt for a scalar.
  std::optional<std::pair<int, int>> support() const;

 private:
  std::map<NormalMonomial, cplx> terms_;
};

FermionOperator operator*(cplx s, const FermionOperator& op);

/// Canonical normal-ordered form under {c_i, c_j+} = delta_ij.
FermionOperator car_normal_order(const std::vector<RawMonomial>& raw);

/// Matrix of the operator on the Fock space of a window, built directly
/// from the CAR action on occupation states.
Matrix fermion_matrix(const FermionOperator& op, const LatticeWindow& window);

enum class ReferenceState { kFock, kAntiFock };

/// Expectation in the all-empty (Fock) or all-filled (anti-Fock) state.
cplx fock_expectation(const FermionOperator& op, ReferenceState which);

struct JordanWignerImage {
  LocalOperator op;
  int anchor;
  std::string convention;
  /// True when the image commutes with the parity prod_j sigma_z^(j).
  bool parity_even;
};

/// Spin image on [anchor, window.end()) with strings prod_{anchor<=i<j}
/// (-sigma_z^(i)). The anchor defaults to window.start() and must be given
/// explicitly for operators that are not even.
JordanWignerImage jordan_wigner(const FermionOperator& op,
                                const LatticeWindow& window,
                                std::optional<int> string_anchor = {});

/// Fermion operator whose occupation-basis matrix equals the given spin
/// operator (spin-1/2 windows only).
FermionOperator jordan_wigner_inverse(const LocalOperator& spin_op);

struct HoppingParams {
  double t = 1.0;
  double mu = 0.0;
  double u = 0.0;
};

/// sum_j [-t (c+_j c_{j+1} + h.c.) - mu n_j + U n_j n_{j+1}] on a window.
FermionOperator fermion_hamiltonian(const HoppingParams& p,
                                    const LatticeWindow& window,
                                    bool periodic = false);

/// Max |lambda_i(fermion) - lambda_i(spin)| over the sorted spectra.
double spectral_equivalence_check(const FermionOperator& op,
                                  const LatticeWindow& window);

/// Average of the U(1) gauge action: keeps charge-zero monomials.
FermionOperator gauge_average(const FermionOperator& op);

/// prod_j (2 n_j - 1) over the window.
FermionOperator parity_operator(const LatticeWindow& window);

/// One monomial per line: `coeff c+ i c j ...`; coeff is a real number or
/// (re,im). Blank lines and lines starting with '#' are skipped.
FermionOperator parse_fermion_text(const std::string& text);
std::string to_fermion_text(const FermionOperator& op);

}  // namespace entlab

#endif  // ENTLAB_FERMION_HPP
