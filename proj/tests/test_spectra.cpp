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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "entlab/error.hpp"
#include "entlab/models.hpp"
#include "entlab/spectra.hpp"

namespace entlab {
namespace {

SolverOptions lanczos() {
  SolverOptions o;
  o.method = SolverMethod::kLanczos;
  return o;
}

AssemblyOptions sparse_storage() {
  AssemblyOptions a;
  a.dense_below = 1;
  return a;
}

void expect_orthonormal(const EigenResult& r) {
  for (std::size_t i = 0; i < r.eigenvectors.size(); ++i) {
    for (std::size_t j = 0; j < r.eigenvectors.size(); ++j) {
      const cplx ip = r.eigenvectors[i].amplitudes().dot(r.eigenvectors[j].amplitudes());
      EXPECT_LT(std::abs(ip - (i == j ? 1.0 : 0.0)), 1e-10);
    }
  }
}

TEST(Lanczos, HeisenbergTwoSites) {
  WindowHamiltonian h = model_hamiltonian(builtin_model("heisenberg"), 2);
  EigenResult r = lowest_eigenpairs(h, 4);
  EXPECT_NEAR(r.eigenvalues[0], -0.75, 1e-12);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(r.eigenvalues[i], 0.25, 1e-12);
}

TEST(Lanczos, DiagonalGivesCoordinateVectors) {
  const int n = 6;
  Matrix m = Matrix::Zero(64, 64);
  for (int i = 0; i < 64; ++i) m(i, i) = (i * 37) % 64;
  WindowHamiltonian h(LatticeWindow(0, n, 2), m);
  EigenResult r = lowest_eigenpairs(h, 3, lanczos());
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(r.eigenvalues[k], k, 1e-9);
    int expect_index = 0;
    for (int i = 0; i < 64; ++i)
      if ((i * 37) % 64 == k) expect_index = i;
    EXPECT_NEAR(std::abs(r.eigenvectors[k].amplitudes()(expect_index)), 1.0, 1e-9);
  }
}

TEST(Lanczos, AgreesWithDense) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (const char* name : {"heisenberg", "tfim", "xy"}) {
    ModelSpec m = builtin_model(name);
    WindowHamiltonian h = model_hamiltonian(m, 10, sparse_storage());
    Eigen::VectorXd exact = Eigen::SelfAdjointEigenSolver<Matrix>(h.to_dense()).eigenvalues();
    EigenResult r = lowest_eigenpairs(h, 6, lanczos());
    for (int k = 0; k < 6; ++k) EXPECT_NEAR(r.eigenvalues[k], exact(k), 1e-9) << name << k;
    for (double res : r.residuals) EXPECT_LT(res, 1e-9);
    expect_orthonormal(r);
  }
  // A complex hermitian operator with no structure.
  Matrix a(256, 256);
  for (int i = 0; i < 256; ++i)
    for (int j = 0; j < 256; ++j) a(i, j) = cplx(g(rng), g(rng));
  a = (a + a.adjoint()).eval();
  WindowHamiltonian h(LatticeWindow(0, 8, 2), a);
  Eigen::VectorXd exact = Eigen::SelfAdjointEigenSolver<Matrix>(a).eigenvalues();
  EigenResult r = lowest_eigenpairs(h, 4, lanczos());
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(r.eigenvalues[k], exact(k), 1e-9);
}

TEST(Lanczos, AkltOpenChainFourZeros) {
  WindowHamiltonian h = model_hamiltonian(builtin_model("aklt"), 6, sparse_storage());
  EigenResult r = lowest_eigenpairs(h, 5, lanczos());
  for (int k = 0; k < 4; ++k) EXPECT_LT(std::abs(r.eigenvalues[k]), 1e-9);
  EXPECT_GT(r.eigenvalues[4], 0.1);
  expect_orthonormal(r);
}

TEST(Lanczos, XyChainFreeFermionLevels) {
  const int length = 12;
  std::vector<double> eps;
  for (int k = 1; k <= length; ++k) eps.push_back(2.0 * std::cos(std::numbers::pi * k / (length + 1)));
  double e0 = 0.0, smallest = 1e9;
  for (double e : eps) {
    e0 += std::min(e, 0.0);
    smallest = std::min(smallest, std::abs(e));
  }
  WindowHamiltonian h = model_hamiltonian(builtin_model("xy"), length);
  EigenResult r = lowest_eigenpairs(h, 3);
  EXPECT_NEAR(r.eigenvalues[0], e0, 1e-9);
  // The smallest |eps| is doubly degenerate (k and L+1-k are not, but +-eps pairs are).
  EXPECT_NEAR(r.eigenvalues[1], e0 + smallest, 1e-9);
}

TEST(Lanczos, Errors) {
  WindowHamiltonian h = model_hamiltonian(builtin_model("heisenberg"), 3);
  EXPECT_THROW(lowest_eigenpairs(h, 0), Error);
  EXPECT_THROW(lowest_eigenpairs(h, 9), Error);
  SolverOptions bad = lanczos();
  bad.tol = 0.0;
  EXPECT_THROW(lowest_eigenpairs(h, 1, bad), Error);
  SolverOptions starved = lanczos();
  starved.max_iterations = 3;
  WindowHamiltonian big = model_hamiltonian(builtin_model("heisenberg"), 10);
  try {
    lowest_eigenpairs(big, 2, starved);
    FAIL();
  } catch (const NotConvergedError& e) {
    EXPECT_GT(e.best_residual(), 0.0);
  }
}

TEST(EigenStream, AscendingAndExhausts) {
  WindowHamiltonian h = model_hamiltonian(builtin_model("tfim"), 3);
  EigenStream s(h);
  double last = -1e300;
  for (int i = 0; i < 8; ++i) {
    auto p = s.next();
    EXPECT_GE(p.value, last - 1e-12);
    last = p.value;
  }
  EXPECT_TRUE(s.exhausted());
  EXPECT_THROW(s.next(), Error);
}

TEST(EigenStream, PsdTermNeverLowersGround) {
  ModelSpec m = builtin_model("heisenberg");
  WindowHamiltonian h = model_hamiltonian(m, 8);
  m.terms.push_back({{0}, false, (Matrix::Identity(2, 2) + ops::pauli_z()) * 0.3, 1.0});
  WindowHamiltonian h2 = model_hamiltonian(m, 8);
  EXPECT_GE(lowest_eigenpairs(h2, 1).eigenvalues[0] + 1e-12, lowest_eigenpairs(h, 1).eigenvalues[0]);
}

TEST(Gap, IsingClassical) {
  WindowHamiltonian h = model_hamiltonian(builtin_model("tfim", {{"h", 0.0}}), 4);
  GapEstimate g = gap_estimate(h);
  EXPECT_EQ(g.ground_multiplicity, 2);
  EXPECT_NEAR(g.gap, 2.0, 1e-10);
  EXPECT_NEAR(g.ground_energy, -3.0, 1e-10);
}

TEST(Gap, OneSite) {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 1) = 0.37;
  GapEstimate g = gap_estimate(WindowHamiltonian(LatticeWindow(0, 1, 2), m));
  EXPECT_NEAR(g.gap, 0.37, 1e-14);
  EXPECT_EQ(g.ground_multiplicity, 1);
  EXPECT_THROW(gap_estimate(WindowHamiltonian(LatticeWindow(0, 1, 2), Matrix::Identity(2, 2))),
               Error);
}

TEST(Gap, HeisenbergRingShrinks) {
  ModelSpec m = builtin_model("heisenberg");
  m.periodic = true;
  WindowHamiltonian h8 = model_hamiltonian(m, 8);
  GapEstimate g8 = gap_estimate(h8);
  Eigen::VectorXd exact = Eigen::SelfAdjointEigenSolver<Matrix>(h8.to_dense()).eigenvalues();
  EXPECT_NEAR(g8.ground_energy, exact(0), 1e-9);
  EXPECT_NEAR(g8.gap, exact(1) - exact(0), 1e-8);
  GapEstimate g12 = gap_estimate(model_hamiltonian(m, 12));
  EXPECT_LT(g12.gap, g8.gap);
  EXPECT_EQ(g12.window_length, 12);
}

TEST(Witness, IdentityIsInfinite) {
  WindowHamiltonian h = model_hamiltonian(builtin_model("heisenberg"), 6);
  EigenResult r = lowest_eigenpairs(h, 1);
  EXPECT_TRUE(std::isinf(variational_gap_witness(r.eigenvectors[0], h,
                                                  LocalOperator::identity(LatticeWindow(0, 6, 2)))));
}

TEST(Witness, TransitionOperatorGivesGap) {
  WindowHamiltonian h = model_hamiltonian(builtin_model("tfim", {{"h", 0.6}}), 6);
  Matrix dense = h.to_dense();
  Eigen::SelfAdjointEigenSolver<Matrix> es(dense);
  const Vector g0 = es.eigenvectors().col(0), g1 = es.eigenvectors().col(1);
  // Q|g0> = |g1>, built from the eigenvectors.
  LocalOperator q(LatticeWindow(0, 6, 2), g1 * g0.adjoint());
  PureStateVector ground(LatticeWindow(0, 6, 2), g0, true);
  EXPECT_NEAR(variational_gap_witness(ground, h, q), es.eigenvalues()(1) - es.eigenvalues()(0), 1e-9);
  EXPECT_THROW(variational_gap_witness(ground, h, LocalOperator::identity(LatticeWindow(3, 4, 2))),
               Error);
}

TEST(Witness, NumeratorNonNegativeOnGround) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  WindowHamiltonian h = model_hamiltonian(builtin_model("heisenberg"), 6);
  PureStateVector ground = lowest_eigenpairs(h, 1).eigenvectors[0];
  for (int trial = 0; trial < 100; ++trial) {
    Matrix q(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) q(i, j) = cplx(g(rng), g(rng));
    const int at = trial % 5;
    const double w = variational_gap_witness(ground, h, LocalOperator(LatticeWindow(at, 2, 2), q));
    EXPECT_GE(w, -1e-9);
  }
}

}  // namespace
}  // namespace entlab
