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

#include "entlab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <random>
#include <type_traits>

#include <Eigen/Eigenvalues>

#include "entlab/error.hpp"
#include "entlab/kernels.hpp"

namespace entlab {

namespace {

constexpr double kBreakdown = 1e-13;

int pick_basis(std::int64_t dim, int requested, int block) {
  if (requested > 0) return static_cast<int>(std::min<std::int64_t>(requested, dim));
  const double budget = 4e8 / (16.0 * static_cast<double>(dim));
  const int m = std::clamp(static_cast<int>(budget), std::max(24, 6 * block), 64);
  return static_cast<int>(std::min<std::int64_t>(m, dim));
}

double residual_norm(const WindowHamiltonian& h, const Vector& x, double lambda) {
  Vector r = h.apply(x);
  r -= lambda * x;
  return r.norm();
}

template <typename S>
S gaussian(std::mt19937_64& rng, std::normal_distribution<double>& g) {
  if constexpr (std::is_same_v<S, double>) {
    return g(rng);
  } else {
    const double re = g(rng);
    return S(re, g(rng));
  }
}

// Block Krylov process with thick restarts and locking over scalar S.
// The projected matrix is formed from explicit projections, so arbitrary
// directions (fresh random vectors) may join the basis at any time.
template <typename S>
struct Krylov {
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using MatVec = std::function<void(const Vec&, Vec&)>;

  MatVec apply;
  SolverOptions opt;
  std::int64_t dim;
  int iterations = 0;
  int max_basis = 0;
  int block = 1;
  Mat locked;  // dim x n_locked
  int n_locked = 0;
  Mat basis;   // dim x max_basis, first m columns active
  int m = 0;
  Mat t;       // projected matrix on the active basis
  std::deque<Vec> queue;  // candidate directions, one per Krylov sequence
  std::uint64_t random_draws = 0;
  double best_residual = std::numeric_limits<double>::infinity();

  Krylov(MatVec op, const SolverOptions& o, std::int64_t n)
      : apply(std::move(op)), opt(o), dim(n) {
    block = static_cast<int>(std::min<std::int64_t>(opt.block_size, dim));
    max_basis = pick_basis(dim, opt.max_basis, block);
    basis.resize(dim, max_basis);
    locked.resize(dim, 0);
    for (int i = 0; i < block; ++i) queue.push_back(random_vector());
  }

  Vec random_vector() {
    std::mt19937_64 rng(opt.seed + 7919 * random_draws++);
    std::normal_distribution<double> g;
    Vec v(dim);
    for (std::int64_t i = 0; i < dim; ++i) v(i) = gaussian<S>(rng, g);
    return v;
  }

  Vec matvec(const Vec& x) {
    Vec y(dim);
    apply(x, y);
    ++iterations;
    return y;
  }

  // Removes components along locked and active vectors (two passes).
  // Returns the coefficients along the active vectors.
  Vec orthogonalize(Vec& w) {
    Vec coeff = Vec::Zero(m);
    for (int pass = 0; pass < 2; ++pass) {
      if (n_locked > 0) {
        const Vec c = locked.leftCols(n_locked).adjoint() * w;
        w.noalias() -= locked.leftCols(n_locked) * c;
      }
      if (m > 0) {
        const Vec c = basis.leftCols(m).adjoint() * w;
        w.noalias() -= basis.leftCols(m) * c;
        coeff += c;
      }
    }
    return coeff;
  }

  // Next direction orthogonal to everything seen so far; random when the
  // queued Krylov sequences have broken down.
  Vec next_direction() {
    while (!queue.empty()) {
      Vec v = std::move(queue.front());
      queue.pop_front();
      const double before = v.norm();
      orthogonalize(v);
      const double n = v.norm();
      if (n > 1e-8 * before) return v / n;
    }
    for (int attempt = 0; attempt < 4; ++attempt) {
      Vec v = random_vector();
      orthogonalize(v);
      const double n = v.norm();
      if (n > 1e-8) return v / n;
    }
    throw Error(ErrorKind::kInvalidArgument, "no directions left in the search space");
  }

  void expand() {
    basis.col(m) = next_direction();
    ++m;
    t.conservativeResize(m, m);
    Vec w = matvec(basis.col(m - 1));
    const Vec coeff = orthogonalize(w);
    for (int i = 0; i < m; ++i) {
      t(i, m - 1) = coeff(i);
      t(m - 1, i) = Eigen::numext::conj(coeff(i));
    }
    t(m - 1, m - 1) = Eigen::numext::real(coeff(m - 1));
    const double beta = w.norm();
    if (beta > kBreakdown) queue.push_back(w / beta);
  }

  // Keeps Ritz vectors first .. first + count - 1 of the projected problem.
  // Queued directions are first made orthogonal to the whole current basis
  // so the discarded Ritz directions do not leak back in.
  void compress(const Mat& y, const RealVector& theta, int first, int count) {
    for (auto it = queue.begin(); it != queue.end();) {
      const double before = it->norm();
      orthogonalize(*it);
      const double n = it->norm();
      if (n > 1e-8 * before) {
        *it /= n;
        ++it;
      } else {
        it = queue.erase(it);
      }
    }
    const Mat kept = basis.leftCols(m) * y.middleCols(first, count);
    basis.leftCols(count) = kept;
    m = count;
    t = theta.segment(first, count).cast<S>().asDiagonal();
  }

  EigenStream::Pair next() {
    if (n_locked >= dim) {
      throw Error(ErrorKind::kInvalidArgument, "whole spectrum already returned");
    }
    for (;;) {
      if (iterations >= opt.max_iterations) {
        throw NotConvergedError("eigensolver reached the iteration cap", best_residual);
      }
      if (m + block > max_basis) {
        Eigen::SelfAdjointEigenSolver<Mat> es(t);
        compress(es.eigenvectors(), es.eigenvalues(), 0, std::max(block, m / 2));
      }
      bool complete = false;
      for (int i = 0; i < block; ++i) {
        if (n_locked + m >= dim) {
          complete = true;
          break;
        }
        expand();
      }
      Eigen::SelfAdjointEigenSolver<Mat> es(t);
      const RealVector& theta = es.eigenvalues();
      const Mat& y = es.eigenvectors();
      Vec x = basis.leftCols(m) * y.col(0);
      x /= x.norm();
      const Vec hx = matvec(x);
      const double value = Eigen::numext::real(x.dot(hx));
      const double res = (hx - value * x).norm();
      best_residual = std::min(best_residual, res);
      if (res >= opt.tol) {
        if (complete) {
          throw NotConvergedError("projected problem spans the space but did not converge",
                                  res);
        }
        continue;
      }
      locked.conservativeResize(Eigen::NoChange, n_locked + 1);
      locked.col(n_locked) = x;
      ++n_locked;
      if (m > 1) {
        compress(y, theta, 1, m - 1);
        for (int pass = 0; pass < 2; ++pass) {
          const Vec c = basis.leftCols(m).adjoint() * x;
          basis.leftCols(m).noalias() -= x * c.adjoint();
        }
      } else {
        m = 0;
        t.resize(0, 0);
      }
      // a fresh sequence per locked vector keeps multiplets beyond the
      // block size reachable
      if (static_cast<int>(queue.size()) < block + 1) queue.push_back(random_vector());
      best_residual = std::numeric_limits<double>::infinity();
      return {value, x.template cast<cplx>(), res};
    }
  }
};

}  // namespace

struct EigenStream::Impl {
  const WindowHamiltonian* h;
  SolverOptions opt;
  std::int64_t dim;
  bool dense = false;
  int returned = 0;

  // dense path
  RealVector dense_values;
  Matrix dense_vectors;

  // iterative path, real arithmetic when every matrix element is real
  kernels::RealCsrMatrix real_h;
  std::unique_ptr<Krylov<double>> real_solver;
  std::unique_ptr<Krylov<cplx>> complex_solver;

  Impl(const WindowHamiltonian& ham, const SolverOptions& o)
      : h(&ham), opt(o), dim(ham.dimension()) {
    if (opt.tol <= 0.0) throw Error(ErrorKind::kInvalidArgument, "tolerance must be positive");
    if (opt.block_size < 1) throw Error(ErrorKind::kInvalidArgument, "block size must be >= 1");
    dense = opt.method == SolverMethod::kDense ||
            (opt.method == SolverMethod::kAuto && dim <= opt.dense_max);
    if (dense) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(h->to_dense());
      dense_values = es.eigenvalues();
      dense_vectors = es.eigenvectors();
      return;
    }
    const kernels::CsrMatrix* sparse = h->sparse();
    if (sparse != nullptr && kernels::is_real(*sparse)) {
      real_h = kernels::real_part(*sparse);
      real_solver = std::make_unique<Krylov<double>>(
          [this](const RealVector& x, RealVector& y) {
            kernels::csr_matvec(real_h, {x.data(), static_cast<std::size_t>(x.size())},
                                {y.data(), static_cast<std::size_t>(y.size())});
          },
          opt, dim);
    } else {
      complex_solver = std::make_unique<Krylov<cplx>>(
          [this](const Vector& x, Vector& y) { h->apply(x, y); }, opt, dim);
    }
  }

  int iterations() const {
    if (real_solver) return real_solver->iterations;
    if (complex_solver) return complex_solver->iterations;
    return 0;
  }

  Pair next() {
    if (dense) {
      if (returned >= dim) {
        throw Error(ErrorKind::kInvalidArgument, "whole spectrum already returned");
      }
      const int i = returned++;
      Vector v = dense_vectors.col(i);
      const double res = residual_norm(*h, v, dense_values(i));
      return {dense_values(i), std::move(v), res};
    }
    Pair p = real_solver ? real_solver->next() : complex_solver->next();
    ++returned;
    return p;
  }
};

EigenStream::EigenStream(const WindowHamiltonian& h, const SolverOptions& options)
    : impl_(std::make_unique<Impl>(h, options)) {}
EigenStream::~EigenStream() = default;
EigenStream::EigenStream(EigenStream&&) noexcept = default;
EigenStream& EigenStream::operator=(EigenStream&&) noexcept = default;

EigenStream::Pair EigenStream::next() { return impl_->next(); }
int EigenStream::returned() const { return impl_->returned; }
int EigenStream::iterations() const { return impl_->iterations(); }
bool EigenStream::exhausted() const { return impl_->returned >= impl_->dim; }

EigenResult lowest_eigenpairs(const WindowHamiltonian& h, int k,
                              const SolverOptions& options) {
  if (k < 1 || k > h.dimension()) {
    throw Error(ErrorKind::kInvalidArgument, "k must lie in [1, dimension]");
  }
  EigenStream stream(h, options);
  std::vector<EigenStream::Pair> pairs;
  for (int i = 0; i < k; ++i) pairs.push_back(stream.next());
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return a.value < b.value; });
  EigenResult out;
  for (auto& p : pairs) {
    out.eigenvalues.push_back(p.value);
    out.residuals.push_back(p.residual);
    out.eigenvectors.emplace_back(h.window(), std::move(p.vector), true);
  }
  out.iterations = stream.iterations();
  return out;
}

GapEstimate gap_estimate(const WindowHamiltonian& h, double degeneracy_tol,
                         const SolverOptions& options, int max_pairs) {
  if (h.dimension() < 2) {
    throw Error(ErrorKind::kCannotResolve, "a single level has no gap");
  }
  EigenStream stream(h, options);
  const double e0 = stream.next().value;
  GapEstimate g;
  g.ground_energy = e0;
  g.window_length = h.window().length();
  for (;;) {
    if (stream.exhausted()) {
      throw Error(ErrorKind::kCannotResolve, "spectrum is one degenerate level");
    }
    if (stream.returned() >= max_pairs) {
      throw Error(ErrorKind::kCannotResolve,
                  "ground multiplet extends past the requested pairs");
    }
    const double e = stream.next().value;
    if (e - e0 > degeneracy_tol) {
      g.first_excited = e;
      g.gap = e - e0;
      return g;
    }
    ++g.ground_multiplicity;
  }
}

double variational_gap_witness(const PureStateVector& state,
                               const WindowHamiltonian& h,
                               const LocalOperator& probe) {
  const LatticeWindow& w = h.window();
  if (!(state.window() == w)) {
    throw Error(ErrorKind::kWindowNotContained, "state and Hamiltonian windows differ");
  }
  if (!w.contains(probe.window()) || probe.window().local_dim() != w.local_dim()) {
    throw Error(ErrorKind::kWindowNotContained,
                "probe reaches outside the Hamiltonian window");
  }
  const Vector& v = state.amplitudes();
  const Vector qv = apply_local(probe, w, v);
  const Vector hqv = h.apply(qv);
  const Vector qhv = apply_local(probe, w, h.apply(v));
  const double numerator = (qv.dot(hqv) - qv.dot(qhv)).real();
  const double denominator = qv.squaredNorm() - std::norm(v.dot(qv));
  if (denominator < 1e-14) return std::numeric_limits<double>::infinity();
  return numerator / denominator;
}

}  // namespace entlab
