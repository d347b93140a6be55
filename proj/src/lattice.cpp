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

#include "entlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include <Eigen/SVD>

#include "entlab/error.hpp"

namespace entlab {

namespace {

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

std::vector<cplx> row_major(const Matrix& m) {
  std::vector<cplx> out(static_cast<std::size_t>(m.rows() * m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
  }
  return out;
}

void check_dense_side(std::int64_t side) {
  if (side > kMaxDenseSide) {
    throw Error(ErrorKind::kDimensionOverflow,
                "dense operator side " + std::to_string(side) +
                    " exceeds " + std::to_string(kMaxDenseSide));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// LatticeWindow

LatticeWindow::LatticeWindow(int start, int length, int local_dim)
    : start_(start), length_(length), local_dim_(local_dim) {
  if (length < 1) {
    throw Error(ErrorKind::kInvalidArgument, "window length must be >= 1");
  }
  if (local_dim < 2) {
    throw Error(ErrorKind::kInvalidArgument, "local dimension must be >= 2");
  }
  std::int64_t dim = 1;
  for (int i = 0; i < length; ++i) {
    if (dim > std::numeric_limits<std::int64_t>::max() / local_dim) {
      throw Error(ErrorKind::kDimensionOverflow,
                  "d^length does not fit in a 64-bit index");
    }
    dim *= local_dim;
  }
}

std::int64_t LatticeWindow::dimension(std::int64_t guard) const {
  std::int64_t dim = 1;
  for (int i = 0; i < length_; ++i) {
    dim *= local_dim_;
    if (dim > guard) {
      throw Error(ErrorKind::kDimensionOverflow,
                  "window dimension exceeds guard " + std::to_string(guard));
    }
  }
  return dim;
}

// ---------------------------------------------------------------------------
// LocalOperator

LocalOperator::LocalOperator(LatticeWindow window, Matrix matrix)
    : window_(window), matrix_(std::move(matrix)) {
  const std::int64_t side = window_.dimension(kMaxDenseSide);
  if (matrix_.rows() != side || matrix_.cols() != side) {
    throw Error(ErrorKind::kInvalidArgument,
                "operator matrix must be square with side d^length");
  }
}

LocalOperator LocalOperator::identity(const LatticeWindow& window) {
  const std::int64_t side = window.dimension(kMaxDenseSide);
  return {window, Matrix::Identity(side, side)};
}

double LocalOperator::hermiticity_defect() const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

double LocalOperator::norm() const { return operator_norm(matrix_); }

// ---------------------------------------------------------------------------
// single-site matrices

namespace ops {

Matrix identity(int d) { return Matrix::Identity(d, d); }

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix spin_z(int d) {
  const double s = 0.5 * (d - 1);
  Matrix m = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) m(i, i) = s - i;
  return m;
}

Matrix spin_plus(int d) {
  const double s = 0.5 * (d - 1);
  Matrix m = Matrix::Zero(d, d);
  for (int i = 1; i < d; ++i) {
    const double mz = s - i;
    m(i - 1, i) = std::sqrt(s * (s + 1) - mz * (mz + 1));
  }
  return m;
}

Matrix spin_minus(int d) { return spin_plus(d).adjoint(); }

Matrix spin_x(int d) { return 0.5 * (spin_plus(d) + spin_minus(d)); }

Matrix spin_y(int d) {
  return cplx(0, -0.5) * (spin_plus(d) - spin_minus(d));
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace ops

// ---------------------------------------------------------------------------
// embedding

LocalOperator embed_at_sites(const Matrix& matrix, std::span<const int> sites,
                             const LatticeWindow& target) {
  const int d = target.local_dim();
  const int w = static_cast<int>(sites.size());
  const std::int64_t side = ipow(d, w);
  if (matrix.rows() != side || matrix.cols() != side) {
    throw Error(ErrorKind::kLocalDimMismatch,
                "matrix side does not match d^(number of sites)");
  }
  std::set<int> distinct(sites.begin(), sites.end());
  if (static_cast<int>(distinct.size()) != w) {
    throw Error(ErrorKind::kInvalidArgument, "repeated site in placement");
  }
  std::vector<std::int64_t> strides;
  for (int s : sites) {
    if (!target.contains_site(s)) {
      throw Error(ErrorKind::kWindowNotContained,
                  "site " + std::to_string(s) + " outside target window");
    }
    strides.push_back(ipow(d, target.end() - 1 - s));
  }
  const std::int64_t dim = target.dimension(kMaxDenseSide);
  std::vector<std::int64_t> offset(side, 0);
  for (std::int64_t l = 0; l < side; ++l) {
    std::int64_t rem = l;
    for (int k = w - 1; k >= 0; --k) {
      offset[l] += (rem % d) * strides[k];
      rem /= d;
    }
  }
  Matrix out = Matrix::Zero(dim, dim);
  for (std::int64_t c = 0; c < dim; ++c) {
    std::int64_t lc = 0;
    std::int64_t base = c;
    for (int k = 0; k < w; ++k) {
      const std::int64_t digit = (c / strides[k]) % d;
      lc = lc * d + digit;
      base -= digit * strides[k];
    }
    for (std::int64_t lr = 0; lr < side; ++lr) {
      const cplx v = matrix(lr, lc);
      if (v != cplx(0.0, 0.0)) out(base + offset[lr], c) += v;
    }
  }
  return {target, std::move(out)};
}

LocalOperator embed(const LocalOperator& op, const LatticeWindow& target) {
  if (op.window().local_dim() != target.local_dim()) {
    throw Error(ErrorKind::kLocalDimMismatch, "embed: local dimensions differ");
  }
  if (!target.contains(op.window())) {
    throw Error(ErrorKind::kWindowNotContained,
                "embed: operator window not inside target");
  }
  check_dense_side(ipow(target.local_dim(), target.length()));
  std::vector<int> sites;
  for (int s = op.window().start(); s < op.window().end(); ++s) sites.push_back(s);
  return embed_at_sites(op.matrix(), sites, target);
}

// ---------------------------------------------------------------------------
// states

PureStateVector::PureStateVector(LatticeWindow window, Vector amplitudes,
                                 bool normalize)
    : window_(window), amplitudes_(std::move(amplitudes)) {
  const std::int64_t dim = window_.dimension(std::numeric_limits<std::int64_t>::max());
  if (amplitudes_.size() != dim) {
    throw Error(ErrorKind::kInvalidArgument,
                "state vector length does not match window dimension");
  }
  const double n = amplitudes_.norm();
  if (normalize) {
    if (n == 0.0) throw Error(ErrorKind::kNotNormalized, "zero vector");
    amplitudes_ /= n;
  } else if (std::abs(n - 1.0) > 1e-10) {
    throw Error(ErrorKind::kNotNormalized,
                "state norm " + std::to_string(n) + " differs from 1");
  }
}

PureStateVector PureStateVector::product(const LatticeWindow& window,
                                         const std::vector<Vector>& site_states) {
  if (static_cast<int>(site_states.size()) != window.length()) {
    throw Error(ErrorKind::kInvalidArgument, "one local state per site needed");
  }
  Vector v = Vector::Ones(1);
  for (const auto& s : site_states) {
    if (s.size() != window.local_dim()) {
      throw Error(ErrorKind::kLocalDimMismatch, "local state size");
    }
    Vector next(v.size() * s.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      next.segment(i * s.size(), s.size()) = v(i) * s;
    }
    v = std::move(next);
  }
  return {window, std::move(v), true};
}

PureStateVector PureStateVector::basis_state(const LatticeWindow& window,
                                             std::int64_t index) {
  Vector v = Vector::Zero(window.dimension());
  v(index) = 1.0;
  return {window, std::move(v)};
}

Vector apply_local(const LocalOperator& op, const LatticeWindow& window,
                   const Vector& v) {
  if (op.window().local_dim() != window.local_dim()) {
    throw Error(ErrorKind::kLocalDimMismatch, "operator and state local dims");
  }
  if (!window.contains(op.window())) {
    throw Error(ErrorKind::kWindowNotContained,
                "operator window not inside state window");
  }
  const auto a = row_major(op.matrix());
  Vector out(v.size());
  kernels::apply_local({v.data(), static_cast<std::size_t>(v.size())},
                       {out.data(), static_cast<std::size_t>(out.size())}, a,
                       window.local_dim(), op.window().start() - window.start(),
                       op.window().length(), window.length());
  return out;
}

cplx expectation(const PureStateVector& state, const LocalOperator& op) {
  const Vector& v = state.amplitudes();
  const Vector w = apply_local(op, state.window(), v);
  return kernels::dot({v.data(), static_cast<std::size_t>(v.size())},
                      {w.data(), static_cast<std::size_t>(w.size())});
}

// ---------------------------------------------------------------------------
// Interaction

Interaction::Interaction(int local_dim, int range, int ring_start,
                         int ring_length)
    : local_dim_(local_dim),
      range_(range),
      ring_start_(ring_start),
      ring_length_(ring_length) {
  if (local_dim < 2) {
    throw Error(ErrorKind::kInvalidArgument, "local dimension must be >= 2");
  }
  if (range < 0) throw Error(ErrorKind::kInvalidArgument, "negative range");
}

int Interaction::diameter(const std::vector<int>& support) const {
  if (support.empty()) return 0;
  if (ring_length_ == 0) return support.back() - support.front();
  // smallest arc covering all points = ring length minus the largest gap
  int largest_gap = 0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    const int a = support[i];
    const int b = (i + 1 < support.size()) ? support[i + 1]
                                           : support.front() + ring_length_;
    largest_gap = std::max(largest_gap, b - a);
  }
  return ring_length_ - largest_gap;
}

void Interaction::add_term(std::span<const int> sites, const Matrix& matrix) {
  if (sites.empty()) throw Error(ErrorKind::kInvalidArgument, "empty support");
  std::vector<int> support(sites.begin(), sites.end());
  std::sort(support.begin(), support.end());
  if (std::adjacent_find(support.begin(), support.end()) != support.end()) {
    throw Error(ErrorKind::kInvalidArgument, "repeated site in term support");
  }
  if (ring_length_ > 0) {
    for (int s : support) {
      if (s < ring_start_ || s >= ring_start_ + ring_length_) {
        throw Error(ErrorKind::kWindowNotContained, "term site outside ring");
      }
    }
  }
  if (diameter(support) > range_) {
    throw Error(ErrorKind::kInvalidArgument,
                "term diameter exceeds interaction range");
  }
  std::vector<int> position(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    position[i] = static_cast<int>(
        std::lower_bound(support.begin(), support.end(), sites[i]) -
        support.begin());
  }
  const LatticeWindow compact(0, static_cast<int>(support.size()), local_dim_);
  LocalOperator op = embed_at_sites(matrix, position, compact);
  if (!op.is_hermitian(1e-12)) {
    throw Error(ErrorKind::kNonHermitian, "interaction term is not hermitian");
  }
  auto it = terms_.find(support);
  if (it == terms_.end()) {
    terms_.emplace(std::move(support), op.matrix());
  } else {
    it->second += op.matrix();
  }
}

LocalOperator Interaction::hull_operator(const std::vector<int>& support) const {
  const auto it = terms_.find(support);
  if (it == terms_.end()) {
    throw Error(ErrorKind::kInvalidArgument, "no term on this support");
  }
  const LatticeWindow hull(support.front(),
                           support.back() - support.front() + 1, local_dim_);
  return embed_at_sites(it->second, support, hull);
}

// ---------------------------------------------------------------------------
// WindowHamiltonian

WindowHamiltonian::WindowHamiltonian(LatticeWindow window, Matrix dense)
    : window_(window), dim_(dense.rows()), storage_(std::move(dense)) {
  const Matrix& m = std::get<Matrix>(storage_);
  if (m.rows() != m.cols() || m.rows() != window_.dimension(kMaxDenseSide)) {
    throw Error(ErrorKind::kInvalidArgument, "Hamiltonian matrix size");
  }
  norm_bound_ = m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
}

WindowHamiltonian::WindowHamiltonian(LatticeWindow window,
                                     kernels::CsrMatrix sparse,
                                     double norm_bound)
    : window_(window), dim_(sparse.rows), storage_(std::move(sparse)),
      norm_bound_(norm_bound) {}

void WindowHamiltonian::apply(const Vector& x, Vector& y) const {
  y.resize(dim_);
  if (const auto* m = std::get_if<Matrix>(&storage_)) {
    y.noalias() = (*m) * x;
  } else {
    const auto& a = std::get<kernels::CsrMatrix>(storage_);
    kernels::csr_matvec(a, {x.data(), static_cast<std::size_t>(x.size())},
                        {y.data(), static_cast<std::size_t>(y.size())});
  }
}

Vector WindowHamiltonian::apply(const Vector& x) const {
  Vector y;
  apply(x, y);
  return y;
}

Matrix WindowHamiltonian::to_dense() const {
  if (const auto* m = std::get_if<Matrix>(&storage_)) return *m;
  check_dense_side(dim_);
  const auto& a = std::get<kernels::CsrMatrix>(storage_);
  Matrix out = Matrix::Zero(dim_, dim_);
  for (std::int64_t r = 0; r < a.rows; ++r) {
    for (std::int64_t e = a.row_ptr[r]; e < a.row_ptr[r + 1]; ++e) {
      out(r, a.col[e]) = a.val[e];
    }
  }
  return out;
}

double WindowHamiltonian::hermiticity_defect() const {
  if (const auto* m = std::get_if<Matrix>(&storage_)) {
    return m->size() == 0 ? 0.0 : (*m - m->adjoint()).cwiseAbs().maxCoeff();
  }
  const auto& a = std::get<kernels::CsrMatrix>(storage_);
  double defect = 0.0;
  for (std::int64_t r = 0; r < a.rows; ++r) {
    for (std::int64_t e = a.row_ptr[r]; e < a.row_ptr[r + 1]; ++e) {
      const std::int64_t c = a.col[e];
      const auto first = a.col.begin() + a.row_ptr[c];
      const auto last = a.col.begin() + a.row_ptr[c + 1];
      const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(r));
      cplx mirror = 0.0;
      if (it != last && *it == static_cast<std::uint32_t>(r)) {
        mirror = a.val[it - a.col.begin()];
      }
      defect = std::max(defect, std::abs(a.val[e] - std::conj(mirror)));
    }
  }
  return defect;
}

WindowHamiltonian assemble_hamiltonian(const Interaction& interaction,
                                       const LatticeWindow& window,
                                       const AssemblyOptions& options) {
  if (interaction.local_dim() != window.local_dim()) {
    throw Error(ErrorKind::kLocalDimMismatch,
                "interaction and window local dimensions differ");
  }
  const std::int64_t dim = window.dimension(options.dimension_guard);
  std::vector<kernels::PlacedTerm> placed;
  double norm_bound = 0.0;
  for (const auto& [support, m] : interaction.terms()) {
    if (!window.contains_site(support.front()) ||
        !window.contains_site(support.back())) {
      continue;
    }
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
      throw Error(ErrorKind::kNonHermitian, "non-hermitian term detected");
    }
    kernels::PlacedTerm t;
    for (int s : support) t.sites.push_back(s - window.start());
    t.matrix = row_major(m);
    placed.push_back(std::move(t));
    norm_bound += operator_norm(m);
  }
  auto csr = options.parallel
                 ? kernels::build_csr(placed, window.local_dim(), window.length())
                 : kernels::build_csr_serial(placed, window.local_dim(),
                                             window.length());
  if (dim < options.dense_below) {
    Matrix dense = Matrix::Zero(dim, dim);
    for (std::int64_t r = 0; r < csr.rows; ++r) {
      for (std::int64_t e = csr.row_ptr[r]; e < csr.row_ptr[r + 1]; ++e) {
        dense(r, csr.col[e]) = csr.val[e];
      }
    }
    WindowHamiltonian h(window, std::move(dense));
    return h;
  }
  return {window, std::move(csr), norm_bound};
}

double boundedness_certificate(const Interaction& interaction,
                               const LatticeWindow& window) {
  std::vector<double> per_site(window.length(), 0.0);
  for (const auto& [support, m] : interaction.terms()) {
    if (!window.contains_site(support.front()) ||
        !window.contains_site(support.back())) {
      continue;
    }
    const double share = operator_norm(m) / static_cast<double>(support.size());
    for (int s : support) per_site[s - window.start()] += share;
  }
  return *std::max_element(per_site.begin(), per_site.end());
}

double energy(const PureStateVector& state, const WindowHamiltonian& h) {
  if (!(state.window() == h.window())) {
    throw Error(ErrorKind::kWindowNotContained,
                "state and Hamiltonian windows differ");
  }
  const Vector& v = state.amplitudes();
  const Vector w = h.apply(v);
  return kernels::dot({v.data(), static_cast<std::size_t>(v.size())},
                      {w.data(), static_cast<std::size_t>(w.size())})
      .real();
}

}  // namespace entlab
