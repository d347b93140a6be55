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

#include "entlab/entangle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "entlab/error.hpp"

namespace entlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSupportThreshold = 1e-12;

std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  while (exp-- > 0) r *= base;
  return r;
}

void check_cut(const PureStateVector& state, int cut) {
  const LatticeWindow& w = state.window();
  if (cut <= w.start() || cut >= w.end()) {
    throw Error(ErrorKind::kCutOutOfRange, "cut " + std::to_string(cut) +
                                               " is not strictly inside the window");
  }
  if (std::abs(state.amplitudes().norm() - 1.0) > 1e-10) {
    throw Error(ErrorKind::kNotNormalized, "state is not normalized");
  }
}

// M(iL, iR) = psi(iL * dr + iR)
Matrix coefficient_matrix(const PureStateVector& state, int cut) {
  const LatticeWindow& w = state.window();
  const std::int64_t dl = ipow(w.local_dim(), cut - w.start());
  const std::int64_t dr = ipow(w.local_dim(), w.end() - cut);
  return Eigen::Map<const Matrix>(state.amplitudes().data(), dr, dl).transpose();
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

RealVector descending_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

}  // namespace

SchmidtSpectrum schmidt_decompose(const PureStateVector& state, int cut,
                                  double floor, bool keep_vectors) {
  check_cut(state, cut);
  const Matrix m = coefficient_matrix(state, cut);
  SchmidtSpectrum out;
  out.cut = cut;
  if (keep_vectors) {
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& s = svd.singularValues();
    int r = 0;
    while (r < s.size() && s(r) * s(r) > floor) ++r;
    for (int j = 0; j < r; ++j) out.weights.push_back(s(j) * s(j));
    out.left_vectors = svd.matrixU().leftCols(r);
    out.right_vectors = svd.matrixV().leftCols(r).conjugate();
  } else {
    Eigen::BDCSVD<Matrix> svd(m);
    const RealVector& s = svd.singularValues();
    for (Eigen::Index j = 0; j < s.size() && s(j) * s(j) > floor; ++j) {
      out.weights.push_back(s(j) * s(j));
    }
  }
  return out;
}

double shannon_entropy(std::span<const double> weights) {
  double s = 0.0;
  for (double w : weights) s -= xlogx(w);
  // weights of a normalized state may exceed 1 by rounding
  return std::max(s, 0.0);
}

double entanglement_entropy(const SchmidtSpectrum& spectrum) {
  return shannon_entropy(spectrum.weights);
}

TruncationReport truncation_index(std::span<const double> weights, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "epsilon must lie in (0, 1)");
  }
  if (weights.empty()) throw Error(ErrorKind::kInvalidArgument, "empty spectrum");
  const int l = static_cast<int>(weights.size());
  // tail[k] = sum_{j > k} w_j (1-based k), summed from the smallest weight
  std::vector<double> tail(l + 1, 0.0);
  for (int k = l - 1; k >= 0; --k) tail[k] = tail[k + 1] + weights[k];
  int k = 1;
  while (k < l && !(tail[k] < epsilon)) ++k;
  TruncationReport r;
  r.epsilon = epsilon;
  r.k = k;
  r.tail_mass = tail[k];
  r.entropy = shannon_entropy(weights);
  r.bound_k = std::exp(r.entropy / epsilon);
  r.bound_lambda1 = std::exp(-r.entropy / epsilon);
  r.lambda1 = weights[0];
  r.lambda_k = weights[k - 1];
  return r;
}

TruncationReport truncation_index(const SchmidtSpectrum& spectrum, double epsilon) {
  return truncation_index(spectrum.weights, epsilon);
}

TruncatedState truncate_state(const PureStateVector& state, int cut, int keep) {
  check_cut(state, cut);
  const Matrix m = coefficient_matrix(state, cut);
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& s = svd.singularValues();
  int rank = 0;
  while (rank < s.size() && s(rank) * s(rank) > kSchmidtFloor) ++rank;
  if (keep < 1 || keep > rank) {
    throw Error(ErrorKind::kInvalidArgument,
                "keep must lie in [1, " + std::to_string(rank) + "]");
  }
  const Matrix kept = svd.matrixU().leftCols(keep) * s.head(keep).asDiagonal() *
                      svd.matrixV().leftCols(keep).adjoint();
  // back to the amplitude layout psi(iL * dr + iR)
  const Matrix transposed = kept.transpose();
  Vector v = Eigen::Map<const Vector>(transposed.data(), transposed.size());
  v /= v.norm();
  const double d2 = (v - state.amplitudes()).squaredNorm();
  return {PureStateVector(state.window(), std::move(v), true), d2};
}

DensityMatrix::DensityMatrix(Matrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
    throw Error(ErrorKind::kInvalidArgument, "density matrix must be square");
  }
  if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorKind::kNonHermitian, "density matrix is not hermitian");
  }
  if (std::abs(matrix_.trace() - cplx(1.0)) > 1e-12) {
    throw Error(ErrorKind::kNotNormalized, "density matrix trace differs from 1");
  }
  const RealVector ev = descending_eigenvalues(matrix_);
  if (ev(ev.size() - 1) < -1e-12) {
    throw Error(ErrorKind::kNotPositive, "density matrix has a negative eigenvalue");
  }
}

DensityMatrix DensityMatrix::pure(const Vector& v) {
  Matrix m = v * v.adjoint();
  m = (m + m.adjoint()) / 2.0;
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::reduced(const PureStateVector& state, int first,
                                     int length) {
  const LatticeWindow& w = state.window();
  if (length < 1 || first < w.start() || first + length > w.end()) {
    throw Error(ErrorKind::kWindowNotContained, "block outside the state window");
  }
  const int d = w.local_dim();
  const std::int64_t dl = ipow(d, first - w.start());
  const std::int64_t db = ipow(d, length);
  const std::int64_t dr = ipow(d, w.end() - first - length);
  Matrix rho = Matrix::Zero(db, db);
  const Vector& a = state.amplitudes();
  for (std::int64_t l = 0; l < dl; ++l) {
    // rows: right index, cols: block index
    const Eigen::Map<const Matrix> chunk(a.data() + l * db * dr, dr, db);
    rho.noalias() += chunk.transpose() * chunk.conjugate();
  }
  rho = (rho + rho.adjoint()) / 2.0;
  rho /= rho.trace().real();
  return DensityMatrix(std::move(rho));
}

RealVector DensityMatrix::eigenvalues() const { return descending_eigenvalues(matrix_); }

double DensityMatrix::entropy() const {
  const RealVector ev = eigenvalues();
  double s = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) s -= xlogx(ev(i));
  return s;
}

double minmax_top_k(const DensityMatrix& rho, int k) {
  if (k < 1 || k > rho.dimension()) {
    throw Error(ErrorKind::kInvalidArgument, "k must lie in [1, dimension]");
  }
  return rho.eigenvalues().head(k).sum();
}

int schmidt_rank(const PureStateVector& state, int cut, double tol) {
  check_cut(state, cut);
  Eigen::BDCSVD<Matrix> svd(coefficient_matrix(state, cut));
  const RealVector& s = svd.singularValues();
  int r = 0;
  while (r < s.size() && s(r) > tol) ++r;
  return r;
}

std::pair<double, double> rank_limited_overlap_bound(const PureStateVector& state,
                                                     const PureStateVector& probe,
                                                     int cut, int max_rank) {
  if (!(state.window() == probe.window())) {
    throw Error(ErrorKind::kWindowNotContained, "state and probe windows differ");
  }
  if (max_rank < 1) throw Error(ErrorKind::kInvalidArgument, "K must be positive");
  const int r = schmidt_rank(probe, cut);
  if (r > max_rank) {
    throw Error(ErrorKind::kRankExceeded, "probe Schmidt rank " + std::to_string(r) +
                                              " exceeds " + std::to_string(max_rank));
  }
  const double overlap = std::norm(probe.amplitudes().dot(state.amplitudes()));
  const SchmidtSpectrum sp = schmidt_decompose(state, cut);
  double top = 0.0;
  for (int j = 0; j < std::min(max_rank, sp.rank()); ++j) top += sp.weights[j];
  return {overlap, top};
}

double relative_entropy(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  if (rho1.dimension() != rho2.dimension()) {
    throw Error(ErrorKind::kInvalidArgument, "density matrix dimensions differ");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> e1(rho1.matrix());
  Eigen::SelfAdjointEigenSolver<Matrix> e2(rho2.matrix());
  const RealVector& p = e1.eigenvalues();
  const RealVector& q = e2.eigenvalues();
  const Matrix overlap = (e1.eigenvectors().adjoint() * e2.eigenvectors()).cwiseAbs2();
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) <= kSupportThreshold) continue;
    s += p(i) * std::log(p(i));
    for (Eigen::Index j = 0; j < q.size(); ++j) {
      const double weight = p(i) * overlap(i, j).real();
      if (q(j) <= kSupportThreshold) {
        if (weight > kSupportThreshold) return kInf;
        continue;
      }
      s -= weight * std::log(q(j));
    }
  }
  return s;
}

double binary_monotonicity_gap(const DensityMatrix& rho1, const DensityMatrix& rho2,
                               const LocalOperator& projector) {
  const Matrix& e = projector.matrix();
  if (e.rows() != rho1.dimension()) {
    throw Error(ErrorKind::kInvalidArgument, "projector dimension differs");
  }
  if ((e - e.adjoint()).cwiseAbs().maxCoeff() > 1e-10 ||
      (e * e - e).cwiseAbs().maxCoeff() > 1e-10) {
    throw Error(ErrorKind::kInvalidArgument, "operator is not a projection");
  }
  const double s = relative_entropy(rho1, rho2);
  if (std::isinf(s)) return kInf;
  auto term = [](double a, double b) {
    if (a <= 1e-14) return 0.0;
    if (b <= 0.0) return kInf;
    return a * std::log(a / b);
  };
  const Matrix f = Matrix::Identity(e.rows(), e.cols()) - e;
  const double p1 = std::max((rho1.matrix() * e).trace().real(), 0.0);
  const double p2 = std::max((rho2.matrix() * e).trace().real(), 0.0);
  const double q1 = std::max((rho1.matrix() * f).trace().real(), 0.0);
  const double q2 = std::max((rho2.matrix() * f).trace().real(), 0.0);
  return s - (term(p1, p2) + term(q1, q2));
}

std::vector<std::pair<int, double>> entropy_profile(const PureStateVector& state) {
  const LatticeWindow& w = state.window();
  if (w.length() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "profile needs at least two sites");
  }
  std::vector<std::pair<int, double>> out;
  for (int c = w.start() + 1; c < w.end(); ++c) {
    out.emplace_back(c, entanglement_entropy(schmidt_decompose(state, c)));
  }
  return out;
}

double block_entropy(const PureStateVector& state, int first, int last) {
  const LatticeWindow& w = state.window();
  if (first > last) throw Error(ErrorKind::kInvalidArgument, "empty block");
  if (first == w.start() && last == w.end() - 1) return 0.0;
  if (first == w.start()) return entanglement_entropy(schmidt_decompose(state, last + 1));
  if (last == w.end() - 1) return entanglement_entropy(schmidt_decompose(state, first));
  return DensityMatrix::reduced(state, first, last - first + 1).entropy();
}

double subadditivity_check(const PureStateVector& state, int j, int k, int i) {
  const LatticeWindow& w = state.window();
  if (!(j <= k && k < i) || !w.contains_site(j) || !w.contains_site(i)) {
    throw Error(ErrorKind::kInvalidArgument, "need j <= k < i inside the window");
  }
  return block_entropy(state, j, k) + block_entropy(state, k + 1, i) -
         block_entropy(state, j, i);
}

TailBound entropy_tail_bounds(std::span<const double> x, std::span<const double> a) {
  if (x.empty() || a.empty()) throw Error(ErrorKind::kInvalidArgument, "empty sequence");
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!(x[j] > 0.0) || (j > 0 && x[j] > x[j - 1])) {
      throw Error(ErrorKind::kHypothesisViolated,
                  "x must be positive and nonincreasing");
    }
  }
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double next = k + 1 < a.size() ? a[k + 1] : 0.0;
    if (a[k] > 1.0 || next < 0.0 || next > a[k]) {
      throw Error(ErrorKind::kHypothesisViolated,
                  "condition (i): need 0 <= a_{k+1} <= a_k <= 1");
    }
  }
  const double slack = 1e-12;
  double tail = 0.0;
  std::vector<double> tails(x.size());
  for (std::size_t j = x.size(); j-- > 0;) tails[j] = (tail += x[j]);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double ak = k < a.size() ? a[k] : 0.0;
    if (tails[k] > ak + slack) {
      throw Error(ErrorKind::kHypothesisViolated,
                  "condition (ii): tail sum exceeds a_" + std::to_string(k + 1));
    }
  }
  TailBound out;
  out.lhs = shannon_entropy(x);
  bool convex = true;
  double prev = kInf;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - (k + 1 < a.size() ? a[k + 1] : 0.0);
    out.rhs -= xlogx(diff);
    if (diff > prev + slack) convex = false;
    prev = diff;
  }
  out.sufficient = convex && std::abs(a[0] - tails[0]) <= slack;
  return out;
}

std::pair<double, double> entropy_block_bound(std::span<const double> x, int big_k) {
  if (big_k < 2 || static_cast<std::size_t>(big_k - 1) > x.size()) {
    throw Error(ErrorKind::kInvalidArgument, "need 2 <= K <= size + 1");
  }
  double lhs = 0.0;
  double total = 0.0;
  for (int j = 0; j < big_k - 1; ++j) {
    if (!(x[j] > 0.0) || (j > 0 && x[j] > x[j - 1])) {
      throw Error(ErrorKind::kHypothesisViolated,
                  "x must be positive and nonincreasing");
    }
    lhs -= xlogx(x[j]);
    total += x[j];
  }
  return {lhs, total * std::log(static_cast<double>(big_k)) - xlogx(total)};
}

EntropyDeviation mean_entropy_deviation(std::span<const double> entropies) {
  const int n = static_cast<int>(entropies.size());
  if (n < 4) throw Error(ErrorKind::kInvalidArgument, "need at least four lengths");
  const int count = std::max(2, n / 4);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = n - count; i < n; ++i) {
    const double x = i + 1;
    sx += x;
    sy += entropies[i];
    sxx += x * x;
    sxy += x * entropies[i];
  }
  const double c = count;
  EntropyDeviation out;
  out.s = (c * sxy - sx * sy) / (c * sxx - sx * sx);
  for (int i = 0; i < n; ++i) {
    out.d_hat = std::max(out.d_hat, std::abs(entropies[i] - (i + 1) * out.s));
  }
  return out;
}

}  // namespace entlab
