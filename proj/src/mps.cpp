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

#include "entlab/mps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <json.hpp>

#include "entlab/error.hpp"
#include "entlab/kernels.hpp"
#include "json_matrix.hpp"

namespace entlab {

namespace {

constexpr double kPeripheralTol = 1e-8;
constexpr double kFaithfulFloor = 1e-10;

void check_dims(const MpsSpec& spec, const Matrix& q) {
  if (q.rows() != spec.phys_dim() || q.cols() != spec.phys_dim()) {
    throw Error(ErrorKind::kInvalidArgument, "site operator must be d x d");
  }
}

// offset -> product of the factors listed on that offset
std::map<int, Matrix> collect(const MpsSpec& spec, const std::vector<SiteOperator>& ops) {
  std::map<int, Matrix> out;
  for (const auto& [offset, q] : ops) {
    check_dims(spec, q);
    auto it = out.find(offset);
    if (it == out.end()) {
      out.emplace(offset, q);
    } else {
      it->second = it->second * q;
    }
  }
  return out;
}

// sum_{s,t} Q_st conj(A_s) (x) A_t
Matrix doubled(const MpsSpec& spec, const Matrix& q) {
  const int n = spec.aux_dim();
  Matrix out = Matrix::Zero(n * n, n * n);
  for (int s = 0; s < spec.phys_dim(); ++s) {
    const Matrix as = spec.site_matrix(s).conjugate();
    for (int t = 0; t < spec.phys_dim(); ++t) {
      if (q(s, t) == cplx(0.0, 0.0)) continue;
      out += q(s, t) * ops::kron(as, spec.site_matrix(t));
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// MpsSpec

MpsSpec::MpsSpec(int phys_dim, int aux_dim, Matrix isometry, std::optional<Matrix> psi)
    : d_(phys_dim), n_(aux_dim), v_(std::move(isometry)) {
  if (d_ < 1 || n_ < 1) throw Error(ErrorKind::kInvalidArgument, "d and n must be positive");
  if (v_.rows() != static_cast<Eigen::Index>(d_) * n_ || v_.cols() != n_) {
    throw Error(ErrorKind::kInvalidArgument, "isometry must be (d n) x n");
  }
  if (isometry_defect() > 1e-12) {
    throw Error(ErrorKind::kInvalidArgument, "V is not an isometry: defect " +
                                                 std::to_string(isometry_defect()));
  }
  psi_ = psi ? std::move(*psi) : find_invariant_state(d_, n_, v_);
  if (psi_.rows() != n_ || psi_.cols() != n_) {
    throw Error(ErrorKind::kInvalidArgument, "psi must be n x n");
  }
  if ((psi_ - psi_.adjoint()).cwiseAbs().maxCoeff() > 1e-10 ||
      std::abs(psi_.trace() - cplx(1.0)) > 1e-10) {
    throw Error(ErrorKind::kInvalidArgument, "psi must be hermitian with unit trace");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(psi_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) <= kFaithfulFloor) {
    throw Error(ErrorKind::kNotPositive, "invariant state is not faithful");
  }
  if (invariance_residual() > 1e-10) {
    throw Error(ErrorKind::kInvalidArgument, "psi is not invariant under E_1");
  }
}

MpsSpec MpsSpec::aklt() {
  Matrix v = Matrix::Zero(6, 2);
  const Matrix sp = ops::spin_plus(2);
  const Matrix sz = ops::pauli_z();
  const Matrix sm = ops::spin_minus(2);
  v.middleRows(0, 2) = std::sqrt(2.0 / 3.0) * sp;
  v.middleRows(2, 2) = -std::sqrt(1.0 / 3.0) * sz;
  v.middleRows(4, 2) = -std::sqrt(2.0 / 3.0) * sm;
  return MpsSpec(3, 2, std::move(v), Matrix(Matrix::Identity(2, 2) / 2.0));
}

MpsSpec MpsSpec::random(int phys_dim, int aux_dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Matrix g(static_cast<Eigen::Index>(phys_dim) * aux_dim, aux_dim);
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = cplx(gauss(rng), gauss(rng));
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(g.rows(), aux_dim);
  return MpsSpec(phys_dim, aux_dim, std::move(q));
}

MpsSpec MpsSpec::product(const Vector& site_state) {
  const double norm = site_state.norm();
  if (std::abs(norm - 1.0) > 1e-12) {
    throw Error(ErrorKind::kNotNormalized, "site state must be normalized");
  }
  return MpsSpec(static_cast<int>(site_state.size()), 1, Matrix(site_state),
                 Matrix::Identity(1, 1));
}

double MpsSpec::isometry_defect() const {
  return (v_.adjoint() * v_ - Matrix::Identity(n_, n_)).cwiseAbs().maxCoeff();
}

double MpsSpec::invariance_residual() const {
  double worst = 0.0;
  const Matrix one = Matrix::Identity(d_, d_);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      Matrix r = Matrix::Zero(n_, n_);
      r(i, j) = 1.0;
      const cplx lhs = (psi_ * cp_map_apply(*this, one, r)).trace();
      const cplx rhs = psi_(j, i);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// maps

Matrix cp_map_apply(const MpsSpec& spec, const Matrix& q, const Matrix& r) {
  check_dims(spec, q);
  const int n = spec.aux_dim();
  if (r.rows() != n || r.cols() != n) {
    throw Error(ErrorKind::kInvalidArgument, "R must be n x n");
  }
  Matrix out = Matrix::Zero(n, n);
  for (int t = 0; t < spec.phys_dim(); ++t) {
    const Matrix rat = r * spec.site_matrix(t);
    for (int s = 0; s < spec.phys_dim(); ++s) {
      if (q(s, t) == cplx(0.0, 0.0)) continue;
      out += q(s, t) * spec.site_matrix(s).adjoint() * rat;
    }
  }
  return out;
}

Matrix transfer_matrix(const MpsSpec& spec) {
  const int n = spec.aux_dim();
  Matrix t = Matrix::Zero(n * n, n * n);
  for (int s = 0; s < spec.phys_dim(); ++s) {
    const Matrix a = spec.site_matrix(s);
    t += ops::kron(a.transpose(), a.adjoint());
  }
  return t;
}

TransferSpectrum transfer_spectrum(const MpsSpec& spec) {
  Eigen::ComplexEigenSolver<Matrix> es(transfer_matrix(spec), false);
  TransferSpectrum out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    out.eigenvalues.push_back(es.eigenvalues()(i));
  }
  std::stable_sort(out.eigenvalues.begin(), out.eigenvalues.end(),
                   [](cplx a, cplx b) { return std::abs(a) > std::abs(b); });
  out.leading = out.eigenvalues.front();
  out.gap = out.eigenvalues.size() > 1 ? 1.0 - std::abs(out.eigenvalues[1]) : 1.0;
  return out;
}

Matrix find_invariant_state(int phys_dim, int aux_dim, const Matrix& isometry) {
  const int n = aux_dim;
  Matrix dual = Matrix::Zero(n * n, n * n);
  for (int s = 0; s < phys_dim; ++s) {
    const Matrix a = isometry.middleRows(s * n, n);
    dual += ops::kron(a.conjugate(), a);
  }
  Eigen::ComplexEigenSolver<Matrix> es(dual);
  std::vector<Eigen::Index> peripheral;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (std::abs(es.eigenvalues()(i)) > 1.0 - kPeripheralTol) peripheral.push_back(i);
  }
  if (peripheral.size() != 1) {
    std::ostringstream msg;
    msg << "transfer operator has " << peripheral.size()
        << " peripheral eigenvalues:";
    for (auto i : peripheral) msg << ' ' << es.eigenvalues()(i);
    throw Error(ErrorKind::kDegeneratePeripheral, msg.str());
  }
  const Vector v = es.eigenvectors().col(peripheral.front());
  Matrix rho = Eigen::Map<const Matrix>(v.data(), n, n);
  rho /= rho.trace();
  rho = (rho + rho.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> check(rho, Eigen::EigenvaluesOnly);
  if (check.eigenvalues()(0) < -1e-10) {
    throw Error(ErrorKind::kNotPositive, "fixed point is not positive");
  }
  return rho;
}

cplx mps_expectation(const MpsSpec& spec, const std::vector<SiteOperator>& ops) {
  const auto placed = collect(spec, ops);
  if (placed.empty()) return 1.0;
  const int n = spec.aux_dim();
  const Matrix one = Matrix::Identity(spec.phys_dim(), spec.phys_dim());
  Matrix r = Matrix::Identity(n, n);
  const int lo = placed.begin()->first;
  const int hi = placed.rbegin()->first;
  for (int site = hi; site >= lo; --site) {
    const auto it = placed.find(site);
    r = cp_map_apply(spec, it == placed.end() ? one : it->second, r);
  }
  return (spec.psi() * r).trace();
}

cplx mps_local_expectation(const MpsSpec& spec, const Matrix& h) {
  const int d = spec.phys_dim();
  const int n = spec.aux_dim();
  int width = 0;
  Eigen::Index side = 1;
  while (side < h.rows()) {
    side *= d;
    ++width;
  }
  if (side != h.rows() || h.rows() != h.cols() || width == 0) {
    throw Error(ErrorKind::kInvalidArgument, "operator side must be a power of d");
  }
  // B(s) = A_{s_{w-1}} ... A_{s_0}, site 0 slowest in the index s
  std::vector<Matrix> blocks(side);
  for (Eigen::Index s = 0; s < side; ++s) {
    Matrix acc = Matrix::Identity(n, n);
    Eigen::Index rem = s;
    std::vector<int> digits(width);
    for (int k = width - 1; k >= 0; --k) {
      digits[k] = static_cast<int>(rem % d);
      rem /= d;
    }
    for (int k = 0; k < width; ++k) acc = spec.site_matrix(digits[k]) * acc;
    blocks[s] = std::move(acc);
  }
  Matrix r = Matrix::Zero(n, n);
  for (Eigen::Index t = 0; t < side; ++t) {
    for (Eigen::Index s = 0; s < side; ++s) {
      if (h(s, t) == cplx(0.0, 0.0)) continue;
      r += h(s, t) * blocks[s].adjoint() * blocks[t];
    }
  }
  return (spec.psi() * r).trace();
}

cplx ring_expectation(const MpsSpec& spec, int length,
                      const std::vector<SiteOperator>& ops) {
  if (length < 1) throw Error(ErrorKind::kInvalidArgument, "ring length must be positive");
  const auto placed = collect(spec, ops);
  for (const auto& [site, q] : placed) {
    if (site < 0 || site >= length) {
      throw Error(ErrorKind::kWindowNotContained, "operator offset outside the ring");
    }
  }
  const int d = spec.phys_dim();
  const Matrix t1 = doubled(spec, Matrix::Identity(d, d));
  const int nn = spec.aux_dim() * spec.aux_dim();
  Matrix numerator = Matrix::Identity(nn, nn);
  Matrix denominator = Matrix::Identity(nn, nn);
  for (int site = 0; site < length; ++site) {
    const auto it = placed.find(site);
    numerator = (it == placed.end() ? t1 : doubled(spec, it->second)) * numerator;
    denominator = t1 * denominator;
  }
  const cplx z = denominator.trace();
  if (std::abs(z) < 1e-300) {
    throw Error(ErrorKind::kInvalidArgument, "ring state vanishes at this length");
  }
  return numerator.trace() / z;
}

PureStateVector mps_to_vector(const MpsSpec& spec, int length, const Closure& closure,
                              std::int64_t dimension_guard) {
  const LatticeWindow window(0, length, std::max(spec.phys_dim(), 2));
  if (spec.phys_dim() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "physical dimension must be >= 2");
  }
  window.dimension(dimension_guard);
  const int n = spec.aux_dim();
  if (!closure.is_ring() && (closure.left.size() != n || closure.right.size() != n)) {
    throw Error(ErrorKind::kInvalidArgument, "boundary vectors must have n entries");
  }
  std::vector<cplx> mats;
  mats.reserve(static_cast<std::size_t>(spec.phys_dim()) * n * n);
  for (int s = 0; s < spec.phys_dim(); ++s) {
    const Matrix a = spec.site_matrix(s);
    mats.insert(mats.end(), a.data(), a.data() + a.size());
  }
  std::span<const cplx> left;
  std::span<const cplx> right;
  if (!closure.is_ring()) {
    left = {closure.left.data(), static_cast<std::size_t>(n)};
    right = {closure.right.data(), static_cast<std::size_t>(n)};
  }
  std::vector<cplx> amps =
      kernels::mps_amplitudes(mats, spec.phys_dim(), n, length, left, right);
  Vector v = Eigen::Map<const Vector>(amps.data(), static_cast<Eigen::Index>(amps.size()));
  const double norm = v.norm();
  if (norm < 1e-150) {
    throw Error(ErrorKind::kInvalidArgument, "MPS vector vanishes for this closure");
  }
  v /= norm;
  return PureStateVector(window, std::move(v), false);
}

// ---------------------------------------------------------------------------
// frustration-free diagnostics

int kernel_dimension(const WindowHamiltonian& h, double threshold, bool relative,
                     const SolverOptions& options) {
  const double scale = relative ? std::max(1.0, h.norm_bound()) : 1.0;
  const double cut = threshold * scale;
  EigenStream stream(h, options);
  int count = 0;
  while (!stream.exhausted()) {
    const double e = stream.next().value;
    if (count == 0 && e < -1e-10 * scale) {
      throw Error(ErrorKind::kNotPositive, "Hamiltonian has a negative eigenvalue " +
                                               std::to_string(e));
    }
    if (e >= cut) break;
    ++count;
  }
  return count;
}

std::vector<FrustrationRecord> frustration_free_check(
    const LocalOperator& h, const MpsSpec& spec, const std::vector<int>& lengths,
    const FrustrationOptions& options) {
  if (h.window().local_dim() != spec.phys_dim()) {
    throw Error(ErrorKind::kLocalDimMismatch, "term and spec local dimensions differ");
  }
  if (!h.is_hermitian(1e-12)) {
    throw Error(ErrorKind::kNonHermitian, "interaction term is not hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix(), Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < -1e-12) {
    throw Error(ErrorKind::kNotPositive, "interaction term is not positive semidefinite");
  }
  const int w = h.window().length();
  const int d = spec.phys_dim();
  const double infinite = mps_local_expectation(spec, h.matrix()).real();
  std::vector<FrustrationRecord> out;
  for (int length : lengths) {
    if (length < w) {
      throw Error(ErrorKind::kInvalidArgument, "length shorter than the term");
    }
    FrustrationRecord rec;
    rec.length = length;
    rec.infinite_value = infinite;
    const PureStateVector ring = mps_to_vector(spec, length);
    Interaction interaction(d, w - 1);
    std::vector<int> sites(w);
    for (int j = 0; j + w <= length; ++j) {
      const LocalOperator placed(LatticeWindow(j, w, d), h.matrix());
      rec.placement_values.push_back(expectation(ring, placed).real());
      for (int k = 0; k < w; ++k) sites[k] = j + k;
      interaction.add_term(sites, h.matrix());
    }
    rec.frustration_free = std::abs(infinite) <= options.tolerance;
    for (double v : rec.placement_values) {
      if (std::abs(v) > options.tolerance) rec.frustration_free = false;
    }
    if (options.compute_kernel) {
      const LatticeWindow window(0, length, d);
      rec.kernel_dimension =
          kernel_dimension(assemble_hamiltonian(interaction, window),
                           options.kernel_threshold, options.relative_threshold);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

EdgeDiagnostics edge_vector_diagnostics(const std::vector<PureStateVector>& states,
                                        int cut) {
  if (states.size() < 2) throw Error(ErrorKind::kInvalidArgument, "need at least two states");
  const int m = static_cast<int>(states.size());
  Matrix xi;
  for (int i = 0; i < m; ++i) {
    if (!(states[i].window() == states[0].window())) {
      throw Error(ErrorKind::kWindowNotContained, "states live on different windows");
    }
    const SchmidtSpectrum sp = schmidt_decompose(states[i], cut, kSchmidtFloor, true);
    if (i == 0) xi.resize(sp.left_vectors->rows(), m);
    xi.col(i) = sp.left_vectors->col(0);
  }
  const Matrix g = xi.adjoint() * xi;
  EdgeDiagnostics out;
  out.gram = g.cwiseAbs();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i != j) out.max_off_diagonal = std::max(out.max_off_diagonal, out.gram(i, j));
    }
  }
  Eigen::JacobiSVD<Matrix> svd(g);
  out.min_singular_value = svd.singularValues()(m - 1);
  out.independence_threshold = 1.0 / m;
  out.below_threshold = out.max_off_diagonal < out.independence_threshold;
  out.nonsingular = out.min_singular_value > 1e-10;
  return out;
}

// ---------------------------------------------------------------------------
// JSON

MpsSpec parse_mps_json(const std::string& text) {
  using json = nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("spec file: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::kParse, "spec file must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "schema" && key != "builtin" && key != "d" && key != "n" &&
        key != "V" && key != "psi") {
      throw Error(ErrorKind::kConfig, "unknown spec key '" + key + "'");
    }
  }
  if (j.contains("schema") && j["schema"] != "entlab-mps/1") {
    throw Error(ErrorKind::kConfig, "unsupported spec schema");
  }
  try {
    if (j.contains("builtin")) {
      if (j["builtin"] != "aklt") throw Error(ErrorKind::kConfig, "unknown builtin spec");
      return MpsSpec::aklt();
    }
    const int d = j.at("d").get<int>();
    const int n = j.at("n").get<int>();
    if (d < 1 || n < 1) throw Error(ErrorKind::kInvalidArgument, "d and n must be positive");
    Matrix v = detail::matrix_from_json(j.at("V"), static_cast<Eigen::Index>(d) * n, n);
    std::optional<Matrix> psi;
    if (j.contains("psi")) psi = detail::matrix_from_json(j["psi"], n, n);
    return MpsSpec(d, n, std::move(v), std::move(psi));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("spec file: ") + e.what());
  }
}

MpsSpec load_mps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open spec file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_mps_json(buf.str());
}

std::string mps_to_json(const MpsSpec& spec) {
  nlohmann::json j;
  j["schema"] = "entlab-mps/1";
  j["d"] = spec.phys_dim();
  j["n"] = spec.aux_dim();
  j["V"] = detail::matrix_to_json(spec.isometry());
  j["psi"] = detail::matrix_to_json(spec.psi());
  return j.dump(2);
}

std::vector<Observable> parse_observables_json(const std::string& text, int phys_dim) {
  using json = nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("observables file: ") + e.what());
  }
  std::vector<Observable> out;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key != "schema" && key != "observables") {
        throw Error(ErrorKind::kConfig, "unknown observables key '" + key + "'");
      }
    }
    for (const json& o : j.at("observables")) {
      Observable obs;
      obs.name = o.value("name", "obs" + std::to_string(out.size()));
      for (const json& f : o.at("factors")) {
        const int offset = f.at("offset").get<int>();
        if (offset < 0) throw Error(ErrorKind::kInvalidArgument, "negative offset");
        Matrix m;
        if (f.contains("matrix")) {
          m = detail::matrix_from_json(f["matrix"], phys_dim, phys_dim);
        } else {
          const std::string name = f.at("op").get<std::string>();
          if (name == "id") {
            m = ops::identity(phys_dim);
          } else if (name == "sx") {
            m = ops::spin_x(phys_dim);
          } else if (name == "sy") {
            m = ops::spin_y(phys_dim);
          } else if (name == "sz") {
            m = ops::spin_z(phys_dim);
          } else if (name == "sp") {
            m = ops::spin_plus(phys_dim);
          } else if (name == "sm") {
            m = ops::spin_minus(phys_dim);
          } else {
            throw Error(ErrorKind::kConfig, "unknown named operator '" + name + "'");
          }
        }
        obs.ops.emplace_back(offset, std::move(m));
      }
      out.push_back(std::move(obs));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("observables file: ") + e.what());
  }
  return out;
}

std::vector<Observable> load_observables(const std::string& path, int phys_dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open observables file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_observables_json(buf.str(), phys_dim);
}

}  // namespace entlab
