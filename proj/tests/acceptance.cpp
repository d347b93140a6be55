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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "entlab/entangle.hpp"
#include "entlab/fermion.hpp"
#include "entlab/lab.hpp"
#include "entlab/models.hpp"
#include "entlab/mps.hpp"
#include "entlab/spectra.hpp"

namespace {

using namespace entlab;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
  double seconds = 0.0;
};

// Every Schmidt spectrum computed by the other criteria, for criterion 3.
std::vector<std::vector<double>> g_spectra;

void keep_spectrum(const PureStateVector& s, int cut) {
  g_spectra.push_back(schmidt_decompose(s, cut).weights);
}

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(3);
  o << std::scientific << v;
  return o.str();
}

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

Matrix random_isometry(int rows, int cols, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rows, cols, rng));
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

// Random rank lets some states be singular; rho2 stays full rank.
DensityMatrix random_density(int dim, std::mt19937_64& rng, bool full_rank) {
  std::uniform_int_distribution<int> rank_dist(1, dim);
  const int rank = full_rank ? dim : rank_dist(rng);
  Matrix a = random_matrix(dim, rank, rng);
  Matrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix((rho + rho.adjoint()) / 2.0);
}

Outcome criterion1() {
  Outcome o;
  std::ostringstream d;
  for (int length = 4; length <= 10; ++length) {
    const int k = kernel_dimension(model_hamiltonian(builtin_model("aklt"), length), 1e-8, false);
    d << " L=" << length << ":" << k;
    if (k != 4) o.pass = false;
  }
  o.detail = "dim ker" + d.str();
  return o;
}

Outcome criterion2() {
  Outcome o;
  const MpsSpec aklt = MpsSpec::aklt();
  const Matrix p = aklt_projector();
  double worst = std::abs(mps_local_expectation(aklt, p));
  int placements = 0;
  for (int length = 2; length <= 12; ++length) {
    std::vector<PureStateVector> states{mps_to_vector(aklt, length)};
    for (int l = 0; l < 2; ++l)
      for (int r = 0; r < 2; ++r)
        states.push_back(mps_to_vector(aklt, length, Closure{Vector::Unit(2, l), Vector::Unit(2, r)}));
    for (const auto& s : states) {
      for (int j = 0; j + 2 <= length; ++j) {
        worst = std::max(worst, std::abs(expectation(s, LocalOperator(LatticeWindow(j, 2, 3), p))));
        ++placements;
      }
      if (length >= 2) keep_spectrum(s, length / 2);
    }
  }
  o.pass = worst < 1e-10;
  o.detail = "max |phi(tau_j(h))| = " + fmt(worst) + " over " + std::to_string(placements) +
             " placements, L = 2..12, ring and open states";
  return o;
}

Outcome criterion4() {
  Outcome o;
  double worst_ratio = 0.0;
  int checks = 0;
  for (const char* name : {"heisenberg", "tfim"}) {
    const WindowHamiltonian h = model_hamiltonian(builtin_model(name), 12);
    const PureStateVector g = lowest_eigenpairs(h, 1).eigenvectors.front();
    for (int cut = 1; cut < 12; ++cut) {
      keep_spectrum(g, cut);
      for (double eps : {0.1, 0.01}) {
        const int k = truncation_index(schmidt_decompose(g, cut), eps).k;
        const double dist = truncate_state(g, cut, k).distance_sq;
        worst_ratio = std::max(worst_ratio, dist / (3.0 * eps));
        if (!(dist <= 3.0 * eps)) o.pass = false;
        ++checks;
      }
    }
  }
  o.detail = "max distance / (3 eps) = " + fmt(worst_ratio) + " over " + std::to_string(checks) +
             " (model, cut, eps) cases";
  return o;
}

Outcome criterion5() {
  Outcome o;
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<int> dim_dist(1, 8);
  double worst_excess = -std::numeric_limits<double>::infinity();
  double worst_eq = 0.0;
  for (int i = 0; i < 500; ++i) {
    const int dim = std::max(2, dim_dist(rng));
    const DensityMatrix rho = random_density(dim, rng, false);
    std::uniform_int_distribution<int> kdist(1, dim);
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
    for (int j = 0; j < 500; ++j) {
      const int k = kdist(rng);
      const double top = minmax_top_k(rho, k);
      const Matrix q = random_isometry(dim, k, rng);
      const double val = (q.adjoint() * rho.matrix() * q).trace().real();
      worst_excess = std::max(worst_excess, val - top);
      if (j == 0) {
        const Matrix e = es.eigenvectors().rightCols(k);
        worst_eq = std::max(worst_eq, std::abs((e.adjoint() * rho.matrix() * e).trace().real() - top));
      }
    }
  }
  o.pass = worst_excess <= 1e-10 && worst_eq <= 1e-10;
  o.detail = "max tr(rho E) - top_k = " + fmt(worst_excess) + ", eigenprojection defect " +
             fmt(worst_eq) + " (500 x 500)";
  return o;
}

Outcome criterion6() {
  Outcome o;
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<int> dim_dist(2, 8);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000; ++i) {
    const int dim = dim_dist(rng);
    const DensityMatrix r1 = random_density(dim, rng, false);
    const DensityMatrix r2 = random_density(dim, rng, true);
    std::uniform_int_distribution<int> kdist(0, dim);
    const int rank = kdist(rng);
    Matrix e = Matrix::Zero(dim, dim);
    if (rank > 0) {
      const Matrix q = random_isometry(dim, rank, rng);
      e = q * q.adjoint();
    }
    const double gap = binary_monotonicity_gap(r1, r2, LocalOperator(LatticeWindow(0, 1, dim), e));
    worst = std::min(worst, gap);
  }
  o.pass = worst >= -1e-10;
  o.detail = "min monotonicity gap = " + fmt(worst) + " over 1000 triples";
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 30);
  double worst_tail = std::numeric_limits<double>::infinity();
  double worst_block = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000; ++i) {
    const int n = len(rng);
    std::vector<double> x(n);
    for (auto& v : x) v = std::pow(u(rng), 3.0) + 1e-6;
    std::sort(x.rbegin(), x.rend());
    double total = 0.0;
    for (double v : x) total += v;
    const double mass = 0.2 + 0.8 * u(rng);
    for (auto& v : x) v *= mass / total;
    // Majorant: tails of delta = (1 - t) x + t (uniform over m >= n entries).
    const int m = n + static_cast<int>(u(rng) * (31 - n));
    const double t = u(rng);
    std::vector<double> delta(m);
    for (int k = 0; k < m; ++k) delta[k] = (k < n ? (1 - t) * x[k] : 0.0) + t * mass / m;
    std::vector<double> a(m);
    double tail = 0.0;
    for (int k = m - 1; k >= 0; --k) a[k] = (tail += delta[k]);
    a[0] = std::min(a[0], 1.0);
    const TailBound tb = entropy_tail_bounds(x, a);
    worst_tail = std::min(worst_tail, tb.rhs - tb.lhs);
    const int big_k = 2 + static_cast<int>(u(rng) * n);
    const auto [lhs, rhs] = entropy_block_bound(x, std::min(big_k, n + 1));
    worst_block = std::min(worst_block, rhs - lhs);
  }
  double worst_sub = std::numeric_limits<double>::infinity();
  std::uniform_int_distribution<int> site(0, 7);
  for (int i = 0; i < 500; ++i) {
    Vector v = random_matrix(256, 1, rng).col(0);
    const PureStateVector s(LatticeWindow(0, 8, 2), v, true);
    int j = site(rng), k = site(rng), l = site(rng);
    std::vector<int> idx{j, k, l};
    std::sort(idx.begin(), idx.end());
    j = idx[0];
    k = idx[1];
    l = idx[2];
    if (k == l) {
      if (l < 7) ++l; else if (j < k) --k; else continue;
    }
    worst_sub = std::min(worst_sub, subadditivity_check(s, j, k, l));
    if (i < 50) keep_spectrum(s, 4);
  }
  o.pass = worst_tail >= -1e-12 && worst_block >= -1e-12 && worst_sub >= -1e-9;
  o.detail = "min tail slack " + fmt(worst_tail) + ", min block slack " + fmt(worst_block) +
             " (1000 sequences), min subadditivity " + fmt(worst_sub) + " (500 states)";
  return o;
}

Outcome criterion8() {
  Outcome o;
  std::mt19937_64 rng(808);
  std::uniform_int_distribution<int> ddist(2, 3), ndist(1, 3), ldist(2, 8);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int d = ddist(rng), n = ndist(rng), length = ldist(rng);
    const MpsSpec spec = MpsSpec::random(d, n, 1000 + i);
    std::uniform_int_distribution<int> sdist(0, length - 1);
    std::vector<SiteOperator> ops;
    for (int f = 0; f < 3; ++f) ops.emplace_back(sdist(rng), random_matrix(d, d, rng));
    std::vector<SiteOperator> sorted = ops;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const SiteOperator& x, const SiteOperator& y) { return x.first < y.first; });
    const PureStateVector v = mps_to_vector(spec, length);
    // Dense oracle: factors on one site multiply in list order.
    Vector out = v.amplitudes();
    for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
      out = apply_local(LocalOperator(LatticeWindow(it->first, 1, d), it->second), v.window(), out);
    }
    const cplx dense = v.amplitudes().dot(out);
    worst = std::max(worst, std::abs(ring_expectation(spec, length, ops) - dense));
    if (length >= 2) keep_spectrum(v, length / 2);
  }
  const MpsSpec aklt = MpsSpec::aklt();
  const Matrix sz = ops::spin_z(3);
  const cplx nn = ring_expectation(aklt, 12, {{5, sz}, {6, sz}});
  const PureStateVector ring = mps_to_vector(aklt, 12);
  const LatticeWindow& w = ring.window();
  const Vector szsz = apply_local(LocalOperator(LatticeWindow(5, 2, 3), ops::kron(sz, sz)), w, ring.amplitudes());
  const double dense_nn = ring.amplitudes().dot(szsz).real();
  const double dev = std::abs(nn.real() + 4.0 / 9.0);
  o.pass = worst <= 1e-10 && dev <= 1e-3 && std::abs(nn.real() - dense_nn) <= 1e-10;
  o.detail = "max |transfer - dense| = " + fmt(worst) + " over 100 specs; AKLT L=12 SzSz = " +
             std::to_string(nn.real()) + " (|+4/9| = " + fmt(dev) + ")";
  return o;
}

FermionOperator random_even_hermitian(int length, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> site(0, length - 1);
  std::uniform_int_distribution<int> kind(0, 1);
  std::normal_distribution<double> g;
  std::vector<RawMonomial> raw;
  for (int t = 0; t < 10; ++t) {
    RawMonomial m{cplx(g(rng), g(rng)), {}};
    const int pairs = 1 + t % 2;
    for (int p = 0; p < 2 * pairs; ++p) m.factors.push_back({site(rng), kind(rng) == 1});
    raw.push_back(m);
  }
  const FermionOperator op = car_normal_order(raw);
  return (op + op.adjoint()).pruned(1e-14);
}

Outcome criterion9() {
  Outcome o;
  std::mt19937_64 rng(909);
  std::uniform_int_distribution<int> ldist(2, 8);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int length = ldist(rng);
    worst = std::max(worst, spectral_equivalence_check(random_even_hermitian(length, rng),
                                                       LatticeWindow(0, length, 2)));
  }
  const LatticeWindow ten(0, 10, 2);
  const double hop = spectral_equivalence_check(fermion_hamiltonian({1.0, 0.3, 0.5}, ten), ten);
  o.pass = worst < 1e-9 && hop < 1e-9;
  o.detail = "max discrepancy " + fmt(worst) + " (100 random, L <= 8), hopping L=10 " + fmt(hop);
  return o;
}

Outcome criterion10() {
  Outcome o;
  lab::SolveCache cache;
  std::ostringstream d;
  auto cfg = [](const std::string& text) { return lab::parse_config(text); };
  auto collect = [&](const lab::ScanResult& r) {
    for (const auto& rec : r.records) {
      if (!rec.ok()) {
        o.pass = false;
        d << " [L=" << rec.length << " " << rec.status << "]";
      }
      for (const auto& c : rec.cuts) g_spectra.push_back(c.weights);
    }
  };

  const auto ring_gap = lab::run_gap_scan(
      cfg(R"({"experiment":"gap-scan","model":{"model":"heisenberg","boundary":"periodic"},"lengths":"8..16:2"})"),
      &cache);
  const auto ring_ent = lab::run_entropy_scan(
      cfg(R"({"experiment":"entropy-scan","model":{"model":"heisenberg","boundary":"periodic"},"lengths":"8..16:2"})"),
      &cache);
  collect(ring_gap);
  collect(ring_ent);
  const double g8 = ring_gap.records.front().gap, g16 = ring_gap.records.back().gap;
  bool increasing = true;
  for (std::size_t i = 1; i < ring_ent.records.size(); ++i) {
    if (!(ring_ent.records[i].cuts.front().entropy > ring_ent.records[i - 1].cuts.front().entropy)) {
      increasing = false;
    }
  }
  if (!(g16 < 0.6 * g8) || !increasing) o.pass = false;
  d << "heisenberg ring gap(16)/gap(8) = " << g16 / g8 << ", entropy increasing "
    << (increasing ? "yes" : "no");

  const auto aklt_gap =
      lab::run_gap_scan(cfg(R"({"experiment":"gap-scan","model":"aklt","lengths":"6..12"})"), &cache);
  const auto aklt_ent =
      lab::run_entropy_scan(cfg(R"({"experiment":"entropy-scan","model":"aklt","lengths":"6..12"})"), &cache);
  collect(aklt_gap);
  collect(aklt_ent);
  double min_gap = std::numeric_limits<double>::infinity();
  for (const auto& rec : aklt_gap.records) min_gap = std::min(min_gap, rec.gap);
  const auto& er = aklt_ent.records;
  const double delta = std::abs(er.back().cuts.front().entropy - er[er.size() - 2].cuts.front().entropy);
  if (!(min_gap > 0.1) || !(delta < 1e-3)) o.pass = false;
  d << "; aklt min gap " << min_gap << ", entropy delta " << fmt(delta);

  const double t = 1.0, mu = 8.0;
  const auto ferm = lab::run_gap_scan(
      cfg(R"({"experiment":"gap-scan","model":{"model":"hopping-fermion","params":{"t":1,"mu":8}},"lengths":"4..12:2"})"),
      &cache);
  collect(ferm);
  double min_f = std::numeric_limits<double>::infinity();
  for (const auto& rec : ferm.records) min_f = std::min(min_f, rec.gap);
  if (!(min_f >= std::abs(mu) - 4 * std::abs(t) - 1e-9)) o.pass = false;
  d << "; fermion mu=8 t=1 min gap " << min_f << " (bound " << std::abs(mu) - 4 * std::abs(t) << ")";
  o.detail = d.str();
  return o;
}

Outcome criterion3() {
  Outcome o;
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> all = g_spectra;
  const std::size_t suite = all.size();
  for (int i = 0; i < 1000; ++i) {
    const int n = 1 + static_cast<int>(u(rng) * 64);
    const double power = 1.0 + 8.0 * u(rng);
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& v : w) total += (v = std::pow(u(rng), power) + 1e-300);
    for (auto& v : w) v /= total;
    std::sort(w.rbegin(), w.rend());
    all.push_back(std::move(w));
  }
  int violations = 0;
  for (const auto& w : all) {
    for (double eps : {0.3, 0.1, 0.01}) {
      const TruncationReport t = truncation_index(w, eps);
      const double bound = std::exp(-t.entropy / eps);
      if (!(t.k <= std::exp(t.entropy / eps)) || !(t.lambda1 >= bound)) ++violations;
    }
  }
  o.pass = violations == 0;
  o.detail = std::to_string(violations) + " violations over " + std::to_string(suite) +
             " suite spectra + 1000 random, eps in {0.3, 0.1, 0.01}";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> order = {
      {1, criterion1}, {2, criterion2}, {4, criterion4}, {5, criterion5}, {6, criterion6},
      {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}, {3, criterion3}};
  const std::vector<double> limits = {0, 60, 0, 0, 0, 0, 0, 0, 0, 120, 600};
  std::vector<Outcome> results(11);
  for (const auto& [id, fn] : order) {
    const auto t0 = Clock::now();
    try {
      results[id] = fn();
    } catch (const std::exception& e) {
      results[id].pass = false;
      results[id].detail = std::string("error: ") + e.what();
    }
    results[id].seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (limits[id] > 0 && results[id].seconds >= limits[id]) {
      results[id].pass = false;
      results[id].detail += "; runtime over " + std::to_string(static_cast<int>(limits[id])) + " s";
    }
    std::fprintf(stderr, "criterion %d done in %.1f s\n", id, results[id].seconds);
  }
  int failed = 0;
  for (int id = 1; id <= 10; ++id) {
    const Outcome& r = results[id];
    std::printf("%s %2d: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", id, r.detail.c_str(), r.seconds);
    failed += r.pass ? 0 : 1;
  }
  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
