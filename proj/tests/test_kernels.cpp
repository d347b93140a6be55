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

#include <random>
#include <vector>

#include "entlab/kernels.hpp"

namespace entlab::kernels {
namespace {

std::vector<cplx> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

std::vector<PlacedTerm> random_terms(int d, int sites, std::mt19937_64& rng) {
  std::vector<PlacedTerm> terms;
  for (int j = 0; j + 1 < sites; ++j) {
    PlacedTerm t;
    t.sites = {j, j + 1};
    t.matrix = random_vector(static_cast<std::size_t>(d * d * d * d), rng);
    terms.push_back(t);
  }
  PlacedTerm wrap;
  wrap.sites = {sites - 1, 0};
  wrap.matrix = random_vector(static_cast<std::size_t>(d * d * d * d), rng);
  terms.push_back(wrap);
  return terms;
}

// Dense reference: every matrix element from the definition.
std::vector<cplx> dense_from_terms(const std::vector<PlacedTerm>& terms, int d, int n) {
  std::int64_t dim = 1;
  for (int i = 0; i < n; ++i) dim *= d;
  std::vector<cplx> out(static_cast<std::size_t>(dim * dim));
  auto digit = [&](std::int64_t s, int site) {
    for (int i = n - 1; i > site; --i) s /= d;
    return static_cast<int>(s % d);
  };
  for (const auto& t : terms) {
    const int w = static_cast<int>(t.sites.size());
    int side = 1;
    for (int i = 0; i < w; ++i) side *= d;
    for (std::int64_t r = 0; r < dim; ++r) {
      for (std::int64_t c = 0; c < dim; ++c) {
        bool rest_equal = true;
        for (int s = 0; s < n && rest_equal; ++s) {
          bool in = false;
          for (int x : t.sites) in = in || x == s;
          if (!in && digit(r, s) != digit(c, s)) rest_equal = false;
        }
        if (!rest_equal) continue;
        int lr = 0, lc = 0;
        for (int x : t.sites) {
          lr = lr * d + digit(r, x);
          lc = lc * d + digit(c, x);
        }
        out[static_cast<std::size_t>(r * dim + c)] += t.matrix[static_cast<std::size_t>(lr * side + lc)];
      }
    }
  }
  return out;
}

TEST(Kernels, BuildCsrMatchesDenseDefinition) {
  std::mt19937_64 rng(3);
  for (int d : {2, 3}) {
    const int n = d == 2 ? 5 : 3;
    auto terms = random_terms(d, n, rng);
    auto dense = dense_from_terms(terms, d, n);
    CsrMatrix a = build_csr(terms, d, n);
    const auto dim = a.rows;
    std::vector<cplx> rebuilt(static_cast<std::size_t>(dim * dim));
    for (std::int64_t r = 0; r < dim; ++r) {
      for (auto p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
        if (p > a.row_ptr[r]) {
          EXPECT_LT(a.col[p - 1], a.col[p]);
        }
        rebuilt[static_cast<std::size_t>(r * dim + a.col[p])] = a.val[p];
      }
    }
    double err = 0;
    for (std::size_t i = 0; i < dense.size(); ++i) err = std::max(err, std::abs(dense[i] - rebuilt[i]));
    EXPECT_LT(err, 1e-13);
  }
}

TEST(Kernels, ParallelAgreesWithSerialBitwise) {
  std::mt19937_64 rng(5);
  const int d = 2, n = 10;
  auto terms = random_terms(d, n, rng);
  CsrMatrix a = build_csr(terms, d, n);
  CsrMatrix b = build_csr_serial(terms, d, n);
  EXPECT_EQ(a.row_ptr, b.row_ptr);
  EXPECT_EQ(a.col, b.col);
  EXPECT_EQ(a.val, b.val);

  auto x = random_vector(static_cast<std::size_t>(a.rows), rng);
  std::vector<cplx> y1(x.size()), y2(x.size());
  csr_matvec(a, x, y1);
  csr_matvec_serial(a, x, y2);
  EXPECT_EQ(y1, y2);

  EXPECT_EQ(dot(x, y1), dot_serial(x, y1));

  auto local = random_vector(64, rng);
  for (int offset : {0, 4, 7}) {
    apply_local(x, y1, local, d, offset, 3, n);
    apply_local_serial(x, y2, local, d, offset, 3, n);
    EXPECT_EQ(y1, y2);
  }
}

TEST(Kernels, ApplyLocalMatchesCsr) {
  std::mt19937_64 rng(9);
  const int d = 3, n = 5;
  PlacedTerm t;
  t.sites = {1, 2};
  t.matrix = random_vector(81, rng);
  std::vector<PlacedTerm> terms{t};
  CsrMatrix a = build_csr(terms, d, n);
  auto x = random_vector(static_cast<std::size_t>(a.rows), rng);
  std::vector<cplx> y1(x.size()), y2(x.size());
  csr_matvec(a, x, y1);
  apply_local(x, y2, t.matrix, d, 1, 2, n);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LT(std::abs(y1[i] - y2[i]), 1e-12);
}

TEST(Kernels, RealPath) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  PlacedTerm t;
  t.sites = {0, 1};
  t.matrix.resize(16);
  for (auto& v : t.matrix) v = g(rng);
  std::vector<PlacedTerm> terms{t, PlacedTerm{{2, 3}, t.matrix}};
  CsrMatrix a = build_csr(terms, 2, 6);
  ASSERT_TRUE(is_real(a));
  RealCsrMatrix r = real_part(a);
  std::vector<double> x(static_cast<std::size_t>(a.rows));
  for (auto& v : x) v = g(rng);
  std::vector<double> y1(x.size()), y2(x.size());
  csr_matvec(r, x, y1);
  csr_matvec_serial(r, x, y2);
  EXPECT_EQ(y1, y2);
  std::vector<cplx> xc(x.begin(), x.end()), yc(x.size());
  csr_matvec(a, xc, yc);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LT(std::abs(yc[i] - y1[i]), 1e-13);

  t.matrix[1] = cplx(0.0, 1.0);
  std::vector<PlacedTerm> complex_terms{t};
  EXPECT_FALSE(is_real(build_csr(complex_terms, 2, 3)));
}

TEST(Kernels, MpsAmplitudesParallelAgreesWithSerial) {
  std::mt19937_64 rng(13);
  const int d = 3, n = 2, length = 7;
  auto mats = random_vector(static_cast<std::size_t>(d * n * n), rng);
  auto ring = mps_amplitudes(mats, d, n, length, {}, {});
  EXPECT_EQ(ring, mps_amplitudes_serial(mats, d, n, length, {}, {}));
  auto l = random_vector(n, rng), r = random_vector(n, rng);
  EXPECT_EQ(mps_amplitudes(mats, d, n, length, l, r),
            mps_amplitudes_serial(mats, d, n, length, l, r));

  // Configuration (s_0, s_1, s_2) = (2, 0, 1): tr(A_1 A_0 A_2).
  auto a = [&](int s, int i, int j) { return mats[static_cast<std::size_t>(s * n * n + j * n + i)]; };
  auto three = mps_amplitudes_serial(mats, d, n, 3, {}, {});
  cplx expect = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) expect += a(1, i, j) * a(0, j, k) * a(2, k, i);
  EXPECT_LT(std::abs(three[2 * 9 + 0 * 3 + 1] - expect), 1e-13);
}

TEST(Kernels, ThreadCount) {
  const int before = num_threads();
  set_num_threads(1);
  EXPECT_EQ(num_threads(), 1);
  set_num_threads(before);
}

}  // namespace
}  // namespace entlab::kernels
