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

// Parallel kernels against their serial references. The threads are set by
// OMP_NUM_THREADS / ENTLAB_THREADS as usual.

#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "entlab/kernels.hpp"

namespace {

using entlab::kernels::cplx;
namespace k = entlab::kernels;

constexpr int kSerial = 0;

// Heisenberg bonds on an open chain of n spin-1/2 sites.
std::vector<k::PlacedTerm> heisenberg_terms(int n) {
  std::vector<cplx> bond(16, 0.0);
  bond[0] = bond[15] = 0.25;
  bond[5] = bond[10] = -0.25;
  bond[6] = bond[9] = 0.5;
  std::vector<k::PlacedTerm> terms;
  for (int j = 0; j + 1 < n; ++j) terms.push_back({{j, j + 1}, bond});
  return terms;
}

std::vector<cplx> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

const k::CsrMatrix& chain_matrix(int n) {
  static std::vector<k::CsrMatrix> cache(24);
  if (cache[n].rows == 0) cache[n] = k::build_csr(heisenberg_terms(n), 2, n);
  return cache[n];
}

void BM_CsrMatvec(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const k::CsrMatrix& a = chain_matrix(n);
  const auto x = random_vector(a.rows, 1);
  std::vector<cplx> y(a.rows);
  for (auto _ : state) {
    if (state.range(1) == kSerial) {
      k::csr_matvec_serial(a, x, y);
    } else {
      k::csr_matvec(a, x, y);
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * a.nnz());
}

void BM_RealCsrMatvec(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const k::RealCsrMatrix a = k::real_part(chain_matrix(n));
  std::vector<double> x(a.rows), y(a.rows);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.37 * i);
  for (auto _ : state) {
    if (state.range(1) == kSerial) {
      k::csr_matvec_serial(a, x, y);
    } else {
      k::csr_matvec(a, x, y);
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(a.val.size()));
}

void BM_ApplyLocal(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto in = random_vector(std::size_t{1} << n, 2);
  const auto a = random_vector(64, 3);
  std::vector<cplx> out(in.size());
  for (auto _ : state) {
    if (state.range(1) == kSerial) {
      k::apply_local_serial(in, out, a, 2, n / 2 - 1, 3, n);
    } else {
      k::apply_local(in, out, a, 2, n / 2 - 1, 3, n);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(in.size() * sizeof(cplx)));
}

void BM_BuildCsr(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto terms = heisenberg_terms(n);
  for (auto _ : state) {
    auto m = state.range(1) == kSerial ? k::build_csr_serial(terms, 2, n) : k::build_csr(terms, 2, n);
    benchmark::DoNotOptimize(m.val.data());
  }
}

void BM_Dot(benchmark::State& state) {
  const std::size_t n = std::size_t{1} << state.range(0);
  const auto x = random_vector(n, 4), y = random_vector(n, 5);
  for (auto _ : state) {
    cplx r = state.range(1) == kSerial ? k::dot_serial(x, y) : k::dot(x, y);
    benchmark::DoNotOptimize(r);
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * sizeof(cplx)));
}

void BM_MpsAmplitudes(benchmark::State& state) {
  const int length = static_cast<int>(state.range(0));
  const auto mats = random_vector(3 * 2 * 2, 6);
  for (auto _ : state) {
    auto amps = state.range(1) == kSerial
                    ? k::mps_amplitudes_serial(mats, 3, 2, length, {}, {})
                    : k::mps_amplitudes(mats, 3, 2, length, {}, {});
    benchmark::DoNotOptimize(amps.data());
  }
}

void serial_parallel(benchmark::internal::Benchmark* b, std::vector<long> sizes) {
  b->ArgNames({"n", "parallel"});
  for (long n : sizes) {
    b->Args({n, 0});
    b->Args({n, 1});
  }
}

BENCHMARK(BM_CsrMatvec)->Apply([](auto* b) { serial_parallel(b, {14, 18, 20}); });
BENCHMARK(BM_RealCsrMatvec)->Apply([](auto* b) { serial_parallel(b, {14, 18, 20}); });
BENCHMARK(BM_ApplyLocal)->Apply([](auto* b) { serial_parallel(b, {14, 18, 20}); });
BENCHMARK(BM_BuildCsr)->Apply([](auto* b) { serial_parallel(b, {12, 16}); });
BENCHMARK(BM_Dot)->Apply([](auto* b) { serial_parallel(b, {16, 20}); });
BENCHMARK(BM_MpsAmplitudes)->Apply([](auto* b) { serial_parallel(b, {8, 12}); });

}  // namespace

BENCHMARK_MAIN();
