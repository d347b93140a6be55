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

// Data-parallel inner loops. Every kernel has an OpenMP version and a
// `_serial` reference with the same arithmetic order per output element,
// so the two agree bitwise; tests and the benchmark compare them.

#ifndef ENTLAB_KERNELS_HPP
#define ENTLAB_KERNELS_HPP

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace entlab::kernels {

using cplx = std::complex<double>;

/// Compressed sparse row matrix. Column indices are 32-bit; builders reject
/// dimensions that do not fit.
struct CsrMatrix {
  std::int64_t rows = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<std::uint32_t> col;
  std::vector<cplx> val;

  std::int64_t nnz() const { return static_cast<std::int64_t>(val.size()); }
};

/// One operator placed on an ordered list of sites of a chain of
/// `num_sites` sites with local dimension d. `matrix` is row-major,
/// side d^sites.size(), and its first site is the slowest index.
struct PlacedTerm {
  std::vector<int> sites;
  std::vector<cplx> matrix;
};

int num_threads();
void set_num_threads(int n);

// y = A x
/// Same pattern with real values, for Hamiltonians with real matrix elements.
struct RealCsrMatrix {
  std::int64_t rows = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<std::uint32_t> col;
  std::vector<double> val;
};

bool is_real(const CsrMatrix& a);
RealCsrMatrix real_part(const CsrMatrix& a);

void csr_matvec(const RealCsrMatrix& a, std::span<const double> x, std::span<double> y);
void csr_matvec_serial(const RealCsrMatrix& a, std::span<const double> x,
                       std::span<double> y);

void csr_matvec(const CsrMatrix& a, std::span<const cplx> x, std::span<cplx> y);
void csr_matvec_serial(const CsrMatrix& a, std::span<const cplx> x,
                       std::span<cplx> y);

/// Sum of placed terms as a CSR matrix on d^num_sites states. Entries
/// within a row are sorted by column; exact zeros are dropped.
CsrMatrix build_csr(std::span<const PlacedTerm> terms, int d, int num_sites);
CsrMatrix build_csr_serial(std::span<const PlacedTerm> terms, int d,
                           int num_sites);

/// out = (1 (x) A (x) 1) in, where A (row-major, side d^width) acts on the
/// sites [offset, offset + width) of a num_sites chain.
void apply_local(std::span<const cplx> in, std::span<cplx> out,
                 std::span<const cplx> a, int d, int offset, int width,
                 int num_sites);
void apply_local_serial(std::span<const cplx> in, std::span<cplx> out,
                        std::span<const cplx> a, int d, int offset, int width,
                        int num_sites);

/// <x, y> (conjugate-linear in x). Partial sums are taken over fixed
/// blocks and combined in block order, so the result does not depend on
/// the number of threads.
cplx dot(std::span<const cplx> x, std::span<const cplx> y);
cplx dot_serial(std::span<const cplx> x, std::span<const cplx> y);

/// Amplitudes tr(A_{s_{L-1}} ... A_{s_0}) (ring) or <left| ... |right>
/// (open) for every configuration s, site 0 slowest. `site_mats` holds d
/// column-major n x n matrices back to back. Empty boundary vectors select
/// the ring closure.
std::vector<cplx> mps_amplitudes(std::span<const cplx> site_mats, int d, int n,
                                 int length, std::span<const cplx> left,
                                 std::span<const cplx> right);
std::vector<cplx> mps_amplitudes_serial(std::span<const cplx> site_mats, int d,
                                        int n, int length,
                                        std::span<const cplx> left,
                                        std::span<const cplx> right);

}  // namespace entlab::kernels

#endif  // ENTLAB_KERNELS_HPP
