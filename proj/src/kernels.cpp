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

#include "entlab/kernels.hpp"

#include <algorithm>
#include <array>
#include <cstddef>
#include <limits>
#include <utility>

#include <omp.h>

#include "entlab/error.hpp"

namespace entlab::kernels {

namespace {

constexpr std::int64_t kDotBlock = 4096;
constexpr std::int64_t kRowBlock = 2048;

std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Per-term sparse rows with precomputed column offsets.
struct PreparedTerm {
  std::vector<std::int64_t> strides;       // global stride of each site
  std::vector<std::int64_t> row_start;     // into entries, size side+1
  std::vector<std::int64_t> col_offset;    // global offset per local column
  std::vector<std::pair<int, cplx>> entries;
  int side = 0;
};

std::vector<PreparedTerm> prepare_terms(std::span<const PlacedTerm> terms,
                                        int d, int num_sites) {
  std::vector<PreparedTerm> out;
  out.reserve(terms.size());
  for (const auto& t : terms) {
    PreparedTerm p;
    const int w = static_cast<int>(t.sites.size());
    p.side = static_cast<int>(ipow(d, w));
    if (static_cast<std::int64_t>(t.matrix.size()) !=
        static_cast<std::int64_t>(p.side) * p.side) {
      throw Error(ErrorKind::kInvalidArgument,
                  "placed term matrix has the wrong size");
    }
    for (int s : t.sites) {
      if (s < 0 || s >= num_sites) {
        throw Error(ErrorKind::kWindowNotContained,
                    "placed term site outside the chain");
      }
      p.strides.push_back(ipow(d, num_sites - 1 - s));
    }
    p.col_offset.assign(p.side, 0);
    for (int lc = 0; lc < p.side; ++lc) {
      std::int64_t off = 0;
      int rem = lc;
      for (int k = w - 1; k >= 0; --k) {
        off += (rem % d) * p.strides[k];
        rem /= d;
      }
      p.col_offset[lc] = off;
    }
    p.row_start.assign(p.side + 1, 0);
    for (int lr = 0; lr < p.side; ++lr) {
      for (int lc = 0; lc < p.side; ++lc) {
        const cplx v = t.matrix[static_cast<std::size_t>(lr) * p.side + lc];
        if (v != cplx(0.0, 0.0)) p.entries.emplace_back(lc, v);
      }
      p.row_start[lr + 1] = static_cast<std::int64_t>(p.entries.size());
    }
    out.push_back(std::move(p));
  }
  return out;
}

// Appends the merged entries of one row.
void build_row(const std::vector<PreparedTerm>& terms, int d, std::int64_t row,
               std::vector<std::pair<std::int64_t, cplx>>& scratch,
               std::vector<std::uint32_t>& cols, std::vector<cplx>& vals) {
  scratch.clear();
  for (const auto& t : terms) {
    std::int64_t local_row = 0;
    std::int64_t base = row;
    for (std::size_t k = 0; k < t.strides.size(); ++k) {
      const std::int64_t digit = (row / t.strides[k]) % d;
      local_row = local_row * d + digit;
      base -= digit * t.strides[k];
    }
    for (std::int64_t e = t.row_start[local_row]; e < t.row_start[local_row + 1];
         ++e) {
      const auto& [lc, v] = t.entries[e];
      scratch.emplace_back(base + t.col_offset[lc], v);
    }
  }
  std::stable_sort(scratch.begin(), scratch.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t i = 0;
  while (i < scratch.size()) {
    const std::int64_t c = scratch[i].first;
    cplx sum = 0.0;
    while (i < scratch.size() && scratch[i].first == c) {
      sum += scratch[i].second;
      ++i;
    }
    if (sum != cplx(0.0, 0.0)) {
      cols.push_back(static_cast<std::uint32_t>(c));
      vals.push_back(sum);
    }
  }
}

struct RowBlock {
  std::vector<std::int64_t> counts;
  std::vector<std::uint32_t> cols;
  std::vector<cplx> vals;
};

void build_block(const std::vector<PreparedTerm>& terms, int d,
                 std::int64_t begin, std::int64_t end, RowBlock& blk) {
  std::vector<std::pair<std::int64_t, cplx>> scratch;
  blk.counts.reserve(end - begin);
  for (std::int64_t r = begin; r < end; ++r) {
    const std::size_t before = blk.vals.size();
    build_row(terms, d, r, scratch, blk.cols, blk.vals);
    blk.counts.push_back(static_cast<std::int64_t>(blk.vals.size() - before));
  }
}

CsrMatrix concat_blocks(std::int64_t rows, std::vector<RowBlock>& blocks) {
  CsrMatrix m;
  m.rows = rows;
  m.row_ptr.reserve(rows + 1);
  m.row_ptr.push_back(0);
  std::int64_t total = 0;
  for (const auto& b : blocks) total += static_cast<std::int64_t>(b.vals.size());
  m.col.reserve(total);
  m.val.reserve(total);
  for (auto& b : blocks) {
    for (std::int64_t c : b.counts) m.row_ptr.push_back(m.row_ptr.back() + c);
    m.col.insert(m.col.end(), b.cols.begin(), b.cols.end());
    m.val.insert(m.val.end(), b.vals.begin(), b.vals.end());
    b = RowBlock{};
  }
  return m;
}

std::int64_t checked_dim(int d, int num_sites) {
  std::int64_t dim = 1;
  for (int i = 0; i < num_sites; ++i) {
    if (dim > std::numeric_limits<std::uint32_t>::max() / d) {
      throw Error(ErrorKind::kDimensionOverflow,
                  "sparse dimension exceeds 32-bit column indices");
    }
    dim *= d;
  }
  return dim;
}

inline cplx block_dot(const cplx* x, const cplx* y, std::int64_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double a = x[i].real(), b = x[i].imag();
    const double c = y[i].real(), e = y[i].imag();
    re += a * c + b * e;
    im += a * e - b * c;
  }
  return {re, im};
}

inline cplx amplitude(const cplx* mats, int d, int n, int length,
                      std::int64_t index, const cplx* left, const cplx* right,
                      std::vector<cplx>& acc, std::vector<cplx>& tmp) {
  // digits, site 0 slowest
  std::array<int, 64> digits{};
  std::int64_t rem = index;
  for (int site = length - 1; site >= 0; --site) {
    digits[site] = static_cast<int>(rem % d);
    rem /= d;
  }
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  for (int site = 0; site < length; ++site) {
    const int s = digits[site];
    const cplx* a = mats + static_cast<std::size_t>(s) * nn;
    if (site == 0) {
      std::copy(a, a + nn, acc.begin());
      continue;
    }
    // tmp = a * acc (column-major)
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        cplx sum = 0.0;
        for (int k = 0; k < n; ++k) sum += a[i + k * n] * acc[k + j * n];
        tmp[i + j * n] = sum;
      }
    }
    acc.swap(tmp);
  }
  cplx out = 0.0;
  if (left == nullptr) {
    for (int i = 0; i < n; ++i) out += acc[i + i * n];
  } else {
    for (int i = 0; i < n; ++i) {
      cplx row = 0.0;
      for (int j = 0; j < n; ++j) row += acc[i + j * n] * right[j];
      out += std::conj(left[i]) * row;
    }
  }
  return out;
}

void check_mps_args(std::span<const cplx> site_mats, int d, int n, int length,
                    std::span<const cplx> left, std::span<const cplx> right) {
  if (d < 1 || n < 1 || length < 1 ||
      static_cast<std::int64_t>(site_mats.size()) !=
          static_cast<std::int64_t>(d) * n * n) {
    throw Error(ErrorKind::kInvalidArgument, "bad MPS site matrices");
  }
  if (left.size() != right.size() ||
      (!left.empty() && static_cast<int>(left.size()) != n)) {
    throw Error(ErrorKind::kInvalidArgument, "bad MPS boundary vectors");
  }
}

}  // namespace

int num_threads() { return omp_get_max_threads(); }

void set_num_threads(int n) { omp_set_num_threads(std::max(1, n)); }

void csr_matvec(const CsrMatrix& a, std::span<const cplx> x, std::span<cplx> y) {
  const std::int64_t rows = a.rows;
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    cplx sum = 0.0;
    for (std::int64_t e = a.row_ptr[r]; e < a.row_ptr[r + 1]; ++e) {
      sum += a.val[e] * x[a.col[e]];
    }
    y[r] = sum;
  }
}

void csr_matvec_serial(const CsrMatrix& a, std::span<const cplx> x,
                       std::span<cplx> y) {
  for (std::int64_t r = 0; r < a.rows; ++r) {
    cplx sum = 0.0;
    for (std::int64_t e = a.row_ptr[r]; e < a.row_ptr[r + 1]; ++e) {
      sum += a.val[e] * x[a.col[e]];
    }
    y[r] = sum;
  }
}

bool is_real(const CsrMatrix& a) {
  return std::all_of(a.val.begin(), a.val.end(), [](cplx v) { return v.imag() == 0.0; });
}

RealCsrMatrix real_part(const CsrMatrix& a) {
  RealCsrMatrix out;
  out.rows = a.rows;
  out.row_ptr = a.row_ptr;
  out.col = a.col;
  out.val.resize(a.val.size());
  std::transform(a.val.begin(), a.val.end(), out.val.begin(),
                 [](cplx v) { return v.real(); });
  return out;
}

void csr_matvec(const RealCsrMatrix& a, std::span<const double> x, std::span<double> y) {
  const std::int64_t rows = a.rows;
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::int64_t e = a.row_ptr[r]; e < a.row_ptr[r + 1]; ++e) {
      sum += a.val[e] * x[a.col[e]];
    }
    y[r] = sum;
  }
}

void csr_matvec_serial(const RealCsrMatrix& a, std::span<const double> x,
                       std::span<double> y) {
  for (std::int64_t r = 0; r < a.rows; ++r) {
    double sum = 0.0;
    for (std::int64_t e = a.row_ptr[r]; e < a.row_ptr[r + 1]; ++e) {
      sum += a.val[e] * x[a.col[e]];
    }
    y[r] = sum;
  }
}

CsrMatrix build_csr(std::span<const PlacedTerm> terms, int d, int num_sites) {
  const std::int64_t rows = checked_dim(d, num_sites);
  const auto prepared = prepare_terms(terms, d, num_sites);
  const std::int64_t nblocks = (rows + kRowBlock - 1) / kRowBlock;
  std::vector<RowBlock> blocks(nblocks);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t b = 0; b < nblocks; ++b) {
    build_block(prepared, d, b * kRowBlock, std::min(rows, (b + 1) * kRowBlock),
                blocks[b]);
  }
  return concat_blocks(rows, blocks);
}

CsrMatrix build_csr_serial(std::span<const PlacedTerm> terms, int d,
                           int num_sites) {
  const std::int64_t rows = checked_dim(d, num_sites);
  const auto prepared = prepare_terms(terms, d, num_sites);
  const std::int64_t nblocks = (rows + kRowBlock - 1) / kRowBlock;
  std::vector<RowBlock> blocks(nblocks);
  for (std::int64_t b = 0; b < nblocks; ++b) {
    build_block(prepared, d, b * kRowBlock, std::min(rows, (b + 1) * kRowBlock),
                blocks[b]);
  }
  return concat_blocks(rows, blocks);
}

void apply_local(std::span<const cplx> in, std::span<cplx> out,
                 std::span<const cplx> a, int d, int offset, int width,
                 int num_sites) {
  const std::int64_t left = ipow(d, offset);
  const std::int64_t side = ipow(d, width);
  const std::int64_t right = ipow(d, num_sites - offset - width);
  const std::int64_t outer = left * right;
#pragma omp parallel for schedule(static)
  for (std::int64_t lr = 0; lr < outer; ++lr) {
    const std::int64_t l = lr / right;
    const std::int64_t r = lr % right;
    const std::int64_t base = l * side * right + r;
    for (std::int64_t i = 0; i < side; ++i) {
      cplx sum = 0.0;
      for (std::int64_t j = 0; j < side; ++j) {
        sum += a[i * side + j] * in[base + j * right];
      }
      out[base + i * right] = sum;
    }
  }
}

void apply_local_serial(std::span<const cplx> in, std::span<cplx> out,
                        std::span<const cplx> a, int d, int offset, int width,
                        int num_sites) {
  const std::int64_t left = ipow(d, offset);
  const std::int64_t side = ipow(d, width);
  const std::int64_t right = ipow(d, num_sites - offset - width);
  for (std::int64_t l = 0; l < left; ++l) {
    for (std::int64_t r = 0; r < right; ++r) {
      const std::int64_t base = l * side * right + r;
      for (std::int64_t i = 0; i < side; ++i) {
        cplx sum = 0.0;
        for (std::int64_t j = 0; j < side; ++j) {
          sum += a[i * side + j] * in[base + j * right];
        }
        out[base + i * right] = sum;
      }
    }
  }
}

cplx dot(std::span<const cplx> x, std::span<const cplx> y) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  const std::int64_t nblocks = (n + kDotBlock - 1) / kDotBlock;
  if (nblocks <= 1) return block_dot(x.data(), y.data(), n);
  std::vector<cplx> partial(nblocks);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < nblocks; ++b) {
    const std::int64_t begin = b * kDotBlock;
    partial[b] = block_dot(x.data() + begin, y.data() + begin,
                           std::min(kDotBlock, n - begin));
  }
  cplx total = 0.0;
  for (const cplx& p : partial) total += p;
  return total;
}

cplx dot_serial(std::span<const cplx> x, std::span<const cplx> y) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  const std::int64_t nblocks = (n + kDotBlock - 1) / kDotBlock;
  if (nblocks <= 1) return block_dot(x.data(), y.data(), n);
  cplx total = 0.0;
  for (std::int64_t b = 0; b < nblocks; ++b) {
    const std::int64_t begin = b * kDotBlock;
    total += block_dot(x.data() + begin, y.data() + begin,
                       std::min(kDotBlock, n - begin));
  }
  return total;
}

std::vector<cplx> mps_amplitudes(std::span<const cplx> site_mats, int d, int n,
                                 int length, std::span<const cplx> left,
                                 std::span<const cplx> right) {
  check_mps_args(site_mats, d, n, length, left, right);
  if (length > 64) throw Error(ErrorKind::kDimensionOverflow, "MPS length");
  const std::int64_t dim = ipow(d, length);
  std::vector<cplx> out(dim);
  const cplx* l = left.empty() ? nullptr : left.data();
  const cplx* r = right.empty() ? nullptr : right.data();
#pragma omp parallel
  {
    std::vector<cplx> acc(static_cast<std::size_t>(n) * n);
    std::vector<cplx> tmp(acc.size());
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < dim; ++i) {
      out[i] = amplitude(site_mats.data(), d, n, length, i, l, r, acc, tmp);
    }
  }
  return out;
}

std::vector<cplx> mps_amplitudes_serial(std::span<const cplx> site_mats, int d,
                                        int n, int length,
                                        std::span<const cplx> left,
                                        std::span<const cplx> right) {
  check_mps_args(site_mats, d, n, length, left, right);
  if (length > 64) throw Error(ErrorKind::kDimensionOverflow, "MPS length");
  const std::int64_t dim = ipow(d, length);
  std::vector<cplx> out(dim);
  const cplx* l = left.empty() ? nullptr : left.data();
  const cplx* r = right.empty() ? nullptr : right.data();
  std::vector<cplx> acc(static_cast<std::size_t>(n) * n);
  std::vector<cplx> tmp(acc.size());
  for (std::int64_t i = 0; i < dim; ++i) {
    out[i] = amplitude(site_mats.data(), d, n, length, i, l, r, acc, tmp);
  }
  return out;
}

}  // namespace entlab::kernels
