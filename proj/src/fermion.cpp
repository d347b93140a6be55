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

#include "entlab/fermion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "entlab/error.hpp"

namespace entlab {

namespace {

constexpr std::int64_t kMaxInverseDim = 1 << 6;

// Position of a factor in normal order: creations (ascending) first.
bool ordered(const FermionFactor& a, const FermionFactor& b) {
  if (a.creation != b.creation) return a.creation;
  return a.site < b.site;
}

NormalMonomial to_normal(const std::vector<FermionFactor>& f) {
  NormalMonomial m;
  for (const auto& x : f) {
    (x.creation ? m.creations : m.annihilations).push_back(x.site);
  }
  return m;
}

// Applies the factors (rightmost first) to an occupation configuration.
// `occupied[k]` refers to window site start + k. Returns the sign, or 0
// when the state is annihilated.
int apply_factors(const std::vector<FermionFactor>& factors, int start,
                  std::vector<char>& occupied) {
  int sign = 1;
  for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
    const int k = it->site - start;
    if (k < 0 || k >= static_cast<int>(occupied.size())) {
      throw Error(ErrorKind::kWindowNotContained,
                  "fermion operator site outside window");
    }
    if (it->creation == static_cast<bool>(occupied[k])) return 0;
    int before = 0;
    for (int i = 0; i < k; ++i) before += occupied[i];
    if (before % 2) sign = -sign;
    occupied[k] = it->creation ? 1 : 0;
  }
  return sign;
}

// Basis index <-> occupations, site start slowest, digit 0 = occupied.
void decode(std::int64_t index, int length, std::vector<char>& occupied) {
  occupied.assign(length, 0);
  for (int k = length - 1; k >= 0; --k) {
    occupied[k] = (index & 1) == 0;
    index >>= 1;
  }
}

std::int64_t encode(const std::vector<char>& occupied) {
  std::int64_t index = 0;
  for (char o : occupied) index = (index << 1) | (o ? 0 : 1);
  return index;
}

Matrix local_factor(const FermionFactor& f, int site) {
  Matrix m = Matrix::Identity(2, 2);
  if (site < f.site) {
    m(0, 0) = -1.0;  // -sigma_z: parity of the occupied state
  } else if (site == f.site) {
    m.setZero();
    if (f.creation) {
      m(0, 1) = 1.0;  // empty -> occupied
    } else {
      m(1, 0) = 1.0;
    }
  }
  return m;
}

}  // namespace

std::vector<FermionFactor> NormalMonomial::factors() const {
  std::vector<FermionFactor> out;
  for (int s : creations) out.push_back({s, true});
  for (int s : annihilations) out.push_back({s, false});
  return out;
}

// ---------------------------------------------------------------------------
// FermionOperator

FermionOperator FermionOperator::identity(cplx coeff) {
  FermionOperator op;
  op.add({}, coeff);
  return op;
}

FermionOperator FermionOperator::creation(int site) {
  FermionOperator op;
  op.add({{site}, {}}, 1.0);
  return op;
}

FermionOperator FermionOperator::annihilation(int site) {
  FermionOperator op;
  op.add({{}, {site}}, 1.0);
  return op;
}

FermionOperator FermionOperator::number(int site) {
  FermionOperator op;
  op.add({{site}, {site}}, 1.0);
  return op;
}

void FermionOperator::add(const NormalMonomial& m, cplx coeff) {
  if (coeff == cplx(0.0, 0.0)) return;
  auto [it, inserted] = terms_.emplace(m, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == cplx(0.0, 0.0)) terms_.erase(it);
  }
}

FermionOperator FermionOperator::operator+(const FermionOperator& other) const {
  FermionOperator out = *this;
  for (const auto& [m, c] : other.terms_) out.add(m, c);
  return out;
}

FermionOperator FermionOperator::operator-(const FermionOperator& other) const {
  return *this + other * cplx(-1.0);
}

FermionOperator FermionOperator::operator*(cplx s) const {
  FermionOperator out;
  for (const auto& [m, c] : terms_) out.add(m, c * s);
  return out;
}

FermionOperator operator*(cplx s, const FermionOperator& op) { return op * s; }

FermionOperator FermionOperator::operator*(const FermionOperator& other) const {
  std::vector<RawMonomial> raw;
  for (const auto& [a, ca] : terms_) {
    for (const auto& [b, cb] : other.terms_) {
      RawMonomial r{ca * cb, a.factors()};
      const auto fb = b.factors();
      r.factors.insert(r.factors.end(), fb.begin(), fb.end());
      raw.push_back(std::move(r));
    }
  }
  return car_normal_order(raw);
}

FermionOperator FermionOperator::adjoint() const {
  std::vector<RawMonomial> raw;
  for (const auto& [m, c] : terms_) {
    RawMonomial r{std::conj(c), {}};
    const auto f = m.factors();
    for (auto it = f.rbegin(); it != f.rend(); ++it) {
      r.factors.push_back({it->site, !it->creation});
    }
    raw.push_back(std::move(r));
  }
  return car_normal_order(raw);
}

double FermionOperator::distance(const FermionOperator& other) const {
  double worst = 0.0;
  for (const auto& [m, c] : (*this - other).terms_) {
    worst = std::max(worst, std::abs(c));
  }
  return worst;
}

Parity FermionOperator::parity() const {
  bool even = false;
  bool odd = false;
  for (const auto& [m, c] : terms_) (m.degree() % 2 ? odd : even) = true;
  if (odd && even) return Parity::kMixed;
  return odd ? Parity::kOdd : Parity::kEven;
}

FermionOperator FermionOperator::pruned(double tol) const {
  FermionOperator out;
  for (const auto& [m, c] : terms_) {
    if (std::abs(c) > tol) out.add(m, c);
  }
  return out;
}

std::optional<std::pair<int, int>> FermionOperator::support() const {
  std::optional<std::pair<int, int>> out;
  for (const auto& [m, c] : terms_) {
    for (const auto& f : m.factors()) {
      if (!out) {
        out = {f.site, f.site};
      } else {
        out->first = std::min(out->first, f.site);
        out->second = std::max(out->second, f.site);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// normal ordering

FermionOperator car_normal_order(const std::vector<RawMonomial>& raw) {
  FermionOperator out;
  std::vector<RawMonomial> work(raw.begin(), raw.end());
  while (!work.empty()) {
    RawMonomial cur = std::move(work.back());
    work.pop_back();
    if (cur.coeff == cplx(0.0, 0.0)) continue;
    bool vanished = false;
    bool sorted = false;
    while (!sorted && !vanished) {
      sorted = true;
      for (std::size_t i = 0; i + 1 < cur.factors.size(); ++i) {
        const FermionFactor a = cur.factors[i];
        const FermionFactor b = cur.factors[i + 1];
        if (a.creation == b.creation && a.site == b.site) {
          vanished = true;  // (c_j)^2 = (c+_j)^2 = 0
          break;
        }
        if (ordered(a, b)) continue;
        sorted = false;
        if (!a.creation && b.creation && a.site == b.site) {
          // c_j c+_j = 1 - c+_j c_j
          RawMonomial contracted{cur.coeff, {}};
          contracted.factors.insert(contracted.factors.end(),
                                    cur.factors.begin(),
                                    cur.factors.begin() + i);
          contracted.factors.insert(contracted.factors.end(),
                                    cur.factors.begin() + i + 2,
                                    cur.factors.end());
          work.push_back(std::move(contracted));
        }
        std::swap(cur.factors[i], cur.factors[i + 1]);
        cur.coeff = -cur.coeff;
        break;
      }
    }
    if (!vanished) out.add(to_normal(cur.factors), cur.coeff);
  }
  return out;
}

// ---------------------------------------------------------------------------
// representations

Matrix fermion_matrix(const FermionOperator& op, const LatticeWindow& window) {
  if (window.local_dim() != 2) {
    throw Error(ErrorKind::kLocalDimMismatch, "fermion windows have d = 2");
  }
  const std::int64_t dim = window.dimension(kMaxDenseSide);
  Matrix out = Matrix::Zero(dim, dim);
  std::vector<char> occ;
  for (const auto& [m, c] : op.terms()) {
    const auto factors = m.factors();
    for (std::int64_t col = 0; col < dim; ++col) {
      decode(col, window.length(), occ);
      const int sign = apply_factors(factors, window.start(), occ);
      if (sign != 0) out(encode(occ), col) += static_cast<double>(sign) * c;
    }
  }
  return out;
}

cplx fock_expectation(const FermionOperator& op, ReferenceState which) {
  const auto sup = op.support();
  if (!sup) {
    auto it = op.terms().find(NormalMonomial{});
    return it == op.terms().end() ? cplx(0.0) : it->second;
  }
  const LatticeWindow w(sup->first, sup->second - sup->first + 1, 2);
  std::vector<char> occ;
  const std::int64_t index =
      which == ReferenceState::kAntiFock ? 0 : (std::int64_t{1} << w.length()) - 1;
  cplx total = 0.0;
  for (const auto& [m, c] : op.terms()) {
    decode(index, w.length(), occ);
    const int sign = apply_factors(m.factors(), w.start(), occ);
    if (sign != 0 && encode(occ) == index) total += static_cast<double>(sign) * c;
  }
  return total;
}

JordanWignerImage jordan_wigner(const FermionOperator& op,
                                const LatticeWindow& window,
                                std::optional<int> string_anchor) {
  if (window.local_dim() != 2) {
    throw Error(ErrorKind::kLocalDimMismatch, "fermion windows have d = 2");
  }
  if (const auto sup = op.support()) {
    if (!window.contains_site(sup->first) || !window.contains_site(sup->second)) {
      throw Error(ErrorKind::kWindowNotContained,
                  "window too small for operator support");
    }
  }
  const bool even = op.is_even();
  if (!even && !string_anchor) {
    throw Error(ErrorKind::kOddOperator,
                "operator is not even; pass an explicit string anchor");
  }
  const int anchor = string_anchor.value_or(window.start());
  if (anchor > window.start()) {
    throw Error(ErrorKind::kInvalidArgument,
                "string anchor must not lie right of the window start");
  }
  const LatticeWindow image_window(anchor, window.end() - anchor, 2);
  const std::int64_t dim = image_window.dimension(kMaxDenseSide);
  Matrix total = Matrix::Zero(dim, dim);
  for (const auto& [m, c] : op.terms()) {
    const auto factors = m.factors();
    Matrix image = Matrix::Ones(1, 1);
    for (int site = image_window.start(); site < image_window.end(); ++site) {
      Matrix local = Matrix::Identity(2, 2);
      for (const auto& f : factors) local = local * local_factor(f, site);
      image = ops::kron(image, local);
    }
    total += c * image;
  }
  std::ostringstream tag;
  tag << "left-anchored parity string at site " << anchor
      << "; local state 0 = occupied";
  Matrix parity = Matrix::Ones(1, 1);
  for (int i = 0; i < image_window.length(); ++i) {
    parity = ops::kron(parity, ops::pauli_z());
  }
  const bool commutes =
      (parity * total - total * parity).cwiseAbs().maxCoeff() <= 1e-12;
  return {LocalOperator(image_window, std::move(total)), anchor, tag.str(),
          commutes};
}

FermionOperator jordan_wigner_inverse(const LocalOperator& spin_op) {
  const LatticeWindow& w = spin_op.window();
  if (w.local_dim() != 2) {
    throw Error(ErrorKind::kLocalDimMismatch, "spin-1/2 window required");
  }
  const std::int64_t dim = w.dimension(kMaxInverseDim);
  const Matrix& m = spin_op.matrix();
  std::vector<RawMonomial> raw;
  std::vector<char> row_occ;
  std::vector<char> col_occ;
  for (std::int64_t r = 0; r < dim; ++r) {
    decode(r, w.length(), row_occ);
    for (std::int64_t c = 0; c < dim; ++c) {
      const cplx v = m(r, c);
      if (v == cplx(0.0, 0.0)) continue;
      decode(c, w.length(), col_occ);
      // |r><c| = prod over sites (ascending) of n, 1 - n, c+ or c
      std::vector<FermionFactor> factors;
      std::vector<int> projector_sites;
      for (int k = 0; k < w.length(); ++k) {
        const int site = w.start() + k;
        if (row_occ[k] && col_occ[k]) {
          factors.push_back({site, true});
          factors.push_back({site, false});
        } else if (!row_occ[k] && !col_occ[k]) {
          projector_sites.push_back(site);
        } else if (row_occ[k]) {
          factors.push_back({site, true});
        } else {
          factors.push_back({site, false});
        }
      }
      std::vector<char> occ = col_occ;
      const int sign = apply_factors(factors, w.start(), occ);
      if (sign == 0 || occ != row_occ) {
        throw Error(ErrorKind::kInvalidArgument, "inverse map inconsistency");
      }
      // expand prod (1 - n_i) over the empty-empty sites
      const std::size_t np = projector_sites.size();
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << np); ++mask) {
        RawMonomial term{v / static_cast<double>(sign), {}};
        int chosen = 0;
        for (int k = 0; k < w.length(); ++k) {
          const int site = w.start() + k;
          for (const auto& f : factors) {
            if (f.site == site) term.factors.push_back(f);
          }
          for (std::size_t p = 0; p < np; ++p) {
            if (projector_sites[p] == site && ((mask >> p) & 1)) {
              term.factors.push_back({site, true});
              term.factors.push_back({site, false});
              ++chosen;
            }
          }
        }
        if (chosen % 2) term.coeff = -term.coeff;
        raw.push_back(std::move(term));
      }
    }
  }
  return car_normal_order(raw);
}

FermionOperator fermion_hamiltonian(const HoppingParams& p,
                                    const LatticeWindow& window,
                                    bool periodic) {
  if (!std::isfinite(p.t) || !std::isfinite(p.mu) || !std::isfinite(p.u)) {
    throw Error(ErrorKind::kInvalidArgument, "model parameters must be finite");
  }
  FermionOperator h;
  auto bond = [&](int i, int j) {
    h = h + (FermionOperator::creation(i) * FermionOperator::annihilation(j) +
             FermionOperator::creation(j) * FermionOperator::annihilation(i)) *
                cplx(-p.t);
    h = h + FermionOperator::number(i) * FermionOperator::number(j) * cplx(p.u);
  };
  for (int j = window.start(); j + 1 < window.end(); ++j) bond(j, j + 1);
  if (periodic && window.length() > 2) bond(window.end() - 1, window.start());
  for (int j = window.start(); j < window.end(); ++j) {
    h = h + FermionOperator::number(j) * cplx(-p.mu);
  }
  return h;
}

double spectral_equivalence_check(const FermionOperator& op,
                                  const LatticeWindow& window) {
  if (!op.is_even()) {
    throw Error(ErrorKind::kOddOperator, "spectral check needs an even operator");
  }
  if (op.distance(op.adjoint()) > 1e-12) {
    throw Error(ErrorKind::kNonHermitian, "spectral check needs a hermitian operator");
  }
  const Matrix fermion = fermion_matrix(op, window);
  const Matrix spin = jordan_wigner(op, window).op.matrix();
  Eigen::SelfAdjointEigenSolver<Matrix> ef(fermion, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Matrix> es(spin, Eigen::EigenvaluesOnly);
  return (ef.eigenvalues() - es.eigenvalues()).cwiseAbs().maxCoeff();
}

FermionOperator gauge_average(const FermionOperator& op) {
  FermionOperator out;
  for (const auto& [m, c] : op.terms()) {
    if (m.charge() == 0) out.add(m, c);
  }
  return out;
}

FermionOperator parity_operator(const LatticeWindow& window) {
  FermionOperator p = FermionOperator::identity();
  for (int j = window.start(); j < window.end(); ++j) {
    p = p * (FermionOperator::number(j) * cplx(2.0) - FermionOperator::identity());
  }
  return p;
}

// ---------------------------------------------------------------------------
// text format

FermionOperator parse_fermion_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<RawMonomial> raw;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string coeff_tok;
    ls >> coeff_tok;
    RawMonomial m;
    try {
      if (coeff_tok.front() == '(') {
        const auto comma = coeff_tok.find(',');
        if (comma == std::string::npos || coeff_tok.back() != ')') {
          throw std::invalid_argument(coeff_tok);
        }
        m.coeff = {std::stod(coeff_tok.substr(1, comma - 1)),
                   std::stod(coeff_tok.substr(comma + 1,
                                              coeff_tok.size() - comma - 2))};
      } else {
        m.coeff = std::stod(coeff_tok);
      }
    } catch (const std::exception&) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(lineno) +
                                         ": bad coefficient '" + coeff_tok + "'");
    }
    std::string tok;
    while (ls >> tok) {
      bool creation;
      if (tok == "c+" || tok == "cdag") {
        creation = true;
      } else if (tok == "c") {
        creation = false;
      } else {
        throw Error(ErrorKind::kParse, "line " + std::to_string(lineno) +
                                           ": unknown token '" + tok + "'");
      }
      int site;
      if (!(ls >> site)) {
        throw Error(ErrorKind::kParse,
                    "line " + std::to_string(lineno) + ": missing site index");
      }
      m.factors.push_back({site, creation});
    }
    raw.push_back(std::move(m));
  }
  return car_normal_order(raw);
}

std::string to_fermion_text(const FermionOperator& op) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& [m, c] : op.terms()) {
    if (c.imag() == 0.0) {
      out << c.real();
    } else {
      out << '(' << c.real() << ',' << c.imag() << ')';
    }
    for (const auto& f : m.factors()) out << (f.creation ? " c+ " : " c ") << f.site;
    out << '\n';
  }
  return out.str();
}

}  // namespace entlab
