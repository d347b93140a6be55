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

#include "entlab/lab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "entlab/entangle.hpp"
#include "entlab/error.hpp"
#include "entlab/fermion.hpp"
#include "entlab/kernels.hpp"

namespace entlab::lab {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr const char* kConfigSchema = "entlab-config/1";
constexpr const char* kVersion = "entlab 1.0.0";

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

std::string format_short(double v) {
  std::ostringstream out;
  out << std::setprecision(8) << v;
  return out.str();
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  const fs::path p(path);
  return p.is_absolute() ? path : (fs::path(base_dir) / p).string();
}

ExperimentKind parse_kind(const std::string& s) {
  if (s == "entropy-scan") return ExperimentKind::kEntropyScan;
  if (s == "gap-scan") return ExperimentKind::kGapScan;
  if (s == "ff-check") return ExperimentKind::kFfCheck;
  if (s == "jw-equivalence") return ExperimentKind::kJwEquivalence;
  if (s == "mps-oracle") return ExperimentKind::kMpsOracle;
  if (s == "report") return ExperimentKind::kReport;
  throw Error(ErrorKind::kConfig, "unknown experiment '" + s + "'");
}

// Runs job(i) for i in [0, n) on a pool; results are stored by index by the
// caller, so completion order does not matter.
template <typename Job>
void run_pool(std::size_t n, int requested, Job job) {
  const int workers = worker_count(requested, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  const int omp_total = kernels::num_threads();
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      kernels::set_num_threads(std::max(1, omp_total / workers));
      for (std::size_t i = next++; i < n; i = next++) job(i);
    });
  }
  for (auto& t : pool) t.join();
}

template <typename Body>
LengthRecord guarded(int length, double tolerance, Body body) {
  LengthRecord rec;
  rec.length = length;
  rec.tolerance = tolerance;
  const auto t0 = Clock::now();
  try {
    body(rec);
  } catch (const Error& e) {
    rec.status = std::string("failed:") + entlab::to_string(e.kind());
    rec.error = e.what();
  } catch (const std::exception& e) {
    rec.status = "failed:internal";
    rec.error = e.what();
  }
  rec.wall_seconds = seconds_since(t0);
  return rec;
}

RealVector total_sz_diagonal(const LatticeWindow& w) {
  const int d = w.local_dim();
  const std::int64_t dim = w.dimension(std::numeric_limits<std::int64_t>::max());
  RealVector out(dim);
  const double s = 0.5 * (d - 1);
  for (std::int64_t i = 0; i < dim; ++i) {
    std::int64_t rem = i;
    double total = 0.0;
    for (int k = 0; k < w.length(); ++k) {
      total += s - static_cast<double>(rem % d);
      rem /= d;
    }
    out(i) = total;
  }
  return out;
}

FermionOperator random_even_hermitian(int length, int terms, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> site(0, length - 1);
  std::uniform_int_distribution<int> degree(1, 2);
  std::normal_distribution<double> gauss;
  std::vector<RawMonomial> raw;
  for (int t = 0; t < terms; ++t) {
    RawMonomial m{cplx(gauss(rng), gauss(rng)), {}};
    const int pairs = degree(rng);
    for (int f = 0; f < 2 * pairs; ++f) {
      m.factors.push_back({site(rng), (rng() & 1) == 0});
    }
    raw.push_back(std::move(m));
  }
  const FermionOperator op = car_normal_order(raw);
  return (op + op.adjoint()).pruned(1e-14);
}

const ModelSpec& need_model(const ExperimentConfig& c) {
  if (!c.model) throw Error(ErrorKind::kConfig, "experiment needs a model");
  return *c.model;
}

const MpsSpec& need_spec(const ExperimentConfig& c) {
  if (!c.spec) throw Error(ErrorKind::kConfig, "experiment needs an MPS spec");
  return *c.spec;
}

Assertions parse_assertions(const json& j) {
  Assertions a;
  for (const auto& [key, value] : j.items()) {
    if (key == "saturated") {
      a.saturated = value.get<bool>();
    } else if (key == "entropy_increasing") {
      a.entropy_increasing = value.get<bool>();
    } else if (key == "max_entropy") {
      a.max_entropy = value.get<double>();
    } else if (key == "min_gap") {
      a.min_gap = value.get<double>();
    } else if (key == "gap_ratio_below") {
      a.gap_ratio_below = value.get<double>();
    } else if (key == "max_discrepancy") {
      a.max_discrepancy = value.get<double>();
    } else {
      throw Error(ErrorKind::kConfig, "unknown assertion '" + key + "'");
    }
  }
  return a;
}

std::pair<double, double> fit_inverse_length(const std::vector<std::pair<int, double>>& pts) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [l, g] : pts) {
    const double x = 1.0 / l;
    sx += x;
    sy += g;
    sxx += x * x;
    sxy += x * g;
  }
  const double n = static_cast<double>(pts.size());
  const double den = n * sxx - sx * sx;
  if (pts.size() < 2 || std::abs(den) < 1e-300) {
    return {pts.empty() ? 0.0 : sy / n, 0.0};
  }
  const double b = (n * sxy - sx * sy) / den;
  return {(sy - b * sx) / n, b};
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kEntropyScan: return "entropy-scan";
    case ExperimentKind::kGapScan: return "gap-scan";
    case ExperimentKind::kFfCheck: return "ff-check";
    case ExperimentKind::kJwEquivalence: return "jw-equivalence";
    case ExperimentKind::kMpsOracle: return "mps-oracle";
    case ExperimentKind::kReport: return "report";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// configuration

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::vector<int> parse_lengths(const std::string& text) {
  std::vector<int> out;
  auto to_int = [&](const std::string& s) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(s, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != s.size()) throw Error(ErrorKind::kConfig, "bad length list '" + text + "'");
    return v;
  };
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const auto colon = text.find(':', dots);
    const int a = to_int(text.substr(0, dots));
    const int b = to_int(text.substr(dots + 2, colon == std::string::npos
                                                   ? std::string::npos
                                                   : colon - dots - 2));
    const int step = colon == std::string::npos ? 1 : to_int(text.substr(colon + 1));
    if (step < 1 || b < a) throw Error(ErrorKind::kConfig, "bad length range '" + text + "'");
    for (int l = a; l <= b; l += step) out.push_back(l);
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_int(item));
  }
  if (out.empty()) throw Error(ErrorKind::kConfig, "empty length list");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 1 || (i > 0 && out[i] <= out[i - 1])) {
      throw Error(ErrorKind::kConfig, "lengths must be positive and strictly ascending");
    }
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::kConfig, "config must be a JSON object");
  static const std::set<std::string> known = {
      "schema", "experiment", "model", "spec", "lengths", "cut", "epsilon",
      "tolerances", "seed", "output", "threads", "dimension_guard", "samples",
      "inputs", "assertions"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw Error(ErrorKind::kConfig, "unknown config key '" + key + "'");
  }
  if (j.contains("schema") && j["schema"] != kConfigSchema) {
    throw Error(ErrorKind::kConfig, "unsupported config schema");
  }
  ExperimentConfig c;
  try {
    c.kind = parse_kind(j.at("experiment").get<std::string>());
    if (j.contains("model")) {
      const json& m = j["model"];
      if (m.is_string()) {
        c.model_ref = m.get<std::string>();
        const auto names = builtin_model_names();
        if (std::find(names.begin(), names.end(), c.model_ref) != names.end()) {
          c.model = builtin_model(c.model_ref);
        } else {
          c.model = load_model(resolve(c.model_ref, base_dir));
        }
      } else {
        c.model_ref = "inline";
        c.model = parse_model_json(m.dump());
      }
    }
    if (j.contains("spec")) {
      const json& s = j["spec"];
      if (s.is_string()) {
        c.spec_ref = s.get<std::string>();
        c.spec = c.spec_ref == "aklt" ? MpsSpec::aklt()
                                      : load_mps(resolve(c.spec_ref, base_dir));
      } else {
        c.spec_ref = "inline";
        c.spec = parse_mps_json(s.dump());
      }
    }
    if (j.contains("lengths")) {
      const json& l = j["lengths"];
      if (l.is_string()) {
        c.lengths = parse_lengths(l.get<std::string>());
      } else {
        std::string joined;
        for (const auto& v : l) {
          joined += (joined.empty() ? "" : ",") + std::to_string(v.get<int>());
        }
        c.lengths = parse_lengths(joined);
      }
    }
    c.cut = j.value("cut", std::string("middle"));
    if (c.cut != "middle" && c.cut != "all") {
      throw Error(ErrorKind::kConfig, "cut must be middle or all");
    }
    c.epsilon = j.value("epsilon", 0.01);
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) {
      throw Error(ErrorKind::kConfig, "epsilon must lie in (0, 1)");
    }
    if (j.contains("tolerances")) {
      for (const auto& [key, value] : j["tolerances"].items()) {
        const double v = value.get<double>();
        if (!(v > 0.0)) throw Error(ErrorKind::kConfig, "tolerances must be positive");
        if (key == "solver") {
          c.tol.solver = v;
        } else if (key == "degeneracy") {
          c.tol.degeneracy = v;
        } else if (key == "kernel") {
          c.tol.kernel = v;
        } else if (key == "schmidt_rank") {
          c.tol.schmidt_rank = v;
        } else {
          throw Error(ErrorKind::kConfig, "unknown tolerance '" + key + "'");
        }
      }
    }
    c.seed = j.value("seed", std::uint64_t{20260101});
    c.output = j.contains("output") ? resolve(j["output"].get<std::string>(), base_dir) : "";
    c.threads = j.value("threads", 0);
    if (c.threads < 0) throw Error(ErrorKind::kConfig, "threads must be >= 0");
    c.dimension_guard = j.value("dimension_guard", kDefaultDimensionGuard);
    if (c.dimension_guard < 1) throw Error(ErrorKind::kConfig, "dimension_guard must be positive");
    c.samples = j.value("samples", 0);
    if (c.samples < 0) throw Error(ErrorKind::kConfig, "samples must be >= 0");
    if (j.contains("inputs")) {
      for (const auto& p : j["inputs"]) c.inputs.push_back(resolve(p.get<std::string>(), base_dir));
    }
    if (j.contains("assertions")) c.assertions = parse_assertions(j["assertions"]);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kConfig) throw;
    throw Error(ErrorKind::kConfig, e.what());
  }
  // per-experiment requirements
  const bool needs_lengths = c.kind != ExperimentKind::kReport;
  if (needs_lengths && c.lengths.empty()) throw Error(ErrorKind::kConfig, "lengths are required");
  switch (c.kind) {
    case ExperimentKind::kEntropyScan:
    case ExperimentKind::kGapScan:
      if (!c.model) throw Error(ErrorKind::kConfig, "a model is required");
      break;
    case ExperimentKind::kFfCheck:
      if (!c.model || !c.spec) throw Error(ErrorKind::kConfig, "ff-check needs model and spec");
      if (c.model->terms.size() != 1 || c.model->terms[0].absolute) {
        throw Error(ErrorKind::kConfig, "ff-check needs a model with a single translated term");
      }
      break;
    case ExperimentKind::kJwEquivalence:
      if (!c.model || c.model->name != "hopping-fermion") {
        throw Error(ErrorKind::kConfig, "jw-equivalence needs the hopping-fermion model");
      }
      break;
    case ExperimentKind::kMpsOracle:
      if (!c.spec) throw Error(ErrorKind::kConfig, "mps-oracle needs a spec");
      break;
    case ExperimentKind::kReport:
      break;
  }
  if (c.model && (c.kind == ExperimentKind::kEntropyScan || c.kind == ExperimentKind::kGapScan ||
                  c.kind == ExperimentKind::kFfCheck)) {
    for (int l : c.lengths) {
      if (c.kind == ExperimentKind::kEntropyScan && l < 2) {
        throw Error(ErrorKind::kConfig, "entropy scans need lengths >= 2");
      }
      try {
        LatticeWindow(0, l, c.model->local_dim).dimension(c.dimension_guard);
      } catch (const Error&) {
        throw Error(ErrorKind::kConfig, "length " + std::to_string(l) +
                                            " exceeds the dimension guard");
      }
    }
  }
  c.canonical = j.dump();
  c.hash = fnv1a_hex(c.canonical);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), fs::path(path).parent_path().string().empty()
                                     ? "."
                                     : fs::path(path).parent_path().string());
}

int worker_count(int requested, std::size_t jobs) {
  int n = requested > 0 ? requested
                        : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("ENTLAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  n = std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1));
  return std::max(1, n);
}

int ScanResult::failed() const {
  int f = 0;
  for (const auto& r : records) f += r.ok() ? 0 : 1;
  return f;
}

// ---------------------------------------------------------------------------
// solves

namespace {

constexpr int kMaxPairs = 24;

// 2 S_z of every basis state.
std::vector<int> twice_sz(const LatticeWindow& w, std::int64_t dim) {
  const int d = w.local_dim();
  std::vector<int> out(static_cast<std::size_t>(dim));
  for (std::int64_t i = 0; i < dim; ++i) {
    std::int64_t rem = i;
    int total = 0;
    for (int k = 0; k < w.length(); ++k) {
      total += d - 1 - 2 * static_cast<int>(rem % d);
      rem /= d;
    }
    out[static_cast<std::size_t>(i)] = total;
  }
  return out;
}

bool conserves(const kernels::CsrMatrix& a, const std::vector<int>& q) {
  for (std::int64_t r = 0; r < a.rows; ++r) {
    for (auto e = a.row_ptr[r]; e < a.row_ptr[r + 1]; ++e) {
      if (q[static_cast<std::size_t>(r)] != q[a.col[e]]) return false;
    }
  }
  return true;
}

// Invariance under m -> -m on every site, i.e. index i -> dim - 1 - i.
bool flip_symmetric(const kernels::CsrMatrix& a) {
  const std::int64_t last = a.rows - 1;
  double scale = 0.0;
  for (const auto& v : a.val) scale = std::max(scale, std::abs(v));
  for (std::int64_t r = 0; r < a.rows; ++r) {
    const std::int64_t fr = last - r;
    if (a.row_ptr[r + 1] - a.row_ptr[r] != a.row_ptr[fr + 1] - a.row_ptr[fr]) return false;
    for (auto e = a.row_ptr[r]; e < a.row_ptr[r + 1]; ++e) {
      const auto fc = static_cast<std::uint32_t>(last - a.col[e]);
      const auto* begin = a.col.data() + a.row_ptr[fr];
      const auto* end = a.col.data() + a.row_ptr[fr + 1];
      const auto* it = std::lower_bound(begin, end, fc);
      if (it == end || *it != fc) return false;
      if (std::abs(a.val[it - a.col.data()] - a.val[e]) > 1e-13 * scale) return false;
    }
  }
  return true;
}

kernels::CsrMatrix restrict_rows(const kernels::CsrMatrix& a, const std::vector<std::int64_t>& idx,
                                 const std::vector<std::int64_t>& pos) {
  kernels::CsrMatrix out;
  out.rows = static_cast<std::int64_t>(idx.size());
  out.row_ptr.reserve(idx.size() + 1);
  out.row_ptr.push_back(0);
  for (std::int64_t r : idx) {
    for (auto e = a.row_ptr[r]; e < a.row_ptr[r + 1]; ++e) {
      out.col.push_back(static_cast<std::uint32_t>(pos[a.col[e]]));
      out.val.push_back(a.val[e]);
    }
    out.row_ptr.push_back(static_cast<std::int64_t>(out.col.size()));
  }
  return out;
}

void fix_phase(Vector& v) {
  Eigen::Index at = 0;
  v.cwiseAbs().maxCoeff(&at);
  v *= std::conj(v(at)) / std::abs(v(at));
}

// Block-diagonal solve over total S_z sectors. Sectors are solved one at a
// time; each is followed until its first level above the running minimum.
std::optional<LengthSolve> solve_sectors(const WindowHamiltonian& h, const SolverOptions& opt,
                                         double degeneracy) {
  const kernels::CsrMatrix* a = h.sparse();
  if (a == nullptr) return std::nullopt;
  const std::vector<int> q = twice_sz(h.window(), h.dimension());
  if (!conserves(*a, q)) return std::nullopt;
  const bool flip = flip_symmetric(*a);

  std::map<int, std::vector<std::int64_t>> sectors;
  for (std::int64_t i = 0; i < h.dimension(); ++i) {
    const int m = q[static_cast<std::size_t>(i)];
    if (!flip || m >= 0) sectors[m].push_back(i);
  }
  std::vector<std::int64_t> pos(static_cast<std::size_t>(h.dimension()), -1);
  for (const auto& [m, idx] : sectors) {
    for (std::size_t k = 0; k < idx.size(); ++k) pos[static_cast<std::size_t>(idx[k])] = static_cast<std::int64_t>(k);
  }

  struct Sector {
    int m;
    int weight;
    std::vector<double> values;
    Vector lowest;
    bool exhausted = false;
  };
  std::vector<Sector> done;
  double running = std::numeric_limits<double>::infinity();
  int pulled = 0;
  // Lowest |m| first: ground multiplets usually sit there.
  std::vector<int> order;
  for (const auto& [m, idx] : sectors) order.push_back(m);
  std::stable_sort(order.begin(), order.end(),
                   [](int x, int y) { return std::abs(x) < std::abs(y); });
  for (int m : order) {
    const auto& idx = sectors[m];
    const WindowHamiltonian hs(h.window(), restrict_rows(*a, idx, pos), h.norm_bound());
    EigenStream stream(hs, opt);
    Sector sec{m, flip && m > 0 ? 2 : 1, {}, {}};
    auto first = stream.next();
    sec.values.push_back(first.value);
    sec.lowest = std::move(first.vector);
    running = std::min(running, first.value);
    while (sec.values.back() - running <= degeneracy) {
      if (stream.exhausted()) {
        sec.exhausted = true;
        break;
      }
      if (++pulled > kMaxPairs) {
        throw Error(ErrorKind::kCannotResolve, "ground multiplet exceeds the pair budget");
      }
      sec.values.push_back(stream.next().value);
    }
    done.push_back(std::move(sec));
  }

  const double e0 = running;
  int multiplicity = 0;
  double excited = std::numeric_limits<double>::infinity();
  const Sector* top = nullptr;
  for (const auto& sec : done) {
    for (double v : sec.values) {
      if (v - e0 <= degeneracy) {
        multiplicity += sec.weight;
        if (top == nullptr || sec.m > top->m) top = &sec;
      } else {
        excited = std::min(excited, v);
      }
    }
  }
  if (multiplicity > kMaxPairs) {
    throw Error(ErrorKind::kCannotResolve, "ground multiplet exceeds the pair budget");
  }
  const double gap = std::isfinite(excited) ? excited - e0 : std::numeric_limits<double>::quiet_NaN();
  Vector ground = Vector::Zero(h.dimension());
  const auto& idx = sectors[top->m];
  for (std::size_t k = 0; k < idx.size(); ++k) ground(idx[k]) = top->lowest(static_cast<Eigen::Index>(k));
  fix_phase(ground);
  return LengthSolve{e0, gap, multiplicity, PureStateVector(h.window(), std::move(ground), true)};
}

}  // namespace

LengthSolve solve_length(const ModelSpec& model, int length, const Tolerances& tol,
                         std::uint64_t seed, std::int64_t dimension_guard) {
  AssemblyOptions assembly;
  assembly.dimension_guard = dimension_guard;
  const WindowHamiltonian h = model_hamiltonian(model, length, assembly);
  SolverOptions opt;
  opt.tol = tol.solver;
  opt.seed = seed;
  if (auto solved = solve_sectors(h, opt, tol.degeneracy)) return std::move(*solved);
  EigenStream stream(h, opt);
  std::vector<EigenStream::Pair> multiplet;
  multiplet.push_back(stream.next());
  const double e0 = multiplet.front().value;
  double gap = std::numeric_limits<double>::quiet_NaN();
  while (!stream.exhausted()) {
    if (stream.returned() >= kMaxPairs) {
      throw Error(ErrorKind::kCannotResolve, "ground multiplet exceeds the pair budget");
    }
    auto p = stream.next();
    if (p.value - e0 > tol.degeneracy) {
      gap = p.value - e0;
      break;
    }
    multiplet.push_back(std::move(p));
  }
  Vector ground = multiplet.front().vector;
  if (multiplet.size() > 1) {
    const RealVector sz = total_sz_diagonal(h.window());
    const int m = static_cast<int>(multiplet.size());
    Matrix g(h.dimension(), m);
    for (int i = 0; i < m; ++i) g.col(i) = multiplet[i].vector;
    const Matrix proj = g.adjoint() * sz.cast<cplx>().asDiagonal() * g;
    Eigen::SelfAdjointEigenSolver<Matrix> es((proj + proj.adjoint()) / 2.0);
    ground = g * es.eigenvectors().col(m - 1);
    fix_phase(ground);
  }
  return LengthSolve{e0, gap, static_cast<int>(multiplet.size()),
                     PureStateVector(h.window(), std::move(ground), true)};
}

std::shared_ptr<const LengthSolve> SolveCache::get(const ModelSpec& model, int length,
                                                   const Tolerances& tol, std::uint64_t seed,
                                                   std::int64_t dimension_guard) {
  std::ostringstream key;
  key << model_to_json(model) << '|' << length << '|' << format_double(tol.solver) << '|'
      << format_double(tol.degeneracy) << '|' << seed << '|' << dimension_guard;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = entries_.find(key.str());
    if (it != entries_.end()) return it->second;
  }
  auto solved = std::make_shared<const LengthSolve>(
      solve_length(model, length, tol, seed, dimension_guard));
  std::lock_guard<std::mutex> lock(mutex_);
  ++misses_;
  return entries_.emplace(key.str(), std::move(solved)).first->second;
}

std::size_t SolveCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

// ---------------------------------------------------------------------------
// scans

namespace {

std::shared_ptr<const LengthSolve> solve_with(SolveCache* cache, const ExperimentConfig& c,
                                              int length) {
  if (cache != nullptr) {
    return cache->get(need_model(c), length, c.tol, c.seed, c.dimension_guard);
  }
  return std::make_shared<const LengthSolve>(
      solve_length(need_model(c), length, c.tol, c.seed, c.dimension_guard));
}

ScanResult scan(const ExperimentConfig& c, ExperimentKind kind, double tolerance,
                const std::function<void(int, LengthRecord&)>& body) {
  const auto t0 = Clock::now();
  ScanResult result;
  result.kind = kind;
  result.config_hash = c.hash;
  result.seed = c.seed;
  result.records.resize(c.lengths.size());
  run_pool(c.lengths.size(), c.threads, [&](std::size_t i) {
    const int length = c.lengths[i];
    result.records[i] = guarded(length, tolerance, [&](LengthRecord& rec) { body(length, rec); });
  });
  result.wall_seconds = seconds_since(t0);
  return result;
}

}  // namespace

ScanResult run_entropy_scan(const ExperimentConfig& c, SolveCache* cache) {
  need_model(c);
  return scan(c, ExperimentKind::kEntropyScan, c.tol.solver, [&](int length, LengthRecord& rec) {
    const auto solved = solve_with(cache, c, length);
    rec.ground_energy = solved->ground_energy;
    rec.gap = solved->gap;
    rec.ground_multiplicity = solved->multiplicity;
    std::vector<int> cuts;
    if (c.cut == "middle") {
      cuts.push_back(length / 2);
    } else {
      for (int k = 1; k < length; ++k) cuts.push_back(k);
    }
    for (int cut : cuts) {
      const SchmidtSpectrum sp = schmidt_decompose(solved->ground, cut);
      const TruncationReport tr = truncation_index(sp, c.epsilon);
      CutRecord cr;
      cr.cut = cut;
      cr.entropy = tr.entropy;
      cr.schmidt_rank = schmidt_rank(solved->ground, cut, c.tol.schmidt_rank);
      cr.trunc_k = tr.k;
      cr.bound_k = tr.bound_k;
      cr.distance_sq = truncate_state(solved->ground, cut, tr.k).distance_sq;
      cr.three_epsilon = 3.0 * c.epsilon;
      cr.truncation_bounds_hold = tr.bounds_hold();
      cr.weights = sp.weights;
      rec.cuts.push_back(std::move(cr));
    }
  });
}

ScanResult run_gap_scan(const ExperimentConfig& c, SolveCache* cache) {
  need_model(c);
  ScanResult result =
      scan(c, ExperimentKind::kGapScan, c.tol.solver, [&](int length, LengthRecord& rec) {
        const auto solved = solve_with(cache, c, length);
        rec.ground_energy = solved->ground_energy;
        rec.gap = solved->gap;
        rec.ground_multiplicity = solved->multiplicity;
        if (std::isnan(rec.gap)) {
          throw Error(ErrorKind::kCannotResolve, "spectrum has a single level");
        }
      });
  std::vector<std::pair<int, double>> pts;
  for (const auto& r : result.records) {
    if (r.ok()) pts.emplace_back(r.length, r.gap);
  }
  if (!pts.empty()) result.gap_fit = fit_inverse_length(pts);
  return result;
}

ScanResult run_ff_check(const ExperimentConfig& c) {
  const ModelSpec& model = need_model(c);
  const MpsSpec& spec = need_spec(c);
  const ModelTerm& term = model.terms.front();
  const int lo = *std::min_element(term.offsets.begin(), term.offsets.end());
  const int hi = *std::max_element(term.offsets.begin(), term.offsets.end());
  std::vector<int> rel;
  for (int o : term.offsets) rel.push_back(o - lo);
  const LatticeWindow block(0, hi - lo + 1, model.local_dim);
  const LocalOperator h = embed_at_sites(term.matrix * term.coupling, rel, block);
  FrustrationOptions opt;
  opt.kernel_threshold = c.tol.kernel;
  return scan(c, ExperimentKind::kFfCheck, c.tol.kernel, [&](int length, LengthRecord& rec) {
    const auto recs = frustration_free_check(h, spec, {length}, opt);
    const FrustrationRecord& f = recs.front();
    double worst = 0.0;
    for (double v : f.placement_values) worst = std::max(worst, std::abs(v));
    rec.values["max_placement"] = worst;
    rec.values["infinite_value"] = f.infinite_value;
    rec.values["kernel_dimension"] = f.kernel_dimension;
    rec.values["frustration_free"] = f.frustration_free ? 1.0 : 0.0;
  });
}

ScanResult run_jw_equivalence(const ExperimentConfig& c) {
  const ModelSpec& model = need_model(c);
  auto param = [&](const char* k, double fallback) {
    const auto it = model.params.find(k);
    return it == model.params.end() ? fallback : it->second;
  };
  const HoppingParams p{param("t", 1.0), param("mu", 0.0), param("U", 0.0)};
  return scan(c, ExperimentKind::kJwEquivalence, 1e-9, [&](int length, LengthRecord& rec) {
    const LatticeWindow w(0, length, 2);
    rec.values["hopping_discrepancy"] = spectral_equivalence_check(fermion_hamiltonian(p, w), w);
    std::mt19937_64 rng(c.seed + static_cast<std::uint64_t>(length));
    double worst = 0.0;
    for (int s = 0; s < c.samples; ++s) {
      const FermionOperator op = random_even_hermitian(length, 6, rng);
      worst = std::max(worst, spectral_equivalence_check(op, w));
    }
    rec.values["random_max_discrepancy"] = worst;
    rec.values["samples"] = c.samples;
  });
}

ScanResult run_mps_oracle(const ExperimentConfig& c) {
  const MpsSpec& spec = need_spec(c);
  const int d = spec.phys_dim();
  return scan(c, ExperimentKind::kMpsOracle, 1e-10, [&](int length, LengthRecord& rec) {
    if (length < 2) throw Error(ErrorKind::kInvalidArgument, "mps-oracle needs length >= 2");
    auto compare = [&](const MpsSpec& s, const Matrix& a, const Matrix& b) {
      const std::vector<SiteOperator> ops = {{0, a}, {1, b}};
      const cplx transfer = ring_expectation(s, length, ops);
      const PureStateVector ring = mps_to_vector(s, length, {}, c.dimension_guard);
      const cplx dense =
          expectation(ring, LocalOperator(LatticeWindow(0, 2, d), ops::kron(a, b)));
      return std::make_tuple(transfer, dense, mps_expectation(s, ops));
    };
    const Matrix sz = ops::spin_z(d);
    const auto [transfer, dense, infinite] = compare(spec, sz, sz);
    rec.values["transfer_value"] = transfer.real();
    rec.values["dense_value"] = dense.real();
    rec.values["infinite_value"] = infinite.real();
    rec.values["discrepancy"] = std::abs(transfer - dense);
    std::mt19937_64 rng(c.seed + static_cast<std::uint64_t>(length));
    std::normal_distribution<double> gauss;
    double worst = 0.0;
    for (int s = 0; s < c.samples; ++s) {
      const MpsSpec random = MpsSpec::random(d, spec.aux_dim(), rng());
      Matrix a(d, d), b(d, d);
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          a(i, j) = cplx(gauss(rng), gauss(rng));
          b(i, j) = cplx(gauss(rng), gauss(rng));
        }
      }
      const auto [t, e, inf] = compare(random, a, b);
      worst = std::max(worst, std::abs(t - e));
    }
    rec.values["random_max_discrepancy"] = worst;
  });
}

ScanResult run_experiment(const ExperimentConfig& c, SolveCache* cache) {
  switch (c.kind) {
    case ExperimentKind::kEntropyScan: return run_entropy_scan(c, cache);
    case ExperimentKind::kGapScan: return run_gap_scan(c, cache);
    case ExperimentKind::kFfCheck: return run_ff_check(c);
    case ExperimentKind::kJwEquivalence: return run_jw_equivalence(c);
    case ExperimentKind::kMpsOracle: return run_mps_oracle(c);
    case ExperimentKind::kReport: break;
  }
  throw Error(ErrorKind::kConfig, "report is not a scan");
}

// ---------------------------------------------------------------------------
// output

Table to_table(const ScanResult& r, const ExperimentConfig& c) {
  Table t;
  const std::vector<std::string> tail = {"experiment", "config_hash", "tolerance", "status"};
  auto tail_cells = [&](const LengthRecord& rec) {
    return std::vector<std::string>{to_string(r.kind), r.config_hash,
                                    format_double(rec.tolerance), rec.status};
  };
  auto append = [](std::vector<std::string>& a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
  };
  if (r.kind == ExperimentKind::kEntropyScan) {
    t.columns = {"length", "cut", "entropy", "schmidt_rank", "trunc_k",
                 "bound_k", "distance_sq", "three_epsilon"};
    append(t.columns, tail);
    for (const auto& rec : r.records) {
      if (!rec.ok()) {
        std::vector<std::string> row = {std::to_string(rec.length), "", "", "", "", "", "", ""};
        append(row, tail_cells(rec));
        t.rows.push_back(std::move(row));
        continue;
      }
      for (const auto& cr : rec.cuts) {
        std::vector<std::string> row = {
            std::to_string(rec.length), std::to_string(cr.cut), format_double(cr.entropy),
            std::to_string(cr.schmidt_rank), std::to_string(cr.trunc_k),
            format_double(cr.bound_k), format_double(cr.distance_sq),
            format_double(3.0 * c.epsilon)};
        append(row, tail_cells(rec));
        t.rows.push_back(std::move(row));
      }
    }
    return t;
  }
  if (r.kind == ExperimentKind::kGapScan) {
    t.columns = {"length", "ground_energy", "gap", "ground_multiplicity"};
    append(t.columns, tail);
    for (const auto& rec : r.records) {
      std::vector<std::string> row = {std::to_string(rec.length),
                                      rec.ok() ? format_double(rec.ground_energy) : "",
                                      rec.ok() ? format_double(rec.gap) : "",
                                      rec.ok() ? std::to_string(rec.ground_multiplicity) : ""};
      append(row, tail_cells(rec));
      t.rows.push_back(std::move(row));
    }
    return t;
  }
  std::set<std::string> keys;
  for (const auto& rec : r.records) {
    for (const auto& [k, v] : rec.values) keys.insert(k);
  }
  t.columns = {"length"};
  t.columns.insert(t.columns.end(), keys.begin(), keys.end());
  append(t.columns, tail);
  for (const auto& rec : r.records) {
    std::vector<std::string> row = {std::to_string(rec.length)};
    for (const auto& k : keys) {
      const auto it = rec.values.find(k);
      row.push_back(it == rec.values.end() ? "" : format_double(it->second));
    }
    append(row, tail_cells(rec));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_csv(const Table& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out << (i ? "," : "") << cells[i];
    }
    out << '\n';
  };
  line(table.columns);
  for (const auto& row : table.rows) line(row);
}

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  Table t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) return t;
  t.columns = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    cells.resize(t.columns.size());
    t.rows.push_back(std::move(cells));
  }
  return t;
}

std::string sidecar_json(const ScanResult& r, const ExperimentConfig& c) {
  json j;
  j["schema"] = "entlab-result/1";
  j["version"] = kVersion;
  j["experiment"] = to_string(r.kind);
  j["config_hash"] = r.config_hash;
  j["config"] = json::parse(c.canonical.empty() ? "{}" : c.canonical);
  j["seed"] = r.seed;
  j["wall_seconds"] = r.wall_seconds;
  j["failed_records"] = r.failed();
  if (r.gap_fit) j["gap_fit"] = {{"a", r.gap_fit->first}, {"b", r.gap_fit->second}};
  j["records"] = json::array();
  for (const auto& rec : r.records) {
    json e;
    e["length"] = rec.length;
    e["status"] = rec.status;
    if (!rec.error.empty()) e["error"] = rec.error;
    e["tolerance"] = rec.tolerance;
    e["wall_seconds"] = rec.wall_seconds;
    if (rec.ok() && (r.kind == ExperimentKind::kEntropyScan || r.kind == ExperimentKind::kGapScan)) {
      e["ground_energy"] = rec.ground_energy;
      if (!std::isnan(rec.gap)) e["gap"] = rec.gap;
      e["ground_multiplicity"] = rec.ground_multiplicity;
    }
    for (const auto& cr : rec.cuts) {
      e["cuts"].push_back({{"cut", cr.cut},
                           {"entropy", cr.entropy},
                           {"schmidt_rank", cr.schmidt_rank},
                           {"trunc_k", cr.trunc_k},
                           {"distance_sq", cr.distance_sq},
                           {"truncation_bounds_hold", cr.truncation_bounds_hold},
                           {"weights", cr.weights}});
    }
    for (const auto& [k, v] : rec.values) e["values"][k] = std::isfinite(v) ? json(v) : json(format_double(v));
    j["records"].push_back(std::move(e));
  }
  return j.dump(2);
}

void write_outputs(const ScanResult& r, const ExperimentConfig& c) {
  if (c.output.empty()) return;
  const fs::path parent = fs::path(c.output).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  write_csv(to_table(r, c), c.output);
  std::ofstream side(c.output + ".json");
  if (!side) throw Error(ErrorKind::kIo, "cannot write " + c.output + ".json");
  side << sidecar_json(r, c) << '\n';
}

// ---------------------------------------------------------------------------
// report

namespace {

struct MergedKey {
  std::string experiment;
  int length;
  int cut;  // -1 for experiments without cuts
  auto operator<=>(const MergedKey&) const = default;
};

ReportResult report_tables(const std::vector<Table>& tables, const Assertions& a) {
  ReportResult out;
  std::vector<std::string> value_columns;
  std::map<MergedKey, std::map<std::string, std::string>> merged;
  for (const Table& t : tables) {
    const auto col = [&](const std::string& name) -> int {
      const auto it = std::find(t.columns.begin(), t.columns.end(), name);
      return it == t.columns.end() ? -1 : static_cast<int>(it - t.columns.begin());
    };
    const int ie = col("experiment");
    const int il = col("length");
    const int ic = col("cut");
    if (ie < 0 || il < 0) {
      out.warnings.push_back("skipping a table without experiment/length columns");
      continue;
    }
    for (std::size_t k = 0; k < t.columns.size(); ++k) {
      const auto& name = t.columns[k];
      if (static_cast<int>(k) == ie || static_cast<int>(k) == il || static_cast<int>(k) == ic) {
        continue;
      }
      if (std::find(value_columns.begin(), value_columns.end(), name) == value_columns.end()) {
        value_columns.push_back(name);
      }
    }
    for (const auto& row : t.rows) {
      MergedKey key{row[ie], std::stoi(row[il]),
                    ic >= 0 && !row[ic].empty() ? std::stoi(row[ic]) : -1};
      auto& cells = merged[key];
      for (std::size_t k = 0; k < t.columns.size(); ++k) {
        if (!row[k].empty()) cells[t.columns[k]] = row[k];
      }
    }
  }
  out.table.columns = {"experiment", "length", "cut"};
  out.table.columns.insert(out.table.columns.end(), value_columns.begin(), value_columns.end());
  for (const auto& [key, cells] : merged) {
    std::vector<std::string> row = {key.experiment, std::to_string(key.length),
                                    key.cut < 0 ? "-" : std::to_string(key.cut)};
    for (const auto& c : value_columns) {
      const auto it = cells.find(c);
      row.push_back(it == cells.end() ? "" : it->second);
    }
    out.table.rows.push_back(std::move(row));
  }
  if (merged.empty()) {
    out.warnings.push_back("empty result set");
    if (!a.empty()) out.warnings.push_back("assertions skipped: no data");
    return out;
  }

  auto check = [&](bool pass, const std::string& what) {
    out.summary.push_back(std::string(pass ? "PASS " : "FAIL ") + what);
    if (!pass) ++out.assertion_failures;
  };
  std::set<std::string> experiments;
  for (const auto& [key, cells] : merged) experiments.insert(key.experiment);
  bool entropy_seen = false, gap_seen = false, discrepancy_seen = false;
  for (const auto& exp : experiments) {
    if (exp == "entropy-scan") {
      entropy_seen = true;
      std::vector<std::pair<int, double>> middle;
      for (const auto& [key, cells] : merged) {
        if (key.experiment != exp || key.cut != key.length / 2) continue;
        const auto it = cells.find("entropy");
        if (it != cells.end()) middle.emplace_back(key.length, parse_double(it->second));
      }
      if (middle.empty()) continue;
      std::ostringstream line;
      line << "entropy-scan: middle-cut entropy";
      for (const auto& [l, s] : middle) line << " L=" << l << ":" << std::setprecision(6) << s;
      out.summary.push_back(line.str());
      bool increasing = true;
      double max_s = 0.0;
      for (std::size_t i = 0; i < middle.size(); ++i) {
        max_s = std::max(max_s, middle[i].second);
        if (i > 0 && !(middle[i].second > middle[i - 1].second)) increasing = false;
      }
      const bool saturated =
          middle.size() >= 2 &&
          std::abs(middle.back().second - middle[middle.size() - 2].second) < 1e-3;
      out.summary.push_back(std::string("saturated: ") + (saturated ? "yes" : "no"));
      out.summary.push_back(std::string("increasing: ") + (increasing ? "yes" : "no"));
      if (a.saturated) check(saturated == *a.saturated, "saturated == " + std::string(*a.saturated ? "yes" : "no"));
      if (a.entropy_increasing) {
        check(increasing == *a.entropy_increasing,
              "entropy increasing == " + std::string(*a.entropy_increasing ? "yes" : "no"));
      }
      if (a.max_entropy) check(max_s <= *a.max_entropy, "max entropy <= " + format_short(*a.max_entropy));
    } else if (exp == "gap-scan") {
      gap_seen = true;
      std::vector<std::pair<int, double>> gaps;
      for (const auto& [key, cells] : merged) {
        if (key.experiment != exp) continue;
        const auto it = cells.find("gap");
        if (it != cells.end() && !it->second.empty()) gaps.emplace_back(key.length, parse_double(it->second));
      }
      if (gaps.empty()) continue;
      double min_gap = std::numeric_limits<double>::infinity();
      for (const auto& [l, g] : gaps) min_gap = std::min(min_gap, g);
      const auto [fa, fb] = fit_inverse_length(gaps);
      std::ostringstream line;
      line << "gap-scan: min gap " << std::setprecision(6) << min_gap << ", fit gap = " << fa
           << " + " << fb << "/L";
      out.summary.push_back(line.str());
      const double ratio = gaps.back().second / gaps.front().second;
      if (a.min_gap) check(min_gap > *a.min_gap, "min gap > " + format_short(*a.min_gap));
      if (a.gap_ratio_below) {
        check(ratio < *a.gap_ratio_below, "gap(last)/gap(first) = " + format_short(ratio) +
                                              " < " + format_short(*a.gap_ratio_below));
      }
    } else {
      double worst = 0.0;
      bool any = false;
      for (const auto& [key, cells] : merged) {
        if (key.experiment != exp) continue;
        for (const auto& [name, v] : cells) {
          if (name.find("discrepancy") != std::string::npos && !v.empty()) {
            worst = std::max(worst, parse_double(v));
            any = true;
          }
        }
      }
      if (!any) continue;
      discrepancy_seen = true;
      out.summary.push_back(exp + ": max discrepancy " + format_short(worst));
      if (a.max_discrepancy) check(worst <= *a.max_discrepancy, exp + " discrepancy <= " + format_short(*a.max_discrepancy));
    }
  }
  if ((a.saturated || a.entropy_increasing || a.max_entropy) && !entropy_seen) {
    out.warnings.push_back("entropy assertions given but no entropy-scan data");
  }
  if ((a.min_gap || a.gap_ratio_below) && !gap_seen) {
    out.warnings.push_back("gap assertions given but no gap-scan data");
  }
  if (a.max_discrepancy && !discrepancy_seen) {
    out.warnings.push_back("discrepancy assertion given but no discrepancy data");
  }
  return out;
}

}  // namespace

ReportResult run_report(const std::vector<std::string>& inputs, const Assertions& assertions) {
  std::vector<std::string> missing;
  for (const auto& p : inputs) {
    if (!fs::exists(p)) missing.push_back(p);
  }
  if (!missing.empty()) {
    std::string msg = "missing inputs:";
    for (const auto& m : missing) msg += " " + m;
    throw Error(ErrorKind::kIo, msg);
  }
  std::vector<Table> tables;
  for (const auto& p : inputs) tables.push_back(read_csv(p));
  return report_tables(tables, assertions);
}

int run_config(const ExperimentConfig& c, SolveCache* cache) {
  if (c.kind == ExperimentKind::kReport) {
    const ReportResult r = run_report(c.inputs, c.assertions);
    if (!c.output.empty()) write_csv(r.table, c.output);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& s : r.summary) std::cout << s << '\n';
    return r.exit_code();
  }
  const ScanResult result = run_experiment(c, cache);
  write_outputs(result, c);
  for (const auto& rec : result.records) {
    if (!rec.ok()) std::cerr << "length " << rec.length << ": " << rec.error << '\n';
  }
  int code = result.exit_code();
  if (!c.assertions.empty()) {
    const ReportResult r = report_tables({to_table(result, c)}, c.assertions);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& s : r.summary) std::cout << s << '\n';
    if (code == kExitOk) code = r.exit_code();
  }
  return code;
}

}  // namespace entlab::lab
