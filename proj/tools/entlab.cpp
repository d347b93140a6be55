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

// entlab command line driver.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "entlab/error.hpp"
#include "entlab/fermion.hpp"
#include "entlab/kernels.hpp"
#include "entlab/lab.hpp"
#include "entlab/models.hpp"
#include "entlab/mps.hpp"
#include "entlab/spectra.hpp"

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;
using namespace entlab;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << text;
}

bool is_builtin(const std::string& name) {
  const auto names = builtin_model_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::string absolute(const std::string& path) {
  return fs::absolute(path).lexically_normal().string();
}

struct ModelFlags {
  std::string model;
  std::string boundary;
  std::vector<std::string> params;

  void add(CLI::App* app) {
    app->add_option("--model", model, "builtin model name or model JSON file");
    app->add_option("--boundary", boundary, "open or periodic")
        ->check(CLI::IsMember({"open", "periodic"}));
    app->add_option("--param", params, "builtin parameter key=value (repeatable)");
  }

  bool given() const { return !model.empty(); }

  // A config-file "model" value.
  json to_config() const {
    if (is_builtin(model) && (boundary.empty() && params.empty())) return model;
    json j;
    if (is_builtin(model)) {
      j["model"] = model;
    } else {
      j = json::parse(read_file(model));
    }
    if (!boundary.empty()) j["boundary"] = boundary;
    for (const auto& kv : params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::kConfig, "--param expects key=value");
      j["params"][kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    return j;
  }

  ModelSpec load() const {
    if (!given()) throw Error(ErrorKind::kConfig, "--model is required");
    const json j = to_config();
    return j.is_string() ? builtin_model(j.get<std::string>()) : parse_model_json(j.dump());
  }
};

// Flags shared by the config-driven subcommands; every given flag overrides
// the matching config key.
struct ScanFlags {
  std::string config;
  ModelFlags model;
  std::string spec;
  std::string lengths;
  std::string cut;
  double epsilon = 0.0;
  double solver_tol = 0.0;
  double kernel_tol = 0.0;
  std::int64_t seed = -1;
  std::string out;
  int threads = -1;
  std::int64_t guard = 0;
  int samples = -1;

  void add(CLI::App* app, bool with_model, bool with_spec, bool with_cut) {
    app->add_option("--config", config, "experiment config file");
    if (with_model) model.add(app);
    if (with_spec) app->add_option("--spec", spec, "MPS spec JSON file or 'aklt'");
    app->add_option("--lengths", lengths, "a..b, a..b:step or a,b,c");
    if (with_cut) {
      app->add_option("--cut", cut, "middle or all")->check(CLI::IsMember({"middle", "all"}));
      app->add_option("--epsilon", epsilon, "truncation epsilon");
    }
    app->add_option("--tol", solver_tol, "solver residual tolerance");
    app->add_option("--kernel-tol", kernel_tol, "kernel eigenvalue threshold");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--samples", samples, "random samples per length");
    app->add_option("--out", out, "CSV output path (JSON sidecar alongside)");
    app->add_option("--threads", threads, "worker threads (0 = all)");
    app->add_option("--dimension-guard", guard, "maximum Hilbert space dimension");
  }

  lab::ExperimentConfig build(const std::string& experiment) const {
    json j = json::object();
    std::string base = ".";
    if (!config.empty()) {
      try {
        j = json::parse(read_file(config));
      } catch (const json::exception& e) {
        throw Error(ErrorKind::kConfig, std::string("config: ") + e.what());
      }
      base = fs::path(absolute(config)).parent_path().string();
    }
    if (j.contains("experiment") && j["experiment"] != experiment) {
      throw Error(ErrorKind::kConfig, "config experiment is " + j["experiment"].dump() +
                                          ", subcommand is " + experiment);
    }
    j["experiment"] = experiment;
    if (model.given()) {
      json m = model.to_config();
      j["model"] = m.is_string() ? json(is_builtin(model.model) ? model.model
                                                                : absolute(model.model))
                                 : m;
    }
    if (!spec.empty()) j["spec"] = spec == "aklt" ? spec : absolute(spec);
    if (!lengths.empty()) j["lengths"] = lengths;
    if (!cut.empty()) j["cut"] = cut;
    if (epsilon > 0.0) j["epsilon"] = epsilon;
    if (solver_tol > 0.0) j["tolerances"]["solver"] = solver_tol;
    if (kernel_tol > 0.0) j["tolerances"]["kernel"] = kernel_tol;
    if (seed >= 0) j["seed"] = seed;
    if (samples >= 0) j["samples"] = samples;
    if (!out.empty()) j["output"] = absolute(out);
    if (threads >= 0) j["threads"] = threads;
    if (guard > 0) j["dimension_guard"] = guard;
    return lab::parse_config(j.dump(), base);
  }
};

void apply_thread_cap() {
  if (const char* env = std::getenv("ENTLAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0 && cap < kernels::num_threads()) kernels::set_num_threads(cap);
  }
}

int run_ground(const ModelFlags& mf, int length, int num_eigs, double tol,
               const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelSpec model = mf.load();
  const WindowHamiltonian h = model_hamiltonian(model, length);
  SolverOptions opt;
  opt.tol = tol;
  const EigenResult r = lowest_eigenpairs(h, num_eigs, opt);
  int multiplicity = 0;
  for (double e : r.eigenvalues) {
    if (e - r.eigenvalues.front() <= r.multiplicity_tolerance) ++multiplicity;
  }
  json j;
  j["schema"] = "entlab-ground/1";
  j["length"] = length;
  j["dimension"] = h.dimension();
  j["eigenvalues"] = r.eigenvalues;
  j["residuals"] = r.residuals;
  j["multiplicity"] = multiplicity;
  j["iterations"] = r.iterations;
  j["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_file(out, j.dump(2) + "\n");
  return 0;
}

int run_mps_eval(const std::string& spec_path, const std::string& ops_path, int length,
                 const std::string& out) {
  const MpsSpec spec = spec_path == "aklt" ? MpsSpec::aklt() : load_mps(spec_path);
  const auto observables = load_observables(ops_path, spec.phys_dim());
  json j;
  j["schema"] = "entlab-values/1";
  j["transfer_gap"] = transfer_spectrum(spec).gap;
  for (const auto& obs : observables) {
    json e;
    const cplx v = mps_expectation(spec, obs.ops);
    e["name"] = obs.name;
    e["value"] = {v.real(), v.imag()};
    if (length > 0) {
      const cplx ring = ring_expectation(spec, length, obs.ops);
      e["ring_length"] = length;
      e["ring_value"] = {ring.real(), ring.imag()};
    }
    j["values"].push_back(std::move(e));
  }
  write_file(out, j.dump(2) + "\n");
  return 0;
}

int run_jw_map(const std::string& in, const std::string& out, std::optional<int> anchor,
               const std::string& window_text) {
  const FermionOperator op = parse_fermion_text(read_file(in));
  if (op.empty()) throw Error(ErrorKind::kInvalidArgument, "operator is zero");
  int start = 0;
  int end = 0;
  if (!window_text.empty()) {
    const auto colon = window_text.find(':');
    if (colon == std::string::npos) throw Error(ErrorKind::kConfig, "--window expects a:b");
    start = std::stoi(window_text.substr(0, colon));
    end = std::stoi(window_text.substr(colon + 1));
  } else {
    const auto support = op.support();
    start = support ? std::min(0, support->first) : 0;
    end = support ? support->second + 1 : 1;
    if (anchor) start = std::min(start, *anchor);
  }
  if (end <= start) throw Error(ErrorKind::kConfig, "empty window");
  const LatticeWindow window(start, end - start, 2);
  const JordanWignerImage image = jordan_wigner(op, window, anchor);
  const LatticeWindow& w = image.op.window();
  ModelSpec spec;
  spec.name = "custom";
  spec.local_dim = 2;
  ModelTerm term;
  term.absolute = true;
  for (int s = w.start(); s < w.end(); ++s) term.offsets.push_back(s);
  term.matrix = image.op.matrix();
  spec.terms.push_back(std::move(term));
  json j = json::parse(model_to_json(spec));
  j["jordan_wigner"] = {{"anchor", image.anchor},
                        {"convention", image.convention},
                        {"parity_even", image.parity_even}};
  write_file(out, j.dump(2) + "\n");
  return 0;
}

int run_report_cmd(const std::vector<std::string>& inputs, const std::string& config,
                   const std::string& out, const lab::Assertions& flags) {
  std::vector<std::string> files = inputs;
  lab::Assertions a = flags;
  if (!config.empty()) {
    const lab::ExperimentConfig c = lab::load_config(config);
    if (c.kind != lab::ExperimentKind::kReport) {
      throw Error(ErrorKind::kConfig, "report needs a report config");
    }
    files.insert(files.end(), c.inputs.begin(), c.inputs.end());
    if (a.empty()) a = c.assertions;
  }
  const lab::ReportResult r = lab::run_report(files, a);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  if (!out.empty()) lab::write_csv(r.table, out);
  for (const auto& s : r.summary) std::cout << s << '\n';
  return r.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entlab: entanglement and spectra of finite quantum spin chains"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "entlab 1.0.0");

  auto* ground = app.add_subcommand("ground", "lowest eigenpairs of a model");
  ModelFlags ground_model;
  ground_model.add(ground);
  int length = 0;
  int num_eigs = 1;
  double tol = 1e-9;
  std::string out;
  ground->add_option("--length", length, "chain length")->required();
  ground->add_option("--num-eigs", num_eigs, "number of eigenpairs");
  ground->add_option("--tol", tol, "residual tolerance");
  ground->add_option("--out", out, "JSON output path (default stdout)");

  ScanFlags entropy_flags, gap_flags, ff_flags, jw_flags, oracle_flags;
  auto* entropy = app.add_subcommand("entropy-scan", "ground-state entanglement vs length");
  entropy_flags.add(entropy, true, false, true);
  auto* gap = app.add_subcommand("gap-scan", "spectral gap vs length");
  gap_flags.add(gap, true, false, false);
  auto* ff = app.add_subcommand("check-ff", "frustration-freeness of an MPS for a model");
  ff_flags.add(ff, true, true, false);
  auto* jwq = app.add_subcommand("jw-check", "fermion / spin spectral equivalence scan");
  jw_flags.add(jwq, true, false, false);
  auto* oracle = app.add_subcommand("mps-oracle", "transfer operator vs dense ring vectors");
  oracle_flags.add(oracle, false, true, false);

  auto* mps_eval = app.add_subcommand("mps-eval", "expectation values in an MPS");
  std::string spec_path, ops_path;
  int ring_length = 0;
  mps_eval->add_option("--spec", spec_path, "MPS spec JSON file or 'aklt'")->required();
  mps_eval->add_option("--ops", ops_path, "observables JSON file")->required();
  mps_eval->add_option("--length", ring_length, "also evaluate on a ring of this length");
  mps_eval->add_option("--out", out, "JSON output path (default stdout)");

  auto* jw = app.add_subcommand("jw-map", "Jordan-Wigner image of a fermion operator");
  std::string jw_in, jw_window;
  std::optional<int> anchor;
  jw->add_option("--in", jw_in, "fermion operator text file")->required();
  jw->add_option("--out", out, "model JSON output path (default stdout)");
  jw->add_option("--string-anchor", anchor, "left end of the Jordan-Wigner strings");
  jw->add_option("--window", jw_window, "site window a:b (half open)");

  auto* report = app.add_subcommand("report", "merge scan CSVs and check assertions");
  std::vector<std::string> inputs;
  std::string report_config;
  lab::Assertions assertions;
  double max_entropy = -1, min_gap = -1, ratio = -1, max_disc = -1;
  bool saturated = false, increasing = false;
  report->add_option("inputs", inputs, "scan CSV files");
  report->add_option("--config", report_config, "report config file");
  report->add_option("--out", out, "merged CSV output path");
  report->add_flag("--assert-saturated", saturated, "entropy saturates");
  report->add_flag("--assert-increasing", increasing, "entropy strictly increases");
  report->add_option("--assert-max-entropy", max_entropy, "entropy upper bound");
  report->add_option("--assert-min-gap", min_gap, "gap lower bound");
  report->add_option("--assert-gap-ratio", ratio, "gap(last) / gap(first) upper bound");
  report->add_option("--assert-max-discrepancy", max_disc, "discrepancy upper bound");

  auto* run = app.add_subcommand("run", "execute an experiment config");
  std::string run_config;
  run->add_option("--config", run_config, "experiment config file")->required();

  CLI11_PARSE(app, argc, argv);
  apply_thread_cap();

  try {
    if (ground->parsed()) return run_ground(ground_model, length, num_eigs, tol, out);
    if (mps_eval->parsed()) return run_mps_eval(spec_path, ops_path, ring_length, out);
    if (jw->parsed()) return run_jw_map(jw_in, out, anchor, jw_window);
    if (report->parsed()) {
      if (saturated) assertions.saturated = true;
      if (increasing) assertions.entropy_increasing = true;
      if (max_entropy >= 0) assertions.max_entropy = max_entropy;
      if (min_gap >= 0) assertions.min_gap = min_gap;
      if (ratio >= 0) assertions.gap_ratio_below = ratio;
      if (max_disc >= 0) assertions.max_discrepancy = max_disc;
      return run_report_cmd(inputs, report_config, out, assertions);
    }
    lab::ExperimentConfig config;
    if (run->parsed()) {
      config = lab::load_config(run_config);
    } else if (entropy->parsed()) {
      config = entropy_flags.build("entropy-scan");
    } else if (gap->parsed()) {
      config = gap_flags.build("gap-scan");
    } else if (ff->parsed()) {
      config = ff_flags.build("ff-check");
    } else if (jwq->parsed()) {
      config = jw_flags.build("jw-equivalence");
    } else if (oracle->parsed()) {
      config = oracle_flags.build("mps-oracle");
    }
    const bool to_stdout = config.output.empty() && config.kind != lab::ExperimentKind::kReport;
    if (!to_stdout || !config.assertions.empty()) return lab::run_config(config);
    const lab::ScanResult result = lab::run_experiment(config);
    const lab::Table table = lab::to_table(result, config);
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      std::cout << (i ? "," : "") << table.columns[i];
    }
    std::cout << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) std::cout << (i ? "," : "") << row[i];
      std::cout << '\n';
    }
    for (const auto& rec : result.records) {
      if (!rec.ok()) std::cerr << "length " << rec.length << ": " << rec.error << '\n';
    }
    return result.exit_code();
  } catch (const Error& e) {
    std::cerr << "entlab: " << e.what() << '\n';
    const bool config_error = e.kind() == ErrorKind::kConfig ||
                              e.kind() == ErrorKind::kParse || e.kind() == ErrorKind::kIo;
    return config_error ? lab::kExitConfig : lab::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "entlab: " << e.what() << '\n';
    return lab::kExitError;
  }
}
