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

#include "entlab/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "entlab/error.hpp"
#include "entlab/fermion.hpp"
#include "json_matrix.hpp"

namespace entlab {

namespace {

using json = nlohmann::json;

constexpr const char* kSchema = "entlab-model/1";

double param(const std::map<std::string, double>& p, const std::string& key,
             double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void check_params(const std::string& model,
                  const std::map<std::string, double>& p,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : p) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end()) {
      throw Error(ErrorKind::kConfig,
                  "unknown parameter '" + key + "' for model " + model);
    }
    if (!std::isfinite(value)) {
      throw Error(ErrorKind::kInvalidArgument, "parameter '" + key + "' is not finite");
    }
  }
}

Matrix heisenberg_bond(int d) {
  using namespace ops;
  return kron(spin_x(d), spin_x(d)) + kron(spin_y(d), spin_y(d)) +
         kron(spin_z(d), spin_z(d));
}

std::int64_t side_for(int d, std::size_t sites) {
  std::int64_t side = 1;
  for (std::size_t i = 0; i < sites; ++i) {
    side *= d;
    if (side > kMaxDenseSide) {
      throw Error(ErrorKind::kDimensionOverflow, "term acts on too many sites");
    }
  }
  return side;
}

}  // namespace

int ModelSpec::range() const {
  int r = 0;
  for (const auto& t : terms) {
    if (t.offsets.empty()) continue;
    const auto [lo, hi] = std::minmax_element(t.offsets.begin(), t.offsets.end());
    r = std::max(r, *hi - *lo);
  }
  return r;
}

Matrix aklt_projector() {
  const Matrix ss = heisenberg_bond(3);
  return ss * ss / 6.0 + ss / 2.0 + Matrix::Identity(9, 9) / 3.0;
}

std::vector<std::string> builtin_model_names() {
  return {"heisenberg", "aklt", "tfim", "xy", "hopping-fermion", "field"};
}

ModelSpec builtin_model(const std::string& name,
                        const std::map<std::string, double>& params) {
  using namespace ops;
  ModelSpec spec;
  spec.name = name;
  spec.params = params;
  if (name == "heisenberg") {
    check_params(name, params, {"S", "J"});
    const double s = param(params, "S", 0.5);
    const double twice = 2.0 * s;
    if (s <= 0.0 || std::abs(twice - std::round(twice)) > 1e-12 || twice > 8) {
      throw Error(ErrorKind::kInvalidArgument,
                  "heisenberg spin S must be a positive half-integer <= 4");
    }
    spec.local_dim = static_cast<int>(std::round(twice)) + 1;
    spec.terms.push_back({{0, 1}, false, heisenberg_bond(spec.local_dim),
                          param(params, "J", 1.0)});
  } else if (name == "aklt") {
    check_params(name, params, {});
    spec.local_dim = 3;
    spec.terms.push_back({{0, 1}, false, aklt_projector(), 1.0});
  } else if (name == "tfim") {
    check_params(name, params, {"J", "h"});
    spec.terms.push_back(
        {{0, 1}, false, kron(pauli_z(), pauli_z()), -param(params, "J", 1.0)});
    spec.terms.push_back({{0}, false, pauli_x(), -param(params, "h", 1.0)});
  } else if (name == "xy") {
    check_params(name, params, {"J"});
    spec.terms.push_back({{0, 1}, false,
                          (kron(pauli_x(), pauli_x()) + kron(pauli_y(), pauli_y())) / 2.0,
                          param(params, "J", 1.0)});
  } else if (name == "hopping-fermion") {
    check_params(name, params, {"t", "mu", "U"});
    const HoppingParams p{param(params, "t", 1.0), param(params, "mu", 0.0),
                          param(params, "U", 0.0)};
    const LatticeWindow pair(0, 2, 2);
    const FermionOperator bond = fermion_hamiltonian({p.t, 0.0, p.u}, pair);
    spec.terms.push_back({{0, 1}, false, jordan_wigner(bond, pair).op.matrix(), 1.0});
    const FermionOperator onsite = FermionOperator::number(0) * cplx(-p.mu);
    spec.terms.push_back(
        {{0}, false, jordan_wigner(onsite, LatticeWindow(0, 1, 2)).op.matrix(), 1.0});
  } else if (name == "field") {
    check_params(name, params, {"h"});
    spec.terms.push_back({{0}, false, pauli_z(), -param(params, "h", 1.0)});
  } else {
    throw Error(ErrorKind::kConfig, "unknown builtin model '" + name + "'");
  }
  return spec;
}

ModelSpec parse_model_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("model file: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::kParse, "model file must be an object");
  static const std::set<std::string> known = {"schema", "model", "params",
                                              "boundary", "local_dim", "terms",
                                              "jordan_wigner"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) {
      throw Error(ErrorKind::kConfig, "unknown model key '" + key + "'");
    }
  }
  if (j.contains("schema") && j["schema"] != kSchema) {
    throw Error(ErrorKind::kConfig, "unsupported model schema");
  }
  try {
    const std::string name = j.value("model", std::string("custom"));
    std::map<std::string, double> params;
    if (j.contains("params")) {
      for (const auto& [key, value] : j["params"].items()) {
        params[key] = value.get<double>();
      }
    }
    ModelSpec spec;
    if (name == "custom") {
      if (!params.empty()) {
        throw Error(ErrorKind::kConfig, "custom models take no params");
      }
      if (!j.contains("local_dim")) {
        throw Error(ErrorKind::kConfig, "custom models need local_dim");
      }
      spec.local_dim = j["local_dim"].get<int>();
      if (spec.local_dim < 2) {
        throw Error(ErrorKind::kInvalidArgument, "local_dim must be >= 2");
      }
    } else {
      spec = builtin_model(name, params);
      if (j.contains("local_dim") && j["local_dim"].get<int>() != spec.local_dim) {
        throw Error(ErrorKind::kLocalDimMismatch,
                    "local_dim does not match the builtin model");
      }
    }
    const std::string boundary = j.value("boundary", std::string("open"));
    if (boundary != "open" && boundary != "periodic") {
      throw Error(ErrorKind::kConfig, "boundary must be open or periodic");
    }
    spec.periodic = boundary == "periodic";
    if (j.contains("terms")) {
      for (const json& t : j["terms"]) {
        for (const auto& [key, value] : t.items()) {
          if (key != "offsets" && key != "sites" && key != "matrix" &&
              key != "coupling") {
            throw Error(ErrorKind::kConfig, "unknown term key '" + key + "'");
          }
        }
        ModelTerm term;
        if (t.contains("offsets") == t.contains("sites")) {
          throw Error(ErrorKind::kConfig, "a term needs exactly one of offsets/sites");
        }
        term.absolute = t.contains("sites");
        term.offsets = t[term.absolute ? "sites" : "offsets"].get<std::vector<int>>();
        if (term.offsets.empty()) throw Error(ErrorKind::kConfig, "empty term support");
        const auto side = side_for(spec.local_dim, term.offsets.size());
        term.matrix = detail::matrix_from_json(t.at("matrix"), side, side);
        term.coupling = t.value("coupling", 1.0);
        spec.terms.push_back(std::move(term));
      }
    }
    if (spec.terms.empty()) throw Error(ErrorKind::kConfig, "model has no terms");
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("model file: ") + e.what());
  }
}

ModelSpec load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open model file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model_json(buf.str());
}

std::string model_to_json(const ModelSpec& spec) {
  json j;
  j["schema"] = kSchema;
  j["model"] = "custom";
  j["boundary"] = spec.periodic ? "periodic" : "open";
  j["local_dim"] = spec.local_dim;
  j["terms"] = json::array();
  for (const auto& t : spec.terms) {
    json term;
    term[t.absolute ? "sites" : "offsets"] = t.offsets;
    term["matrix"] = detail::matrix_to_json(t.matrix);
    term["coupling"] = t.coupling;
    j["terms"].push_back(std::move(term));
  }
  return j.dump(2);
}

Interaction build_interaction(const ModelSpec& spec, const LatticeWindow& window) {
  if (spec.local_dim != window.local_dim()) {
    throw Error(ErrorKind::kLocalDimMismatch, "model and window local dimensions differ");
  }
  if (spec.periodic && spec.name == "hopping-fermion") {
    throw Error(ErrorKind::kInvalidArgument,
                "periodic hopping-fermion chains are not local after the "
                "Jordan-Wigner map; use an open boundary");
  }
  const int length = window.length();
  int range = spec.range();
  for (const auto& t : spec.terms) {
    if (!t.absolute) continue;
    const auto [lo, hi] = std::minmax_element(t.offsets.begin(), t.offsets.end());
    range = std::max(range, *hi - *lo);
  }
  Interaction interaction =
      spec.periodic ? Interaction(spec.local_dim, std::min(range, length - 1),
                                  window.start(), length)
                    : Interaction(spec.local_dim, range);
  for (const auto& t : spec.terms) {
    const Matrix m = t.matrix * t.coupling;
    if (t.absolute) {
      for (int s : t.offsets) {
        if (!window.contains_site(s)) {
          throw Error(ErrorKind::kWindowNotContained, "term site outside the window");
        }
      }
      interaction.add_term(t.offsets, m);
      continue;
    }
    const int lo = *std::min_element(t.offsets.begin(), t.offsets.end());
    const int hi = *std::max_element(t.offsets.begin(), t.offsets.end());
    if (spec.periodic) {
      if (hi - lo >= length) {
        throw Error(ErrorKind::kInvalidArgument, "ring too short for the model terms");
      }
      for (int j = 0; j < length; ++j) {
        std::vector<int> sites;
        for (int o : t.offsets) {
          sites.push_back(window.start() + (((j + o) % length) + length) % length);
        }
        interaction.add_term(sites, m);
      }
    } else {
      for (int j = window.start() - lo; j + hi < window.end(); ++j) {
        std::vector<int> sites;
        for (int o : t.offsets) sites.push_back(j + o);
        interaction.add_term(sites, m);
      }
    }
  }
  return interaction;
}

WindowHamiltonian model_hamiltonian(const ModelSpec& spec, int length,
                                    const AssemblyOptions& options) {
  const LatticeWindow window(0, length, spec.local_dim);
  return assemble_hamiltonian(build_interaction(spec, window), window, options);
}

}  // namespace entlab
