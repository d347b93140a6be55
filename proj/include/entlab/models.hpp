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

// Translation-invariant model definitions and their JSON form
// (schema "entlab-model/1", see docs/formats.md).

#ifndef ENTLAB_MODELS_HPP
#define ENTLAB_MODELS_HPP

#include <map>
#include <string>
#include <vector>

#include "entlab/lattice.hpp"
#include "entlab/types.hpp"

namespace entlab {

/// coupling * matrix placed on j + offsets for every admissible j, or once
/// on fixed `sites` when `absolute` is set.
struct ModelTerm {
  std::vector<int> offsets;
  bool absolute = false;
  Matrix matrix;
  double coupling = 1.0;
};

struct ModelSpec {
  std::string name = "custom";
  std::map<std::string, double> params;
  bool periodic = false;
  int local_dim = 2;
  std::vector<ModelTerm> terms;

  /// Largest offset spread among the terms.
  int range() const;
};

/// heisenberg{S=0.5,J=1}, aklt, tfim{J=1,h=1}, xy{J=1},
/// hopping-fermion{t=1,mu=0,U=0}, field{h=1}.
ModelSpec builtin_model(const std::string& name,
                        const std::map<std::string, double>& params = {});
std::vector<std::string> builtin_model_names();

ModelSpec parse_model_json(const std::string& text);
ModelSpec load_model(const std::string& path);
/// Explicit term list form; always reloads to an equivalent model.
std::string model_to_json(const ModelSpec& spec);

/// Places every term on the window (ring wrap when periodic).
Interaction build_interaction(const ModelSpec& spec, const LatticeWindow& window);

WindowHamiltonian model_hamiltonian(const ModelSpec& spec, int length,
                                    const AssemblyOptions& options = {});

/// Projector onto total spin 2 of two spin-1 sites.
Matrix aklt_projector();

}  // namespace entlab

#endif  // ENTLAB_MODELS_HPP
