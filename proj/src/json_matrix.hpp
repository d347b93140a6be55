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

// Complex matrices in JSON: a list of rows, each entry a number or [re, im].

#ifndef ENTLAB_SRC_JSON_MATRIX_HPP
#define ENTLAB_SRC_JSON_MATRIX_HPP

#include <string>

#include <json.hpp>

#include "entlab/error.hpp"
#include "entlab/types.hpp"

namespace entlab::detail {

inline Matrix matrix_from_json(const nlohmann::json& rows, Eigen::Index n_rows,
                               Eigen::Index n_cols) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n_rows) {
    throw Error(ErrorKind::kParse, "matrix must have " + std::to_string(n_rows) + " rows");
  }
  Matrix m(n_rows, n_cols);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    const auto& row = rows[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n_cols) {
      throw Error(ErrorKind::kParse, "matrix row " + std::to_string(r) +
                                         " must have " + std::to_string(n_cols) + " entries");
    }
    for (Eigen::Index c = 0; c < n_cols; ++c) {
      const auto& e = row[c];
      if (e.is_number()) {
        m(r, c) = e.get<double>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
      } else {
        throw Error(ErrorKind::kParse, "matrix entries are numbers or [re, im]");
      }
    }
  }
  return m;
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back({m(r, c).real(), m(r, c).imag()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace entlab::detail

#endif  // ENTLAB_SRC_JSON_MATRIX_HPP
