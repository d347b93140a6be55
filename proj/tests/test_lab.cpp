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

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "entlab/error.hpp"
#include "entlab/lab.hpp"
#include "entlab/models.hpp"
#include "entlab/spectra.hpp"
#include "json.hpp"

namespace entlab::lab {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("entlab-test-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ENTLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ErrorKind config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kInvalidArgument;
}

TEST(Lengths, Forms) {
  EXPECT_EQ(parse_lengths("6..9"), (std::vector<int>{6, 7, 8, 9}));
  EXPECT_EQ(parse_lengths("8..16:4"), (std::vector<int>{8, 12, 16}));
  EXPECT_EQ(parse_lengths("3,5,9"), (std::vector<int>{3, 5, 9}));
  for (const char* bad : {"", "5,4", "4,4", "a..b", "9..3", "2..4:0", "0,2"}) {
    EXPECT_THROW(parse_lengths(bad), Error) << bad;
  }
}

TEST(Config, Parses) {
  ExperimentConfig c = parse_config(R"({"schema":"entlab-config/1","experiment":"gap-scan",
      "model":"heisenberg","lengths":"4..6","seed":7,"tolerances":{"solver":1e-10},
      "assertions":{"min_gap":0.1}})");
  EXPECT_EQ(c.kind, ExperimentKind::kGapScan);
  EXPECT_EQ(c.lengths.size(), 3u);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.tol.solver, 1e-10);
  ASSERT_TRUE(c.assertions.min_gap.has_value());
  EXPECT_EQ(c.hash.size(), 16u);
  ExperimentConfig inline_model = parse_config(
      R"({"experiment":"entropy-scan","model":{"model":"tfim","params":{"h":0.5}},"lengths":[4,6]})");
  EXPECT_EQ(inline_model.model->name, "tfim");
  EXPECT_NE(inline_model.hash, c.hash);
}

TEST(Config, RejectsUnknownAndInvalid) {
  EXPECT_EQ(config_error(R"({"experiment":"gap-scan","model":"aklt","lengths":"4..6","colour":1})"),
            ErrorKind::kConfig);
  EXPECT_EQ(config_error(R"({"experiment":"gap-scan","model":"aklt","lengths":"4..6",
                             "tolerances":{"solvr":1e-9}})"),
            ErrorKind::kConfig);
  EXPECT_EQ(config_error(R"({"experiment":"fit","model":"aklt","lengths":"4"})"), ErrorKind::kConfig);
  EXPECT_EQ(config_error(R"({"experiment":"gap-scan","lengths":"4"})"), ErrorKind::kConfig);
  EXPECT_EQ(config_error(R"({"experiment":"gap-scan","model":"aklt"})"), ErrorKind::kConfig);
  EXPECT_EQ(config_error(R"({"experiment":"gap-scan","model":"aklt","lengths":"30"})"), ErrorKind::kConfig);
  EXPECT_EQ(config_error(R"({"experiment":"ff-check","model":"aklt","lengths":"4"})"), ErrorKind::kConfig);
  EXPECT_EQ(config_error(R"({"experiment":"gap-scan","model":"nope.json","lengths":"4"})"),
            ErrorKind::kConfig);
  EXPECT_EQ(config_error("{"), ErrorKind::kConfig);
}

TEST(Threads, EnvironmentCap) {
  setenv("ENTLAB_THREADS", "2", 1);
  EXPECT_LE(worker_count(0, 10), 2);
  EXPECT_EQ(worker_count(8, 1), 1);
  unsetenv("ENTLAB_THREADS");
  EXPECT_EQ(worker_count(3, 10), 3);
}

TEST(Solve, SectorsMatchFullSpace) {
  ModelSpec ring = builtin_model("heisenberg");
  ring.periodic = true;
  for (const auto& [model, length] : {std::pair{ring, 12}, std::pair{builtin_model("aklt"), 8},
                                      std::pair{builtin_model("tfim"), 12}}) {
    const LengthSolve s = solve_length(model, length, {}, 1, kDefaultDimensionGuard);
    const WindowHamiltonian h = model_hamiltonian(model, length);
    const GapEstimate g = gap_estimate(h);
    EXPECT_NEAR(s.ground_energy, g.ground_energy, 1e-9);
    EXPECT_NEAR(s.gap, g.gap, 1e-8);
    EXPECT_EQ(s.multiplicity, g.ground_multiplicity);
    EXPECT_LT((h.apply(s.ground.amplitudes()) - s.ground_energy * s.ground.amplitudes()).norm(), 1e-8);
  }
}

TEST(Solve, CanonicalAkltMemberHasMaximalSz) {
  const LengthSolve s = solve_length(builtin_model("aklt"), 8, {}, 1, kDefaultDimensionGuard);
  EXPECT_EQ(s.multiplicity, 4);
  const LatticeWindow w(0, 8, 3);
  double sz = 0.0;
  for (int j = 0; j < 8; ++j)
    sz += expectation(s.ground, LocalOperator(LatticeWindow(j, 1, 3), ops::spin_z(3))).real();
  EXPECT_NEAR(sz, 1.0, 1e-8);
}

TEST(Scans, EntropyExamples) {
  ExperimentConfig field = parse_config(R"({"experiment":"entropy-scan","model":"field","lengths":"4..8","cut":"all"})");
  ScanResult f = run_entropy_scan(field);
  EXPECT_EQ(f.exit_code(), kExitOk);
  for (const auto& r : f.records)
    for (const auto& c : r.cuts) EXPECT_LT(c.entropy, 1e-10);

  ExperimentConfig ring = parse_config(R"({"experiment":"entropy-scan",
      "model":{"model":"heisenberg","boundary":"periodic"},"lengths":"8..12:2"})");
  ScanResult r = run_entropy_scan(ring);
  ASSERT_EQ(r.records.size(), 3u);
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    EXPECT_GT(r.records[i].cuts.front().entropy, r.records[i - 1].cuts.front().entropy);
  }
  for (const auto& rec : r.records) {
    for (const auto& c : rec.cuts) {
      EXPECT_TRUE(c.truncation_bounds_hold);
      EXPECT_LE(c.distance_sq, c.three_epsilon);
    }
  }

  ExperimentConfig aklt = parse_config(R"({"experiment":"entropy-scan","model":"aklt","lengths":"6,8"})");
  ScanResult a = run_entropy_scan(aklt);
  for (const auto& rec : a.records) EXPECT_LE(rec.cuts.front().entropy, std::log(2.0) + 1e-9);
}

TEST(Scans, GapExamples) {
  ExperimentConfig aklt = parse_config(R"({"experiment":"gap-scan","model":"aklt","lengths":"6,8"})");
  ScanResult a = run_gap_scan(aklt);
  ASSERT_EQ(a.failed(), 0);
  for (const auto& rec : a.records) {
    EXPECT_GT(rec.gap, 0.1);
    EXPECT_EQ(rec.ground_multiplicity, 4);
  }
  ASSERT_TRUE(a.gap_fit.has_value());

  // Large chemical potential: the filled chain is gapped by at least |mu| - 4|t|.
  ExperimentConfig f = parse_config(R"({"experiment":"gap-scan",
      "model":{"model":"hopping-fermion","params":{"t":1,"mu":8}},"lengths":"4..10:2"})");
  for (const auto& rec : run_gap_scan(f).records) {
    ASSERT_TRUE(rec.ok()) << rec.error;
    EXPECT_GE(rec.gap, 8.0 - 4.0 - 1e-9);
  }
}

TEST(Scans, OtherExperiments) {
  ScanResult ff = run_ff_check(parse_config(R"({"experiment":"ff-check","model":"aklt","spec":"aklt","lengths":"4..6"})"));
  for (const auto& rec : ff.records) {
    EXPECT_EQ(rec.values.at("kernel_dimension"), 4);
    EXPECT_LT(rec.values.at("max_placement"), 1e-10);
  }
  ScanResult jw = run_jw_equivalence(
      parse_config(R"({"experiment":"jw-equivalence","model":"hopping-fermion","lengths":"4,6","samples":3})"));
  for (const auto& rec : jw.records) {
    EXPECT_LT(rec.values.at("hopping_discrepancy"), 1e-9);
    EXPECT_LT(rec.values.at("random_max_discrepancy"), 1e-9);
  }
  ScanResult mps = run_mps_oracle(
      parse_config(R"({"experiment":"mps-oracle","spec":"aklt","lengths":"4..8:2","samples":3})"));
  for (const auto& rec : mps.records) {
    EXPECT_LT(rec.values.at("discrepancy"), 1e-10);
    EXPECT_LT(rec.values.at("random_max_discrepancy"), 1e-10);
  }
}

TEST(Scans, FailedRecordIsPartial) {
  ScanResult ff = run_ff_check(parse_config(R"({"experiment":"ff-check","model":"aklt","spec":"aklt","lengths":"1,4"})"));
  ASSERT_EQ(ff.records.size(), 2u);
  EXPECT_FALSE(ff.records[0].ok());
  EXPECT_TRUE(ff.records[1].ok());
  EXPECT_EQ(ff.exit_code(), kExitPartial);
}

TEST(Scans, ReproducibleWithSeed) {
  const std::string text = R"({"experiment":"entropy-scan","model":"tfim","lengths":"10,12","seed":5,"cut":"all"})";
  ScanResult a = run_entropy_scan(parse_config(text));
  ScanResult b = run_entropy_scan(parse_config(text));
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_NEAR(a.records[i].ground_energy, b.records[i].ground_energy, 1e-12);
    for (std::size_t k = 0; k < a.records[i].cuts.size(); ++k) {
      EXPECT_NEAR(a.records[i].cuts[k].entropy, b.records[i].cuts[k].entropy, 1e-12);
    }
  }
  const ExperimentConfig c = parse_config(text);
  EXPECT_EQ(to_table(a, c).rows, to_table(b, c).rows);
}

TEST(Cache, SharesSolves) {
  SolveCache cache;
  const auto c = parse_config(R"({"experiment":"entropy-scan","model":"heisenberg","lengths":"6,8"})");
  run_entropy_scan(c, &cache);
  run_gap_scan(c, &cache);
  EXPECT_EQ(cache.misses(), 2);
  EXPECT_EQ(cache.size(), 2u);
}

TEST(Output, CsvAndSidecar) {
  TempDir dir;
  ExperimentConfig c = parse_config(R"({"experiment":"gap-scan","model":"heisenberg","lengths":"4,6"})");
  c.output = dir.file("gap.csv");
  ScanResult r = run_gap_scan(c);
  write_outputs(r, c);
  Table t = read_csv(c.output);
  ASSERT_EQ(t.rows.size(), 2u);
  const auto col = std::find(t.columns.begin(), t.columns.end(), "config_hash") - t.columns.begin();
  ASSERT_LT(col, static_cast<long>(t.columns.size()));
  for (const auto& row : t.rows) EXPECT_EQ(row[col], c.hash);
  const std::string sidecar = read_file(c.output + ".json");
  EXPECT_NE(sidecar.find("entlab-result/1"), std::string::npos);
  EXPECT_NE(sidecar.find(c.hash), std::string::npos);
  EXPECT_THROW(read_csv(dir.file("missing.csv")), Error);
}

TEST(Report, EmptyMissingAndMixed) {
  TempDir dir;
  write_file(dir.file("empty.csv"), "length,experiment\n");
  ReportResult empty = run_report({dir.file("empty.csv")});
  EXPECT_TRUE(empty.table.rows.empty());
  EXPECT_EQ(empty.exit_code(), kExitOk);
  ASSERT_FALSE(empty.warnings.empty());

  try {
    run_report({dir.file("a.csv"), dir.file("b.csv")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
    EXPECT_NE(std::string(e.what()).find("a.csv"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("b.csv"), std::string::npos);
  }

  SolveCache cache;
  ExperimentConfig ent = parse_config(R"({"experiment":"entropy-scan","model":"aklt","lengths":"6,8"})");
  ent.output = dir.file("ent.csv");
  write_outputs(run_entropy_scan(ent, &cache), ent);
  ExperimentConfig gap = parse_config(R"({"experiment":"gap-scan","model":"aklt","lengths":"6,8"})");
  gap.output = dir.file("gap.csv");
  write_outputs(run_gap_scan(gap, &cache), gap);

  Assertions a;
  a.saturated = true;
  a.min_gap = 0.1;
  ReportResult rep = run_report({ent.output, gap.output}, a);
  EXPECT_EQ(rep.table.rows.size(), 4u);
  EXPECT_NE(std::find(rep.summary.begin(), rep.summary.end(), "saturated: yes"), rep.summary.end());
  EXPECT_EQ(rep.exit_code(), kExitOk);

  a.min_gap = 5.0;
  EXPECT_EQ(run_report({gap.output}, a).exit_code(), kExitAssertion);
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  write_file(dir.file("bad.json"), R"({"experiment":"gap-scan","model":"aklt","lengths":"4","extra":true})");
  EXPECT_EQ(run_cli("run --config " + dir.file("bad.json")), kExitConfig);
  write_file(dir.file("ok.json"), R"({"experiment":"gap-scan","model":"aklt","lengths":"4..6",
      "output":"ok.csv","assertions":{"min_gap":0.1}})");
  EXPECT_EQ(run_cli("run --config " + dir.file("ok.json")), kExitOk);
  EXPECT_TRUE(fs::exists(dir.file("ok.csv")));
  EXPECT_TRUE(fs::exists(dir.file("ok.csv.json")));
  EXPECT_EQ(run_cli("report " + dir.file("ok.csv") + " --assert-min-gap 3"), kExitAssertion);
  EXPECT_EQ(run_cli("check-ff --model aklt --spec aklt --lengths 1,4 --out " + dir.file("ff.csv")),
            kExitPartial);
  EXPECT_EQ(run_cli("report " + dir.file("nothing.csv")), kExitConfig);
  EXPECT_EQ(run_cli("gap-scan --model aklt --lengths 5..4"), kExitConfig);
}

TEST(Cli, GroundAndJwMap) {
  TempDir dir;
  ASSERT_EQ(run_cli("ground --model heisenberg --length 2 --num-eigs 2 --out " + dir.file("g.json")), 0);
  const auto g = nlohmann::json::parse(read_file(dir.file("g.json")));
  EXPECT_NEAR(g["eigenvalues"][0].get<double>(), -0.75, 1e-12);
  EXPECT_NEAR(g["eigenvalues"][1].get<double>(), 0.25, 1e-12);
  write_file(dir.file("hop.txt"), "-1 c+ 0 c 1\n-1 c+ 1 c 0\n");
  ASSERT_EQ(run_cli("jw-map --in " + dir.file("hop.txt") + " --out " + dir.file("spin.json")), 0);
  ModelSpec spin = load_model(dir.file("spin.json"));
  const Matrix m = model_hamiltonian(spin, 2).to_dense();
  Eigen::VectorXd e = Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues();
  EXPECT_NEAR(e(0), -1.0, 1e-12);
  EXPECT_NEAR(e(3), 1.0, 1e-12);
}

}  // namespace
}  // namespace entlab::lab
