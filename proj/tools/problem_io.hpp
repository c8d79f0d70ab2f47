// Copyright 2026 The dromsos Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Problem, report and moment files (JSON), and the bundled example corpus.

#ifndef DROMSOS_TOOLS_PROBLEM_IO_HPP_
#define DROMSOS_TOOLS_PROBLEM_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dromsos/drom.hpp"
#include "dromsos/momentkit.hpp"

namespace dromsos::io {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kMonomialOrder = "grlex";

// Every message starts with the JSON pointer of the offending value.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& path, const std::string& what);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct FileOptions {
  std::optional<int> order;
  std::optional<int> max_order;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<double> ball_radius;
};

struct Expected {
  double optimal_value = 0.0;
  double value_tol = 0.0;
  std::vector<double> x;
  double x_tol = 0.0;
  std::vector<Eigen::VectorXd> atoms;
  std::vector<double> weights;
  double atom_tol = 0.0;
  double weight_tol = 0.0;
  std::optional<int> order;
};

struct ProblemFile {
  std::string name;
  std::string description;
  DromProblem problem;
  FileOptions options;
  std::optional<Expected> expected;
};

ProblemFile parse_problem(std::string_view text);
// Throws SchemaError naming the file when it cannot be read.
ProblemFile load_problem(const std::filesystem::path& path);
// Reduced form with h as a matrix; parse_problem(dump_problem(p)) reproduces p.
std::string dump_problem(const ProblemFile& file);

struct BilinearTerm {
  std::vector<int> x;  // zero or a unit vector
  std::vector<int> xi;
  double coefficient = 0.0;
};

// Nonzero terms of (A x + b)' [xi]_d.
std::vector<BilinearTerm> bilinear_terms(const DromProblem& problem);

std::string report_json(const SolveReport& report, const DromProblem& problem, double wall_clock_seconds);

struct StoredReport {
  std::string status;
  int order_k = 0;
  double optimal_value = 0.0;
  Eigen::VectorXd x;
  std::optional<Tms> y;
  std::optional<Tms> w;
  std::vector<double> constraint_values;
  double feasibility = 0.0;
  double objective_match = 0.0;
  double duality_gap = 0.0;
  double complementarity = 0.0;
};

StoredReport parse_report(std::string_view text, const DromProblem& problem);

struct MomentsFile {
  Tms y{1, 0};
  SemiAlgSet g{1};
  std::optional<int> order;
  std::optional<int> max_order;
  std::optional<std::uint64_t> seed;
};

MomentsFile parse_moments(std::string_view text);
MomentsFile load_moments(const std::filesystem::path& path);

struct MomentsOutcome {
  std::string status;  // feasible_with_measure, infeasible, undecided
  MeasureSearch search;
};

MomentsOutcome check_moments(const MomentsFile& file, std::uint64_t seed);
std::string moments_report_json(const MomentsOutcome& outcome);

std::vector<std::string> fixture_names();
// Throws std::invalid_argument listing the valid names.
std::string_view fixture_text(std::string_view name);

struct ExampleCheck {
  bool passed = false;
  std::vector<std::string> lines;
};

ExampleCheck compare_expected(const SolveReport& report, const Expected& expected);

DromOptions merge_options(const FileOptions& file, DromOptions base);

}  // namespace dromsos::io

#endif  // DROMSOS_TOOLS_PROBLEM_IO_HPP_
