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

// dromsos: solve, examples, check-moments.
//
// Exit codes: 0 certified, 1 input error, 2 undecided, 3 infeasible or
// unbounded.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dromsos/drom.hpp"
#include "problem_io.hpp"

namespace {

using dromsos::DromOptions;
using dromsos::SolveReport;

constexpr int kInputError = 1;

struct Flags {
  std::optional<int> order;
  std::optional<int> max_order;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<double> ball_radius;
  std::string report;
  std::string dump_conic;
};

void add_solve_flags(CLI::App* app, Flags* flags) {
  app->add_option("--order", flags->order, "initial relaxation order k (default ceil(d/2))");
  app->add_option("--max-order", flags->max_order, "largest relaxation order (default initial k + 3)");
  app->add_option("--seed", flags->seed, "seed of the generic completion objective (default 42)");
  app->add_option("--tol", flags->tol, "certificate tolerance (default 1e-6)");
  app->add_option("--ball-radius", flags->ball_radius, "append N - |xi|^2 to the support generators");
  app->add_option("--report", flags->report, "write the JSON report here instead of standard output");
  app->add_option("--dump-conic", flags->dump_conic, "write the initial-order conic program listing here");
}

DromOptions options_for(const dromsos::io::FileOptions& file, const Flags& flags) {
  DromOptions options = dromsos::io::merge_options(file, DromOptions{});
  if (flags.order) options.order = flags.order;
  if (flags.max_order) options.max_order = flags.max_order;
  if (flags.seed) options.seed = *flags.seed;
  if (flags.tol) options.tol = *flags.tol;
  if (flags.ball_radius) options.ball_radius = flags.ball_radius;
  return options;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void dump_conic(const dromsos::DromProblem& problem, const DromOptions& options, const std::string& path) {
  const dromsos::DromProblem prepared = dromsos::apply_options(problem, options);
  const dromsos::Relaxation relaxation = dromsos::assemble_order_k(prepared, dromsos::initial_order(prepared, options));
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  dromsos::write_conic_listing(relaxation.model.compile(), out);
}

SolveReport timed_run(const dromsos::DromProblem& problem, const DromOptions& options, double* seconds) {
  const auto start = std::chrono::steady_clock::now();
  SolveReport report = dromsos::run(problem, options);
  *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

int cmd_solve(const std::string& path, const Flags& flags) {
  const dromsos::io::ProblemFile file = dromsos::io::load_problem(path);
  const DromOptions options = options_for(file.options, flags);
  if (!flags.dump_conic.empty()) dump_conic(file.problem, options, flags.dump_conic);
  double seconds = 0.0;
  const SolveReport report = timed_run(file.problem, options, &seconds);
  write_output(flags.report, dromsos::io::report_json(report, file.problem, seconds));
  if (!flags.report.empty()) {
    std::cout << to_string(report.status) << " k=" << report.order_k << " F*=" << report.optimal_value << "\n";
  }
  return dromsos::exit_code(report.status);
}

int cmd_examples(const std::optional<std::string>& name, const Flags& flags) {
  if (!name) {
    for (const std::string& n : dromsos::io::fixture_names()) {
      const dromsos::io::ProblemFile file = dromsos::io::parse_problem(dromsos::io::fixture_text(n));
      std::cout << n << "  " << file.description << "\n";
    }
    return 0;
  }
  const dromsos::io::ProblemFile file = dromsos::io::parse_problem(dromsos::io::fixture_text(*name));
  const DromOptions options = options_for(file.options, flags);
  double seconds = 0.0;
  const SolveReport report = timed_run(file.problem, options, &seconds);
  if (!flags.report.empty()) write_output(flags.report, dromsos::io::report_json(report, file.problem, seconds));
  if (!file.expected) {
    std::cout << *name << " " << to_string(report.status) << "\n";
    return dromsos::exit_code(report.status);
  }
  const dromsos::io::ExampleCheck check = dromsos::io::compare_expected(report, *file.expected);
  std::cout << *name << " (" << seconds << " s)\n";
  for (const std::string& line : check.lines) std::cout << "  " << line << "\n";
  std::cout << (check.passed ? "PASS" : "FAIL") << "\n";
  return check.passed ? 0 : 2;
}

int cmd_check_moments(const std::string& path, const Flags& flags) {
  dromsos::io::MomentsFile file = dromsos::io::load_moments(path);
  if (flags.order) file.order = flags.order;
  if (flags.max_order) file.max_order = flags.max_order;
  const std::uint64_t seed = flags.seed.value_or(file.seed.value_or(42));
  const dromsos::io::MomentsOutcome outcome = dromsos::io::check_moments(file, seed);
  write_output(flags.report, dromsos::io::moments_report_json(outcome));
  if (outcome.status == "feasible_with_measure") return 0;
  return outcome.status == "infeasible" ? 3 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributionally robust optimization with moment ambiguity sets"};
  app.require_subcommand(1);

  Flags solve_flags;
  std::string solve_path;
  CLI::App* solve = app.add_subcommand("solve", "solve a problem file");
  solve->add_option("problem", solve_path, "problem JSON file")->required();
  add_solve_flags(solve, &solve_flags);

  Flags example_flags;
  std::optional<std::string> example_name;
  CLI::App* examples = app.add_subcommand("examples", "list or run the bundled examples");
  examples->add_option("name", example_name, "example to run");
  add_solve_flags(examples, &example_flags);

  Flags moment_flags;
  std::string moment_path;
  CLI::App* moments = app.add_subcommand("check-moments", "search for a representing measure of a moment vector");
  moments->add_option("file", moment_path, "moment JSON file")->required();
  moments->add_option("--order", moment_flags.order, "first completion order");
  moments->add_option("--max-order", moment_flags.max_order, "last completion order");
  moments->add_option("--seed", moment_flags.seed, "seed of the generic completion objective (default 42)");
  moments->add_option("--report", moment_flags.report, "write the JSON report here instead of standard output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (*solve) return cmd_solve(solve_path, solve_flags);
    if (*examples) return cmd_examples(example_name, example_flags);
    return cmd_check_moments(moment_path, moment_flags);
  } catch (const dromsos::io::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
}
