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

// Distributionally robust moment problems: the problem model, conic hulls of
// the moment set Y, the order-k relaxation, and the certifying driver.
//
//   min f(x)  s.t.  inf_{mu in M} E_mu[h(x, xi)] >= 0,  c(x) >= 0,
//   h(x, xi) = (A x + b)' [xi]_d,
//   M = { mu : supp(mu) in S(g), int [xi]_d dmu in Y }.

#ifndef DROMSOS_DROM_HPP_
#define DROMSOS_DROM_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "dromsos/conesolve.hpp"
#include "dromsos/model.hpp"
#include "dromsos/momentkit.hpp"
#include "dromsos/polycore.hpp"
#include "dromsos/soskit.hpp"

namespace dromsos {

class RecoveryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// {y : T y + u >= 0, E y + e = 0}. Homogenized: T y + s u >= 0, E y + s e = 0.
struct PolyhedralY {
  Eigen::MatrixXd T;
  Eigen::VectorXd u;
  Eigen::MatrixXd E;
  Eigen::VectorXd e;
};

// {y : sum_a y_a A_a + B psd}. Homogenized: sum_a y_a A_a + s B psd.
struct LmiY {
  std::vector<Eigen::MatrixXd> coefficients;  // one per tms entry, grlex order
  Eigen::MatrixXd B;
  bool bounded = false;
};

// rows y + offset (first entry >= norm of the rest). Homogenized: rows y + s offset.
struct SecondOrderY {
  Eigen::MatrixXd rows;
  Eigen::VectorXd offset;
};

struct ConeYBlock {
  std::variant<PolyhedralY, LmiY, SecondOrderY> data;
  // True when the data already describes the closed cone, so offsets are
  // not multiplied by s and must be zero.
  bool homogenized = false;

  static ConeYBlock polyhedral(Eigen::MatrixXd T, Eigen::VectorXd u, Eigen::MatrixXd E = {}, Eigen::VectorXd e = {},
                               bool homogenized = false);
  static ConeYBlock lmi(std::vector<Eigen::MatrixXd> coefficients, Eigen::MatrixXd B, bool bounded);
  static ConeYBlock second_order(Eigen::MatrixXd rows, Eigen::VectorXd offset, bool homogenized = false);

  std::string kind() const;
  // Throws std::invalid_argument on inconsistent shapes or an lmi block
  // without the bounded flag.
  void validate(std::size_t y_dim) const;
  // Violation of (y, s) in the homogenized block: largest constraint
  // violation, 0 when satisfied.
  double residual(const Eigen::VectorXd& y, double s) const;
};

struct DromProblem {
  int n = 0;  // decision dimension
  int p = 0;  // random dimension
  int d = 0;  // degree of h in xi
  Poly f{1};
  std::vector<Poly> c;     // c_i(x) >= 0
  std::vector<Poly> c_eq;  // c_eq_j(x) = 0
  SemiAlgSet g{1};
  Eigen::MatrixXd A;  // C(p+d, d) x n, rows in grlex order of [xi]_d
  Eigen::VectorXd b;
  std::vector<ConeYBlock> y_blocks;

  std::size_t y_dim() const { return monomial_count(p, d); }
  // h as a polynomial in (x, xi), x first.
  Poly h() const;
  // (A x + b) as a tms entry-wise evaluation: coefficient vector of h(x, .).
  Eigen::VectorXd h_coefficients(const Eigen::VectorXd& x) const;
  // X-generators for the quadratic module, equalities as (h, -h) pairs.
  std::vector<Poly> x_generators() const;
  // Throws std::invalid_argument / DimensionError on inconsistent data.
  void validate() const;
};

// (A, b) of a polynomial h in (x, xi), x first, affine in x. Throws
// DegreeError when h is not affine in x or exceeds degree d in xi.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> affine_in_x(const Poly& h, int n, int p, int d);

// The epigraph form of min_x max_{mu in M} E_mu[F(x, xi)]: decision (x0, x),
// objective x0, h = x0 - F. F is a polynomial in (x, xi), x first, affine in
// x. Requires a polyhedral equality row pinning y_0 to the mass s.
DromProblem minmax_to_drom(const Poly& F, int n, int p, std::vector<Poly> c, std::vector<Poly> c_eq,
                           const SemiAlgSet& g, std::vector<ConeYBlock> y_blocks);

struct YBlockHandles {
  std::vector<int> nonneg;        // model cone index per block, -1 if absent
  std::vector<int> psd;           // lmi blocks
  std::vector<int> second_order;  // second-order blocks
  std::vector<std::vector<int>> equalities;
};

// Adds the homogenized blocks over model variables y_vars and s_var.
YBlockHandles build_cone_y(ConicModel& model, const std::vector<ConeYBlock>& blocks, std::span<const int> y_vars,
                           int s_var);

struct IndexMaps {
  int k = 0;
  int gamma = -1;
  int s = -1;
  std::vector<int> y;  // model variable per entry of y
  std::vector<int> z;  // model variable per entry of z
  std::vector<int> moment_constraints;
  std::vector<int> y_equalities;  // y = z|_d
  YBlockHandles y_blocks;
  QmBlock qm;
};

struct Relaxation {
  ConicModel model;
  QuadraticModuleSpec qm;
  IndexMaps maps;
};

// Order-k dual program: maximize gamma - <b, y> s.t. f - y'A x - gamma in
// Q(c)_{2 d1}, z in S[g]_{2k}, y = z|_d, y in closure(cone(Y)).
Relaxation assemble_order_k(const DromProblem& problem, int k);

struct Recovery {
  Eigen::VectorXd x;
  Tms w;
};

// w from the coefficient-matching multipliers normalized to w_0 = 1, x its
// degree-one coordinates. Throws RecoveryError when |w_0| < 1e-10.
Recovery recover_primal(const ModelSolution& solution, const Relaxation& relaxation);

struct Certificates {
  std::vector<double> constraint_values;  // c_i(x*) then c_eq_j(x*)
  double feasibility = 0.0;               // largest violation of X
  double objective_match = 0.0;           // |<f, w*> - f(x*)|
  double duality_gap = 0.0;               // |<f, w*> - F*|
  double complementarity = 0.0;           // |(A x* + b)' y*|
  double tol = 1e-6;
  double scale = 1.0;  // max(1, |F*|, |y*|_inf); multiplies tol for the gap terms

  bool passed() const;
};

Certificates certify(const Eigen::VectorXd& x, const Tms& w, double value, const Tms& y, const DromProblem& problem,
                     double tol = 1e-6);

enum class Tightness { kCertified, kUndecided, kNoMeasure };
enum class RunStatus { kSolved, kUndecided, kInfeasibleOrUnbounded, kSolverFailure };

std::string to_string(Tightness t);
std::string to_string(RunStatus s);

struct DromOptions {
  std::optional<int> order;      // initial k; default ceil(d/2) raised to the support degree
  std::optional<int> max_order;  // default initial k + 3
  int extra_completion_orders = 3;  // l runs over t0+1 .. t0+1+this
  std::uint64_t seed = 42;
  double tol = 1e-6;
  std::optional<double> ball_radius;  // appends N - |xi|^2 to g
  SolverOptions solver;
};

struct OrderAttempt {
  int k = 0;
  ModelStatus status = ModelStatus::kNumericalFailure;
  double value = 0.0;
  int iterations = 0;
  AtmpStatus atmp = AtmpStatus::kInconclusive;
  int l = 0;  // last completion order tried
  bool flat = false;
};

struct SolveReport {
  RunStatus status = RunStatus::kSolverFailure;
  Tightness tightness = Tightness::kUndecided;
  int order_k = 0;
  double optimal_value = 0.0;
  double gamma = 0.0;
  Eigen::VectorXd x;
  std::optional<Tms> y;
  std::optional<Tms> z;
  std::optional<Tms> w;
  std::optional<AtomicMeasure> worst_case_measure;
  double measure_error = 0.0;   // |int [xi]_d dmu - y*|_inf
  double measure_y_residual = 0.0;  // moments of mu in closure(cone(Y))
  std::optional<Certificates> certificates;
  std::vector<OrderAttempt> attempts;
  int solver_iterations = 0;
  std::uint64_t seed = 42;
  std::string message;
};

// The problem run() solves: g extended by the ball generator when requested.
DromProblem apply_options(const DromProblem& problem, const DromOptions& options);
// First relaxation order run() tries.
int initial_order(const DromProblem& problem, const DromOptions& options);

SolveReport run(const DromProblem& problem, const DromOptions& options = {});

// 0 solved, 2 undecided or solver failure, 3 infeasible or unbounded.
int exit_code(RunStatus status);

}  // namespace dromsos

#endif  // DROMSOS_DROM_HPP_
