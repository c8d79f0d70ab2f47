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

// Dense primal-dual interior-point solver for conic programs in standard
// primal form
//
//   minimize    c'x
//   subject to  A x = b,   x in K = K_1 x ... x K_r,
//
// where each K_i is a free, nonnegative, second-order or positive
// semidefinite block. The dual program is
//
//   maximize    b'y
//   subject to  c - A'y = s,   s in K*.
//
// Positive semidefinite blocks are stored as the scaled lower-triangular
// vectorization svec(X) = (X_00, sqrt2 X_10, ..., sqrt2 X_(n-1)0, X_11, ...),
// column by column, so that svec(X)'svec(Y) = trace(XY).
//
// The method follows the homogeneous self-dual embedding with
// Nesterov-Todd scaling and a Mehrotra predictor-corrector step, so
// infeasible and unbounded programs end with a certificate instead of
// diverging.

#ifndef DROMSOS_CONESOLVE_HPP_
#define DROMSOS_CONESOLVE_HPP_

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dromsos {

enum class ConeKind { kFree, kNonneg, kSecondOrder, kPsd };

struct ConeBlock {
  ConeKind kind;
  // Length for free/nonneg/second-order blocks, matrix side for psd blocks.
  int size;

  // Number of entries the block occupies in the variable vector.
  int dim() const { return kind == ConeKind::kPsd ? size * (size + 1) / 2 : size; }

  static ConeBlock free(int n) { return {ConeKind::kFree, n}; }
  static ConeBlock nonneg(int n) { return {ConeKind::kNonneg, n}; }
  static ConeBlock second_order(int n) { return {ConeKind::kSecondOrder, n}; }
  static ConeBlock psd(int side) { return {ConeKind::kPsd, side}; }
};

std::string to_string(ConeKind kind);

struct ConicProgram {
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<ConeBlock> cones;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_eqs() const { return static_cast<int>(b.size()); }

  // Throws std::invalid_argument naming the first inconsistency.
  void validate() const;
};

struct SolverOptions {
  // Relative primal/dual residual and relative gap for Optimal.
  double tol = 1e-8;
  // Normalized residual an infeasibility certificate must reach.
  double tol_cert = 1e-7;
  int max_iterations = 200;
  // Pivot threshold (relative) below which equality rows count as dependent.
  double presolve_tol = 1e-10;
  double step_fraction = 0.99;
  bool verbose = false;
};

enum class SolverStatus {
  kOptimal,
  kPrimalInfeasible,
  kDualInfeasible,
  kIterLimit,
  kNumericalFailure,
};

std::string to_string(SolverStatus status);

struct SolverSolution {
  SolverStatus status = SolverStatus::kNumericalFailure;
  Eigen::VectorXd x;        // primal variables
  Eigen::VectorXd y;        // equality multipliers
  Eigen::VectorXd s;        // dual slack c - A'y, one segment per cone block
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;  // ||Ax - b|| / (1 + ||b||)
  double dual_residual = 0.0;    // ||c - A'y - s|| / (1 + ||c||)
  double gap = 0.0;              // x's
  // Farkas ray for infeasible statuses: (y, s) with b'y = 1 for
  // kPrimalInfeasible, x with c'x = -1 for kDualInfeasible.
  Eigen::VectorXd certificate;
  double certificate_residual = 0.0;
  int iterations = 0;
  int dropped_rows = 0;

  // Optimal, or a stalled solve whose returned iterate has residuals and
  // relative objective gap at most tol.
  bool near_optimal(double tol) const;

  // Per-block views of x and s.
  Eigen::VectorXd x_block(const ConicProgram& program, std::size_t block) const;
  Eigen::VectorXd s_block(const ConicProgram& program, std::size_t block) const;
};

// Start of each cone block in the variable vector, plus a final entry equal
// to the total length.
std::vector<int> block_offsets(const std::vector<ConeBlock>& cones);

SolverSolution solve(const ConicProgram& program, const SolverOptions& options = {});

// svec helpers for psd blocks.
std::size_t svec_size(int side);
std::size_t svec_index(int side, int i, int j);
Eigen::VectorXd svec(const Eigen::MatrixXd& m);
Eigen::MatrixXd smat(const Eigen::VectorXd& v);

// Plain-text listing of a program in standard form: cone list followed by
// the nonzeros of c, A and b in coordinate form. Intended for diffing against
// external solvers.
void write_conic_listing(const ConicProgram& program, std::ostream& out);

}  // namespace dromsos

#endif  // DROMSOS_CONESOLVE_HPP_
