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

// Small modeling layer over the conic solver. A model has free scalar
// variables w, affine equalities e(w) = 0 and affine cone memberships
// e(w) in K. It is compiled into the dual of a standard-form program, so the
// model variables become the solver's equality multipliers and the
// constraint multipliers come back as the solver's primal vector.
//
// Multiplier sign convention: for `minimize q(w)` the multipliers X_j make
// q(w) - sum_j <X_j, e_j(w)> stationary; for `maximize q(w)` they make
// q(w) + sum_j <X_j, e_j(w)> stationary. Cone multipliers lie in the (self-)
// dual cone; equality multipliers are free.

#ifndef DROMSOS_MODEL_HPP_
#define DROMSOS_MODEL_HPP_

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dromsos/conesolve.hpp"

namespace dromsos {

struct LinExpr {
  std::vector<std::pair<int, double>> terms;  // (variable, coefficient); repeats add up
  double constant = 0.0;

  LinExpr() = default;
  LinExpr(double c) : constant(c) {}  // NOLINT(google-explicit-constructor)
  static LinExpr var(int index, double coefficient = 1.0);

  LinExpr& operator+=(const LinExpr& other);
  LinExpr& operator-=(const LinExpr& other);
  LinExpr& operator*=(double factor);
  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator*(LinExpr a, double s) { return a *= s; }
  friend LinExpr operator*(double s, LinExpr a) { return a *= s; }
  friend LinExpr operator-(LinExpr a) { return a *= -1.0; }

  double eval(const Eigen::VectorXd& values) const;
};

enum class ModelStatus { kOptimal, kInfeasible, kUnbounded, kIterLimit, kNumericalFailure };

std::string to_string(ModelStatus status);

struct ModelSolution {
  ModelStatus status = ModelStatus::kNumericalFailure;
  double objective = 0.0;
  Eigen::VectorXd values;                  // model variables
  std::vector<double> equality_duals;      // one per equality
  std::vector<Eigen::VectorXd> cone_duals; // one per cone constraint (svec for psd)
  SolverSolution raw;

  double value(const LinExpr& e) const { return e.eval(values); }
};

class ConicModel {
 public:
  int num_variables() const { return num_vars_; }
  int add_variable();
  // Returns the index of the first of `count` consecutive new variables.
  int add_variables(int count);

  // Each returns the constraint's index within its group.
  int add_equality(const LinExpr& e);
  int add_nonneg(const std::vector<LinExpr>& rows);
  // rows[0] >= ||rows[1..]||.
  int add_second_order(const std::vector<LinExpr>& rows);
  // Symmetric matrix given by its lower triangle: entry(i, j) for i >= j.
  int add_psd(int side, const std::vector<std::vector<LinExpr>>& entries);

  // Convenience: a new psd matrix variable of the given side, returned as the
  // indices of its svec-ordered lower-triangle entries (off-diagonal
  // variables hold the plain matrix entry, not the scaled one).
  std::vector<int> add_psd_variable(int side, int* constraint = nullptr);

  void minimize(const LinExpr& objective);
  void maximize(const LinExpr& objective);

  std::size_t num_equalities() const { return equalities_.size(); }
  std::size_t num_cones() const { return cones_.size(); }

  ConicProgram compile() const;
  ModelSolution solve(const SolverOptions& options = {}) const;

 private:
  struct Cone {
    ConeBlock block;
    std::vector<LinExpr> rows;  // already svec-scaled for psd blocks
  };

  int num_vars_ = 0;
  std::vector<LinExpr> equalities_;
  std::vector<Cone> cones_;
  LinExpr objective_;
  bool maximize_ = false;
};

}  // namespace dromsos

#endif  // DROMSOS_MODEL_HPP_
