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

// Quadratic-module memberships as Gram blocks plus coefficient matching,
// sos-convexity, and generic sos objectives.

#ifndef DROMSOS_SOSKIT_HPP_
#define DROMSOS_SOSKIT_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dromsos/conesolve.hpp"
#include "dromsos/model.hpp"
#include "dromsos/polycore.hpp"

namespace dromsos {

// Polynomial whose coefficients are affine expressions in model variables.
class AffinePoly {
 public:
  using TermMap = std::map<Exponent, LinExpr, GrlexLess>;

  explicit AffinePoly(int nvars = 1) : nvars_(nvars) {}
  AffinePoly(const Poly& p);  // NOLINT(google-explicit-constructor)

  int nvars() const { return nvars_; }
  // Largest degree carrying a term (constant or variable part).
  int degree() const;
  const TermMap& terms() const { return terms_; }

  void add(const Exponent& alpha, const LinExpr& e);
  // this += p * e.
  void add_scaled(const Poly& p, const LinExpr& e);
  AffinePoly& operator+=(const AffinePoly& other);

  // Substitutes model values.
  Poly eval(const Eigen::VectorXd& values) const;

 private:
  int nvars_;
  TermMap terms_;
};

// Q(c)_{2 d1}: sums sigma_0 + sum_i c_i sigma_i with deg(c_i sigma_i) <= 2 d1.
class QuadraticModuleSpec {
 public:
  // Default multiplier degrees 2 (d1 - ceil(deg c_i / 2)).
  QuadraticModuleSpec(int nvars, std::vector<Poly> generators, int d1);

  int nvars() const { return nvars_; }
  int half_degree() const { return d1_; }
  int total_degree() const { return 2 * d1_; }
  // Generator list including the unit generator at index 0.
  const std::vector<Poly>& generators() const { return generators_; }
  std::size_t size() const { return generators_.size(); }
  int multiplier_degree(std::size_t i) const { return multiplier_degrees_.at(i); }
  // Overrides generator i's sos multiplier degree (even, nonnegative and
  // deg(c_i) + degree <= 2 d1). Index 0 is the unit generator.
  void set_multiplier_degree(std::size_t i, int degree);

 private:
  int nvars_;
  int d1_;
  std::vector<Poly> generators_;
  std::vector<int> multiplier_degrees_;
};

// d1 = max(ceil(deg f / 2), ceil(deg c_i / 2)).
int qm_half_degree(const Poly& f, std::span<const Poly> c);

struct GramCertificate {
  std::vector<Poly> generators;                 // multiplier of each block
  std::vector<std::vector<Exponent>> bases;     // row/column monomials per block
  std::vector<Eigen::MatrixXd> blocks;

  // sum_i generators[i] * (b_i' G_i b_i).
  Poly reassemble() const;
  double min_eigenvalue() const;
  // max |coefficient| of reassemble() - target.
  double residual(const Poly& target) const;
};

// Handles into a model for one compiled membership.
struct QmBlock {
  std::vector<std::vector<int>> gram_vars;  // svec-ordered model variables per generator
  std::vector<int> gram_constraints;        // cone index per generator
  std::vector<int> equalities;              // equality index per monomial of basis(n, 2 d1)

  GramCertificate certificate(const QuadraticModuleSpec& qm, const Eigen::VectorXd& values) const;
  // Multipliers of the coefficient-matching equalities, as a tms of degree 2 d1.
  Tms matching_multipliers(const QuadraticModuleSpec& qm, const ModelSolution& solution) const;
};

// Adds Gram blocks and the equalities target - sum_i c_i [x]' G_i [x] = 0,
// one per monomial of degree <= 2 d1.
QmBlock compile_qm_membership(ConicModel& model, const AffinePoly& target, const QuadraticModuleSpec& qm);

enum class SosConvexity { kSosConvex, kNotSosConvex, kIndeterminate };

std::string to_string(SosConvexity status);

struct SosConvexityResult {
  SosConvexity status = SosConvexity::kIndeterminate;
  std::optional<GramCertificate> certificate;  // over (x, v), v the direction variables
  SolverStatus solver_status = SolverStatus::kNumericalFailure;

  bool sos_convex() const { return status == SosConvexity::kSosConvex; }
};

// Decides whether v' Hess f(x) v is sos in (x, v), using Gram monomials x^a v_j.
SosConvexityResult sos_convexity_check(const Poly& f, const SolverOptions& options = {});

// [xi]_{t0+1}' Q'Q [xi]_{t0+1} with Q standard normal from the seeded generator.
Poly random_sos(std::uint64_t seed, int p, int t0);

}  // namespace dromsos

#endif  // DROMSOS_SOSKIT_HPP_
