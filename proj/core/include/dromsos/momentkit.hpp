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

// Moment and localizing matrices, flat truncation, atom extraction and the
// moment completion subproblem.

#ifndef DROMSOS_MOMENTKIT_HPP_
#define DROMSOS_MOMENTKIT_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dromsos/conesolve.hpp"
#include "dromsos/model.hpp"
#include "dromsos/polycore.hpp"

namespace dromsos {

inline constexpr double kRankTol = 1e-6;
inline constexpr double kExtractTol = 1e-6;
inline constexpr double kFeasTol = 1e-6;
inline constexpr double kClusterTol = 1e-5;
inline constexpr double kMinWeight = 1e-8;
inline constexpr double kCertTol = 1e-7;
// A stalled completion solve whose best iterate meets this accuracy is still
// handed to the flat-truncation test, which re-verifies it.
inline constexpr double kNearOptimalTol = 1e-6;

class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// S = { u : g_i(u) >= 0 }.
class SemiAlgSet {
 public:
  explicit SemiAlgSet(int nvars, std::vector<Poly> generators = {});

  int nvars() const { return nvars_; }
  const std::vector<Poly>& generators() const { return generators_; }
  std::size_t size() const { return generators_.size(); }
  // max_i deg(g_i); 0 when there are no generators.
  int degree() const;
  // max(1, max_i ceil(deg(g_i) / 2)).
  int half_degree() const;

  bool contains(std::span<const double> u, double tol = kFeasTol) const;
  // min_i g_i(u), +inf when there are no generators.
  double min_value(std::span<const double> u) const;

  SemiAlgSet with_generator(Poly g) const;

 private:
  int nvars_;
  std::vector<Poly> generators_;
};

struct AtomicMeasure {
  std::vector<Eigen::VectorXd> atoms;
  std::vector<double> weights;

  std::size_t size() const { return atoms.size(); }
  double mass() const;
};

// (position in the tms, weight).
using LinearFunctional = std::vector<std::pair<std::size_t, double>>;

// Symmetric matrix whose entries are linear functionals of a tms.
class LinearMatrixMap {
 public:
  LinearMatrixMap(int side, std::size_t tms_length);

  int side() const { return side_; }
  std::size_t tms_length() const { return tms_length_; }
  const LinearFunctional& entry(int i, int j) const;
  // Adds weight * z_position to entries (i, j) and (j, i).
  void add(int i, int j, std::size_t position, double weight);

  Eigen::MatrixXd instantiate(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd instantiate(const Tms& z) const { return instantiate(z.values()); }
  // Entries as model expressions, with tms position k mapped to variable
  // var_of_position[k].
  std::vector<std::vector<LinExpr>> expressions(std::span<const int> var_of_position) const;

 private:
  int side_;
  std::size_t tms_length_;
  std::vector<LinearFunctional> entries_;  // row-major, both triangles
};

Tms dirac_moments(std::span<const double> u, int degree);
Tms dirac_moments(const Eigen::VectorXd& u, int degree);
Tms moments(const AtomicMeasure& mu, int degree);
// Accepts the zero measure.
Tms moments(const AtomicMeasure& mu, int nvars, int degree);

Eigen::MatrixXd moment_matrix(const Tms& z, int k);
Eigen::MatrixXd localizing_matrix(const Poly& q, const Tms& z, int k);

// Symbolic L_q^{(k)} over tms of degree `tms_degree` (>= 2k).
LinearMatrixMap localizing_map(const Poly& q, int k, int tms_degree);
// M_k followed by one localizer per generator; z in S[g]_{2k} iff all are psd.
std::vector<LinearMatrixMap> compile_cone_sg(const SemiAlgSet& g, int two_k);
std::vector<LinearMatrixMap> compile_cone_sg(const SemiAlgSet& g, int two_k, int tms_degree);

// Rank with singular values below rel_tol * (largest) counted as zero.
int numerical_rank(const Eigen::MatrixXd& m, double rel_tol = kRankTol);

struct FlatOrder {
  int s;
  int r;
};

// Smallest s in [max(d0, t0), deg(omega)/2] with rank M_{s-d0} = rank M_s.
std::optional<FlatOrder> check_flat(const Tms& omega, int d0, int t0);

struct ExtractOptions {
  std::uint64_t seed = 42;
  double tol = kExtractTol;  // scaled by max(1, |omega|_inf)
};

// Throws ExtractionError when the factorization or the eigenvalue step fails,
// or when the recovered measure misses omega|_{2s} by more than the tolerance.
AtomicMeasure extract_atoms(const Tms& omega, int s, int r, const ExtractOptions& options = {});

// max_alpha |moments(mu)_alpha - z_alpha| over the first `degree` grades.
double moment_error(const AtomicMeasure& mu, const Tms& z, int degree);

// Lawson-Hanson nonnegative least squares: argmin ||A x - b|| s.t. x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

// The two Hankel conditions characterizing moments of measures on [a1, a2]
// for a univariate tms of degree 2k: M_k[z] psd and
// (a1 + a2) H_1[z] - a1 a2 H_0[z] - H_2[z] psd, with H_j[z]_{il} = z_{i+l+j}.
std::vector<LinearMatrixMap> univariate_interval_constraints(double a1, double a2, int k);

enum class AtmpStatus { kFeasible, kInfeasible, kInconclusive };

std::string to_string(AtmpStatus status);

struct AtmpResult {
  AtmpStatus status = AtmpStatus::kInconclusive;
  std::optional<Tms> omega;
  double objective = 0.0;
  SolverStatus solver_status = SolverStatus::kNumericalFailure;
  double certificate_residual = 0.0;
  int iterations = 0;
};

// minimize <R, omega> s.t. omega|_d = y, omega in S[g]_{2l}.
AtmpResult atmp_solve(const Tms& y, const SemiAlgSet& g, const Poly& R, int l,
                      const SolverOptions& options = {});

struct MeasureSearch {
  // kFeasible with a measure, kInfeasible when some completion is
  // infeasible, kInconclusive when the order budget runs out.
  AtmpStatus status = AtmpStatus::kInconclusive;
  std::optional<AtomicMeasure> measure;
  std::optional<FlatOrder> flat;
  int l = 0;  // last completion order tried
  int iterations = 0;
};

// Completion orders l = l_first .. l_last: solve the completion problem,
// test flatness from t0, extract on success. A y with |y|_inf <= extract.tol
// is represented by the zero measure without solving.
MeasureSearch find_representing_measure(const Tms& y, const SemiAlgSet& g, const Poly& R, int t0, int l_first,
                                        int l_last, const ExtractOptions& extract = {},
                                        const SolverOptions& options = {});

}  // namespace dromsos

#endif  // DROMSOS_MOMENTKIT_HPP_
