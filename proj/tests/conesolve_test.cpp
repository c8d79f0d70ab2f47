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

#include "dromsos/conesolve.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "random_lp.hpp"

namespace dromsos {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST(Svec, RoundTripAndInnerProduct) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int n = 1; n <= 6; ++n) {
    MatrixXd a(n, n), b(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        a(i, j) = normal(rng);
        b(i, j) = normal(rng);
      }
    }
    a = (a + a.transpose()).eval();
    b = (b + b.transpose()).eval();
    EXPECT_LT((smat(svec(a)) - a).norm(), 1e-12);
    EXPECT_NEAR(svec(a).dot(svec(b)), (a * b).trace(), 1e-10);
    EXPECT_EQ(svec(a).size(), static_cast<Eigen::Index>(svec_size(n)));
  }
  EXPECT_EQ(svec_index(3, 0, 0), 0u);
  EXPECT_EQ(svec_index(3, 2, 0), 2u);
  EXPECT_EQ(svec_index(3, 1, 1), 3u);
  EXPECT_EQ(svec_index(3, 2, 2), 5u);
  EXPECT_EQ(svec_index(3, 1, 2), svec_index(3, 2, 1));
}

// min x s.t. [[x,1],[1,x]] psd, written as X = [[x,1],[1,x]] with x free.
TEST(Solve, TwoByTwoPsd) {
  ConicProgram p;
  p.cones = {ConeBlock::free(1), ConeBlock::psd(2)};
  p.c = VectorXd::Zero(4);
  p.c[0] = 1.0;
  p.A = MatrixXd::Zero(3, 4);
  p.b = VectorXd::Zero(3);
  // X00 - x = 0, X11 - x = 0, X10 = 1.
  p.A(0, 1) = 1.0;
  p.A(0, 0) = -1.0;
  p.A(1, 3) = 1.0;
  p.A(1, 0) = -1.0;
  p.A(2, 2) = 1.0 / std::sqrt(2.0);
  p.b[2] = 1.0;
  const SolverSolution sol = solve(p);
  ASSERT_EQ(sol.status, SolverStatus::kOptimal);
  EXPECT_NEAR(sol.x[0], 1.0, 1e-7);
  EXPECT_NEAR(sol.primal_objective, 1.0, 1e-7);
  EXPECT_NEAR(sol.dual_objective, 1.0, 1e-7);
}

TEST(Solve, SimplexPicksSmallestCost) {
  const VectorXd c = (VectorXd(5) << 3.0, -1.0, 2.0, 0.5, -0.25).finished();
  ConicProgram p;
  p.cones = {ConeBlock::nonneg(5)};
  p.c = c;
  p.A = MatrixXd::Ones(1, 5);
  p.b = VectorXd::Ones(1);
  const SolverSolution sol = solve(p);
  ASSERT_EQ(sol.status, SolverStatus::kOptimal);
  EXPECT_NEAR(sol.primal_objective, -1.0, 1e-7);
  EXPECT_NEAR(sol.x[1], 1.0, 1e-6);
}

// min t s.t. ||(1, 2)|| <= t: second-order block (t, u1, u2) with u fixed.
TEST(Solve, SecondOrderNorm) {
  ConicProgram p;
  p.cones = {ConeBlock::second_order(3)};
  p.c = (VectorXd(3) << 1.0, 0.0, 0.0).finished();
  p.A = MatrixXd::Zero(2, 3);
  p.A(0, 1) = 1.0;
  p.A(1, 2) = 1.0;
  p.b = (VectorXd(2) << 1.0, 2.0).finished();
  const SolverSolution sol = solve(p);
  ASSERT_EQ(sol.status, SolverStatus::kOptimal);
  EXPECT_NEAR(sol.primal_objective, std::sqrt(5.0), 1e-7);
}

TEST(Solve, DetectsPrimalInfeasible) {
  // x >= 0, x1 + x2 = -1.
  ConicProgram p;
  p.cones = {ConeBlock::nonneg(2)};
  p.c = VectorXd::Ones(2);
  p.A = MatrixXd::Ones(1, 2);
  p.b = -VectorXd::Ones(1);
  const SolverSolution sol = solve(p);
  ASSERT_EQ(sol.status, SolverStatus::kPrimalInfeasible);
  EXPECT_LE(sol.certificate_residual, 1e-7);
  EXPECT_NEAR(p.b.dot(sol.certificate), 1.0, 1e-9);
  // -A'y must lie in the dual cone.
  EXPECT_GE((-(p.A.transpose() * sol.certificate)).minCoeff(), -1e-7);
}

TEST(Solve, DetectsDualInfeasible) {
  // min -x1 s.t. x1 - x2 = 0, x >= 0: unbounded.
  ConicProgram p;
  p.cones = {ConeBlock::nonneg(2)};
  p.c = (VectorXd(2) << -1.0, 0.0).finished();
  p.A = (MatrixXd(1, 2) << 1.0, -1.0).finished();
  p.b = VectorXd::Zero(1);
  const SolverSolution sol = solve(p);
  ASSERT_EQ(sol.status, SolverStatus::kDualInfeasible);
  EXPECT_NEAR(p.c.dot(sol.certificate), -1.0, 1e-9);
  EXPECT_LE(sol.certificate_residual, 1e-7);
}

TEST(Solve, InconsistentDependentRowsAreInfeasible) {
  ConicProgram p;
  p.cones = {ConeBlock::free(2)};
  p.c = VectorXd::Zero(2);
  p.A = (MatrixXd(2, 2) << 1.0, 1.0, 2.0, 2.0).finished();
  p.b = (VectorXd(2) << 1.0, 3.0).finished();
  const SolverSolution sol = solve(p);
  EXPECT_EQ(sol.status, SolverStatus::kPrimalInfeasible);
  EXPECT_EQ(sol.dropped_rows, 1);
  EXPECT_NEAR(p.b.dot(sol.certificate), 1.0, 1e-12);
  EXPECT_LT((p.A.transpose() * sol.certificate).norm(), 1e-9);
}

TEST(Solve, RedundantRowsAreDropped) {
  ConicProgram p;
  p.cones = {ConeBlock::nonneg(3)};
  p.c = (VectorXd(3) << 1.0, 2.0, 3.0).finished();
  p.A = (MatrixXd(2, 3) << 1.0, 1.0, 1.0, 2.0, 2.0, 2.0).finished();
  p.b = (VectorXd(2) << 1.0, 2.0).finished();
  const SolverSolution sol = solve(p);
  ASSERT_EQ(sol.status, SolverStatus::kOptimal);
  EXPECT_EQ(sol.dropped_rows, 1);
  EXPECT_NEAR(sol.primal_objective, 1.0, 1e-7);
}

TEST(Solve, RandomLpsWithPlantedBasis) {
  std::mt19937_64 rng(20261019);
  for (int trial = 0; trial < 100; ++trial) {
    const testing_util::PlantedLp lp = testing_util::planted_lp(rng);
    const SolverSolution sol = solve(lp.program);
    ASSERT_EQ(sol.status, SolverStatus::kOptimal) << "trial " << trial;
    EXPECT_NEAR(sol.primal_objective, lp.optimal_value, 1e-7) << "trial " << trial;
    EXPECT_NEAR(sol.dual_objective, lp.optimal_value, 1e-7) << "trial " << trial;
  }
}

// Random feasible SDPs: min <C, X> s.t. <A_i, X> = b_i, X psd, built with a
// strictly feasible primal and dual point so strong duality holds.
TEST(Solve, RandomSdpsSatisfyKkt) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 5;
    const int m = 1 + trial % 4;
    const int t = static_cast<int>(svec_size(n));
    auto random_pd = [&]() {
      MatrixXd g(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) g(i, j) = normal(rng);
      }
      return MatrixXd(g * g.transpose() + 0.1 * MatrixXd::Identity(n, n));
    };
    ConicProgram p;
    p.cones = {ConeBlock::psd(n)};
    p.A.resize(m, t);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < t; ++j) p.A(i, j) = normal(rng);
    }
    p.b = p.A * svec(random_pd());
    VectorXd y0(m);
    for (int i = 0; i < m; ++i) y0[i] = normal(rng);
    p.c = p.A.transpose() * y0 + svec(random_pd());
    const SolverSolution sol = solve(p);
    ASSERT_EQ(sol.status, SolverStatus::kOptimal) << "trial " << trial;
    EXPECT_LE(sol.primal_residual, 1e-8);
    EXPECT_LE(sol.dual_residual, 1e-8);
    EXPECT_LE(std::abs(sol.primal_objective - sol.dual_objective), 1e-7 * (1.0 + std::abs(sol.primal_objective)));
    EXPECT_GE(sol.primal_objective - sol.dual_objective, -1e-7 * (1.0 + std::abs(sol.primal_objective)));
  }
}

TEST(Solve, DeterministicIterates) {
  std::mt19937_64 rng(11);
  const testing_util::PlantedLp lp = testing_util::planted_lp(rng);
  const SolverSolution a = solve(lp.program);
  const SolverSolution b = solve(lp.program);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
}

TEST(Listing, NamesEveryBlock) {
  ConicProgram p;
  p.cones = {ConeBlock::free(1), ConeBlock::psd(2)};
  p.c = VectorXd::Zero(4);
  p.A = MatrixXd::Identity(1, 4);
  p.b = VectorXd::Ones(1);
  std::ostringstream out;
  write_conic_listing(p, out);
  const std::string text = out.str();
  EXPECT_NE(text.find("free 1"), std::string::npos);
  EXPECT_NE(text.find("psd 2"), std::string::npos);
  EXPECT_NE(text.find("0 0 1"), std::string::npos);
}

TEST(Validate, RejectsMismatchedCones) {
  ConicProgram p;
  p.cones = {ConeBlock::nonneg(2)};
  p.c = VectorXd::Zero(3);
  p.A = MatrixXd::Zero(0, 3);
  p.b = VectorXd::Zero(0);
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace dromsos
