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

#include "dromsos/momentkit.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

namespace dromsos {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Poly random_poly(std::mt19937_64& rng, int p, int degree) {
  std::normal_distribution<double> normal;
  Poly q(p);
  for (const Exponent& a : basis(p, degree)) q.add_term(a, normal(rng));
  return q;
}

// Sum of squares of random polynomials of degree t: a generic sos objective.
Poly random_square_sum(std::mt19937_64& rng, int p, int t) {
  Poly r(p);
  for (std::size_t i = 0; i < monomial_count(p, t); ++i) {
    const Poly q = random_poly(rng, p, t);
    r += q * q;
  }
  return r;
}

VectorXd vec(double a) { return VectorXd::Constant(1, a); }

double min_eig(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(m).eigenvalues().minCoeff();
}

SemiAlgSet interval(double a1, double a2) {
  // (x - a1)(a2 - x)
  return SemiAlgSet(1, {Poly(1, {{Exponent{0}, -a1 * a2}, {Exponent{1}, a1 + a2}, {Exponent{2}, -1.0}})});
}

TEST(Dirac, Listings) {
  EXPECT_EQ(dirac_moments(vec(2.0), 4).values(), (VectorXd(5) << 1, 2, 4, 8, 16).finished());
  EXPECT_EQ(dirac_moments(VectorXd::Zero(2), 2).values(), (VectorXd(6) << 1, 0, 0, 0, 0, 0).finished());
  const VectorXd mix = 0.5 * dirac_moments(vec(0.0), 4).values() + 0.5 * dirac_moments(vec(1.0), 4).values();
  EXPECT_EQ(mix, (VectorXd(5) << 1, .5, .5, .5, .5).finished());
}

TEST(MomentMatrix, Examples) {
  const MatrixXd h = moment_matrix(dirac_moments(vec(2.0), 4), 2);
  EXPECT_EQ(h, (MatrixXd(3, 3) << 1, 2, 4, 2, 4, 8, 4, 8, 16).finished());
  EXPECT_EQ(numerical_rank(h), 1);
  const Tms mix(1, 4, (VectorXd(5) << 1, .5, .5, .5, .5).finished());
  const MatrixXd m = moment_matrix(mix, 2);
  EXPECT_EQ(m, (MatrixXd(3, 3) << 1, .5, .5, .5, .5, .5, .5, .5, .5).finished());
  // Oracle: the two atoms give two independent rank-one terms.
  const VectorXd v0 = (VectorXd(3) << 1, 0, 0).finished();
  const VectorXd v1 = VectorXd::Ones(3);
  EXPECT_EQ(numerical_rank(0.5 * v0 * v0.transpose() + 0.5 * v1 * v1.transpose()), 2);
  EXPECT_EQ(numerical_rank(m), 2);
  EXPECT_TRUE(moment_matrix(Tms(2, 4), 2).isZero());
  EXPECT_THROW(moment_matrix(Tms(1, 3), 2), DegreeError);
}

TEST(Localizing, Examples) {
  std::mt19937_64 rng(3);
  const Tms z(2, 4, VectorXd::Random(15));
  EXPECT_EQ(localizing_matrix(Poly::constant(2, 1.0), z, 2), moment_matrix(z, 2));
  const Poly g = interval(0.0, 3.0).generators()[0];
  const MatrixXd l = localizing_matrix(g, dirac_moments(vec(1.0), 4), 2);
  EXPECT_EQ(l.rows(), 2);
  EXPECT_TRUE(l.isApprox(MatrixXd::Constant(2, 2, 2.0)));
  EXPECT_THROW(localizing_matrix(random_poly(rng, 2, 5), z, 2), DegreeError);
}

TEST(Localizing, DefiningIdentity) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 1 + trial % 3;
    const int k = 1 + trial % 3;
    const int dq = trial % (2 * k + 1);
    const int s = k - (dq + 1) / 2;
    const Poly q = random_poly(rng, p, dq);
    const Poly a = random_poly(rng, p, s);
    const Poly b = random_poly(rng, p, s);
    Tms z(p, 2 * k);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = normal(rng);
    const MatrixXd l = localizing_matrix(q, z, k);
    ASSERT_EQ(static_cast<std::size_t>(l.rows()), monomial_count(p, s));
    const double lhs = a.coefficients(s).dot(l * b.coefficients(s));
    const double rhs = riesz_pair(q * a * b, z);
    EXPECT_NEAR(lhs, rhs, 1e-9 * std::max(1.0, std::abs(rhs))) << "trial " << trial;
    EXPECT_TRUE(l.isApprox(l.transpose(), 0.0) || (l - l.transpose()).isZero());
  }
}

TEST(ConeSg, Shapes) {
  const auto maps = compile_cone_sg(interval(0.0, 3.0), 6);
  ASSERT_EQ(maps.size(), 2u);
  EXPECT_EQ(maps[0].side(), 4);
  EXPECT_EQ(maps[1].side(), 3);
  const Poly ball = Poly::constant(2, 1.0) - Poly::variable(2, 0) * Poly::variable(2, 0) -
                    Poly::variable(2, 1) * Poly::variable(2, 1);
  const auto bmaps = compile_cone_sg(SemiAlgSet(2, {ball}), 4);
  ASSERT_EQ(bmaps.size(), 2u);
  EXPECT_EQ(bmaps[0].side(), 6);
  EXPECT_EQ(bmaps[1].side(), 3);
  EXPECT_THROW(compile_cone_sg(interval(0.0, 3.0), 5), std::invalid_argument);
  for (const auto& m : maps) {
    for (int i = 0; i < m.side(); ++i) {
      for (int j = 0; j < m.side(); ++j) EXPECT_EQ(m.entry(i, j), m.entry(j, i));
    }
  }
}

TEST(ConeSg, MembershipSoundness) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> weight(0.05, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 1 + trial % 3;
    // Unit ball intersected with a half space through a random direction.
    Poly ball = Poly::constant(p, 1.0);
    for (int i = 0; i < p; ++i) ball -= Poly::variable(p, i) * Poly::variable(p, i);
    Poly half = Poly::constant(p, 0.5);
    for (int i = 0; i < p; ++i) half += unit(rng) * Poly::variable(p, i);
    const SemiAlgSet set(p, {ball, half});
    AtomicMeasure mu;
    while (mu.size() < static_cast<std::size_t>(1 + trial % 5)) {
      VectorXd u(p);
      for (int i = 0; i < p; ++i) u[i] = unit(rng);
      if (!set.contains(std::span<const double>(u.data(), static_cast<std::size_t>(p)), 0.0)) continue;
      mu.atoms.push_back(u);
      mu.weights.push_back(weight(rng));
    }
    for (int k = 1; k <= 3; ++k) {
      const Tms z = moments(mu, 2 * k);
      for (const auto& m : compile_cone_sg(set, 2 * k)) {
        EXPECT_GE(min_eig(m.instantiate(z)), -1e-9) << "trial " << trial << " k " << k;
      }
    }
  }
}

TEST(Flat, Examples) {
  AtomicMeasure two{{vec(0.0), vec(1.0)}, {0.5, 0.5}};
  const auto flat = check_flat(moments(two, 4), 1, 1);
  ASSERT_TRUE(flat.has_value());
  EXPECT_EQ(flat->s, 2);
  EXPECT_EQ(flat->r, 2);

  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 1 + trial % 3;
    VectorXd u(p);
    for (int i = 0; i < p; ++i) u[i] = normal(rng);
    const auto f = check_flat(dirac_moments(u, 2 * (1 + trial % 3)), 1, 1);
    ASSERT_TRUE(f.has_value());
    EXPECT_EQ(f->r, 1);
  }

  AtomicMeasure three{{vec(0.0), vec(0.5), vec(1.0)}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
  EXPECT_FALSE(check_flat(moments(three, 4), 1, 1).has_value());
  EXPECT_THROW(check_flat(Tms(1, 3), 1, 1), std::invalid_argument);
}

TEST(Extract, TwoPointMixture) {
  AtomicMeasure two{{vec(0.0), vec(1.0)}, {0.5, 0.5}};
  const AtomicMeasure mu = extract_atoms(moments(two, 4), 2, 2);
  ASSERT_EQ(mu.size(), 2u);
  std::vector<std::pair<double, double>> got;
  for (std::size_t j = 0; j < 2; ++j) got.emplace_back(mu.atoms[j][0], mu.weights[j]);
  std::sort(got.begin(), got.end());
  EXPECT_NEAR(got[0].first, 0.0, 1e-8);
  EXPECT_NEAR(got[1].first, 1.0, 1e-8);
  EXPECT_NEAR(got[0].second, 0.5, 1e-8);
  EXPECT_NEAR(got[1].second, 0.5, 1e-8);
}

TEST(Extract, ScaledDirac) {
  const VectorXd u = (VectorXd(2) << 0.2438, -0.9698).finished();
  Tms omega = dirac_moments(u, 4);
  omega.values() *= 1.2272;
  const auto flat = check_flat(omega, 1, 1);
  ASSERT_TRUE(flat.has_value());
  EXPECT_EQ(flat->r, 1);
  const AtomicMeasure mu = extract_atoms(omega, flat->s, flat->r);
  ASSERT_EQ(mu.size(), 1u);
  EXPECT_NEAR(mu.weights[0], 1.2272, 1e-9);
  EXPECT_NEAR((mu.atoms[0] - u).norm(), 0.0, 1e-9);
}

TEST(Extract, FlatRoundTrip) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 1 + trial % 3;
    const int atoms = 1 + trial % 4;
    AtomicMeasure mu;
    while (mu.size() < static_cast<std::size_t>(atoms)) {
      VectorXd u(p);
      for (int i = 0; i < p; ++i) u[i] = normal(rng);
      // Atoms closer than the clustering scale are one atom numerically.
      bool separated = true;
      for (const VectorXd& v : mu.atoms) separated = separated && (u - v).norm() > 0.1;
      if (!separated) continue;
      mu.atoms.push_back(u);
      mu.weights.push_back(weight(rng));
    }
    // Degree high enough for the rank to stabilize: atoms <= C(p + s - 1, s - 1).
    int s = 1;
    while (monomial_count(p, s - 1) < static_cast<std::size_t>(atoms)) ++s;
    const Tms omega = moments(mu, 2 * (s + 1));
    const auto flat = check_flat(omega, 1, 1);
    ASSERT_TRUE(flat.has_value()) << "trial " << trial;
    EXPECT_EQ(flat->r, atoms) << "trial " << trial;
    const AtomicMeasure got = extract_atoms(omega, flat->s, flat->r);
    EXPECT_EQ(got.size(), static_cast<std::size_t>(atoms));
    EXPECT_LE(moment_error(got, omega, 2 * flat->s), 1e-6) << "trial " << trial;
    for (double w : got.weights) EXPECT_GT(w, 0.0);
    ++checked;
  }
  EXPECT_EQ(checked, 100);
}

TEST(Extract, RejectsNonFlat) {
  AtomicMeasure three{{vec(0.0), vec(0.5), vec(1.0)}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
  EXPECT_THROW(extract_atoms(moments(three, 4), 2, 3), ExtractionError);
}

TEST(Nnls, MatchesActiveSetOracle) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 3 + trial % 5;
    const int n = 1 + trial % 4;
    MatrixXd A(m, n);
    VectorXd b(m);
    for (int i = 0; i < m; ++i) {
      b[i] = normal(rng);
      for (int j = 0; j < n; ++j) A(i, j) = normal(rng);
    }
    const VectorXd x = nnls(A, b);
    // Oracle: enumerate all supports, keep the best feasible least-squares fit.
    double best = (b).squaredNorm();
    for (int mask = 1; mask < (1 << n); ++mask) {
      std::vector<int> cols;
      for (int j = 0; j < n; ++j) {
        if (mask & (1 << j)) cols.push_back(j);
      }
      MatrixXd sub(m, static_cast<Eigen::Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = A.col(cols[k]);
      const VectorXd z = sub.colPivHouseholderQr().solve(b);
      if (z.minCoeff() < 0.0) continue;
      best = std::min(best, (sub * z - b).squaredNorm());
    }
    EXPECT_GE(x.minCoeff(), 0.0);
    EXPECT_NEAR((A * x - b).squaredNorm(), best, 1e-9 * std::max(1.0, best)) << "trial " << trial;
  }
}

TEST(Truncation, Consistency) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 1 + trial % 3;
    const int d = 1 + trial % 6;
    Tms w(p, d);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = normal(rng);
    const int d1 = trial % (d + 1);
    const int d2 = d1 == 0 ? 0 : trial % (d1 + 1);
    EXPECT_EQ(w.truncate(d1).truncate(d2).values(), w.truncate(d2).values());
  }
}

TEST(Interval, Maps) {
  const auto maps = univariate_interval_constraints(0.0, 3.0, 2);
  ASSERT_EQ(maps.size(), 2u);
  const VectorXd z = (VectorXd(5) << 1.0, 2.0, 3.0, 5.0, 7.0).finished();
  EXPECT_EQ(maps[0].instantiate(z), moment_matrix(Tms(1, 4, z), 2));
  const MatrixXd expected = 3.0 * (MatrixXd(2, 2) << 2.0, 3.0, 3.0, 5.0).finished() -
                            (MatrixXd(2, 2) << 3.0, 5.0, 5.0, 7.0).finished();
  EXPECT_TRUE(maps[1].instantiate(z).isApprox(expected));
  EXPECT_THROW(univariate_interval_constraints(3.0, 0.0, 2), std::invalid_argument);

  const Tms inside = dirac_moments(vec(1.5), 4);
  EXPECT_GT(maps[1].instantiate(inside).trace(), 0.0);
  EXPECT_GE(min_eig(maps[0].instantiate(inside)), -1e-12);
  EXPECT_GE(min_eig(maps[1].instantiate(inside)), -1e-12);
  EXPECT_LT(min_eig(maps[1].instantiate(dirac_moments(vec(4.0), 4))), -1.0);
}

TEST(Interval, MeasuresSatisfyMaps) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double a1 = -2.0 + 2.0 * unit(rng);
    const double a2 = a1 + 0.5 + 3.0 * unit(rng);
    const int k = 1 + trial % 4;
    AtomicMeasure mu;
    for (int j = 0; j < 1 + trial % 5; ++j) {
      mu.atoms.push_back(vec(a1 + (a2 - a1) * unit(rng)));
      mu.weights.push_back(0.1 + unit(rng));
    }
    const Tms z = moments(mu, 2 * k);
    for (const auto& m : univariate_interval_constraints(a1, a2, k)) {
      const MatrixXd inst = m.instantiate(z);
      EXPECT_GE(min_eig(inst), -1e-9 * std::max(1.0, inst.cwiseAbs().maxCoeff())) << "trial " << trial;
    }
    // The localizer form agrees with the generic compiler on the interval.
    const auto generic = compile_cone_sg(interval(a1, a2), 2 * k);
    const auto special = univariate_interval_constraints(a1, a2, k);
    EXPECT_TRUE(generic[1].instantiate(z).isApprox(special[1].instantiate(z), 1e-12));
  }
}

// Recovers a representing measure for z via moment completion and extraction.
std::optional<AtomicMeasure> represent(const Tms& z, const SemiAlgSet& set, std::mt19937_64& rng) {
  const int t0 = (z.degree() + 1) / 2;
  const Poly R = random_square_sum(rng, z.nvars(), t0 + 1);
  for (int l = t0 + 1; l <= t0 + 4; ++l) {
    const AtmpResult res = atmp_solve(z, set, R, l);
    if (res.status != AtmpStatus::kFeasible) continue;
    const auto flat = check_flat(*res.omega, set.half_degree(), t0);
    if (!flat) continue;
    try {
      return extract_atoms(*res.omega, flat->s, flat->r);
    } catch (const ExtractionError&) {
    }
  }
  return std::nullopt;
}

TEST(Interval, UnivariateExactness) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const double a1 = -1.0 + unit(rng);
    const double a2 = a1 + 1.0 + 2.0 * unit(rng);
    const int k = 1 + trial % 3;
    const auto maps = univariate_interval_constraints(a1, a2, k);
    ConicModel model;
    const int first = model.add_variables(2 * k + 1);
    std::vector<int> var_of(static_cast<std::size_t>(2 * k + 1));
    for (int i = 0; i <= 2 * k; ++i) var_of[static_cast<std::size_t>(i)] = first + i;
    for (const auto& m : maps) model.add_psd(m.side(), m.expressions(var_of));
    model.add_equality(LinExpr::var(first) - LinExpr(1.0));
    if (trial % 2 == 0) {
      // Solver-produced: a random linear objective drives z to the boundary.
      LinExpr obj;
      for (int i = 1; i <= 2 * k; ++i) obj += LinExpr::var(first + i, normal(rng));
      model.minimize(obj);
    } else {
      // Perturbed then projected: nearest point to a noisy moment vector.
      AtomicMeasure mu;
      for (int j = 0; j < 1 + trial % 4; ++j) {
        mu.atoms.push_back(vec(a1 + (a2 - a1) * unit(rng)));
        mu.weights.push_back(0.1 + unit(rng));
      }
      VectorXd target = moments(mu, 2 * k).values() / mu.mass();
      for (int i = 1; i <= 2 * k; ++i) target[i] += 0.3 * normal(rng);
      const int t = model.add_variable();
      std::vector<LinExpr> rows{LinExpr::var(t)};
      for (int i = 0; i <= 2 * k; ++i) rows.push_back(LinExpr::var(first + i) - LinExpr(target[i]));
      model.add_second_order(rows);
      model.minimize(LinExpr::var(t));
    }
    const ModelSolution sol = model.solve();
    // Vertices of the moment cone are degenerate; a stalled solve is accepted
    // at the accuracy the completion step uses.
    ASSERT_TRUE(sol.raw.near_optimal(kNearOptimalTol)) << "trial " << trial;
    const Tms z(1, 2 * k, sol.values.segment(first, 2 * k + 1));
    const auto mu = represent(z, interval(a1, a2), rng);
    ASSERT_TRUE(mu.has_value()) << "trial " << trial;
    for (const VectorXd& u : mu->atoms) {
      EXPECT_GE(u[0], a1 - kFeasTol) << "trial " << trial;
      EXPECT_LE(u[0], a2 + kFeasTol) << "trial " << trial;
    }
    EXPECT_LE(moment_error(*mu, z, 2 * k), 1e-6 * std::max(1.0, z.values().lpNorm<Eigen::Infinity>()))
        << "trial " << trial;
  }
}

TEST(Atmp, DiracIsFeasible) {
  std::mt19937_64 rng(9);
  const Poly ball = Poly::constant(2, 1.0) - Poly::variable(2, 0) * Poly::variable(2, 0) -
                    Poly::variable(2, 1) * Poly::variable(2, 1);
  const SemiAlgSet set(2, {ball});
  const VectorXd u = (VectorXd(2) << 0.3, -0.4).finished();
  const auto mu = represent(dirac_moments(u, 2), set, rng);
  ASSERT_TRUE(mu.has_value());
  ASSERT_EQ(mu->size(), 1u);
  EXPECT_NEAR((mu->atoms[0] - u).norm(), 0.0, 1e-5);
  EXPECT_NEAR(mu->weights[0], 1.0, 1e-6);
}

TEST(Atmp, NonPsdMomentsAreInfeasible) {
  std::mt19937_64 rng(10);
  const Tms y(1, 2, (VectorXd(3) << 1.0, 2.0, 1.0).finished());
  const AtmpResult res = atmp_solve(y, interval(0.0, 3.0), random_square_sum(rng, 1, 2), 2);
  EXPECT_EQ(res.status, AtmpStatus::kInfeasible);
  EXPECT_LE(res.certificate_residual, kCertTol);
}

TEST(Atmp, PortfolioWorstCaseMeasure) {
  std::mt19937_64 rng(11);
  const VectorXd printed = (VectorXd(6) << 0.9355, 0.9355, 0.9517, 1.0163, 1.2260, 1.8710).finished();
  const SemiAlgSet box = interval(0.0, 3.0);
  // Rounded to four decimals the vector sits just outside the moment cone.
  EXPECT_EQ(atmp_solve(Tms(1, 5, printed), box, random_square_sum(rng, 1, 4), 4).status, AtmpStatus::kInfeasible);
  // Nearest point of the cone (degree 6 localizers are exact on an interval).
  ConicModel model;
  const int first = model.add_variables(7);
  std::vector<int> var_of{first, first + 1, first + 2, first + 3, first + 4, first + 5, first + 6};
  for (const auto& m : compile_cone_sg(box, 6)) model.add_psd(m.side(), m.expressions(var_of));
  const int t = model.add_variable();
  std::vector<LinExpr> rows{LinExpr::var(t)};
  for (int i = 0; i < 6; ++i) rows.push_back(LinExpr::var(first + i) - LinExpr(printed[i]));
  model.add_second_order(rows);
  model.minimize(LinExpr::var(t));
  const ModelSolution proj = model.solve();
  ASSERT_EQ(proj.status, ModelStatus::kOptimal);
  EXPECT_LT(proj.objective, 1e-4);
  const auto mu = represent(Tms(1, 5, proj.values.segment(first, 6)), box, rng);
  ASSERT_TRUE(mu.has_value());
  ASSERT_EQ(mu->size(), 2u);
  std::vector<double> atoms{mu->atoms[0][0], mu->atoms[1][0]};
  std::sort(atoms.begin(), atoms.end());
  EXPECT_NEAR(atoms[0], 0.9913, 5e-3);
  EXPECT_NEAR(atoms[1], 3.0, 5e-3);
}

TEST(Atmp, RejectsLowOrder) {
  EXPECT_THROW(atmp_solve(Tms(1, 4), interval(0.0, 3.0), Poly::constant(1, 1.0), 1), DegreeError);
}

}  // namespace
}  // namespace dromsos
