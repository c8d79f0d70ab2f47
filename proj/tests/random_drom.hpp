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

// Random moment-robust problems with a strictly feasible decision x = 0:
// box X = [-1, 1]^n, convex quadratic f pulled towards a point outside X,
// probability ambiguity sets with a band on the first moments of a planted
// atomic measure.

#ifndef DROMSOS_TESTS_RANDOM_DROM_HPP_
#define DROMSOS_TESTS_RANDOM_DROM_HPP_

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dromsos/drom.hpp"

namespace dromsos::testing_util {

struct RandomDrom {
  DromProblem problem;
  AtomicMeasure planted;
  double a1 = 0.0;  // interval ends when p = 1
  double a2 = 1.0;
};

inline Poly interval_generator(double a1, double a2) {
  const Poly xi = Poly::variable(1, 0);
  return (xi - Poly::constant(1, a1)) * (Poly::constant(1, a2) - xi);
}

inline ConeYBlock probability_band(int p, int d, const Tms& m, double width) {
  const auto ny = static_cast<Eigen::Index>(monomial_count(p, d));
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(2 * p, ny);
  Eigen::VectorXd u(2 * p);
  for (int i = 0; i < p; ++i) {
    T(2 * i, 1 + i) = 1.0;
    u[2 * i] = -(m[static_cast<std::size_t>(1 + i)] - width);
    T(2 * i + 1, 1 + i) = -1.0;
    u[2 * i + 1] = m[static_cast<std::size_t>(1 + i)] + width;
  }
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(1, ny);
  E(0, 0) = 1.0;
  Eigen::VectorXd e = Eigen::VectorXd::Constant(1, -1.0);
  return ConeYBlock::polyhedral(T, u, E, e);
}

// p = 1: S = [a1, a2] with generator (xi - a1)(a2 - xi), d in 2..5.
// p = 2: S = simplex, d in 2..3.
inline RandomDrom random_drom(std::mt19937_64& rng, int p) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RandomDrom out;
  DromProblem& pr = out.problem;
  pr.n = 2;
  pr.p = p;
  pr.d = p == 1 ? std::uniform_int_distribution<int>(2, 5)(rng) : std::uniform_int_distribution<int>(2, 3)(rng);

  double bound = 1.0;  // max |xi_i| on S
  if (p == 1) {
    out.a1 = -1.0 + unit(rng);
    out.a2 = out.a1 + 0.5 + unit(rng);
    bound = std::max(std::abs(out.a1), std::abs(out.a2));
    pr.g = SemiAlgSet(1, {interval_generator(out.a1, out.a2)});
  } else {
    Poly rest = Poly::constant(2, 1.0);
    for (int i = 0; i < 2; ++i) rest -= Poly::variable(2, i);
    pr.g = SemiAlgSet(2, {Poly::variable(2, 0), Poly::variable(2, 1), rest});
  }

  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd atom(p);
    if (p == 1) {
      atom[0] = out.a1 + (out.a2 - out.a1) * unit(rng);
    } else {
      const double s = unit(rng), t = unit(rng);
      atom << std::min(s, t), std::max(s, t) - std::min(s, t);
    }
    out.planted.atoms.push_back(atom);
  }
  const double w = 0.2 + 0.6 * unit(rng);
  out.planted.weights = {w, 1.0 - w};

  const auto ny = static_cast<Eigen::Index>(pr.y_dim());
  const MonomialBasis xi_basis = basis(p, pr.d);
  pr.A = Eigen::MatrixXd(ny, 2);
  pr.b = Eigen::VectorXd(ny);
  double reach = 0.0;
  for (Eigen::Index a = 0; a < ny; ++a) {
    pr.A(a, 0) = 2.0 * normal(rng);
    pr.A(a, 1) = 2.0 * normal(rng);
    pr.b[a] = 0.3 * normal(rng);
    if (a > 0) reach += std::abs(pr.b[a]) * std::pow(bound, xi_basis[static_cast<std::size_t>(a)].degree());
  }
  pr.b[0] = reach + 0.5;

  Eigen::Vector2d target(normal(rng), normal(rng));
  target *= 3.0 / target.norm();
  const Poly x0 = Poly::variable(2, 0), x1 = Poly::variable(2, 1);
  pr.f = (x0 - Poly::constant(2, target[0])) * (x0 - Poly::constant(2, target[0])) +
         (x1 - Poly::constant(2, target[1])) * (x1 - Poly::constant(2, target[1]));
  for (int i = 0; i < 2; ++i) {
    pr.c.push_back(Poly::constant(2, 1.0) + Poly::variable(2, i));
    pr.c.push_back(Poly::constant(2, 1.0) - Poly::variable(2, i));
  }
  pr.y_blocks = {probability_band(p, pr.d, moments(out.planted, pr.d), 0.05)};
  pr.validate();
  return out;
}

}  // namespace dromsos::testing_util

#endif  // DROMSOS_TESTS_RANDOM_DROM_HPP_
