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

#include "dromsos/soskit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace dromsos {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kGramPsdTol = 1e-8;
constexpr double kGramMatchTol = 1e-6;

int half_ceil(int degree) { return (degree + 1) / 2; }

// Adds sum_{a,b} G(a,b) q x^{a+b} to the per-monomial Gram expansion, where
// G is the symmetric matrix stored in svec order in model variables `vars`.
void expand_gram(const std::vector<Exponent>& b, const std::vector<int>& vars, const Poly& q,
                 std::map<Exponent, LinExpr, GrlexLess>* out) {
  const int n = static_cast<int>(b.size());
  std::size_t pos = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i, ++pos) {
      const double mult = i == j ? 1.0 : 2.0;
      const Exponent ab = b[static_cast<std::size_t>(i)] + b[static_cast<std::size_t>(j)];
      for (const auto& [gamma, c] : q.terms()) (*out)[ab + gamma] += LinExpr::var(vars[pos], mult * c);
    }
  }
}

MatrixXd gram_from_values(const std::vector<int>& vars, int side, const VectorXd& values) {
  MatrixXd g(side, side);
  std::size_t pos = 0;
  for (int j = 0; j < side; ++j) {
    for (int i = j; i < side; ++i, ++pos) {
      g(i, j) = values[vars[pos]];
      g(j, i) = g(i, j);
    }
  }
  return g;
}

}  // namespace

AffinePoly::AffinePoly(const Poly& p) : nvars_(p.nvars()) {
  for (const auto& [alpha, c] : p.terms()) terms_[alpha] = LinExpr(c);
}

int AffinePoly::degree() const {
  int d = 0;
  for (const auto& [alpha, e] : terms_) {
    if (e.constant != 0.0 || !e.terms.empty()) d = std::max(d, alpha.degree());
  }
  return d;
}

void AffinePoly::add(const Exponent& alpha, const LinExpr& e) {
  if (alpha.nvars() != nvars_) throw DimensionError("monomial has the wrong variable count");
  terms_[alpha] += e;
}

void AffinePoly::add_scaled(const Poly& p, const LinExpr& e) {
  if (p.nvars() != nvars_) throw DimensionError("polynomial has the wrong variable count");
  for (const auto& [alpha, c] : p.terms()) terms_[alpha] += c * e;
}

AffinePoly& AffinePoly::operator+=(const AffinePoly& other) {
  if (other.nvars_ != nvars_) throw DimensionError("affine polynomials disagree on the variable count");
  for (const auto& [alpha, e] : other.terms_) terms_[alpha] += e;
  return *this;
}

Poly AffinePoly::eval(const Eigen::VectorXd& values) const {
  Poly out(nvars_);
  for (const auto& [alpha, e] : terms_) out.add_term(alpha, e.eval(values));
  return out;
}

QuadraticModuleSpec::QuadraticModuleSpec(int nvars, std::vector<Poly> generators, int d1)
    : nvars_(nvars), d1_(d1) {
  if (d1 < 0) throw DegreeError("negative truncation order");
  generators_.push_back(Poly::constant(nvars, 1.0));
  for (Poly& c : generators) {
    if (c.nvars() != nvars) throw DimensionError("generator has the wrong variable count");
    generators_.push_back(std::move(c));
  }
  for (const Poly& c : generators_) {
    const int deg = 2 * (d1 - half_ceil(c.degree()));
    if (deg < 0) throw DegreeError("generator degree " + std::to_string(c.degree()) + " exceeds 2 d1 = " + std::to_string(2 * d1));
    multiplier_degrees_.push_back(deg);
  }
}

void QuadraticModuleSpec::set_multiplier_degree(std::size_t i, int degree) {
  if (i >= generators_.size()) throw std::out_of_range("no generator " + std::to_string(i));
  if (degree < 0 || degree % 2 != 0) throw DegreeError("multiplier degree must be even and nonnegative");
  if (degree + generators_[i].degree() > 2 * d1_) {
    throw DegreeError("multiplier degree " + std::to_string(degree) + " overflows the truncation");
  }
  multiplier_degrees_[i] = degree;
}

int qm_half_degree(const Poly& f, std::span<const Poly> c) {
  int d1 = half_ceil(f.degree());
  for (const Poly& ci : c) d1 = std::max(d1, half_ceil(ci.degree()));
  return d1;
}

Poly GramCertificate::reassemble() const {
  if (generators.empty()) throw DimensionError("empty certificate");
  Poly out(generators.front().nvars());
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto& b = bases[k];
    Poly sigma(out.nvars());
    for (std::size_t i = 0; i < b.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        sigma.add_term(b[i] + b[j], blocks[k](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
    }
    out += generators[k] * sigma;
  }
  return out;
}

double GramCertificate::min_eigenvalue() const {
  double out = std::numeric_limits<double>::infinity();
  for (const MatrixXd& g : blocks) {
    if (g.size() == 0) continue;
    out = std::min(out, Eigen::SelfAdjointEigenSolver<MatrixXd>(g, Eigen::EigenvaluesOnly).eigenvalues()[0]);
  }
  return out;
}

double GramCertificate::residual(const Poly& target) const {
  const Poly diff = reassemble() - target;
  double out = 0.0;
  for (const auto& [alpha, c] : diff.terms()) out = std::max(out, std::abs(c));
  return out;
}

GramCertificate QmBlock::certificate(const QuadraticModuleSpec& qm, const Eigen::VectorXd& values) const {
  GramCertificate cert;
  for (std::size_t i = 0; i < qm.size(); ++i) {
    const MonomialBasis b = basis(qm.nvars(), qm.multiplier_degree(i) / 2);
    cert.generators.push_back(qm.generators()[i]);
    cert.bases.push_back(b.monomials());
    cert.blocks.push_back(gram_from_values(gram_vars[i], static_cast<int>(b.size()), values));
  }
  return cert;
}

Tms QmBlock::matching_multipliers(const QuadraticModuleSpec& qm, const ModelSolution& solution) const {
  Tms w(qm.nvars(), qm.total_degree());
  for (std::size_t a = 0; a < equalities.size(); ++a) {
    w[a] = solution.equality_duals.at(static_cast<std::size_t>(equalities[a]));
  }
  return w;
}

QmBlock compile_qm_membership(ConicModel& model, const AffinePoly& target, const QuadraticModuleSpec& qm) {
  if (target.nvars() != qm.nvars()) throw DimensionError("target and module disagree on the variable count");
  if (target.degree() > qm.total_degree()) {
    throw DegreeError("target degree " + std::to_string(target.degree()) + " exceeds " + std::to_string(qm.total_degree()));
  }
  QmBlock block;
  std::map<Exponent, LinExpr, GrlexLess> gram;
  for (std::size_t i = 0; i < qm.size(); ++i) {
    const MonomialBasis b = basis(qm.nvars(), qm.multiplier_degree(i) / 2);
    int constraint = -1;
    block.gram_vars.push_back(model.add_psd_variable(static_cast<int>(b.size()), &constraint));
    block.gram_constraints.push_back(constraint);
    expand_gram(b.monomials(), block.gram_vars.back(), qm.generators()[i], &gram);
  }
  for (const Exponent& alpha : basis(qm.nvars(), qm.total_degree())) {
    LinExpr e;
    if (auto it = target.terms().find(alpha); it != target.terms().end()) e += it->second;
    if (auto it = gram.find(alpha); it != gram.end()) e -= it->second;
    block.equalities.push_back(model.add_equality(e));
  }
  return block;
}

std::string to_string(SosConvexity status) {
  switch (status) {
    case SosConvexity::kSosConvex:
      return "sos_convex";
    case SosConvexity::kNotSosConvex:
      return "not_sos_convex";
    case SosConvexity::kIndeterminate:
      return "indeterminate";
  }
  return "unknown";
}

SosConvexityResult sos_convexity_check(const Poly& f, const SolverOptions& options) {
  const int n = f.nvars();
  SosConvexityResult out;
  // q(x, v) = v' Hess f(x) v over 2n variables, v in the trailing slots.
  const PolyMatrix h = hessian(f);
  Poly q(2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Poly vij = Poly::variable(2 * n, n + i) * Poly::variable(2 * n, n + j);
      q += embed(h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], 2 * n, 0) * vij;
    }
  }
  GramCertificate cert;
  cert.generators.push_back(Poly::constant(2 * n, 1.0));
  if (q.is_zero()) {
    out.status = SosConvexity::kSosConvex;
    out.solver_status = SolverStatus::kOptimal;
    cert.bases.emplace_back();
    cert.blocks.emplace_back(0, 0);
    out.certificate = cert;
    return out;
  }
  // q is a quadratic form in v, so an sos decomposition only uses x^a v_j.
  const int t = half_ceil(std::max(0, f.degree() - 2));
  std::vector<Exponent> b;
  for (const Exponent& a : basis(n, t)) {
    for (int j = 0; j < n; ++j) {
      std::vector<int> powers = a.powers();
      powers.resize(static_cast<std::size_t>(2 * n), 0);
      powers[static_cast<std::size_t>(n + j)] = 1;
      b.emplace_back(std::move(powers));
    }
  }
  ConicModel model;
  int constraint = -1;
  const std::vector<int> vars = model.add_psd_variable(static_cast<int>(b.size()), &constraint);
  std::map<Exponent, LinExpr, GrlexLess> gram;
  expand_gram(b, vars, cert.generators.front(), &gram);
  for (const auto& [alpha, c] : q.terms()) gram[alpha] -= LinExpr(c);
  for (const auto& [alpha, e] : gram) model.add_equality(e);
  // A trace objective keeps the Gram matrix bounded and unique.
  LinExpr trace;
  std::size_t pos = 0;
  const int side = static_cast<int>(b.size());
  for (int j = 0; j < side; ++j) {
    for (int i = j; i < side; ++i, ++pos) {
      if (i == j) trace += LinExpr::var(vars[pos]);
    }
  }
  model.minimize(trace);
  const ModelSolution sol = model.solve(options);
  out.solver_status = sol.raw.status;
  if (sol.status == ModelStatus::kInfeasible) {
    out.status = SosConvexity::kNotSosConvex;
    return out;
  }
  if (!sol.raw.near_optimal(kGramMatchTol)) return out;
  cert.bases.push_back(b);
  cert.blocks.push_back(gram_from_values(vars, side, sol.values));
  if (cert.min_eigenvalue() >= -kGramPsdTol && cert.residual(q) <= kGramMatchTol) {
    out.status = SosConvexity::kSosConvex;
    out.certificate = std::move(cert);
  }
  return out;
}

Poly random_sos(std::uint64_t seed, int p, int t0) {
  if (t0 < 0) throw DegreeError("negative half-degree");
  const MonomialBasis b = basis(p, t0 + 1);
  const auto n = static_cast<Eigen::Index>(b.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  MatrixXd q(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) q(i, j) = normal(rng);
  }
  const MatrixXd g = q.transpose() * q;
  Poly r(p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      r.add_term(b[static_cast<std::size_t>(i)] + b[static_cast<std::size_t>(j)], g(i, j));
    }
  }
  return r;
}

}  // namespace dromsos
