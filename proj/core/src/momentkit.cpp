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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace dromsos {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

int half_ceil(int degree) { return (degree + 1) / 2; }

}  // namespace

SemiAlgSet::SemiAlgSet(int nvars, std::vector<Poly> generators)
    : nvars_(nvars), generators_(std::move(generators)) {
  if (nvars_ < 1) throw DimensionError("support set needs at least one variable");
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    if (generators_[i].nvars() != nvars_) {
      throw DimensionError("generator " + std::to_string(i) + " has " + std::to_string(generators_[i].nvars()) +
                           " variables, expected " + std::to_string(nvars_));
    }
  }
}

int SemiAlgSet::degree() const { return max_degree(generators_); }

int SemiAlgSet::half_degree() const { return std::max(1, half_ceil(degree())); }

double SemiAlgSet::min_value(std::span<const double> u) const {
  double out = std::numeric_limits<double>::infinity();
  for (const Poly& g : generators_) out = std::min(out, g.eval(u));
  return out;
}

bool SemiAlgSet::contains(std::span<const double> u, double tol) const { return min_value(u) >= -tol; }

SemiAlgSet SemiAlgSet::with_generator(Poly g) const {
  std::vector<Poly> gens = generators_;
  gens.push_back(std::move(g));
  return SemiAlgSet(nvars_, std::move(gens));
}

double AtomicMeasure::mass() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

LinearMatrixMap::LinearMatrixMap(int side, std::size_t tms_length)
    : side_(side), tms_length_(tms_length), entries_(static_cast<std::size_t>(side) * static_cast<std::size_t>(side)) {}

const LinearFunctional& LinearMatrixMap::entry(int i, int j) const {
  return entries_.at(static_cast<std::size_t>(i) * static_cast<std::size_t>(side_) + static_cast<std::size_t>(j));
}

void LinearMatrixMap::add(int i, int j, std::size_t position, double weight) {
  if (position >= tms_length_) throw DegreeError("localizing entry exceeds the tms length");
  const auto n = static_cast<std::size_t>(side_);
  entries_.at(static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)).emplace_back(position, weight);
  if (i != j) entries_.at(static_cast<std::size_t>(j) * n + static_cast<std::size_t>(i)).emplace_back(position, weight);
}

Eigen::MatrixXd LinearMatrixMap::instantiate(const Eigen::VectorXd& z) const {
  if (static_cast<std::size_t>(z.size()) < tms_length_) {
    throw DegreeError("tms of length " + std::to_string(z.size()) + " is too short for this map");
  }
  MatrixXd m = MatrixXd::Zero(side_, side_);
  for (int i = 0; i < side_; ++i) {
    for (int j = 0; j < side_; ++j) {
      double v = 0.0;
      for (const auto& [pos, w] : entry(i, j)) v += w * z[static_cast<Eigen::Index>(pos)];
      m(i, j) = v;
    }
  }
  return m;
}

std::vector<std::vector<LinExpr>> LinearMatrixMap::expressions(std::span<const int> var_of_position) const {
  std::vector<std::vector<LinExpr>> out(static_cast<std::size_t>(side_));
  for (int i = 0; i < side_; ++i) {
    out[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(i + 1));
    for (int j = 0; j <= i; ++j) {
      LinExpr e;
      for (const auto& [pos, w] : entry(i, j)) e.terms.emplace_back(var_of_position[pos], w);
      out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::move(e);
    }
  }
  return out;
}

Tms dirac_moments(std::span<const double> u, int degree) {
  const int p = static_cast<int>(u.size());
  const MonomialBasis b = basis(p, degree);
  return Tms(p, degree, b.evaluate(u));
}

Tms dirac_moments(const Eigen::VectorXd& u, int degree) {
  return dirac_moments(std::span<const double>(u.data(), static_cast<std::size_t>(u.size())), degree);
}

Tms moments(const AtomicMeasure& mu, int degree) {
  if (mu.atoms.empty()) throw DimensionError("measure has no atoms");
  return moments(mu, static_cast<int>(mu.atoms.front().size()), degree);
}

Tms moments(const AtomicMeasure& mu, int p, int degree) {
  if (mu.atoms.size() != mu.weights.size()) throw DimensionError("atom and weight counts differ");
  Tms out(p, degree);
  for (std::size_t j = 0; j < mu.atoms.size(); ++j) {
    if (mu.atoms[j].size() != p) throw DimensionError("atoms have different dimensions");
    out.values() += mu.weights[j] * dirac_moments(mu.atoms[j], degree).values();
  }
  return out;
}

LinearMatrixMap localizing_map(const Poly& q, int k, int tms_degree) {
  const int p = q.nvars();
  const int s = k - half_ceil(q.degree());
  if (s < 0) throw DegreeError("generator degree " + std::to_string(q.degree()) + " exceeds 2k = " + std::to_string(2 * k));
  if (2 * k > tms_degree) {
    throw DegreeError("order " + std::to_string(k) + " needs a tms of degree " + std::to_string(2 * k));
  }
  const MonomialBasis b = basis(p, s);
  const int side = static_cast<int>(b.size());
  LinearMatrixMap map(side, monomial_count(p, tms_degree));
  for (int i = 0; i < side; ++i) {
    for (int j = i; j < side; ++j) {
      const Exponent ab = b[static_cast<std::size_t>(i)] + b[static_cast<std::size_t>(j)];
      for (const auto& [gamma, c] : q.terms()) map.add(i, j, grlex_index(ab + gamma), c);
    }
  }
  return map;
}

Eigen::MatrixXd moment_matrix(const Tms& z, int k) {
  if (z.degree() < 2 * k) throw DegreeError("moment matrix of order " + std::to_string(k) + " needs degree " + std::to_string(2 * k));
  return localizing_map(Poly::constant(z.nvars(), 1.0), k, z.degree()).instantiate(z);
}

Eigen::MatrixXd localizing_matrix(const Poly& q, const Tms& z, int k) {
  if (q.nvars() != z.nvars()) throw DimensionError("generator and tms disagree on the variable count");
  return localizing_map(q, k, z.degree()).instantiate(z);
}

std::vector<LinearMatrixMap> compile_cone_sg(const SemiAlgSet& g, int two_k, int tms_degree) {
  if (two_k < 0 || two_k % 2 != 0) throw std::invalid_argument("two_k must be even and nonnegative");
  const int k = two_k / 2;
  for (const Poly& gi : g.generators()) {
    if (gi.degree() > two_k) throw DegreeError("generator degree exceeds " + std::to_string(two_k));
  }
  std::vector<LinearMatrixMap> out;
  out.push_back(localizing_map(Poly::constant(g.nvars(), 1.0), k, tms_degree));
  for (const Poly& gi : g.generators()) out.push_back(localizing_map(gi, k, tms_degree));
  return out;
}

std::vector<LinearMatrixMap> compile_cone_sg(const SemiAlgSet& g, int two_k) {
  return compile_cone_sg(g, two_k, two_k);
}

int numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<MatrixXd> svd(m);
  const VectorXd& sv = svd.singularValues();
  if (sv[0] <= 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] >= rel_tol * sv[0]) ++r;
  }
  return r;
}

std::optional<FlatOrder> check_flat(const Tms& omega, int d0, int t0) {
  if (omega.degree() % 2 != 0) throw std::invalid_argument("flat truncation needs an even-degree tms");
  const int l = omega.degree() / 2;
  for (int s = std::max(d0, t0); s <= l; ++s) {
    if (s - d0 < 0) continue;
    const int lower = numerical_rank(moment_matrix(omega, s - d0));
    const int upper = numerical_rank(moment_matrix(omega, s));
    if (lower == upper) return FlatOrder{s, upper};
  }
  return std::nullopt;
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const Eigen::Index n = A.cols();
  VectorXd x = VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * A.cwiseAbs().colwise().sum().maxCoeff() *
                     static_cast<double>(std::max(A.rows(), n));
  auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    }
    MatrixXd sub(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
    const VectorXd zs = sub.colPivHouseholderQr().solve(b);
    VectorXd z = VectorXd::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zs[static_cast<Eigen::Index>(k)];
    return z;
  };
  for (int outer = 0; outer < 3 * static_cast<int>(n) + 3; ++outer) {
    const VectorXd w = A.transpose() * (b - A * x);
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    for (int inner = 0; inner < 3 * static_cast<int>(n) + 3; ++inner) {
      const VectorXd z = solve_passive();
      bool all_positive = true;
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) {
          all_positive = false;
          alpha = std::min(alpha, x[j] / (x[j] - z[j]));
        }
      }
      if (all_positive) {
        x = z;
        break;
      }
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x[j] <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x[j] = 0.0;
        }
      }
    }
  }
  return x;
}

double moment_error(const AtomicMeasure& mu, const Tms& z, int degree) {
  const Tms m = moments(mu, z.nvars(), degree);
  return (m.values() - z.truncate(degree).values()).lpNorm<Eigen::Infinity>();
}

AtomicMeasure extract_atoms(const Tms& omega, int s, int r, const ExtractOptions& options) {
  const int p = omega.nvars();
  if (omega.degree() < 2 * s) throw DegreeError("extraction at order " + std::to_string(s) + " needs degree " + std::to_string(2 * s));
  if (r < 1) throw ExtractionError("rank must be positive");
  const MatrixXd M = moment_matrix(omega, s);
  const Eigen::Index N = M.rows();
  if (r > N) throw ExtractionError("rank exceeds the moment matrix size");

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(M);
  const VectorXd lam = eig.eigenvalues().tail(r);
  if (lam.minCoeff() <= 0.0) throw ExtractionError("moment matrix has fewer positive eigenvalues than the rank");
  const MatrixXd V = eig.eigenvectors().rightCols(r) * lam.cwiseSqrt().asDiagonal();

  // Greedy pivot rows in graded order: the first r linearly independent rows.
  const double scale = V.rowwise().norm().maxCoeff();
  std::vector<Eigen::Index> pivots;
  MatrixXd q(r, 0);
  for (Eigen::Index i = 0; i < N && static_cast<int>(pivots.size()) < r; ++i) {
    VectorXd res = V.row(i).transpose();
    for (int pass = 0; pass < 2; ++pass) res -= q * (q.transpose() * res);
    if (res.norm() > kRankTol * scale) {
      pivots.push_back(i);
      q.conservativeResize(Eigen::NoChange, q.cols() + 1);
      q.col(q.cols() - 1) = res / res.norm();
    }
  }
  if (static_cast<int>(pivots.size()) < r) throw ExtractionError("could not find a monomial basis of the column space");
  MatrixXd vp(r, r);
  for (int k = 0; k < r; ++k) vp.row(k) = V.row(pivots[static_cast<std::size_t>(k)]);
  Eigen::FullPivLU<MatrixXd> vp_lu(vp);
  if (vp_lu.rank() < r) throw ExtractionError("pivot block is singular");
  const MatrixXd U = V * vp_lu.inverse();

  const MonomialBasis bs = basis(p, s);
  std::vector<MatrixXd> mult(static_cast<std::size_t>(p), MatrixXd(r, r));
  for (int v = 0; v < p; ++v) {
    for (int k = 0; k < r; ++k) {
      const Exponent shifted = bs[static_cast<std::size_t>(pivots[static_cast<std::size_t>(k)])] + Exponent::unit(p, v);
      if (shifted.degree() > s) throw ExtractionError("pivot monomials reach the top degree; the truncation is not flat");
      mult[static_cast<std::size_t>(v)].row(k) = U.row(static_cast<Eigen::Index>(grlex_index(shifted)));
    }
  }

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  VectorXd coef(p);
  for (int v = 0; v < p; ++v) coef[v] = unif(rng) + 1e-3;
  coef /= coef.sum();
  MatrixXd combo = MatrixXd::Zero(r, r);
  for (int v = 0; v < p; ++v) combo += coef[v] * mult[static_cast<std::size_t>(v)];

  Eigen::RealSchur<MatrixXd> schur(combo);
  if (schur.info() != Eigen::Success) throw ExtractionError("Schur decomposition did not converge");
  const MatrixXd& T = schur.matrixT();
  const MatrixXd& Q = schur.matrixU();
  const double tnorm = std::max(1.0, T.cwiseAbs().maxCoeff());
  for (int j = 0; j + 1 < r; ++j) {
    if (std::abs(T(j + 1, j)) > 1e-8 * tnorm) throw ExtractionError("multiplication matrices have complex eigenvalues");
  }

  // Cluster equal eigenvalues of the combination; each cluster is one atom.
  std::vector<int> order(static_cast<std::size_t>(r));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return T(a, a) < T(b, b); });
  std::vector<std::vector<int>> clusters;
  for (int j : order) {
    if (!clusters.empty() && std::abs(T(j, j) - T(clusters.back().back(), clusters.back().back())) <= kClusterTol) {
      clusters.back().push_back(j);
    } else {
      clusters.push_back({j});
    }
  }
  std::vector<VectorXd> atoms;
  for (const auto& cl : clusters) {
    VectorXd u = VectorXd::Zero(p);
    for (int j : cl) {
      for (int v = 0; v < p; ++v) u[v] += Q.col(j).dot(mult[static_cast<std::size_t>(v)] * Q.col(j));
    }
    atoms.push_back(u / static_cast<double>(cl.size()));
  }

  const Tms target = omega.truncate(2 * s);
  auto fit = [&](const std::vector<VectorXd>& pts) {
    MatrixXd phi(target.values().size(), static_cast<Eigen::Index>(pts.size()));
    for (std::size_t j = 0; j < pts.size(); ++j) phi.col(static_cast<Eigen::Index>(j)) = dirac_moments(pts[j], 2 * s).values();
    return nnls(phi, target.values());
  };
  VectorXd theta = fit(atoms);
  AtomicMeasure mu;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    if (theta[static_cast<Eigen::Index>(j)] >= kMinWeight) mu.atoms.push_back(atoms[j]);
  }
  if (mu.atoms.empty()) throw ExtractionError("all recovered weights vanish");
  theta = fit(mu.atoms);
  mu.weights.assign(theta.data(), theta.data() + theta.size());

  const double err = moment_error(mu, target, 2 * s);
  const double allowed = options.tol * std::max(1.0, target.values().lpNorm<Eigen::Infinity>());
  if (!(err <= allowed)) {
    std::ostringstream msg;
    msg << "recovered measure misses the moments by " << err << " (allowed " << allowed << ")";
    throw ExtractionError(msg.str());
  }
  return mu;
}

std::vector<LinearMatrixMap> univariate_interval_constraints(double a1, double a2, int k) {
  if (!(a1 < a2)) throw std::invalid_argument("interval needs a1 < a2");
  if (k < 1) throw std::invalid_argument("order must be at least 1");
  const std::size_t len = static_cast<std::size_t>(2 * k + 1);
  LinearMatrixMap hankel(k + 1, len);
  for (int i = 0; i <= k; ++i) {
    for (int j = i; j <= k; ++j) hankel.add(i, j, static_cast<std::size_t>(i + j), 1.0);
  }
  LinearMatrixMap shifted(k, len);
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      const auto base = static_cast<std::size_t>(i + j);
      shifted.add(i, j, base + 1, a1 + a2);
      shifted.add(i, j, base, -a1 * a2);
      shifted.add(i, j, base + 2, -1.0);
    }
  }
  return {hankel, shifted};
}

std::string to_string(AtmpStatus status) {
  switch (status) {
    case AtmpStatus::kFeasible:
      return "feasible";
    case AtmpStatus::kInfeasible:
      return "infeasible";
    case AtmpStatus::kInconclusive:
      return "inconclusive";
  }
  return "unknown";
}

AtmpResult atmp_solve(const Tms& y, const SemiAlgSet& g, const Poly& R, int l, const SolverOptions& options) {
  const int p = y.nvars();
  if (g.nvars() != p || R.nvars() != p) throw DimensionError("tms, support and objective disagree on the variable count");
  if (2 * l < std::max({R.degree(), g.degree(), y.degree()})) {
    throw DegreeError("completion order " + std::to_string(l) + " is too low");
  }
  const int deg = 2 * l;
  ConicModel model;
  const std::size_t len = monomial_count(p, deg);
  const int first = model.add_variables(static_cast<int>(len));
  std::vector<int> var_of(len);
  std::iota(var_of.begin(), var_of.end(), first);
  for (std::size_t a = 0; a < y.size(); ++a) {
    model.add_equality(LinExpr::var(var_of[a]) - LinExpr(y[a]));
  }
  for (const LinearMatrixMap& map : compile_cone_sg(g, deg)) model.add_psd(map.side(), map.expressions(var_of));
  LinExpr obj;
  for (const auto& [alpha, c] : R.terms()) obj += LinExpr::var(var_of[grlex_index(alpha)], c);
  model.minimize(obj);

  const ModelSolution sol = model.solve(options);
  AtmpResult out;
  out.solver_status = sol.raw.status;
  out.iterations = sol.raw.iterations;
  out.certificate_residual = sol.raw.certificate_residual;
  if (sol.raw.near_optimal(kNearOptimalTol)) {
    out.status = AtmpStatus::kFeasible;
    out.omega = Tms(p, deg, sol.values.segment(first, static_cast<Eigen::Index>(len)));
    out.objective = sol.objective;
  } else if (sol.status == ModelStatus::kInfeasible && sol.raw.certificate_residual <= kCertTol) {
    out.status = AtmpStatus::kInfeasible;
  }
  return out;
}

MeasureSearch find_representing_measure(const Tms& y, const SemiAlgSet& g, const Poly& R, int t0, int l_first,
                                        int l_last, const ExtractOptions& extract, const SolverOptions& options) {
  MeasureSearch out;
  const int d0 = g.half_degree();
  if (y.values().lpNorm<Eigen::Infinity>() <= extract.tol) {
    out.status = AtmpStatus::kFeasible;
    out.measure = AtomicMeasure{};
    out.flat = FlatOrder{t0, 0};
    return out;
  }
  for (int l = l_first; l <= l_last; ++l) {
    out.l = l;
    const AtmpResult atmp = atmp_solve(y, g, R, l, options);
    out.iterations += atmp.iterations;
    if (atmp.status == AtmpStatus::kInfeasible) {
      out.status = AtmpStatus::kInfeasible;
      return out;
    }
    if (atmp.status != AtmpStatus::kFeasible) continue;
    const std::optional<FlatOrder> flat = check_flat(*atmp.omega, d0, t0);
    if (!flat) continue;
    try {
      out.measure = extract_atoms(*atmp.omega, flat->s, flat->r, extract);
    } catch (const ExtractionError&) {
      continue;
    }
    out.flat = flat;
    out.status = AtmpStatus::kFeasible;
    return out;
  }
  return out;
}

}  // namespace dromsos
