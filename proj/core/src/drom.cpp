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

#include "dromsos/drom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dromsos {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

int ceil_half(int v) { return (v + 1) / 2; }

std::string block_error(std::size_t i, const std::string& what) {
  return "moment set block " + std::to_string(i) + ": " + what;
}

void check_offset(const VectorXd& offset, bool homogenized, const std::string& kind) {
  if (homogenized && offset.size() > 0 && offset.lpNorm<Eigen::Infinity>() != 0.0) {
    throw std::invalid_argument(kind + " block is homogenized but carries a nonzero offset");
  }
}

std::vector<int> iota_vars(int first, std::size_t count) {
  std::vector<int> out(count);
  std::iota(out.begin(), out.end(), first);
  return out;
}

}  // namespace

ConeYBlock ConeYBlock::polyhedral(MatrixXd T, VectorXd u, MatrixXd E, VectorXd e, bool homogenized) {
  return ConeYBlock{PolyhedralY{std::move(T), std::move(u), std::move(E), std::move(e)}, homogenized};
}

ConeYBlock ConeYBlock::lmi(std::vector<MatrixXd> coefficients, MatrixXd B, bool bounded) {
  return ConeYBlock{LmiY{std::move(coefficients), std::move(B), bounded}, false};
}

ConeYBlock ConeYBlock::second_order(MatrixXd rows, VectorXd offset, bool homogenized) {
  return ConeYBlock{SecondOrderY{std::move(rows), std::move(offset)}, homogenized};
}

std::string ConeYBlock::kind() const {
  switch (data.index()) {
    case 0:
      return "polyhedral";
    case 1:
      return "lmi";
    default:
      return "second_order";
  }
}

void ConeYBlock::validate(std::size_t y_dim) const {
  const auto cols = static_cast<Eigen::Index>(y_dim);
  if (const auto* poly = std::get_if<PolyhedralY>(&data)) {
    if (poly->T.rows() > 0 && poly->T.cols() != cols) throw std::invalid_argument("polyhedral T has the wrong column count");
    if (poly->u.size() != poly->T.rows()) throw std::invalid_argument("polyhedral u length differs from the rows of T");
    if (poly->E.rows() > 0 && poly->E.cols() != cols) throw std::invalid_argument("polyhedral E has the wrong column count");
    if (poly->e.size() != poly->E.rows()) throw std::invalid_argument("polyhedral e length differs from the rows of E");
    if (poly->T.rows() + poly->E.rows() == 0) throw std::invalid_argument("polyhedral block has no rows");
    check_offset(poly->u, homogenized, "polyhedral");
    check_offset(poly->e, homogenized, "polyhedral");
  } else if (const auto* lmi = std::get_if<LmiY>(&data)) {
    if (!lmi->bounded) throw std::invalid_argument("lmi block must declare a bounded set; the conic hull may not be closed");
    if (lmi->coefficients.size() != y_dim) throw std::invalid_argument("lmi block needs one coefficient matrix per moment");
    const Eigen::Index side = lmi->B.rows();
    if (side == 0 || lmi->B.cols() != side) throw std::invalid_argument("lmi B must be square and nonempty");
    if (!lmi->B.isApprox(lmi->B.transpose(), 1e-12)) throw std::invalid_argument("lmi B must be symmetric");
    for (const MatrixXd& a : lmi->coefficients) {
      if (a.rows() != side || a.cols() != side) throw std::invalid_argument("lmi coefficient matrices must match B");
      if (!a.isApprox(a.transpose(), 1e-12) && a.norm() > 0.0) throw std::invalid_argument("lmi coefficients must be symmetric");
    }
  } else {
    const auto& soc = std::get<SecondOrderY>(data);
    if (soc.rows.rows() < 1 || soc.rows.cols() != cols) throw std::invalid_argument("second_order rows have the wrong shape");
    if (soc.offset.size() != soc.rows.rows()) throw std::invalid_argument("second_order offset length differs from rows");
    check_offset(soc.offset, homogenized, "second_order");
  }
}

double ConeYBlock::residual(const VectorXd& y, double s) const {
  const double scale = homogenized ? 0.0 : s;
  double worst = 0.0;
  if (const auto* poly = std::get_if<PolyhedralY>(&data)) {
    if (poly->T.rows() > 0) worst = std::max(worst, (-(poly->T * y + scale * poly->u)).maxCoeff());
    if (poly->E.rows() > 0) worst = std::max(worst, (poly->E * y + scale * poly->e).lpNorm<Eigen::Infinity>());
  } else if (const auto* lmi = std::get_if<LmiY>(&data)) {
    MatrixXd m = scale * lmi->B;
    for (std::size_t a = 0; a < lmi->coefficients.size(); ++a) m += y[static_cast<Eigen::Index>(a)] * lmi->coefficients[a];
    worst = std::max(worst, -Eigen::SelfAdjointEigenSolver<MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()[0]);
  } else {
    const auto& soc = std::get<SecondOrderY>(data);
    const VectorXd v = soc.rows * y + scale * soc.offset;
    worst = std::max(worst, v.tail(v.size() - 1).norm() - v[0]);
  }
  return std::max(worst, 0.0);
}

Poly DromProblem::h() const {
  const int nv = n + p;
  Poly out(nv);
  const MonomialBasis xi = basis(p, d);
  for (std::size_t a = 0; a < xi.size(); ++a) {
    std::vector<int> powers(static_cast<std::size_t>(nv), 0);
    for (int i = 0; i < p; ++i) powers[static_cast<std::size_t>(n + i)] = xi[a][i];
    const auto row = static_cast<Eigen::Index>(a);
    out.add_term(Exponent(powers), b[row]);
    for (int j = 0; j < n; ++j) {
      std::vector<int> with_x = powers;
      with_x[static_cast<std::size_t>(j)] = 1;
      out.add_term(Exponent(std::move(with_x)), A(row, j));
    }
  }
  return out;
}

VectorXd DromProblem::h_coefficients(const VectorXd& x) const { return A * x + b; }

std::vector<Poly> DromProblem::x_generators() const {
  std::vector<Poly> out = c;
  for (const Poly& e : c_eq) {
    out.push_back(e);
    out.push_back(-e);
  }
  return out;
}

void DromProblem::validate() const {
  if (n < 1 || p < 1 || d < 1) throw std::invalid_argument("dimensions n, p and d must be positive");
  if (f.nvars() != n) throw DimensionError("objective must have n variables");
  for (const Poly& q : c) {
    if (q.nvars() != n) throw DimensionError("decision constraints must have n variables");
  }
  for (const Poly& q : c_eq) {
    if (q.nvars() != n) throw DimensionError("decision equalities must have n variables");
  }
  if (g.nvars() != p) throw DimensionError("support generators must have p variables");
  const auto rows = static_cast<Eigen::Index>(y_dim());
  if (A.rows() != rows || A.cols() != n) throw DimensionError("A must be C(p+d, d) x n");
  if (b.size() != rows) throw DimensionError("b must have C(p+d, d) entries");
  for (std::size_t i = 0; i < y_blocks.size(); ++i) {
    try {
      y_blocks[i].validate(y_dim());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(block_error(i, e.what()));
    }
  }
}

std::pair<MatrixXd, VectorXd> affine_in_x(const Poly& h, int n, int p, int d) {
  if (h.nvars() != n + p) throw DimensionError("h must have n + p variables");
  const auto rows = static_cast<Eigen::Index>(monomial_count(p, d));
  MatrixXd A = MatrixXd::Zero(rows, n);
  VectorXd b = VectorXd::Zero(rows);
  for (const auto& [alpha, coef] : h.terms()) {
    std::vector<int> xi(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) xi[static_cast<std::size_t>(i)] = alpha[n + i];
    const Exponent beta(std::move(xi));
    if (beta.degree() > d) throw DegreeError("h exceeds degree " + std::to_string(d) + " in xi");
    int x_degree = 0;
    int var = -1;
    for (int j = 0; j < n; ++j) {
      x_degree += alpha[j];
      if (alpha[j] > 0) var = j;
    }
    if (x_degree > 1) throw DegreeError("h is not affine in the decision variables");
    const auto row = static_cast<Eigen::Index>(grlex_index(beta));
    if (var < 0) {
      b[row] += coef;
    } else {
      A(row, var) += coef;
    }
  }
  return {A, b};
}

DromProblem minmax_to_drom(const Poly& F, int n, int p, std::vector<Poly> c, std::vector<Poly> c_eq,
                           const SemiAlgSet& g, std::vector<ConeYBlock> y_blocks) {
  if (F.nvars() != n + p) throw DimensionError("F must have n + p variables");
  bool pinned = false;
  for (const ConeYBlock& block : y_blocks) {
    const auto* poly = std::get_if<PolyhedralY>(&block.data);
    if (poly == nullptr || block.homogenized) continue;
    for (Eigen::Index r = 0; r < poly->E.rows(); ++r) {
      const double lead = poly->E(r, 0);
      const bool only_mass = lead != 0.0 && poly->E.row(r).tail(poly->E.cols() - 1).lpNorm<Eigen::Infinity>() == 0.0;
      if (only_mass && std::abs(-poly->e[r] / lead - 1.0) <= 1e-12) pinned = true;
    }
  }
  if (!pinned) throw std::invalid_argument("min-max reduction needs probability measures: pin y_0 = 1 with a polyhedral equality");

  int d = 0;
  for (const auto& [alpha, coef] : F.terms()) {
    int deg = 0;
    for (int i = 0; i < p; ++i) deg += alpha[n + i];
    d = std::max(d, deg);
  }
  d = std::max(d, 1);
  const int nv = n + 1 + p;
  const Poly h = Poly::variable(nv, 0) - embed(F, nv, 1);

  DromProblem out;
  out.n = n + 1;
  out.p = p;
  out.d = d;
  out.f = Poly::variable(n + 1, 0);
  for (const Poly& q : c) out.c.push_back(embed(q, n + 1, 1));
  for (const Poly& q : c_eq) out.c_eq.push_back(embed(q, n + 1, 1));
  out.g = g;
  std::tie(out.A, out.b) = affine_in_x(h, n + 1, p, d);
  out.y_blocks = std::move(y_blocks);
  out.validate();
  return out;
}

YBlockHandles build_cone_y(ConicModel& model, const std::vector<ConeYBlock>& blocks, std::span<const int> y_vars,
                           int s_var) {
  YBlockHandles out;
  const auto linear = [&](const auto& row, double offset, bool homogenized) {
    LinExpr e;
    for (Eigen::Index a = 0; a < row.size(); ++a) {
      if (row[a] != 0.0) e.terms.emplace_back(y_vars[static_cast<std::size_t>(a)], row[a]);
    }
    if (!homogenized && offset != 0.0) e.terms.emplace_back(s_var, offset);
    return e;
  };
  for (const ConeYBlock& block : blocks) {
    block.validate(y_vars.size());
    out.nonneg.push_back(-1);
    out.psd.push_back(-1);
    out.second_order.push_back(-1);
    out.equalities.emplace_back();
    if (const auto* poly = std::get_if<PolyhedralY>(&block.data)) {
      std::vector<LinExpr> rows;
      for (Eigen::Index r = 0; r < poly->T.rows(); ++r) rows.push_back(linear(poly->T.row(r), poly->u[r], block.homogenized));
      if (!rows.empty()) out.nonneg.back() = model.add_nonneg(rows);
      for (Eigen::Index r = 0; r < poly->E.rows(); ++r) {
        out.equalities.back().push_back(model.add_equality(linear(poly->E.row(r), poly->e[r], block.homogenized)));
      }
    } else if (const auto* lmi = std::get_if<LmiY>(&block.data)) {
      const auto side = static_cast<int>(lmi->B.rows());
      std::vector<std::vector<LinExpr>> entries(static_cast<std::size_t>(side));
      for (int i = 0; i < side; ++i) {
        for (int j = 0; j <= i; ++j) {
          LinExpr e;
          for (std::size_t a = 0; a < lmi->coefficients.size(); ++a) {
            const double v = lmi->coefficients[a](i, j);
            if (v != 0.0) e.terms.emplace_back(y_vars[a], v);
          }
          if (lmi->B(i, j) != 0.0) e.terms.emplace_back(s_var, lmi->B(i, j));
          entries[static_cast<std::size_t>(i)].push_back(std::move(e));
        }
      }
      out.psd.back() = model.add_psd(side, entries);
    } else {
      const auto& soc = std::get<SecondOrderY>(block.data);
      std::vector<LinExpr> rows;
      for (Eigen::Index r = 0; r < soc.rows.rows(); ++r) rows.push_back(linear(soc.rows.row(r), soc.offset[r], block.homogenized));
      out.second_order.back() = model.add_second_order(rows);
    }
  }
  return out;
}

Relaxation assemble_order_k(const DromProblem& problem, int k) {
  problem.validate();
  if (2 * k < std::max(problem.d, problem.g.degree())) {
    throw DegreeError("relaxation order " + std::to_string(k) + " is below max(d, deg g) / 2");
  }
  const std::vector<Poly> gens = problem.x_generators();
  const int d1 = std::max(1, qm_half_degree(problem.f, gens));
  Relaxation out{ConicModel{}, QuadraticModuleSpec(problem.n, gens, d1), IndexMaps{}};
  ConicModel& model = out.model;
  IndexMaps& maps = out.maps;
  maps.k = k;

  maps.gamma = model.add_variable();
  const std::size_t ny = problem.y_dim();
  const std::size_t nz = monomial_count(problem.p, 2 * k);
  maps.y = iota_vars(model.add_variables(static_cast<int>(ny)), ny);
  maps.z = iota_vars(model.add_variables(static_cast<int>(nz)), nz);
  maps.s = model.add_variable();
  model.add_nonneg({LinExpr::var(maps.s)});

  for (const LinearMatrixMap& map : compile_cone_sg(problem.g, 2 * k)) {
    maps.moment_constraints.push_back(model.add_psd(map.side(), map.expressions(maps.z)));
  }
  for (std::size_t a = 0; a < ny; ++a) {
    maps.y_equalities.push_back(model.add_equality(LinExpr::var(maps.y[a]) - LinExpr::var(maps.z[a])));
  }
  maps.y_blocks = build_cone_y(model, problem.y_blocks, maps.y, maps.s);

  AffinePoly target(problem.f);
  target.add(Exponent::zero(problem.n), LinExpr::var(maps.gamma, -1.0));
  for (int j = 0; j < problem.n; ++j) {
    LinExpr e;
    for (std::size_t a = 0; a < ny; ++a) {
      const double v = problem.A(static_cast<Eigen::Index>(a), j);
      if (v != 0.0) e.terms.emplace_back(maps.y[a], -v);
    }
    target.add(Exponent::unit(problem.n, j), e);
  }
  maps.qm = compile_qm_membership(model, target, out.qm);

  LinExpr objective = LinExpr::var(maps.gamma);
  for (std::size_t a = 0; a < ny; ++a) {
    const double v = problem.b[static_cast<Eigen::Index>(a)];
    if (v != 0.0) objective.terms.emplace_back(maps.y[a], -v);
  }
  model.maximize(objective);
  return out;
}

Recovery recover_primal(const ModelSolution& solution, const Relaxation& relaxation) {
  Tms w = relaxation.maps.qm.matching_multipliers(relaxation.qm, solution);
  if (std::abs(w[0]) < 1e-10) throw RecoveryError("vanishing w_0; the optimizer cannot be recovered");
  w.values() /= w[0];
  const int n = relaxation.qm.nvars();
  VectorXd x(n);
  for (int j = 0; j < n; ++j) x[j] = w[static_cast<std::size_t>(1 + j)];
  return {x, w};
}

bool Certificates::passed() const {
  return feasibility <= tol && objective_match <= tol * scale && duality_gap <= tol * scale &&
         complementarity <= tol * scale;
}

Certificates certify(const VectorXd& x, const Tms& w, double value, const Tms& y, const DromProblem& problem,
                     double tol) {
  Certificates out;
  out.tol = tol;
  const std::span<const double> pt(x.data(), static_cast<std::size_t>(x.size()));
  for (const Poly& q : problem.c) {
    const double v = q.eval(pt);
    out.constraint_values.push_back(v);
    out.feasibility = std::max(out.feasibility, -v);
  }
  for (const Poly& q : problem.c_eq) {
    const double v = q.eval(pt);
    out.constraint_values.push_back(v);
    out.feasibility = std::max(out.feasibility, std::abs(v));
  }
  const double fw = riesz_pair(problem.f, w);
  out.objective_match = std::abs(fw - problem.f.eval(pt));
  out.duality_gap = std::abs(fw - value);
  out.complementarity = std::abs(problem.h_coefficients(x).dot(y.values()));
  out.scale = std::max({1.0, std::abs(value), y.values().lpNorm<Eigen::Infinity>()});
  return out;
}

std::string to_string(Tightness t) {
  switch (t) {
    case Tightness::kCertified:
      return "certified";
    case Tightness::kUndecided:
      return "undecided";
    case Tightness::kNoMeasure:
      return "no_measure";
  }
  return "unknown";
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kSolved:
      return "solved";
    case RunStatus::kUndecided:
      return "undecided";
    case RunStatus::kInfeasibleOrUnbounded:
      return "infeasible_or_unbounded";
    case RunStatus::kSolverFailure:
      return "solver_failure";
  }
  return "unknown";
}

int exit_code(RunStatus status) {
  switch (status) {
    case RunStatus::kSolved:
      return 0;
    case RunStatus::kInfeasibleOrUnbounded:
      return 3;
    default:
      return 2;
  }
}

DromProblem apply_options(const DromProblem& input, const DromOptions& options) {
  DromProblem problem = input;
  if (options.ball_radius) {
    Poly ball = Poly::constant(problem.p, *options.ball_radius);
    for (int i = 0; i < problem.p; ++i) ball -= Poly::variable(problem.p, i) * Poly::variable(problem.p, i);
    problem.g = problem.g.with_generator(ball);
  }
  problem.validate();
  return problem;
}

int initial_order(const DromProblem& problem, const DromOptions& options) {
  return options.order.value_or(std::max(ceil_half(problem.d), ceil_half(problem.g.degree())));
}

SolveReport run(const DromProblem& input, const DromOptions& options) {
  const DromProblem problem = apply_options(input, options);
  const int t0 = ceil_half(problem.d);
  const int d0 = problem.g.half_degree();
  const int k0 = initial_order(problem, options);
  const int k_max = options.max_order.value_or(k0 + 3);
  const Poly R = random_sos(options.seed, problem.p, t0);
  const int l_first = std::max(t0 + 1, d0);
  const int l_last = t0 + 1 + options.extra_completion_orders;

  SolveReport report;
  report.seed = options.seed;
  bool any_solved = false;
  bool all_unbounded = true;
  for (int k = k0; k <= k_max; ++k) {
    const Relaxation relaxation = assemble_order_k(problem, k);
    const ModelSolution sol = relaxation.model.solve(options.solver);
    report.solver_iterations += sol.raw.iterations;
    OrderAttempt attempt;
    attempt.k = k;
    attempt.status = sol.status;
    attempt.iterations = sol.raw.iterations;
    attempt.value = sol.objective;

    if (sol.status == ModelStatus::kUnbounded) {
      report.attempts.push_back(attempt);
      report.message = "relaxation unbounded at k=" + std::to_string(k) + ": infeasible or order too low";
      continue;
    }
    all_unbounded = false;
    if (sol.status == ModelStatus::kInfeasible && sol.raw.certificate_residual <= options.solver.tol_cert) {
      report.attempts.push_back(attempt);
      report.status = RunStatus::kInfeasibleOrUnbounded;
      report.order_k = k;
      report.message = "relaxation infeasible at k=" + std::to_string(k) + ": the problem is unbounded below";
      return report;
    }
    if (!sol.raw.near_optimal(kNearOptimalTol)) {
      report.attempts.push_back(attempt);
      report.message = "solver " + to_string(sol.raw.status) + " at k=" + std::to_string(k);
      continue;
    }

    std::optional<Recovery> recovered;
    try {
      recovered = recover_primal(sol, relaxation);
    } catch (const RecoveryError& e) {
      report.attempts.push_back(attempt);
      report.message = e.what();
      continue;
    }
    any_solved = true;
    const Recovery& rec = *recovered;
    const Tms y(problem.p, problem.d, sol.values(relaxation.maps.y));
    const Tms z(problem.p, 2 * k, sol.values(relaxation.maps.z));
    const double s_value = sol.values[relaxation.maps.s];
    report.order_k = k;
    report.optimal_value = sol.objective;
    report.gamma = sol.values[relaxation.maps.gamma];
    report.x = rec.x;
    report.y = y;
    report.z = z;
    report.w = rec.w;
    report.certificates = certify(rec.x, rec.w, sol.objective, y, problem, options.tol);
    report.tightness = Tightness::kUndecided;
    report.worst_case_measure.reset();

    const MeasureSearch search = find_representing_measure(y, problem.g, R, t0, l_first, l_last,
                                                           ExtractOptions{options.seed, kExtractTol}, options.solver);
    report.solver_iterations += search.iterations;
    attempt.l = search.l;
    attempt.atmp = search.status;
    if (search.status == AtmpStatus::kInfeasible) report.tightness = Tightness::kNoMeasure;
    if (search.measure) {
      attempt.flat = true;
      report.attempts.push_back(attempt);
      report.tightness = Tightness::kCertified;
      report.measure_error = moment_error(*search.measure, y, problem.d);
      const VectorXd ym = moments(*search.measure, problem.p, problem.d).values();
      for (const ConeYBlock& block : problem.y_blocks) {
        report.measure_y_residual = std::max(report.measure_y_residual, block.residual(ym, s_value));
      }
      report.worst_case_measure = search.measure;
      report.status = report.certificates->passed() ? RunStatus::kSolved : RunStatus::kUndecided;
      report.message = report.status == RunStatus::kSolved ? "certified" : "measure found but optimizer certificates fail";
      return report;
    }
    report.attempts.push_back(attempt);
    report.message = "no flat completion at k=" + std::to_string(k);
  }
  if (any_solved) {
    report.status = RunStatus::kUndecided;
  } else if (all_unbounded) {
    report.status = RunStatus::kInfeasibleOrUnbounded;
  } else {
    report.status = RunStatus::kSolverFailure;
  }
  return report;
}

}  // namespace dromsos
