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

#include "dromsos/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dromsos {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}  // namespace

LinExpr LinExpr::var(int index, double coefficient) {
  LinExpr e;
  e.terms.emplace_back(index, coefficient);
  return e;
}

LinExpr& LinExpr::operator+=(const LinExpr& other) {
  terms.insert(terms.end(), other.terms.begin(), other.terms.end());
  constant += other.constant;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& other) {
  for (const auto& [v, a] : other.terms) terms.emplace_back(v, -a);
  constant -= other.constant;
  return *this;
}

LinExpr& LinExpr::operator*=(double factor) {
  for (auto& term : terms) term.second *= factor;
  constant *= factor;
  return *this;
}

double LinExpr::eval(const Eigen::VectorXd& values) const {
  double out = constant;
  for (const auto& [v, a] : terms) out += a * values[v];
  return out;
}

std::string to_string(ModelStatus status) {
  switch (status) {
    case ModelStatus::kOptimal:
      return "optimal";
    case ModelStatus::kInfeasible:
      return "infeasible";
    case ModelStatus::kUnbounded:
      return "unbounded";
    case ModelStatus::kIterLimit:
      return "iteration_limit";
    case ModelStatus::kNumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

int ConicModel::add_variable() { return num_vars_++; }

int ConicModel::add_variables(int count) {
  if (count < 0) throw std::invalid_argument("negative variable count");
  const int first = num_vars_;
  num_vars_ += count;
  return first;
}

int ConicModel::add_equality(const LinExpr& e) {
  equalities_.push_back(e);
  return static_cast<int>(equalities_.size()) - 1;
}

int ConicModel::add_nonneg(const std::vector<LinExpr>& rows) {
  cones_.push_back({ConeBlock::nonneg(static_cast<int>(rows.size())), rows});
  return static_cast<int>(cones_.size()) - 1;
}

int ConicModel::add_second_order(const std::vector<LinExpr>& rows) {
  if (rows.empty()) throw std::invalid_argument("second-order constraint needs at least one row");
  cones_.push_back({ConeBlock::second_order(static_cast<int>(rows.size())), rows});
  return static_cast<int>(cones_.size()) - 1;
}

int ConicModel::add_psd(int side, const std::vector<std::vector<LinExpr>>& entries) {
  if (static_cast<int>(entries.size()) != side) {
    throw std::invalid_argument("psd constraint expects " + std::to_string(side) + " rows");
  }
  Cone cone{ConeBlock::psd(side), {}};
  cone.rows.reserve(svec_size(side));
  for (int j = 0; j < side; ++j) {
    for (int i = j; i < side; ++i) {
      if (static_cast<int>(entries[static_cast<std::size_t>(i)].size()) <= j) {
        throw std::invalid_argument("psd constraint row " + std::to_string(i) + " is too short");
      }
      LinExpr e = entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (i != j) e *= kSqrt2;
      cone.rows.push_back(std::move(e));
    }
  }
  cones_.push_back(std::move(cone));
  return static_cast<int>(cones_.size()) - 1;
}

std::vector<int> ConicModel::add_psd_variable(int side, int* constraint) {
  const int first = add_variables(static_cast<int>(svec_size(side)));
  std::vector<int> idx(svec_size(side));
  std::vector<std::vector<LinExpr>> entries(static_cast<std::size_t>(side),
                                            std::vector<LinExpr>(static_cast<std::size_t>(side)));
  int pos = 0;
  for (int j = 0; j < side; ++j) {
    for (int i = j; i < side; ++i, ++pos) {
      idx[static_cast<std::size_t>(pos)] = first + pos;
      entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = LinExpr::var(first + pos);
    }
  }
  const int c = add_psd(side, entries);
  if (constraint != nullptr) *constraint = c;
  return idx;
}

void ConicModel::minimize(const LinExpr& objective) {
  objective_ = objective;
  maximize_ = false;
}

void ConicModel::maximize(const LinExpr& objective) {
  objective_ = objective;
  maximize_ = true;
}

ConicProgram ConicModel::compile() const {
  // Dual standard form: maximize b'w s.t. c - A'w in K, where column j of A'
  // is minus the coefficient vector of constraint row j.
  int ncols = static_cast<int>(equalities_.size());
  std::vector<ConeBlock> blocks;
  if (!equalities_.empty()) blocks.push_back(ConeBlock::free(static_cast<int>(equalities_.size())));
  for (const Cone& cone : cones_) {
    blocks.push_back(cone.block);
    ncols += cone.block.dim();
  }

  ConicProgram p;
  p.cones = std::move(blocks);
  p.c = Eigen::VectorXd::Zero(ncols);
  p.A = Eigen::MatrixXd::Zero(num_vars_, ncols);
  p.b = Eigen::VectorXd::Zero(num_vars_);

  int col = 0;
  auto emit = [&](const LinExpr& e) {
    p.c[col] = e.constant;
    for (const auto& [v, a] : e.terms) {
      if (v < 0 || v >= num_vars_) throw std::out_of_range("expression references unknown variable");
      p.A(v, col) -= a;
    }
    ++col;
  };
  for (const LinExpr& e : equalities_) emit(e);
  for (const Cone& cone : cones_) {
    for (const LinExpr& e : cone.rows) emit(e);
  }
  for (const auto& [v, a] : objective_.terms) {
    if (v < 0 || v >= num_vars_) throw std::out_of_range("objective references unknown variable");
    p.b[v] += maximize_ ? a : -a;
  }
  return p;
}

ModelSolution ConicModel::solve(const SolverOptions& options) const {
  const ConicProgram p = compile();
  ModelSolution out;
  out.raw = dromsos::solve(p, options);
  const SolverSolution& raw = out.raw;
  switch (raw.status) {
    case SolverStatus::kOptimal:
      out.status = ModelStatus::kOptimal;
      break;
    case SolverStatus::kPrimalInfeasible:
      out.status = ModelStatus::kUnbounded;
      break;
    case SolverStatus::kDualInfeasible:
      out.status = ModelStatus::kInfeasible;
      break;
    case SolverStatus::kIterLimit:
      out.status = ModelStatus::kIterLimit;
      break;
    case SolverStatus::kNumericalFailure:
      out.status = ModelStatus::kNumericalFailure;
      break;
  }
  out.values = raw.y;
  out.objective = objective_.eval(out.values);
  int col = 0;
  for (std::size_t i = 0; i < equalities_.size(); ++i) out.equality_duals.push_back(raw.x[col++]);
  for (const Cone& cone : cones_) {
    const int d = cone.block.dim();
    out.cone_duals.push_back(raw.x.segment(col, d));
    col += d;
  }
  return out;
}

}  // namespace dromsos
