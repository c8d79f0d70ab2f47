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

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dromsos {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kStallIterations = 30;

// Internally the program is treated as
//
//   minimize c'x  s.t.  A x = b,  G x + s = 0,  s in C
//
// with G = -E, where E picks the cone coordinates of x. The dual variables
// of the two constraint groups are y (sign-flipped relative to the public
// convention) and z in C.
struct Layout {
  std::vector<int> free_idx;
  std::vector<int> cone_idx;
  std::vector<ConeBlock> blocks;  // cone blocks only, in order
  std::vector<int> offsets;       // start of each block in the cone vector
  int dim = 0;
  int degree = 0;
};

Layout make_layout(const std::vector<ConeBlock>& cones) {
  Layout layout;
  int pos = 0;
  for (const ConeBlock& block : cones) {
    const int d = block.dim();
    if (block.kind == ConeKind::kFree) {
      for (int i = 0; i < d; ++i) layout.free_idx.push_back(pos + i);
    } else if (d > 0) {
      layout.blocks.push_back(block);
      layout.offsets.push_back(layout.dim);
      for (int i = 0; i < d; ++i) layout.cone_idx.push_back(pos + i);
      layout.dim += d;
      layout.degree += block.kind == ConeKind::kSecondOrder ? 1 : block.size;
    }
    pos += d;
  }
  return layout;
}

int side_from_svec(Eigen::Index t) {
  const int n = static_cast<int>(std::lround((std::sqrt(8.0 * static_cast<double>(t) + 1.0) - 1.0) / 2.0));
  if (static_cast<Eigen::Index>(n) * (n + 1) / 2 != t) {
    throw std::invalid_argument("svec length " + std::to_string(t) + " is not triangular");
  }
  return n;
}

VectorXd identity(const Layout& layout) {
  VectorXd e = VectorXd::Zero(layout.dim);
  for (std::size_t k = 0; k < layout.blocks.size(); ++k) {
    const ConeBlock& block = layout.blocks[k];
    const int off = layout.offsets[k];
    switch (block.kind) {
      case ConeKind::kNonneg:
        e.segment(off, block.size).setOnes();
        break;
      case ConeKind::kSecondOrder:
        e[off] = 1.0;
        break;
      case ConeKind::kPsd:
        for (int i = 0; i < block.size; ++i) {
          e[off + static_cast<int>(svec_index(block.size, i, i))] = 1.0;
        }
        break;
      case ConeKind::kFree:
        break;
    }
  }
  return e;
}

// Largest t with u + t e outside the interior, i.e. minus the smallest
// eigenvalue in the Jordan-algebra sense.
double max_violation(const Layout& layout, const VectorXd& u) {
  double worst = -kInf;
  for (std::size_t k = 0; k < layout.blocks.size(); ++k) {
    const ConeBlock& block = layout.blocks[k];
    const int off = layout.offsets[k];
    const auto seg = u.segment(off, block.dim());
    switch (block.kind) {
      case ConeKind::kNonneg:
        worst = std::max(worst, -seg.minCoeff());
        break;
      case ConeKind::kSecondOrder:
        worst = std::max(worst, seg.tail(block.size - 1).norm() - seg[0]);
        break;
      case ConeKind::kPsd: {
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(smat(seg), Eigen::EigenvaluesOnly);
        worst = std::max(worst, -eig.eigenvalues()[0]);
        break;
      }
      case ConeKind::kFree:
        break;
    }
  }
  return worst;
}

// Jordan product u o v.
VectorXd jordan(const Layout& layout, const VectorXd& u, const VectorXd& v) {
  VectorXd out(layout.dim);
  for (std::size_t k = 0; k < layout.blocks.size(); ++k) {
    const ConeBlock& block = layout.blocks[k];
    const int off = layout.offsets[k];
    const int d = block.dim();
    switch (block.kind) {
      case ConeKind::kNonneg:
        out.segment(off, d) = u.segment(off, d).cwiseProduct(v.segment(off, d));
        break;
      case ConeKind::kSecondOrder: {
        const int t = d - 1;
        out[off] = u.segment(off, d).dot(v.segment(off, d));
        out.segment(off + 1, t) = u[off] * v.segment(off + 1, t) + v[off] * u.segment(off + 1, t);
        break;
      }
      case ConeKind::kPsd: {
        const MatrixXd U = smat(u.segment(off, d));
        const MatrixXd V = smat(v.segment(off, d));
        out.segment(off, d) = svec(0.5 * (U * V + V * U));
        break;
      }
      case ConeKind::kFree:
        break;
    }
  }
  return out;
}

// Nesterov-Todd scaling W at a pair (s, z) of interior points, with
// lambda = W z = W^{-T} s.
class Scaling {
 public:
  enum class Op { kW, kWt, kWinv, kWinvT };

  static Scaling identity_scaling(const Layout& layout) {
    Scaling w(layout);
    for (std::size_t k = 0; k < layout.blocks.size(); ++k) {
      const ConeBlock& block = layout.blocks[k];
      Block& b = w.blocks_[k];
      switch (block.kind) {
        case ConeKind::kNonneg:
          b.w = VectorXd::Ones(block.size);
          break;
        case ConeKind::kSecondOrder:
          b.beta = 1.0;
          b.v = VectorXd::Zero(block.size);
          b.v[0] = 1.0;
          break;
        case ConeKind::kPsd:
          b.r = MatrixXd::Identity(block.size, block.size);
          b.rinv = b.r;
          b.lam = VectorXd::Ones(block.size);
          break;
        case ConeKind::kFree:
          break;
      }
    }
    w.lambda_ = identity(layout);
    return w;
  }

  // Returns false when s or z is not strictly interior.
  static bool compute(const Layout& layout, const VectorXd& s, const VectorXd& z, Scaling* out) {
    Scaling w(layout);
    w.lambda_.resize(layout.dim);
    for (std::size_t k = 0; k < layout.blocks.size(); ++k) {
      const ConeBlock& block = layout.blocks[k];
      const int off = layout.offsets[k];
      const int d = block.dim();
      const VectorXd ss = s.segment(off, d);
      const VectorXd zz = z.segment(off, d);
      Block& b = w.blocks_[k];
      switch (block.kind) {
        case ConeKind::kNonneg: {
          if (ss.minCoeff() <= 0.0 || zz.minCoeff() <= 0.0) return false;
          b.w = ss.cwiseQuotient(zz).cwiseSqrt();
          w.lambda_.segment(off, d) = ss.cwiseProduct(zz).cwiseSqrt();
          break;
        }
        case ConeKind::kSecondOrder: {
          const double sjs = ss[0] * ss[0] - ss.tail(d - 1).squaredNorm();
          const double zjz = zz[0] * zz[0] - zz.tail(d - 1).squaredNorm();
          if (ss[0] <= 0.0 || zz[0] <= 0.0 || sjs <= 0.0 || zjz <= 0.0) return false;
          const double ns = std::sqrt(sjs);
          const double nz = std::sqrt(zjz);
          const VectorXd sb = ss / ns;
          VectorXd zb = zz / nz;
          const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
          zb.tail(d - 1) *= -1.0;  // J zb
          const VectorXd wb = (sb + zb) / (2.0 * gamma);
          b.beta = std::sqrt(ns / nz);
          b.v = wb;
          b.v[0] += 1.0;
          b.v /= std::sqrt(2.0 * (wb[0] + 1.0));
          w.lambda_.segment(off, d) = w.apply_block(k, Op::kW, zz);
          break;
        }
        case ConeKind::kPsd: {
          Eigen::LLT<MatrixXd> ls(smat(ss));
          Eigen::LLT<MatrixXd> lz(smat(zz));
          if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
          const MatrixXd Ls = ls.matrixL();
          const MatrixXd Lz = lz.matrixL();
          Eigen::JacobiSVD<MatrixXd> svd(Lz.transpose() * Ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
          const VectorXd sigma = svd.singularValues();
          if (sigma.minCoeff() <= 0.0) return false;
          const VectorXd isq = sigma.cwiseSqrt().cwiseInverse();
          b.r = Ls * svd.matrixV() * isq.asDiagonal();
          b.rinv = isq.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
          b.lam = sigma;
          w.lambda_.segment(off, d) = svec(MatrixXd(sigma.asDiagonal()));
          break;
        }
        case ConeKind::kFree:
          break;
      }
    }
    *out = std::move(w);
    return true;
  }

  const VectorXd& lambda() const { return lambda_; }

  VectorXd apply(Op op, const VectorXd& u) const {
    VectorXd out(layout_->dim);
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      const int off = layout_->offsets[k];
      const int d = layout_->blocks[k].dim();
      out.segment(off, d) = apply_block(k, op, u.segment(off, d));
    }
    return out;
  }

  // lambda \ v: the solution u of lambda o u = v.
  VectorXd lambda_div(const VectorXd& v) const {
    VectorXd out(layout_->dim);
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      const ConeBlock& block = layout_->blocks[k];
      const int off = layout_->offsets[k];
      const int d = block.dim();
      const auto lam = lambda_.segment(off, d);
      const auto vv = v.segment(off, d);
      switch (block.kind) {
        case ConeKind::kNonneg:
          out.segment(off, d) = vv.cwiseQuotient(lam);
          break;
        case ConeKind::kSecondOrder: {
          const double det = lam[0] * lam[0] - lam.tail(d - 1).squaredNorm();
          const double u0 = (lam[0] * vv[0] - lam.tail(d - 1).dot(vv.tail(d - 1))) / det;
          out[off] = u0;
          out.segment(off + 1, d - 1) = (vv.tail(d - 1) - u0 * lam.tail(d - 1)) / lam[0];
          break;
        }
        case ConeKind::kPsd: {
          const VectorXd& l = blocks_[k].lam;
          int pos = off;
          for (int j = 0; j < block.size; ++j) {
            for (int i = j; i < block.size; ++i, ++pos) {
              out[pos] = v[pos] * 2.0 / (l[i] + l[j]);
            }
          }
          break;
        }
        case ConeKind::kFree:
          break;
      }
    }
    return out;
  }

  // Largest alpha with lambda + alpha d in the cone (infinity if unbounded).
  double max_step(const VectorXd& d) const {
    double alpha = kInf;
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      const ConeBlock& block = layout_->blocks[k];
      const int off = layout_->offsets[k];
      const int n = block.dim();
      const auto lam = lambda_.segment(off, n);
      const auto dd = d.segment(off, n);
      switch (block.kind) {
        case ConeKind::kNonneg:
          for (int i = 0; i < n; ++i) {
            if (dd[i] < 0.0) alpha = std::min(alpha, -lam[i] / dd[i]);
          }
          break;
        case ConeKind::kSecondOrder: {
          // Smallest positive root of a t^2 + 2 b t + c.
          const double a = dd[0] * dd[0] - dd.tail(n - 1).squaredNorm();
          const double b = lam[0] * dd[0] - lam.tail(n - 1).dot(dd.tail(n - 1));
          const double c = lam[0] * lam[0] - lam.tail(n - 1).squaredNorm();
          const double disc = b * b - a * c;
          if (disc < 0.0) break;
          const double q = -(b + std::copysign(std::sqrt(disc), b));
          if (q == 0.0) break;
          for (double root : {q / a, c / q}) {
            if (root > 0.0) alpha = std::min(alpha, root);
          }
          break;
        }
        case ConeKind::kPsd: {
          const VectorXd isq = blocks_[k].lam.cwiseSqrt().cwiseInverse();
          const MatrixXd D = isq.asDiagonal() * smat(dd) * isq.asDiagonal();
          Eigen::SelfAdjointEigenSolver<MatrixXd> eig(D, Eigen::EigenvaluesOnly);
          const double emin = eig.eigenvalues()[0];
          if (emin < 0.0) alpha = std::min(alpha, -1.0 / emin);
          break;
        }
        case ConeKind::kFree:
          break;
      }
    }
    return alpha;
  }

 private:
  struct Block {
    VectorXd w;      // nonneg
    double beta = 1.0;
    VectorXd v;      // second-order hyperbolic reflector
    MatrixXd r;      // psd: W(U) = r' U r
    MatrixXd rinv;
    VectorXd lam;    // psd eigenvalues of lambda
  };

  explicit Scaling(const Layout& layout) : layout_(&layout), blocks_(layout.blocks.size()) {}

  VectorXd apply_block(std::size_t k, Op op, const VectorXd& u) const {
    const ConeBlock& block = layout_->blocks[k];
    const Block& b = blocks_[k];
    switch (block.kind) {
      case ConeKind::kNonneg:
        return (op == Op::kW || op == Op::kWt) ? VectorXd(u.cwiseProduct(b.w))
                                               : VectorXd(u.cwiseQuotient(b.w));
      case ConeKind::kSecondOrder: {
        VectorXd ju = u;
        ju.tail(u.size() - 1) *= -1.0;
        if (op == Op::kW || op == Op::kWt) {
          return b.beta * (2.0 * b.v.dot(u) * b.v - ju);
        }
        VectorXd jv = b.v;
        jv.tail(jv.size() - 1) *= -1.0;
        return (2.0 * jv.dot(u) * jv - ju) / b.beta;
      }
      case ConeKind::kPsd: {
        const MatrixXd U = smat(u);
        switch (op) {
          case Op::kW:
            return svec(b.r.transpose() * U * b.r);
          case Op::kWt:
            return svec(b.r * U * b.r.transpose());
          case Op::kWinv:
            return svec(b.rinv.transpose() * U * b.rinv);
          case Op::kWinvT:
            return svec(b.rinv * U * b.rinv.transpose());
        }
        break;
      }
      case ConeKind::kFree:
        break;
    }
    return u;
  }

  const Layout* layout_;
  std::vector<Block> blocks_;
  VectorXd lambda_;
};

struct KktSolution {
  VectorXd dx;
  VectorXd dy;
  VectorXd dz;
  VectorXd zhat;  // W dz
};

// Solves
//
//   [ 0   A'  G'    ] [dx]   [bx]
//   [ A   0   0     ] [dy] = [by]
//   [ G   0  -W'W   ] [dz]   [bz]
//
// by eliminating dz and the cone part of dx, which leaves the system
// [0 AF'; AF -M] in (dx_free, dy) with M = AC W'W AC'.
class KktSystem {
 public:
  KktSystem(const MatrixXd& af, const MatrixXd& ac, const Layout& layout, const Scaling& w)
      : af_(af), ac_(ac), layout_(layout), w_(w) {
    const Eigen::Index m = ac.rows();
    const Eigen::Index nf = af.cols();
    MatrixXd B(layout.dim, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      B.col(i) = w.apply(Scaling::Op::kW, ac.row(i).transpose());
    }
    k_ = MatrixXd::Zero(nf + m, nf + m);
    k_.bottomLeftCorner(m, nf) = af;
    k_.topRightCorner(nf, m) = af.transpose();
    k_.bottomRightCorner(m, m).noalias() = -B.transpose() * B;
    const double scale = std::max(1.0, k_.cwiseAbs().maxCoeff());
    const double delta = 1e-13 * scale;
    MatrixXd reg = k_;
    reg.diagonal().head(nf).array() += delta;
    reg.diagonal().tail(m).array() -= delta;
    lu_.compute(reg);
  }

  // Reduced solve followed by refinement against the unreduced system, whose
  // residual the elimination does not see.
  KktSolution solve(const VectorXd& bx, const VectorXd& by, const VectorXd& bz) const {
    KktSolution out = solve_reduced(bx, by, bz);
    const double scale = 1.0 + std::max({bx.lpNorm<Eigen::Infinity>(), by.lpNorm<Eigen::Infinity>(),
                                         bz.lpNorm<Eigen::Infinity>()});
    double prev = kInf;
    for (int iter = 0; iter < 4; ++iter) {
      VectorXd rx = bx - full_a_t(out.dy);
      for (int i = 0; i < layout_.dim; ++i) rx[layout_.cone_idx[static_cast<std::size_t>(i)]] += out.dz[i];
      const VectorXd ry = by - full_a(out.dx);
      VectorXd rz = bz + w_.apply(Scaling::Op::kWt, out.zhat);
      for (int i = 0; i < layout_.dim; ++i) rz[i] += out.dx[layout_.cone_idx[static_cast<std::size_t>(i)]];
      const double res = std::max({rx.lpNorm<Eigen::Infinity>(), ry.lpNorm<Eigen::Infinity>(), rz.lpNorm<Eigen::Infinity>()});
      if (!(res > 1e-15 * scale) || !(res < 0.5 * prev)) break;
      prev = res;
      const KktSolution corr = solve_reduced(rx, ry, rz);
      out.dx += corr.dx;
      out.dy += corr.dy;
      out.dz += corr.dz;
      out.zhat += corr.zhat;
    }
    return out;
  }

 private:
  KktSolution solve_reduced(const VectorXd& bx, const VectorXd& by, const VectorXd& bz) const {
    const Eigen::Index m = ac_.rows();
    const Eigen::Index nf = af_.cols();
    VectorXd bxf(nf);
    VectorXd bxc(layout_.dim);
    for (Eigen::Index i = 0; i < nf; ++i) bxf[i] = bx[layout_.free_idx[static_cast<std::size_t>(i)]];
    for (int i = 0; i < layout_.dim; ++i) bxc[i] = bx[layout_.cone_idx[static_cast<std::size_t>(i)]];

    const VectorXd wtw_bxc = w_.apply(Scaling::Op::kWt, w_.apply(Scaling::Op::kW, bxc));
    VectorXd rhs(nf + m);
    rhs.head(nf) = bxf;
    rhs.tail(m) = by - ac_ * (wtw_bxc - bz);

    VectorXd sol = lu_.solve(rhs);
    for (int iter = 0; iter < 8; ++iter) {
      const VectorXd res = rhs - k_ * sol;
      if (!(res.lpNorm<Eigen::Infinity>() > 1e-15 * (1.0 + rhs.lpNorm<Eigen::Infinity>()))) break;
      sol += lu_.solve(res);
    }

    KktSolution out;
    out.dy = sol.tail(m);
    out.dz = ac_.transpose() * out.dy - bxc;
    const VectorXd dxc = -bz - w_.apply(Scaling::Op::kWt, w_.apply(Scaling::Op::kW, out.dz));
    out.dx.resize(static_cast<Eigen::Index>(layout_.free_idx.size() + layout_.cone_idx.size()));
    for (Eigen::Index i = 0; i < nf; ++i) out.dx[layout_.free_idx[static_cast<std::size_t>(i)]] = sol[i];
    for (int i = 0; i < layout_.dim; ++i) out.dx[layout_.cone_idx[static_cast<std::size_t>(i)]] = dxc[i];
    out.zhat = w_.apply(Scaling::Op::kW, out.dz);
    return out;
  }

  VectorXd full_a(const VectorXd& dx) const {
    VectorXd out = VectorXd::Zero(ac_.rows());
    for (Eigen::Index i = 0; i < af_.cols(); ++i) out += af_.col(i) * dx[layout_.free_idx[static_cast<std::size_t>(i)]];
    for (int i = 0; i < layout_.dim; ++i) out += ac_.col(i) * dx[layout_.cone_idx[static_cast<std::size_t>(i)]];
    return out;
  }

  VectorXd full_a_t(const VectorXd& dy) const {
    VectorXd out(af_.cols() + ac_.cols());
    const VectorXd f = af_.transpose() * dy;
    const VectorXd c = ac_.transpose() * dy;
    for (Eigen::Index i = 0; i < af_.cols(); ++i) out[layout_.free_idx[static_cast<std::size_t>(i)]] = f[i];
    for (int i = 0; i < layout_.dim; ++i) out[layout_.cone_idx[static_cast<std::size_t>(i)]] = c[i];
    return out;
  }

  const MatrixXd& af_;
  const MatrixXd& ac_;
  const Layout& layout_;
  const Scaling& w_;
  MatrixXd k_;
  Eigen::PartialPivLU<MatrixXd> lu_;
};

struct Presolved {
  std::vector<int> kept;
  bool inconsistent = false;
  VectorXd farkas;  // over all rows, b'y = 1, A'y ~ 0
};

Presolved presolve(const MatrixXd& A, const VectorXd& b, double tol) {
  Presolved out;
  const Eigen::Index m = A.rows();
  if (m == 0) return out;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(A.transpose());
  qr.setThreshold(tol);
  const Eigen::Index rank = qr.rank();
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index i = 0; i < rank; ++i) out.kept.push_back(perm[i]);
  std::sort(out.kept.begin(), out.kept.end());
  if (rank == m) return out;

  MatrixXd kept_t(A.cols(), rank);
  VectorXd kept_b(rank);
  for (Eigen::Index i = 0; i < rank; ++i) {
    kept_t.col(i) = A.row(out.kept[static_cast<std::size_t>(i)]).transpose();
    kept_b[i] = b[out.kept[static_cast<std::size_t>(i)]];
  }
  Eigen::ColPivHouseholderQR<MatrixXd> kqr(kept_t);
  std::vector<bool> is_kept(static_cast<std::size_t>(m), false);
  for (int i : out.kept) is_kept[static_cast<std::size_t>(i)] = true;
  for (Eigen::Index r = 0; r < m; ++r) {
    if (is_kept[static_cast<std::size_t>(r)]) continue;
    const VectorXd coef = kqr.solve(A.row(r).transpose());
    const double mismatch = b[r] - coef.dot(kept_b);
    const double scale = 1.0 + std::abs(b[r]) + coef.cwiseAbs().dot(kept_b.cwiseAbs());
    if (std::abs(mismatch) > 1e-8 * scale) {
      out.inconsistent = true;
      out.farkas = VectorXd::Zero(m);
      out.farkas[r] = 1.0;
      for (Eigen::Index i = 0; i < rank; ++i) out.farkas[out.kept[static_cast<std::size_t>(i)]] = -coef[i];
      out.farkas /= mismatch;
      return out;
    }
  }
  return out;
}

}  // namespace

std::string to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::kFree:
      return "free";
    case ConeKind::kNonneg:
      return "nonneg";
    case ConeKind::kSecondOrder:
      return "second_order";
    case ConeKind::kPsd:
      return "psd";
  }
  return "unknown";
}

std::string to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::kOptimal:
      return "optimal";
    case SolverStatus::kPrimalInfeasible:
      return "primal_infeasible";
    case SolverStatus::kDualInfeasible:
      return "dual_infeasible";
    case SolverStatus::kIterLimit:
      return "iteration_limit";
    case SolverStatus::kNumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

void ConicProgram::validate() const {
  if (A.rows() != b.size()) {
    throw std::invalid_argument("A has " + std::to_string(A.rows()) + " rows but b has length " +
                                std::to_string(b.size()));
  }
  if (A.cols() != c.size()) {
    throw std::invalid_argument("A has " + std::to_string(A.cols()) + " columns but c has length " +
                                std::to_string(c.size()));
  }
  long total = 0;
  for (std::size_t k = 0; k < cones.size(); ++k) {
    const ConeBlock& block = cones[k];
    if (block.size < 0 || (block.kind == ConeKind::kSecondOrder && block.size < 1)) {
      throw std::invalid_argument("cone block " + std::to_string(k) + " has invalid size " +
                                  std::to_string(block.size));
    }
    total += block.dim();
  }
  if (total != c.size()) {
    throw std::invalid_argument("cone blocks cover " + std::to_string(total) + " entries but there are " +
                                std::to_string(c.size()) + " variables");
  }
  if (!c.allFinite() || !A.allFinite() || !b.allFinite()) {
    throw std::invalid_argument("program data contains non-finite values");
  }
}

std::vector<int> block_offsets(const std::vector<ConeBlock>& cones) {
  std::vector<int> out;
  out.reserve(cones.size() + 1);
  int pos = 0;
  for (const ConeBlock& block : cones) {
    out.push_back(pos);
    pos += block.dim();
  }
  out.push_back(pos);
  return out;
}

Eigen::VectorXd SolverSolution::x_block(const ConicProgram& program, std::size_t block) const {
  const auto off = block_offsets(program.cones);
  return x.segment(off.at(block), program.cones.at(block).dim());
}

Eigen::VectorXd SolverSolution::s_block(const ConicProgram& program, std::size_t block) const {
  const auto off = block_offsets(program.cones);
  return s.segment(off.at(block), program.cones.at(block).dim());
}

std::size_t svec_size(int side) { return static_cast<std::size_t>(side) * static_cast<std::size_t>(side + 1) / 2; }

std::size_t svec_index(int side, int i, int j) {
  if (i < j) std::swap(i, j);
  const auto n = static_cast<std::size_t>(side);
  const auto jj = static_cast<std::size_t>(j);
  return jj * n - jj * (jj - 1) / 2 + static_cast<std::size_t>(i - j);
}

Eigen::VectorXd svec(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  VectorXd v(static_cast<Eigen::Index>(svec_size(n)));
  Eigen::Index pos = 0;
  for (int j = 0; j < n; ++j) {
    v[pos++] = m(j, j);
    for (int i = j + 1; i < n; ++i) v[pos++] = kSqrt2 * 0.5 * (m(i, j) + m(j, i));
  }
  return v;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v) {
  const int n = side_from_svec(v.size());
  MatrixXd m(n, n);
  Eigen::Index pos = 0;
  for (int j = 0; j < n; ++j) {
    m(j, j) = v[pos++];
    for (int i = j + 1; i < n; ++i) {
      m(i, j) = m(j, i) = v[pos++] / kSqrt2;
    }
  }
  return m;
}

SolverSolution solve(const ConicProgram& program, const SolverOptions& options) {
  program.validate();
  SolverSolution sol;
  const Eigen::Index n = program.c.size();
  const Eigen::Index m_all = program.b.size();
  sol.x = VectorXd::Zero(n);
  sol.y = VectorXd::Zero(m_all);
  sol.s = VectorXd::Zero(n);

  const Presolved pre = presolve(program.A, program.b, options.presolve_tol);
  sol.dropped_rows = static_cast<int>(m_all) - static_cast<int>(pre.kept.size());
  if (pre.inconsistent) {
    sol.status = SolverStatus::kPrimalInfeasible;
    sol.certificate = pre.farkas;
    sol.certificate_residual = (program.A.transpose() * pre.farkas).norm() / std::max(1.0, program.c.norm());
    sol.y = pre.farkas;
    return sol;
  }

  const Layout layout = make_layout(program.cones);
  const Eigen::Index m = static_cast<Eigen::Index>(pre.kept.size());
  const Eigen::Index nf = static_cast<Eigen::Index>(layout.free_idx.size());
  const int N = layout.dim;

  MatrixXd A(m, n);
  VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    A.row(i) = program.A.row(pre.kept[static_cast<std::size_t>(i)]);
    b[i] = program.b[pre.kept[static_cast<std::size_t>(i)]];
  }
  MatrixXd af(m, nf);
  MatrixXd ac(m, N);
  for (Eigen::Index i = 0; i < nf; ++i) af.col(i) = A.col(layout.free_idx[static_cast<std::size_t>(i)]);
  for (int i = 0; i < N; ++i) ac.col(i) = A.col(layout.cone_idx[static_cast<std::size_t>(i)]);
  const VectorXd& c = program.c;

  auto cone_part = [&](const VectorXd& v) {
    VectorXd out(N);
    for (int i = 0; i < N; ++i) out[i] = v[layout.cone_idx[static_cast<std::size_t>(i)]];
    return out;
  };
  // E' u: scatter a cone vector into variable space.
  auto scatter = [&](const VectorXd& u) {
    VectorXd out = VectorXd::Zero(n);
    for (int i = 0; i < N; ++i) out[layout.cone_idx[static_cast<std::size_t>(i)]] = u[i];
    return out;
  };

  const VectorXd e = identity(layout);
  VectorXd x;
  VectorXd y;
  VectorXd s;
  VectorXd z;
  {
    const Scaling w0 = Scaling::identity_scaling(layout);
    const KktSystem kkt(af, ac, layout, w0);
    const KktSolution primal = kkt.solve(VectorXd::Zero(n), b, VectorXd::Zero(N));
    x = primal.dx;
    s = -primal.dz;
    const KktSolution dual = kkt.solve(-c, VectorXd::Zero(m), VectorXd::Zero(N));
    y = dual.dy;
    z = dual.dz;
    if (N > 0) {
      const double ts = max_violation(layout, s);
      if (ts >= -1e-8 * std::max(s.norm(), 1.0)) s += (1.0 + ts) * e;
      const double tz = max_violation(layout, z);
      if (tz >= -1e-8 * std::max(z.norm(), 1.0)) z += (1.0 + tz) * e;
    }
  }
  double tau = 1.0;
  double kappa = 1.0;

  const double resx0 = std::max(1.0, c.norm());
  const double resy0 = std::max(1.0, b.norm());
  const double resz0 = 1.0;

  auto finish_optimal = [&]() {
    sol.status = SolverStatus::kOptimal;
    sol.x = x / tau;
    VectorXd yfull = VectorXd::Zero(m_all);
    for (Eigen::Index i = 0; i < m; ++i) yfull[pre.kept[static_cast<std::size_t>(i)]] = -y[i] / tau;
    sol.y = yfull;
    sol.s = scatter(z / tau);
  };

  // Best iterate so far; returned when the method stalls or runs out of
  // iterations.
  struct Snapshot {
    VectorXd x, y, s, z;
    double tau = 1.0;
    double merit = kInf;
    int iter = 0;
  } best;

  double best_progress = kInf;
  int progress_iter = 0;
  int small_steps = 0;
  int iter = 0;
  for (;; ++iter) {
    VectorXd r1 = A.transpose() * y + c * tau;
    for (int i = 0; i < N; ++i) r1[layout.cone_idx[static_cast<std::size_t>(i)]] -= z[i];
    const VectorXd r2 = A * x - b * tau;
    const VectorXd r3 = s - cone_part(x);
    const double cx = c.dot(x);
    const double by = b.dot(y);
    const double r4 = kappa + cx + by;
    const double gap = s.dot(z);
    const double mu = (gap + kappa * tau) / (layout.degree + 1);

    const double pcost = cx / tau;
    const double dcost = -by / tau;
    const double pres = std::max(r2.norm() / resy0, r3.norm() / resz0) / tau;
    const double dres = r1.norm() / resx0 / tau;
    const double relgap = std::abs(pcost - dcost) / (1.0 + std::abs(pcost));
    const double compl_gap = gap / (tau * tau) / (1.0 + std::abs(pcost));

    double pinfres = kInf;
    if (by < 0.0) {
      VectorXd hrx = A.transpose() * y;
      for (int i = 0; i < N; ++i) hrx[layout.cone_idx[static_cast<std::size_t>(i)]] -= z[i];
      pinfres = hrx.norm() / resx0 / (-by);
    }
    double dinfres = kInf;
    if (cx < 0.0) {
      dinfres = std::max((A * x).norm() / resy0, (s - cone_part(x)).norm() / resz0) / (-cx);
    }

    if (options.verbose) {
      std::cerr << std::setw(3) << iter << std::scientific << std::setprecision(3) << "  pcost " << pcost
                << "  dcost " << dcost << "  pres " << pres << "  dres " << dres << "  gap " << relgap
                << "  tau " << tau << "  kappa " << kappa << std::defaultfloat << "\n";
    }

    if (!std::isfinite(pres) || !std::isfinite(dres) || !std::isfinite(gap)) {
      sol.status = SolverStatus::kNumericalFailure;
      break;
    }
    const double merit = std::max({pres, dres, relgap, compl_gap});
    if (merit < best.merit) best = Snapshot{x, y, s, z, tau, merit, iter};
    const double progress = std::min({merit, pinfres, dinfres});
    if (progress < 0.5 * best_progress) {
      best_progress = progress;
      progress_iter = iter;
    }
    if (pres <= options.tol && dres <= options.tol && relgap <= options.tol && compl_gap <= options.tol) {
      finish_optimal();
      break;
    }
    if (pinfres <= options.tol_cert) {
      sol.status = SolverStatus::kPrimalInfeasible;
      VectorXd yfull = VectorXd::Zero(m_all);
      for (Eigen::Index i = 0; i < m; ++i) yfull[pre.kept[static_cast<std::size_t>(i)]] = -y[i] / (-by);
      sol.y = yfull;
      sol.s = scatter(z / (-by));
      sol.certificate = yfull;
      sol.certificate_residual = pinfres;
      break;
    }
    if (dinfres <= options.tol_cert) {
      sol.status = SolverStatus::kDualInfeasible;
      sol.x = x / (-cx);
      sol.certificate = sol.x;
      sol.certificate_residual = dinfres;
      break;
    }
    if (iter >= options.max_iterations) {
      sol.status = SolverStatus::kIterLimit;
      break;
    }
    if (iter - progress_iter > kStallIterations) {
      sol.status = SolverStatus::kNumericalFailure;
      break;
    }

    Scaling w = Scaling::identity_scaling(layout);
    if (!Scaling::compute(layout, s, z, &w)) {
      sol.status = SolverStatus::kNumericalFailure;
      break;
    }
    const VectorXd& lambda = w.lambda();
    const KktSystem kkt(af, ac, layout, w);
    const KktSolution sol1 = kkt.solve(-c, b, VectorXd::Zero(N));
    const double denom = sol1.zhat.squaredNorm() + kappa / tau;
    const VectorXd lam_sq = jordan(layout, lambda, lambda);

    VectorXd shat_aff;
    VectorXd zhat_aff;
    double dtau_aff = 0.0;
    double dkappa_aff = 0.0;
    double sigma = 0.0;
    double step = 0.0;
    KktSolution dir;
    VectorXd shat;
    double dtau = 0.0;
    double dkappa = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      const double eta = pass == 0 ? 1.0 : 1.0 - sigma;
      VectorXd rc = -lam_sq;
      double rtau = -kappa * tau;
      if (pass == 1) {
        rc += sigma * mu * e - jordan(layout, shat_aff, zhat_aff);
        rtau += sigma * mu - dtau_aff * dkappa_aff;
      }
      const VectorXd lrc = w.lambda_div(rc);
      const VectorXd bz = -eta * r3 - w.apply(Scaling::Op::kWt, lrc);
      KktSolution sol0 = kkt.solve(-eta * r1, -eta * r2, bz);
      const double q0 = c.dot(sol0.dx) + b.dot(sol0.dy);
      dtau = (eta * r4 + q0 + rtau / tau) / denom;
      sol0.dx += dtau * sol1.dx;
      sol0.dy += dtau * sol1.dy;
      sol0.dz += dtau * sol1.dz;
      sol0.zhat += dtau * sol1.zhat;
      shat = lrc - sol0.zhat;
      dkappa = (rtau - kappa * dtau) / tau;

      double amax = std::min(w.max_step(shat), w.max_step(sol0.zhat));
      if (dtau < 0.0) amax = std::min(amax, -tau / dtau);
      if (dkappa < 0.0) amax = std::min(amax, -kappa / dkappa);
      if (pass == 0) {
        const double a_aff = std::min(1.0, amax);
        sigma = std::pow(1.0 - a_aff, 3);
        shat_aff = shat;
        zhat_aff = sol0.zhat;
        dtau_aff = dtau;
        dkappa_aff = dkappa;
      } else {
        step = std::min(1.0, options.step_fraction * amax);
        dir = std::move(sol0);
      }
    }

    if (!(step > 1e-12)) {
      if (++small_steps >= 5) {
        sol.status = SolverStatus::kNumericalFailure;
        break;
      }
    } else {
      small_steps = 0;
    }
    x += step * dir.dx;
    y += step * dir.dy;
    z += step * dir.dz;
    s += step * w.apply(Scaling::Op::kWt, shat);
    tau += step * dtau;
    kappa += step * dkappa;
  }
  sol.iterations = iter;

  if (sol.status == SolverStatus::kIterLimit || sol.status == SolverStatus::kNumericalFailure) {
    const SolverStatus status = sol.status;
    if (std::isfinite(best.merit)) {
      x = best.x;
      y = best.y;
      s = best.s;
      z = best.z;
      tau = best.tau;
    }
    finish_optimal();
    sol.status = status;
  }
  if (sol.status != SolverStatus::kPrimalInfeasible && sol.status != SolverStatus::kDualInfeasible) {
    sol.primal_objective = c.dot(sol.x);
    sol.dual_objective = program.b.dot(sol.y);
    sol.primal_residual = (program.A * sol.x - program.b).norm() / (1.0 + program.b.norm());
    sol.dual_residual = (c - program.A.transpose() * sol.y - sol.s).norm() / (1.0 + c.norm());
    sol.gap = sol.x.dot(sol.s);
  }
  return sol;
}

bool SolverSolution::near_optimal(double tol) const {
  if (status == SolverStatus::kOptimal) return true;
  if (status != SolverStatus::kIterLimit && status != SolverStatus::kNumericalFailure) return false;
  const double relgap = std::abs(primal_objective - dual_objective) / (1.0 + std::abs(primal_objective));
  return std::max({primal_residual, dual_residual, relgap}) <= tol;
}

void write_conic_listing(const ConicProgram& program, std::ostream& out) {
  const auto prec = out.precision(17);
  out << "# standard form: minimize c'x s.t. A x = b, x in K\n";
  out << "vars " << program.num_vars() << "\n";
  out << "eqs " << program.num_eqs() << "\n";
  out << "cones " << program.cones.size() << "\n";
  for (const ConeBlock& block : program.cones) out << to_string(block.kind) << " " << block.size << "\n";
  out << "c\n";
  for (Eigen::Index i = 0; i < program.c.size(); ++i) {
    if (program.c[i] != 0.0) out << i << " " << program.c[i] << "\n";
  }
  out << "A\n";
  for (Eigen::Index i = 0; i < program.A.rows(); ++i) {
    for (Eigen::Index j = 0; j < program.A.cols(); ++j) {
      if (program.A(i, j) != 0.0) out << i << " " << j << " " << program.A(i, j) << "\n";
    }
  }
  out << "b\n";
  for (Eigen::Index i = 0; i < program.b.size(); ++i) {
    if (program.b[i] != 0.0) out << i << " " << program.b[i] << "\n";
  }
  out << "end\n";
  out.precision(prec);
}

}  // namespace dromsos
