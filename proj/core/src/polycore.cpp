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

#include "dromsos/polycore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dromsos {

std::size_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::size_t result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  }
  return result;
}

std::size_t monomial_count(int nvars, int degree) {
  if (degree < 0) return 0;
  return binomial(nvars + degree, degree);
}

// ---------------------------------------------------------------------------
// Exponent

Exponent::Exponent(std::vector<int> powers) : powers_(std::move(powers)) {
  for (int p : powers_) {
    if (p < 0) throw DegreeError("exponent entries must be nonnegative");
    degree_ += p;
  }
}

Exponent::Exponent(std::initializer_list<int> powers)
    : Exponent(std::vector<int>(powers)) {}

Exponent Exponent::zero(int nvars) {
  return Exponent(std::vector<int>(static_cast<std::size_t>(nvars), 0));
}

Exponent Exponent::unit(int nvars, int i) {
  std::vector<int> p(static_cast<std::size_t>(nvars), 0);
  p.at(static_cast<std::size_t>(i)) = 1;
  return Exponent(std::move(p));
}

Exponent Exponent::operator+(const Exponent& other) const {
  if (other.nvars() != nvars()) {
    throw DimensionError("exponent variable counts differ");
  }
  std::vector<int> sum(powers_);
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += other.powers_[i];
  return Exponent(std::move(sum));
}

double Exponent::eval(std::span<const double> point) const {
  if (point.size() != powers_.size()) {
    throw DimensionError("point dimension does not match exponent");
  }
  double value = 1.0;
  for (std::size_t i = 0; i < powers_.size(); ++i) {
    for (int k = 0; k < powers_[i]; ++k) value *= point[i];
  }
  return value;
}

std::string Exponent::to_string() const {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < powers_.size(); ++i) {
    if (i) out << ',';
    out << powers_[i];
  }
  out << ')';
  return out.str();
}

bool GrlexLess::operator()(const Exponent& a, const Exponent& b) const {
  if (a.nvars() != b.nvars()) return a.nvars() < b.nvars();
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  return a.powers() > b.powers();
}

std::size_t grlex_index(const Exponent& alpha) {
  const int n = alpha.nvars();
  const int total = alpha.degree();
  std::size_t index = monomial_count(n, total - 1);
  int remaining = total;
  for (int i = 0; i + 1 < n; ++i) {
    const int parts = n - i - 1;
    for (int v = alpha[i] + 1; v <= remaining; ++v) {
      index += binomial(remaining - v + parts - 1, parts - 1);
    }
    remaining -= alpha[i];
  }
  return index;
}

// ---------------------------------------------------------------------------
// MonomialBasis

namespace {

void append_degree(int nvars, int degree, std::vector<int>& prefix,
                   std::vector<Exponent>& out) {
  const int used = std::accumulate(prefix.begin(), prefix.end(), 0);
  const int remaining = degree - used;
  if (static_cast<int>(prefix.size()) + 1 == nvars) {
    prefix.push_back(remaining);
    out.emplace_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    prefix.push_back(v);
    append_degree(nvars, degree, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

MonomialBasis::MonomialBasis(int nvars, int degree)
    : nvars_(nvars), degree_(degree) {
  if (nvars < 1) throw DimensionError("a basis needs at least one variable");
  if (degree < 0) throw DegreeError("basis degree must be nonnegative");
  monomials_.reserve(monomial_count(nvars, degree));
  std::vector<int> prefix;
  for (int t = 0; t <= degree; ++t) append_degree(nvars, t, prefix, monomials_);
}

std::size_t MonomialBasis::index_of(const Exponent& alpha) const {
  if (alpha.nvars() != nvars_) {
    throw DimensionError("exponent " + alpha.to_string() + " has " +
                         std::to_string(alpha.nvars()) + " variables, basis has " +
                         std::to_string(nvars_));
  }
  if (alpha.degree() > degree_) {
    throw DegreeError("exponent " + alpha.to_string() + " exceeds basis degree " +
                      std::to_string(degree_));
  }
  return grlex_index(alpha);
}

Eigen::VectorXd MonomialBasis::evaluate(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != nvars_) {
    throw DimensionError("point dimension does not match basis");
  }
  Eigen::VectorXd values(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) {
    values[static_cast<Eigen::Index>(i)] = monomials_[i].eval(point);
  }
  return values;
}

MonomialBasis basis(int nvars, int degree) { return MonomialBasis(nvars, degree); }

std::size_t monomial_index(const MonomialBasis& basis, const Exponent& alpha) {
  return basis.index_of(alpha);
}

// ---------------------------------------------------------------------------
// Poly

Poly::Poly(int nvars) : nvars_(nvars) {
  if (nvars < 1) throw DimensionError("a polynomial needs at least one variable");
}

Poly::Poly(int nvars, std::initializer_list<std::pair<Exponent, double>> terms)
    : Poly(nvars) {
  for (const auto& [alpha, c] : terms) add_term(alpha, c);
}

Poly Poly::constant(int nvars, double value) {
  Poly p(nvars);
  p.add_term(Exponent::zero(nvars), value);
  return p;
}

Poly Poly::variable(int nvars, int i) {
  Poly p(nvars);
  p.add_term(Exponent::unit(nvars, i), 1.0);
  return p;
}

Poly Poly::monomial(const Exponent& alpha, double coefficient) {
  Poly p(alpha.nvars());
  p.add_term(alpha, coefficient);
  return p;
}

Poly Poly::from_coefficients(int nvars, int degree,
                             std::span<const double> coefficients) {
  MonomialBasis b(nvars, degree);
  if (coefficients.size() != b.size()) {
    throw DimensionError("coefficient vector length does not match basis(" +
                         std::to_string(nvars) + "," + std::to_string(degree) + ")");
  }
  Poly p(nvars);
  for (std::size_t i = 0; i < b.size(); ++i) p.add_term(b[i], coefficients[i]);
  return p;
}

int Poly::degree() const {
  int d = 0;
  for (const auto& [alpha, c] : terms_) d = std::max(d, alpha.degree());
  return d;
}

double Poly::coefficient(const Exponent& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? 0.0 : it->second;
}

void Poly::add_term(const Exponent& alpha, double value) {
  if (alpha.nvars() != nvars_) {
    throw DimensionError("term " + alpha.to_string() + " does not match " +
                         std::to_string(nvars_) + " variables");
  }
  if (value == 0.0) return;
  auto [it, inserted] = terms_.emplace(alpha, value);
  if (!inserted) {
    it->second += value;
    if (it->second == 0.0) terms_.erase(it);
  }
}

Eigen::VectorXd Poly::coefficients(int degree) const {
  if (this->degree() > degree) {
    throw DegreeError("polynomial of degree " + std::to_string(this->degree()) +
                      " does not fit degree " + std::to_string(degree));
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(monomial_count(nvars_, degree)));
  for (const auto& [alpha, c] : terms_) {
    v[static_cast<Eigen::Index>(grlex_index(alpha))] = c;
  }
  return v;
}

double Poly::eval(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != nvars_) {
    throw DimensionError("evaluation point has " + std::to_string(point.size()) +
                         " coordinates, polynomial has " + std::to_string(nvars_) +
                         " variables");
  }
  double value = 0.0;
  for (const auto& [alpha, c] : terms_) value += c * alpha.eval(point);
  return value;
}

Poly Poly::derivative(int i) const {
  if (i < 0 || i >= nvars_) throw DimensionError("derivative index out of range");
  Poly d(nvars_);
  for (const auto& [alpha, c] : terms_) {
    const int power = alpha[i];
    if (power == 0) continue;
    std::vector<int> p = alpha.powers();
    p[static_cast<std::size_t>(i)] -= 1;
    d.add_term(Exponent(std::move(p)), c * power);
  }
  return d;
}

void Poly::check_nvars(const Poly& other) const {
  if (other.nvars_ != nvars_) {
    throw DimensionError("polynomials in " + std::to_string(nvars_) + " and " +
                         std::to_string(other.nvars_) + " variables");
  }
}

Poly& Poly::operator+=(const Poly& other) {
  check_nvars(other);
  for (const auto& [alpha, c] : other.terms_) add_term(alpha, c);
  return *this;
}

Poly& Poly::operator-=(const Poly& other) {
  check_nvars(other);
  for (const auto& [alpha, c] : other.terms_) add_term(alpha, -c);
  return *this;
}

Poly& Poly::operator*=(double factor) {
  if (factor == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= factor;
    it = it->second == 0.0 ? terms_.erase(it) : std::next(it);
  }
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  a.check_nvars(b);
  Poly product(a.nvars_);
  for (const auto& [alpha, ca] : a.terms_) {
    for (const auto& [beta, cb] : b.terms_) product.add_term(alpha + beta, ca * cb);
  }
  return product;
}

std::string Poly::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [alpha, c] : terms_) {
    if (!first) out << (c < 0 ? " - " : " + ");
    else if (c < 0) out << '-';
    first = false;
    out << std::abs(c);
    for (int i = 0; i < alpha.nvars(); ++i) {
      if (alpha[i] == 0) continue;
      out << "*x" << (i + 1);
      if (alpha[i] > 1) out << '^' << alpha[i];
    }
  }
  return out.str();
}

Poly embed(const Poly& p, int nvars, int offset) {
  if (offset < 0 || offset + p.nvars() > nvars) {
    throw DimensionError("embedding does not fit the target variable count");
  }
  Poly out(nvars);
  for (const auto& [alpha, c] : p.terms()) {
    std::vector<int> powers(static_cast<std::size_t>(nvars), 0);
    for (int i = 0; i < p.nvars(); ++i) {
      powers[static_cast<std::size_t>(offset + i)] = alpha[i];
    }
    out.add_term(Exponent(std::move(powers)), c);
  }
  return out;
}

int max_degree(std::span<const Poly> polys) {
  int d = 0;
  for (const Poly& p : polys) d = std::max(d, p.degree());
  return d;
}

PolyMatrix hessian(const Poly& f) {
  const int n = f.nvars();
  PolyMatrix h(static_cast<std::size_t>(n));
  std::vector<Poly> gradient;
  gradient.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) gradient.push_back(f.derivative(i));
  for (int i = 0; i < n; ++i) {
    h[static_cast<std::size_t>(i)].reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      // Mixed partials commute; the upper triangle is mirrored.
      if (j < i) {
        h[static_cast<std::size_t>(i)].push_back(
            h[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
      } else {
        h[static_cast<std::size_t>(i)].push_back(
            gradient[static_cast<std::size_t>(i)].derivative(j));
      }
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Tms

Tms::Tms(int nvars, int degree)
    : nvars_(nvars),
      degree_(degree),
      values_(Eigen::VectorXd::Zero(
          static_cast<Eigen::Index>(monomial_count(nvars, degree)))) {
  if (nvars < 1) throw DimensionError("a tms needs at least one variable");
  if (degree < 0) throw DegreeError("tms degree must be nonnegative");
}

Tms::Tms(int nvars, int degree, Eigen::VectorXd values)
    : nvars_(nvars), degree_(degree), values_(std::move(values)) {
  if (nvars < 1) throw DimensionError("a tms needs at least one variable");
  if (degree < 0) throw DegreeError("tms degree must be nonnegative");
  const auto expected = monomial_count(nvars, degree);
  if (static_cast<std::size_t>(values_.size()) != expected) {
    throw DimensionError("tms of degree " + std::to_string(degree) + " in " +
                         std::to_string(nvars) + " variables needs " +
                         std::to_string(expected) + " values, got " +
                         std::to_string(values_.size()));
  }
}

double Tms::at(const Exponent& alpha) const {
  if (alpha.nvars() != nvars_) throw DimensionError("exponent does not match tms");
  if (alpha.degree() > degree_) {
    throw DegreeError("exponent " + alpha.to_string() + " exceeds tms degree");
  }
  return values_[static_cast<Eigen::Index>(grlex_index(alpha))];
}

Tms Tms::truncate(int degree) const {
  if (degree > degree_ || degree < 0) {
    throw DegreeError("cannot truncate a degree-" + std::to_string(degree_) +
                      " tms to degree " + std::to_string(degree));
  }
  const auto n = static_cast<Eigen::Index>(monomial_count(nvars_, degree));
  return Tms(nvars_, degree, values_.head(n));
}

double riesz_pair(const Poly& q, const Tms& z) {
  if (q.nvars() != z.nvars()) {
    throw DimensionError("polynomial and tms variable counts differ");
  }
  if (q.degree() > z.degree()) {
    throw DegreeError("polynomial degree " + std::to_string(q.degree()) +
                      " exceeds tms degree " + std::to_string(z.degree()));
  }
  double value = 0.0;
  for (const auto& [alpha, c] : q.terms()) {
    value += c * z[grlex_index(alpha)];
  }
  return value;
}

}  // namespace dromsos
