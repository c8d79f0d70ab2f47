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

// Monomial indexing, sparse real polynomials and truncated moment sequences.
//
// Every vector or matrix indexed by monomials in this library uses the same
// graded lexicographic order with the first variable dominant:
//
//   1, x1, ..., xn, x1^2, x1 x2, ..., x1 xn, x2^2, ..., xn^d.
//
// The position of an exponent in that order does not depend on the degree
// bound of the enclosing basis, so truncating a moment vector to a lower
// degree is always a prefix.

#ifndef DROMSOS_POLYCORE_HPP_
#define DROMSOS_POLYCORE_HPP_

#include <cstddef>
#include <initializer_list>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dromsos {

// Raised when an exponent, polynomial or moment vector exceeds the degree
// bound of the context it is used in.
class DegreeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when operands disagree on the number of variables or on a length.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::size_t binomial(int n, int k);

// Number of monomials of degree <= d in n variables, C(n+d, d).
std::size_t monomial_count(int nvars, int degree);

class Exponent {
 public:
  Exponent() = default;
  explicit Exponent(std::vector<int> powers);
  Exponent(std::initializer_list<int> powers);

  static Exponent zero(int nvars);
  static Exponent unit(int nvars, int i);

  int nvars() const { return static_cast<int>(powers_.size()); }
  int degree() const { return degree_; }
  int operator[](int i) const { return powers_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& powers() const { return powers_; }

  Exponent operator+(const Exponent& other) const;

  // Evaluates u^alpha.
  double eval(std::span<const double> point) const;

  std::string to_string() const;

  friend bool operator==(const Exponent&, const Exponent&) = default;

 private:
  std::vector<int> powers_;
  int degree_ = 0;
};

// Strict weak order matching the basis listing: lower degree first, then the
// exponent with the larger leading power.
struct GrlexLess {
  bool operator()(const Exponent& a, const Exponent& b) const;
};

// Position of alpha in the graded lexicographic listing of N^n.
std::size_t grlex_index(const Exponent& alpha);

class MonomialBasis {
 public:
  MonomialBasis(int nvars, int degree);

  int nvars() const { return nvars_; }
  int degree() const { return degree_; }
  std::size_t size() const { return monomials_.size(); }
  const Exponent& operator[](std::size_t i) const { return monomials_[i]; }
  const std::vector<Exponent>& monomials() const { return monomials_; }

  auto begin() const { return monomials_.begin(); }
  auto end() const { return monomials_.end(); }

  // Throws DegreeError when |alpha| exceeds the basis degree, DimensionError
  // when the variable counts differ.
  std::size_t index_of(const Exponent& alpha) const;

  // [u]_d: every monomial of the basis evaluated at `point`.
  Eigen::VectorXd evaluate(std::span<const double> point) const;

 private:
  int nvars_;
  int degree_;
  std::vector<Exponent> monomials_;
};

MonomialBasis basis(int nvars, int degree);
std::size_t monomial_index(const MonomialBasis& basis, const Exponent& alpha);

class Poly {
 public:
  using TermMap = std::map<Exponent, double, GrlexLess>;

  explicit Poly(int nvars = 1);
  Poly(int nvars, std::initializer_list<std::pair<Exponent, double>> terms);

  static Poly constant(int nvars, double value);
  static Poly variable(int nvars, int i);
  static Poly monomial(const Exponent& alpha, double coefficient = 1.0);
  // The polynomial with coefficient vector `coefficients` in basis(n, d).
  static Poly from_coefficients(int nvars, int degree,
                                std::span<const double> coefficients);

  int nvars() const { return nvars_; }
  // Largest total degree of a stored term; 0 for the zero polynomial.
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  const TermMap& terms() const { return terms_; }
  std::size_t term_count() const { return terms_.size(); }

  double coefficient(const Exponent& alpha) const;
  // Adds `value` to the coefficient of alpha; exact zeros are erased.
  void add_term(const Exponent& alpha, double value);

  // Coefficient vector in basis(nvars, degree). Throws DegreeError if the
  // polynomial does not fit.
  Eigen::VectorXd coefficients(int degree) const;

  double eval(std::span<const double> point) const;
  Poly derivative(int i) const;

  Poly& operator+=(const Poly& other);
  Poly& operator-=(const Poly& other);
  Poly& operator*=(double factor);

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, double s) { return a *= s; }
  friend Poly operator*(double s, Poly a) { return a *= s; }
  friend Poly operator-(Poly a) { return a *= -1.0; }
  friend Poly operator*(const Poly& a, const Poly& b);

  friend bool operator==(const Poly&, const Poly&) = default;

  std::string to_string() const;

 private:
  void check_nvars(const Poly& other) const;

  int nvars_;
  TermMap terms_;
};

// Re-indexes `p` as a polynomial in `nvars` variables whose variable i maps
// to variable offset + i.
Poly embed(const Poly& p, int nvars, int offset);

// Largest degree over a tuple (0 for an empty tuple).
int max_degree(std::span<const Poly> polys);

using PolyMatrix = std::vector<std::vector<Poly>>;

// Entry (i, j) is the second partial derivative d^2 f / dx_i dx_j.
PolyMatrix hessian(const Poly& f);

// Truncated moment sequence: one real value per monomial of basis(p, d).
class Tms {
 public:
  Tms(int nvars, int degree);
  Tms(int nvars, int degree, Eigen::VectorXd values);

  int nvars() const { return nvars_; }
  int degree() const { return degree_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  double& operator[](std::size_t i) { return values_[static_cast<Eigen::Index>(i)]; }
  double at(const Exponent& alpha) const;

  // The degree-d' truncation z|_{d'}; a prefix in graded order.
  Tms truncate(int degree) const;

 private:
  int nvars_;
  int degree_;
  Eigen::VectorXd values_;
};

// <q, z> = sum_alpha q_alpha z_alpha.
double riesz_pair(const Poly& q, const Tms& z);

}  // namespace dromsos

#endif  // DROMSOS_POLYCORE_HPP_
