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

#include "problem_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace dromsos::io {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct Fixture {
  std::string_view name;
  std::string_view text;
};

constexpr std::array kFixtures = {
#include "fixtures.inc"
};

class Node {
 public:
  Node(const json& value, std::string path) : value_(&value), path_(std::move(path)) {}

  const json& raw() const { return *value_; }
  const std::string& path() const { return path_; }
  [[noreturn]] void fail(const std::string& what) const { throw SchemaError(path_, what); }

  void require_object() const {
    if (!value_->is_object()) fail("expected an object");
  }
  void only(std::initializer_list<std::string_view> keys) const {
    require_object();
    for (const auto& item : value_->items()) {
      if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
        Node(item.value(), child_path(item.key())).fail("unknown field");
      }
    }
  }
  bool has(std::string_view key) const {
    require_object();
    return value_->contains(std::string(key));
  }
  Node at(std::string_view key) const {
    require_object();
    const auto it = value_->find(std::string(key));
    if (it == value_->end()) Node(*value_, child_path(key)).fail("missing required field");
    return Node(*it, child_path(key));
  }
  std::optional<Node> get(std::string_view key) const {
    if (!has(key)) return std::nullopt;
    return at(key);
  }
  std::size_t size() const {
    if (!value_->is_array()) fail("expected an array");
    return value_->size();
  }
  Node operator[](std::size_t i) const {
    size();
    return Node((*value_)[i], path_ + "/" + std::to_string(i));
  }
  double number() const {
    if (!value_->is_number()) fail("expected a number");
    const double v = value_->get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  int integer() const {
    if (!value_->is_number_integer()) fail("expected an integer");
    return value_->get<int>();
  }
  int nonneg_integer() const {
    const int v = integer();
    if (v < 0) fail("expected a nonnegative integer");
    return v;
  }
  bool boolean() const {
    if (!value_->is_boolean()) fail("expected true or false");
    return value_->get<bool>();
  }
  std::string string() const {
    if (!value_->is_string()) fail("expected a string");
    return value_->get<std::string>();
  }
  VectorXd vector(std::optional<std::size_t> length = std::nullopt) const {
    const std::size_t len = size();
    if (length && len != *length) fail("expected " + std::to_string(*length) + " numbers, found " + std::to_string(len));
    VectorXd out(static_cast<Eigen::Index>(len));
    for (std::size_t i = 0; i < len; ++i) out[static_cast<Eigen::Index>(i)] = (*this)[i].number();
    return out;
  }
  std::vector<int> exponent(int nvars) const {
    const std::size_t len = size();
    if (len != static_cast<std::size_t>(nvars)) fail("expected " + std::to_string(nvars) + " exponents, found " + std::to_string(len));
    std::vector<int> out(len);
    for (std::size_t i = 0; i < len; ++i) out[i] = (*this)[i].nonneg_integer();
    return out;
  }
  MatrixXd matrix(std::optional<std::size_t> rows, std::size_t cols) const {
    const std::size_t r = size();
    if (rows && r != *rows) fail("expected " + std::to_string(*rows) + " rows, found " + std::to_string(r));
    MatrixXd out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < r; ++i) out.row(static_cast<Eigen::Index>(i)) = (*this)[i].vector(cols).transpose();
    return out;
  }

 private:
  std::string child_path(std::string_view key) const { return path_ + "/" + std::string(key); }

  const json* value_;
  std::string path_;
};

json parse_text(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("malformed JSON: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("", "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void check_header(const Node& root) {
  if (const auto v = root.get("schema_version"); v && v->integer() != kSchemaVersion) {
    v->fail("unsupported schema version " + std::to_string(v->integer()));
  }
  const Node order = root.at("monomial_order");
  if (order.string() != kMonomialOrder) order.fail("monomial order must be \"grlex\"");
}

Poly parse_terms(const Node& list, int nvars) {
  Poly out(nvars);
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Node term = list[i];
    term.only({"exponent", "coefficient"});
    out.add_term(Exponent(term.at("exponent").exponent(nvars)), term.at("coefficient").number());
  }
  return out;
}

// Terms (x exponent, xi exponent, coefficient) as a polynomial in (x, xi).
Poly parse_bilinear(const Node& list, int n, int p, std::optional<int> max_xi_degree) {
  Poly out(n + p);
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Node term = list[i];
    term.only({"x", "xi", "coefficient"});
    std::vector<int> powers = term.at("x").exponent(n);
    int x_degree = 0;
    for (int v : powers) x_degree += v;
    if (x_degree > 1) term.at("x").fail("h must be affine in x: exponent degree above one");
    const std::vector<int> xi = term.at("xi").exponent(p);
    int xi_degree = 0;
    for (int v : xi) xi_degree += v;
    if (max_xi_degree && xi_degree > *max_xi_degree) {
      term.at("xi").fail("degree " + std::to_string(xi_degree) + " exceeds d = " + std::to_string(*max_xi_degree));
    }
    powers.insert(powers.end(), xi.begin(), xi.end());
    out.add_term(Exponent(std::move(powers)), term.at("coefficient").number());
  }
  return out;
}

ConeYBlock parse_block(const Node& node, int p, std::size_t y_dim) {
  node.require_object();
  if (node.raw().size() != 1) node.fail("a moment set block has exactly one of polyhedral, lmi, second_order");
  ConeYBlock block;
  if (const auto poly = node.get("polyhedral")) {
    poly->only({"T", "u", "E", "e", "homogenized"});
    const bool hom = poly->get("homogenized") ? poly->at("homogenized").boolean() : false;
    MatrixXd T(0, static_cast<Eigen::Index>(y_dim));
    VectorXd u(0);
    MatrixXd E(0, static_cast<Eigen::Index>(y_dim));
    VectorXd e(0);
    if (const auto t = poly->get("T")) {
      T = t->matrix(std::nullopt, y_dim);
      u = poly->at("u").vector(static_cast<std::size_t>(T.rows()));
    }
    if (const auto t = poly->get("E")) {
      E = t->matrix(std::nullopt, y_dim);
      e = poly->at("e").vector(static_cast<std::size_t>(E.rows()));
    }
    block = ConeYBlock::polyhedral(T, u, E, e, hom);
  } else if (const auto lmi = node.get("lmi")) {
    lmi->only({"coeff_mats", "B", "bounded"});
    const Node b = lmi->at("B");
    const std::size_t side = b.size();
    if (side == 0) b.fail("B must be nonempty");
    const MatrixXd B = b.matrix(side, side);
    const auto s = static_cast<Eigen::Index>(side);
    std::vector<MatrixXd> coeffs(y_dim, MatrixXd::Zero(s, s));
    const Node list = lmi->at("coeff_mats");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Node entry = list[i];
      entry.only({"moment", "matrix"});
      const Exponent alpha(entry.at("moment").exponent(p));
      const std::size_t pos = grlex_index(alpha);
      if (pos >= y_dim) entry.at("moment").fail("moment exceeds degree d");
      coeffs[pos] += entry.at("matrix").matrix(side, side);
    }
    block = ConeYBlock::lmi(std::move(coeffs), B, lmi->at("bounded").boolean());
  } else if (const auto soc = node.get("second_order")) {
    soc->only({"rows", "offset", "homogenized"});
    const bool hom = soc->get("homogenized") ? soc->at("homogenized").boolean() : false;
    const MatrixXd rows = soc->at("rows").matrix(std::nullopt, y_dim);
    block = ConeYBlock::second_order(rows, soc->at("offset").vector(static_cast<std::size_t>(rows.rows())), hom);
  } else {
    node.fail("expected one of polyhedral, lmi, second_order");
  }
  try {
    block.validate(y_dim);
  } catch (const std::invalid_argument& e) {
    node.fail(e.what());
  }
  return block;
}

std::vector<ConeYBlock> parse_blocks(const Node& list, int p, std::size_t y_dim) {
  std::vector<ConeYBlock> out;
  for (std::size_t i = 0; i < list.size(); ++i) out.push_back(parse_block(list[i], p, y_dim));
  return out;
}

void parse_constraints(const Node& list, int n, std::vector<Poly>* c, std::vector<Poly>* c_eq) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Node item = list[i];
    item.only({"terms", "equality"});
    Poly q = parse_terms(item.at("terms"), n);
    const bool eq = item.get("equality") ? item.at("equality").boolean() : false;
    (eq ? c_eq : c)->push_back(std::move(q));
  }
}

SemiAlgSet parse_support(const Node& list, int p) {
  std::vector<Poly> gens;
  for (std::size_t i = 0; i < list.size(); ++i) {
    list[i].only({"terms"});
    gens.push_back(parse_terms(list[i].at("terms"), p));
  }
  return SemiAlgSet(p, std::move(gens));
}

FileOptions parse_options(const Node& node) {
  node.only({"order", "max_order", "seed", "tolerances", "ball_radius"});
  FileOptions out;
  if (const auto v = node.get("order")) out.order = v->integer();
  if (const auto v = node.get("max_order")) out.max_order = v->integer();
  if (const auto v = node.get("seed")) {
    if (!v->raw().is_number_unsigned()) v->fail("expected a nonnegative integer");
    out.seed = v->raw().get<std::uint64_t>();
  }
  if (const auto t = node.get("tolerances")) {
    t->only({"certificate"});
    if (const auto v = t->get("certificate")) out.tol = v->number();
  }
  if (const auto v = node.get("ball_radius")) {
    out.ball_radius = v->number();
    if (*out.ball_radius <= 0.0) v->fail("ball radius must be positive");
  }
  return out;
}

Expected parse_expected(const Node& node, int n, int p) {
  node.only({"optimal_value", "value_tol", "x", "x_tol", "atoms", "weights", "atom_tol", "weight_tol", "order"});
  Expected out;
  out.optimal_value = node.at("optimal_value").number();
  out.value_tol = node.at("value_tol").number();
  if (const auto v = node.get("x")) {
    const VectorXd x = v->vector(static_cast<std::size_t>(n));
    out.x.assign(x.data(), x.data() + x.size());
    out.x_tol = node.at("x_tol").number();
  }
  if (const auto v = node.get("atoms")) {
    for (std::size_t i = 0; i < v->size(); ++i) out.atoms.push_back((*v)[i].vector(static_cast<std::size_t>(p)));
    const VectorXd w = node.at("weights").vector(out.atoms.size());
    out.weights.assign(w.data(), w.data() + w.size());
    out.atom_tol = node.at("atom_tol").number();
    out.weight_tol = node.at("weight_tol").number();
  }
  if (const auto v = node.get("order")) out.order = v->integer();
  return out;
}

int xi_degree(const Poly& F, int n, int p) {
  int d = 0;
  for (const auto& [alpha, c] : F.terms()) {
    int deg = 0;
    for (int i = 0; i < p; ++i) deg += alpha[n + i];
    d = std::max(d, deg);
  }
  return std::max(d, 1);
}

ordered_json terms_json(const Poly& q) {
  ordered_json out = ordered_json::array();
  for (const auto& [alpha, c] : q.terms()) out.push_back({{"exponent", alpha.powers()}, {"coefficient", c}});
  return out;
}

ordered_json vector_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

ordered_json matrix_json(const MatrixXd& m) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i).transpose()));
  return out;
}

ordered_json block_json(const ConeYBlock& block, int p) {
  if (const auto* poly = std::get_if<PolyhedralY>(&block.data)) {
    ordered_json body;
    if (poly->T.rows() > 0) {
      body["T"] = matrix_json(poly->T);
      body["u"] = vector_json(poly->u);
    }
    if (poly->E.rows() > 0) {
      body["E"] = matrix_json(poly->E);
      body["e"] = vector_json(poly->e);
    }
    body["homogenized"] = block.homogenized;
    return {{"polyhedral", body}};
  }
  if (const auto* lmi = std::get_if<LmiY>(&block.data)) {
    ordered_json mats = ordered_json::array();
    int deg = 0;
    while (monomial_count(p, deg) < lmi->coefficients.size()) ++deg;
    const MonomialBasis b = basis(p, deg);
    for (std::size_t a = 0; a < lmi->coefficients.size(); ++a) {
      if (lmi->coefficients[a].norm() == 0.0) continue;
      mats.push_back({{"moment", b[a].powers()}, {"matrix", matrix_json(lmi->coefficients[a])}});
    }
    return {{"lmi", {{"coeff_mats", mats}, {"B", matrix_json(lmi->B)}, {"bounded", lmi->bounded}}}};
  }
  const auto& soc = std::get<SecondOrderY>(block.data);
  return {{"second_order",
           {{"rows", matrix_json(soc.rows)}, {"offset", vector_json(soc.offset)}, {"homogenized", block.homogenized}}}};
}

ordered_json tms_json(const std::optional<Tms>& t) {
  if (!t) return nullptr;
  return vector_json(t->values());
}

Tms tms_from(const Node& node, int nvars) {
  const VectorXd v = node.vector();
  int deg = 0;
  while (monomial_count(nvars, deg) < static_cast<std::size_t>(v.size())) ++deg;
  if (monomial_count(nvars, deg) != static_cast<std::size_t>(v.size())) node.fail("length is not a full tms length");
  return Tms(nvars, deg, v);
}

}  // namespace

SchemaError::SchemaError(const std::string& path, const std::string& what)
    : std::runtime_error((path.empty() ? std::string("/") : path) + ": " + what), path_(path.empty() ? "/" : path) {}

ProblemFile parse_problem(std::string_view text) {
  const json doc = parse_text(text);
  const Node root(doc, "");
  root.only({"schema_version", "monomial_order", "name", "description", "dimensions", "objective",
             "decision_constraints", "support", "h", "minmax", "moment_set", "options", "expected"});
  check_header(root);
  ProblemFile out;
  if (const auto v = root.get("name")) out.name = v->string();
  if (const auto v = root.get("description")) out.description = v->string();
  DromProblem& problem = out.problem;

  if (const auto mm = root.get("minmax")) {
    for (std::string_view key : {"dimensions", "objective", "h"}) {
      if (root.has(key)) root.at(key).fail("not allowed together with minmax");
    }
    mm->only({"n", "p", "F"});
    const int n = mm->at("n").integer();
    const int p = mm->at("p").integer();
    if (n < 1) mm->at("n").fail("must be positive");
    if (p < 1) mm->at("p").fail("must be positive");
    const Poly F = parse_bilinear(mm->at("F"), n, p, std::nullopt);
    const int d = xi_degree(F, n, p);
    std::vector<Poly> c;
    std::vector<Poly> c_eq;
    if (const auto v = root.get("decision_constraints")) parse_constraints(*v, n, &c, &c_eq);
    const SemiAlgSet g = parse_support(root.at("support"), p);
    std::vector<ConeYBlock> blocks = parse_blocks(root.at("moment_set"), p, monomial_count(p, d));
    try {
      problem = minmax_to_drom(F, n, p, std::move(c), std::move(c_eq), g, std::move(blocks));
    } catch (const std::invalid_argument& e) {
      root.at("moment_set").fail(e.what());
    }
  } else {
    const Node dims = root.at("dimensions");
    dims.only({"n", "p", "d"});
    problem.n = dims.at("n").integer();
    problem.p = dims.at("p").integer();
    problem.d = dims.at("d").integer();
    if (problem.n < 1) dims.at("n").fail("must be positive");
    if (problem.p < 1) dims.at("p").fail("must be positive");
    if (problem.d < 1) dims.at("d").fail("must be positive");
    problem.f = parse_terms(root.at("objective"), problem.n);
    if (const auto v = root.get("decision_constraints")) parse_constraints(*v, problem.n, &problem.c, &problem.c_eq);
    problem.g = parse_support(root.at("support"), problem.p);
    const Node h = root.at("h");
    h.require_object();
    if (h.raw().size() != 1) h.fail("expected exactly one of matrix, bilinear_terms");
    const std::size_t rows = problem.y_dim();
    if (const auto m = h.get("matrix")) {
      m->only({"A", "b"});
      problem.A = m->at("A").matrix(rows, static_cast<std::size_t>(problem.n));
      problem.b = m->at("b").vector(rows);
    } else if (const auto t = h.get("bilinear_terms")) {
      const Poly hp = parse_bilinear(*t, problem.n, problem.p, problem.d);
      std::tie(problem.A, problem.b) = affine_in_x(hp, problem.n, problem.p, problem.d);
    } else {
      h.fail("expected one of matrix, bilinear_terms");
    }
    problem.y_blocks = parse_blocks(root.at("moment_set"), problem.p, rows);
  }
  try {
    problem.validate();
  } catch (const std::invalid_argument& e) {
    root.fail(e.what());
  }
  if (const auto v = root.get("options")) out.options = parse_options(*v);
  if (const auto v = root.get("expected")) out.expected = parse_expected(*v, problem.n, problem.p);
  return out;
}

ProblemFile load_problem(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_problem(text);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + "#" + e.path(), std::string(e.what()).substr(e.path().size() + 2));
  }
}

std::string dump_problem(const ProblemFile& file) {
  const DromProblem& p = file.problem;
  ordered_json out;
  out["schema_version"] = kSchemaVersion;
  out["monomial_order"] = kMonomialOrder;
  if (!file.name.empty()) out["name"] = file.name;
  if (!file.description.empty()) out["description"] = file.description;
  out["dimensions"] = {{"n", p.n}, {"p", p.p}, {"d", p.d}};
  out["objective"] = terms_json(p.f);
  ordered_json cons = ordered_json::array();
  for (const Poly& q : p.c) cons.push_back({{"terms", terms_json(q)}, {"equality", false}});
  for (const Poly& q : p.c_eq) cons.push_back({{"terms", terms_json(q)}, {"equality", true}});
  out["decision_constraints"] = cons;
  ordered_json support = ordered_json::array();
  for (const Poly& q : p.g.generators()) support.push_back({{"terms", terms_json(q)}});
  out["support"] = support;
  out["h"] = {{"matrix", {{"A", matrix_json(p.A)}, {"b", vector_json(p.b)}}}};
  ordered_json blocks = ordered_json::array();
  for (const ConeYBlock& b : p.y_blocks) blocks.push_back(block_json(b, p.p));
  out["moment_set"] = blocks;
  ordered_json opts = ordered_json::object();
  if (file.options.order) opts["order"] = *file.options.order;
  if (file.options.max_order) opts["max_order"] = *file.options.max_order;
  if (file.options.seed) opts["seed"] = *file.options.seed;
  if (file.options.tol) opts["tolerances"] = {{"certificate", *file.options.tol}};
  if (file.options.ball_radius) opts["ball_radius"] = *file.options.ball_radius;
  if (!opts.empty()) out["options"] = opts;
  if (file.expected) {
    const Expected& e = *file.expected;
    ordered_json ex;
    ex["optimal_value"] = e.optimal_value;
    ex["value_tol"] = e.value_tol;
    if (!e.x.empty()) {
      ex["x"] = e.x;
      ex["x_tol"] = e.x_tol;
    }
    if (!e.atoms.empty()) {
      ordered_json atoms = ordered_json::array();
      for (const VectorXd& a : e.atoms) atoms.push_back(vector_json(a));
      ex["atoms"] = atoms;
      ex["weights"] = e.weights;
      ex["atom_tol"] = e.atom_tol;
      ex["weight_tol"] = e.weight_tol;
    }
    if (e.order) ex["order"] = *e.order;
    out["expected"] = ex;
  }
  return out.dump(2) + "\n";
}

std::vector<BilinearTerm> bilinear_terms(const DromProblem& problem) {
  std::vector<BilinearTerm> out;
  const MonomialBasis xi = basis(problem.p, problem.d);
  for (std::size_t a = 0; a < xi.size(); ++a) {
    const auto row = static_cast<Eigen::Index>(a);
    if (problem.b[row] != 0.0) out.push_back({std::vector<int>(static_cast<std::size_t>(problem.n), 0), xi[a].powers(), problem.b[row]});
    for (int j = 0; j < problem.n; ++j) {
      if (problem.A(row, j) == 0.0) continue;
      std::vector<int> x(static_cast<std::size_t>(problem.n), 0);
      x[static_cast<std::size_t>(j)] = 1;
      out.push_back({std::move(x), xi[a].powers(), problem.A(row, j)});
    }
  }
  return out;
}

std::string report_json(const SolveReport& report, const DromProblem& problem, double wall_clock_seconds) {
  ordered_json out;
  out["schema_version"] = kSchemaVersion;
  out["monomial_order"] = kMonomialOrder;
  out["status"] = to_string(report.status);
  out["tightness"] = to_string(report.tightness);
  out["k"] = report.order_k;
  out["optimal_value"] = report.optimal_value;
  out["x"] = vector_json(report.x);
  out["gamma"] = report.gamma;
  out["y"] = tms_json(report.y);
  out["z"] = tms_json(report.z);
  out["w"] = tms_json(report.w);
  if (report.worst_case_measure) {
    ordered_json atoms = ordered_json::array();
    for (const VectorXd& a : report.worst_case_measure->atoms) atoms.push_back(vector_json(a));
    out["measure"] = {{"atoms", atoms},
                      {"weights", report.worst_case_measure->weights},
                      {"moment_error", report.measure_error},
                      {"y_residual", report.measure_y_residual}};
  } else {
    out["measure"] = nullptr;
  }
  if (report.certificates) {
    const Certificates& c = *report.certificates;
    out["certificates"] = {{"constraint_values", c.constraint_values},
                           {"feasibility", c.feasibility},
                           {"objective_match", c.objective_match},
                           {"duality_gap", c.duality_gap},
                           {"complementarity", c.complementarity},
                           {"tol", c.tol},
                           {"scale", c.scale},
                           {"passed", c.passed()}};
  } else {
    out["certificates"] = nullptr;
  }
  ordered_json attempts = ordered_json::array();
  for (const OrderAttempt& a : report.attempts) {
    attempts.push_back({{"k", a.k},
                        {"status", to_string(a.status)},
                        {"value", a.value},
                        {"iterations", a.iterations},
                        {"completion", to_string(a.atmp)},
                        {"l", a.l},
                        {"flat", a.flat}});
  }
  out["attempts"] = attempts;
  out["dimensions"] = {{"n", problem.n}, {"p", problem.p}, {"d", problem.d}};
  out["solver_iterations"] = report.solver_iterations;
  out["seed"] = report.seed;
  out["message"] = report.message;
  out["wall_clock_seconds"] = wall_clock_seconds;
  return out.dump(2) + "\n";
}

StoredReport parse_report(std::string_view text, const DromProblem& problem) {
  const json doc = parse_text(text);
  const Node root(doc, "");
  check_header(root);
  StoredReport out;
  out.status = root.at("status").string();
  out.order_k = root.at("k").integer();
  out.optimal_value = root.at("optimal_value").number();
  out.x = root.at("x").vector(static_cast<std::size_t>(problem.n));
  if (!root.at("y").raw().is_null()) {
    out.y = Tms(problem.p, problem.d, root.at("y").vector(problem.y_dim()));
  }
  if (!root.at("w").raw().is_null()) out.w = tms_from(root.at("w"), problem.n);
  const Node c = root.at("certificates");
  if (!c.raw().is_null()) {
    const VectorXd v = c.at("constraint_values").vector();
    out.constraint_values.assign(v.data(), v.data() + v.size());
    out.feasibility = c.at("feasibility").number();
    out.objective_match = c.at("objective_match").number();
    out.duality_gap = c.at("duality_gap").number();
    out.complementarity = c.at("complementarity").number();
  }
  return out;
}

MomentsFile parse_moments(std::string_view text) {
  const json doc = parse_text(text);
  const Node root(doc, "");
  root.only({"schema_version", "monomial_order", "p", "degree", "y", "support", "order", "max_order", "seed"});
  check_header(root);
  const int p = root.at("p").integer();
  if (p < 1) root.at("p").fail("must be positive");
  const int degree = root.at("degree").integer();
  if (degree < 1) root.at("degree").fail("must be positive");
  MomentsFile out;
  out.y = Tms(p, degree, root.at("y").vector(monomial_count(p, degree)));
  out.g = parse_support(root.at("support"), p);
  if (const auto v = root.get("order")) out.order = v->integer();
  if (const auto v = root.get("max_order")) out.max_order = v->integer();
  if (const auto v = root.get("seed")) {
    if (!v->raw().is_number_unsigned()) v->fail("expected a nonnegative integer");
    out.seed = v->raw().get<std::uint64_t>();
  }
  return out;
}

MomentsFile load_moments(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_moments(text);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + "#" + e.path(), std::string(e.what()).substr(e.path().size() + 2));
  }
}

MomentsOutcome check_moments(const MomentsFile& file, std::uint64_t seed) {
  const int t0 = (file.y.degree() + 1) / 2;
  const Poly R = random_sos(seed, file.y.nvars(), t0);
  const int l_first = file.order.value_or(std::max(t0 + 1, file.g.half_degree()));
  const int l_last = std::max(l_first, file.max_order.value_or(t0 + 4));
  MomentsOutcome out;
  out.search = find_representing_measure(file.y, file.g, R, t0, l_first, l_last, ExtractOptions{seed, kExtractTol});
  switch (out.search.status) {
    case AtmpStatus::kFeasible:
      out.status = "feasible_with_measure";
      break;
    case AtmpStatus::kInfeasible:
      out.status = "infeasible";
      break;
    case AtmpStatus::kInconclusive:
      out.status = "undecided";
      break;
  }
  return out;
}

std::string moments_report_json(const MomentsOutcome& outcome) {
  ordered_json out;
  out["schema_version"] = kSchemaVersion;
  out["monomial_order"] = kMonomialOrder;
  out["status"] = outcome.status;
  out["l"] = outcome.search.l;
  if (outcome.search.flat) {
    out["flat_order"] = outcome.search.flat->s;
    out["rank"] = outcome.search.flat->r;
  }
  if (outcome.search.measure) {
    ordered_json atoms = ordered_json::array();
    for (const VectorXd& a : outcome.search.measure->atoms) atoms.push_back(vector_json(a));
    out["atoms"] = atoms;
    out["weights"] = outcome.search.measure->weights;
  }
  out["solver_iterations"] = outcome.search.iterations;
  return out.dump(2) + "\n";
}

std::vector<std::string> fixture_names() {
  std::vector<std::string> out;
  for (const Fixture& f : kFixtures) out.emplace_back(f.name);
  return out;
}

std::string_view fixture_text(std::string_view name) {
  for (const Fixture& f : kFixtures) {
    if (f.name == name) return f.text;
  }
  std::string valid;
  for (const Fixture& f : kFixtures) valid += (valid.empty() ? "" : ", ") + std::string(f.name);
  throw std::invalid_argument("unknown example '" + std::string(name) + "'; valid names: " + valid);
}

ExampleCheck compare_expected(const SolveReport& report, const Expected& expected) {
  ExampleCheck out;
  out.passed = true;
  std::ostringstream line;
  const auto emit = [&](bool ok) {
    line << (ok ? "  PASS" : "  FAIL");
    out.lines.push_back(line.str());
    line.str("");
    out.passed = out.passed && ok;
  };
  line << "status " << to_string(report.status) << " tightness " << to_string(report.tightness);
  emit(report.status == RunStatus::kSolved);
  const double dv = std::abs(report.optimal_value - expected.optimal_value);
  line << "optimal_value " << report.optimal_value << " expected " << expected.optimal_value << " tol " << expected.value_tol;
  emit(dv <= expected.value_tol);
  if (!expected.x.empty()) {
    double dx = report.x.size() == static_cast<Eigen::Index>(expected.x.size()) ? 0.0 : INFINITY;
    for (Eigen::Index i = 0; i < report.x.size() && std::isfinite(dx); ++i) {
      dx = std::max(dx, std::abs(report.x[i] - expected.x[static_cast<std::size_t>(i)]));
    }
    line << "x error " << dx << " tol " << expected.x_tol;
    emit(dx <= expected.x_tol);
  }
  if (expected.order) {
    line << "order " << report.order_k << " expected " << *expected.order;
    emit(report.order_k == *expected.order);
  }
  if (!expected.atoms.empty()) {
    const bool have = report.worst_case_measure.has_value();
    const std::size_t found = have ? report.worst_case_measure->size() : 0;
    line << "atoms " << found << " expected " << expected.atoms.size();
    emit(found == expected.atoms.size());
    for (std::size_t i = 0; have && i < expected.atoms.size(); ++i) {
      double best = INFINITY;
      double weight = 0.0;
      for (std::size_t j = 0; j < found; ++j) {
        const double dist = (report.worst_case_measure->atoms[j] - expected.atoms[i]).lpNorm<Eigen::Infinity>();
        if (dist < best) {
          best = dist;
          weight = report.worst_case_measure->weights[j];
        }
      }
      line << "atom " << i << " distance " << best << " tol " << expected.atom_tol << ", weight " << weight << " expected "
           << expected.weights[i];
      emit(best <= expected.atom_tol && std::abs(weight - expected.weights[i]) <= expected.weight_tol);
    }
  }
  return out;
}

DromOptions merge_options(const FileOptions& file, DromOptions base) {
  if (file.order) base.order = file.order;
  if (file.max_order) base.max_order = file.max_order;
  if (file.seed) base.seed = *file.seed;
  if (file.tol) base.tol = *file.tol;
  if (file.ball_radius) base.ball_radius = file.ball_radius;
  return base;
}

}  // namespace dromsos::io
