// Independent numerical oracle. Expressions are evaluated at concrete points
// with concrete smooth functions behind every unknown-function atom;
// derivatives of instantiated functions are taken analytically on a small
// closed-form AST, antiderivative atoms by adaptive quadrature from the box
// anchor. Reduced expressions treat jet atoms as free coordinates sampled
// randomly, which is what makes the spot checks independent of the symbolic
// cancellation path.
#pragma once

#include <laxforge/casebook.hpp>

#include <complex>
#include <random>

namespace laxforge {

struct singular_point : error {
  using error::error;
};

// ---------------------------------------------------------------------------
// Closed-form numeric functions with analytic derivatives
// ---------------------------------------------------------------------------

class NumFn {
 public:
  using Ptr = std::shared_ptr<const NumFn>;
  using C = std::complex<double>;

  enum class Op { constant, var, add, mul, pow, exp, sin, cos };

  static Ptr constant(C c) {
    auto f = std::make_shared<NumFn>();
    f->op_ = Op::constant;
    f->c_ = c;
    return f;
  }
  static Ptr var(Var v) {
    auto f = std::make_shared<NumFn>();
    f->op_ = Op::var;
    f->v_ = v;
    return f;
  }
  static Ptr add(std::vector<Ptr> kids) { return node(Op::add, std::move(kids)); }
  static Ptr mul(std::vector<Ptr> kids) { return node(Op::mul, std::move(kids)); }
  static Ptr pow(Ptr base, int k) {
    auto f = node(Op::pow, {std::move(base)});
    f->k_ = k;
    return f;
  }
  static Ptr call(Op op, Ptr arg) { return node(op, {std::move(arg)}); }

  C eval(double x, double t) const {
    switch (op_) {
      case Op::constant:
        return c_;
      case Op::var:
        return v_ == Var::x ? C(x) : C(t);
      case Op::add: {
        C s = 0;
        for (auto& k : kids_) s += k->eval(x, t);
        return s;
      }
      case Op::mul: {
        C s = 1;
        for (auto& k : kids_) s *= k->eval(x, t);
        return s;
      }
      case Op::pow: {
        C b = kids_[0]->eval(x, t);
        if (k_ < 0 && std::abs(b) < 1e-12)
          throw singular_point("denominator below 1e-12 in instantiated function");
        C acc = 1, base = k_ < 0 ? C(1) / b : b;
        for (int n = std::abs(k_); n; --n) acc *= base;
        return acc;
      }
      case Op::exp:
        return std::exp(kids_[0]->eval(x, t));
      case Op::sin:
        return std::sin(kids_[0]->eval(x, t));
      case Op::cos:
        return std::cos(kids_[0]->eval(x, t));
    }
    return 0;
  }

  Ptr deriv(Var v) const {
    switch (op_) {
      case Op::constant:
        return constant(0);
      case Op::var:
        return constant(v_ == v ? 1 : 0);
      case Op::add: {
        std::vector<Ptr> d;
        for (auto& k : kids_) d.push_back(k->deriv(v));
        return add(std::move(d));
      }
      case Op::mul: {
        std::vector<Ptr> terms;
        for (size_t i = 0; i < kids_.size(); ++i) {
          std::vector<Ptr> prod;
          for (size_t j = 0; j < kids_.size(); ++j)
            prod.push_back(i == j ? kids_[j]->deriv(v) : kids_[j]);
          terms.push_back(mul(std::move(prod)));
        }
        return add(std::move(terms));
      }
      case Op::pow:
        return mul({constant(k_), pow(kids_[0], k_ - 1), kids_[0]->deriv(v)});
      case Op::exp:
        return mul({call(Op::exp, kids_[0]), kids_[0]->deriv(v)});
      case Op::sin:
        return mul({call(Op::cos, kids_[0]), kids_[0]->deriv(v)});
      case Op::cos:
        return mul({constant(-1), call(Op::sin, kids_[0]), kids_[0]->deriv(v)});
    }
    return constant(0);
  }

  static Ptr parse(const std::string& src);

 private:
  static std::shared_ptr<NumFn> node(Op op, std::vector<Ptr> kids) {
    auto f = std::make_shared<NumFn>();
    f->op_ = op;
    f->kids_ = std::move(kids);
    return f;
  }

  Op op_ = Op::constant;
  C c_ = 0;
  Var v_ = Var::x;
  int k_ = 0;
  std::vector<Ptr> kids_;

  friend class NumFnParser;

 public:
  NumFn() = default;
};

class NumFnParser {
 public:
  explicit NumFnParser(std::string src) : src_(std::move(src)) {}

  NumFn::Ptr parse() {
    auto v = expr();
    skip();
    if (pos_ != src_.size()) throw usage_error("trailing input in function: " + src_);
    return v;
  }

 private:
  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  NumFn::Ptr expr() {
    auto v = term();
    while (true) {
      if (eat('+'))
        v = NumFn::add({v, term()});
      else if (eat('-'))
        v = NumFn::add({v, NumFn::mul({NumFn::constant(-1), term()})});
      else
        return v;
    }
  }
  NumFn::Ptr term() {
    auto v = unary();
    while (true) {
      if (eat('*'))
        v = NumFn::mul({v, unary()});
      else if (eat('/'))
        v = NumFn::mul({v, NumFn::pow(unary(), -1)});
      else
        return v;
    }
  }
  NumFn::Ptr unary() {
    if (eat('-')) return NumFn::mul({NumFn::constant(-1), unary()});
    return factor();
  }
  NumFn::Ptr factor() {
    auto v = primary();
    if (eat('^')) {
      int sign = eat('-') ? -1 : 1;
      skip();
      int n = 0;
      if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_])))
        throw usage_error("integer exponent expected in function: " + src_);
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
        n = n * 10 + (src_[pos_++] - '0');
      v = NumFn::pow(v, sign * n);
    }
    return v;
  }
  NumFn::Ptr primary() {
    skip();
    if (pos_ >= src_.size()) throw usage_error("unexpected end in function: " + src_);
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
        ++pos_;
      return NumFn::constant(std::stod(src_.substr(start, pos_ - start)));
    }
    if (eat('(')) {
      auto v = expr();
      if (!eat(')')) throw usage_error("expected ')' in function: " + src_);
      return v;
    }
    size_t start = pos_;
    while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    std::string name = src_.substr(start, pos_ - start);
    if (name == "x") return NumFn::var(Var::x);
    if (name == "t") return NumFn::var(Var::t);
    if (name == "i") return NumFn::constant(std::complex<double>(0, 1));
    if (name == "exp" || name == "sin" || name == "cos") {
      if (!eat('(')) throw usage_error("expected '(' after " + name);
      auto arg = expr();
      if (!eat(')')) throw usage_error("expected ')' after " + name);
      auto op = name == "exp" ? NumFn::Op::exp : name == "sin" ? NumFn::Op::sin
                                                               : NumFn::Op::cos;
      return NumFn::call(op, arg);
    }
    throw usage_error("unknown name '" + name + "' in function: " + src_);
  }

  std::string src_;
  size_t pos_ = 0;
};

inline NumFn::Ptr NumFn::parse(const std::string& src) { return NumFnParser(src).parse(); }

// ---------------------------------------------------------------------------
// Instantiation
// ---------------------------------------------------------------------------

struct Instantiation {
  std::map<std::string, NumFn::Ptr> fns;  // closed-form assignments
  std::map<std::string, Expr> derived;    // expression-backed assignments
  NumFn::Ptr q, r;                        // jet-field assignments (optional)
  double x0 = -1, x1 = 1, t0 = 0, t1 = 1;
  int points = 200;
  uint64_t seed = 1;
  double tolerance = 1e-9;

  static Instantiation from_json(const nlohmann::json& j) {
    Instantiation inst;
    nlohmann::json fns = j.value("functions", nlohmann::json::object());
    for (auto& [k, v] : fns.items()) inst.fns[k] = NumFn::parse(v.get<std::string>());
    if (j.contains("q")) inst.q = NumFn::parse(j.at("q").get<std::string>());
    if (j.contains("r")) inst.r = NumFn::parse(j.at("r").get<std::string>());
    if (j.contains("box")) {
      auto& b = j.at("box");
      inst.x0 = b[0];
      inst.x1 = b[1];
      inst.t0 = b[2];
      inst.t1 = b[3];
    }
    inst.points = j.value("points", 200);
    inst.seed = j.value("seed", 1ull);
    inst.tolerance = j.value("tolerance", 1e-9);
    return inst;
  }
};

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

using JetVals = std::map<Atom, std::complex<double>>;

class Evaluator {
 public:
  explicit Evaluator(const Instantiation& inst) : inst_(inst) {}

  std::complex<double> eval(const Expr& e, double x, double t,
                            const JetVals* jets = nullptr) const {
    std::complex<double> sum = 0;
    for (const auto& m : e.terms()) {
      std::complex<double> prod(static_cast<double>(m.coef.re),
                                static_cast<double>(m.coef.im));
      for (const auto& [a, k] : m.pows) {
        std::complex<double> v = atom_value(a, x, t, jets);
        if (k < 0 && std::abs(v) < 1e-12)
          throw singular_point("denominator below 1e-12 at atom " + a.str());
        std::complex<double> base = k < 0 ? 1.0 / v : v;
        for (int n = std::abs(k); n; --n) prod *= base;
      }
      sum += prod;
    }
    return sum;
  }

  std::complex<double> atom_value(const Atom& a, double x, double t,
                                  const JetVals* jets) const {
    switch (a.kind()) {
      case Atom::Kind::sym:
        return a.var() == Var::x ? x : t;
      case Atom::Kind::jet: {
        if (jets) {
          auto it = jets->find(a);
          if (it != jets->end()) return it->second;
        }
        const NumFn::Ptr& f = a.field() == Field::q ? inst_.q : inst_.r;
        if (!f)
          throw usage_error("no assignment for jet " + a.str() +
                            " (provide q/r functions or jet values)");
        return fn_deriv(field_name(a.field()), f, a.dx(), a.dt())->eval(x, t);
      }
      case Atom::Kind::fn: {
        if (auto it = inst_.fns.find(a.name()); it != inst_.fns.end())
          return fn_deriv(a.name(), it->second, a.dx(), a.dt())->eval(x, t);
        if (auto it = inst_.derived.find(a.name()); it != inst_.derived.end())
          return eval(derived_deriv(a.name(), it->second, a.dx(), a.dt()), x, t, jets);
        throw usage_error("missing assignment for " + a.name());
      }
      case Atom::Kind::integral: {
        double from = a.var() == Var::x ? inst_.x0 : inst_.t0;
        double to = a.var() == Var::x ? x : t;
        double other = a.var() == Var::x ? t : x;
        auto key = std::make_tuple(a.integral_key(), a.var() == Var::x, to, other);
        auto it = quad_cache_.find(key);
        std::complex<double> val;
        if (it != quad_cache_.end()) {
          val = it->second;
        } else {
          val = quad(*a.integrand(), a.var(), other, from, to);
          quad_cache_.emplace(key, val);
        }
        return a.exponential() ? std::exp(val) : val;
      }
    }
    return 0;
  }

  /// Adaptive Simpson quadrature of the integrand along `v`, the other
  /// coordinate held fixed; absolute tolerance 1e-12.
  std::complex<double> quad(const Expr& integrand, Var v, double other, double from,
                            double to) const {
    auto f = [&](double s) {
      double xx = v == Var::x ? s : other;
      double tt = v == Var::x ? other : s;
      return eval(integrand, xx, tt, nullptr);
    };
    if (from == to) return 0;
    return simpson(f, from, to, f(from), f((from + to) / 2), f(to), 1e-12, 24);
  }

 private:
  template <class F>
  static std::complex<double> simpson(const F& f, double a, double b,
                                      std::complex<double> fa, std::complex<double> fm,
                                      std::complex<double> fb, double eps, int depth) {
    double m = (a + b) / 2;
    std::complex<double> flm = f((a + m) / 2), frm = f((m + b) / 2);
    std::complex<double> whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    std::complex<double> left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    std::complex<double> right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15 * eps)
      return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, eps / 2, depth - 1) +
           simpson(f, m, b, fm, frm, fb, eps / 2, depth - 1);
  }

  const NumFn::Ptr& fn_deriv(const std::string& name, const NumFn::Ptr& base, int dx,
                             int dt) const {
    auto key = std::make_tuple(name, dx, dt);
    auto it = fn_cache_.find(key);
    if (it != fn_cache_.end()) return it->second;
    NumFn::Ptr f = base;
    for (int k = 0; k < dx; ++k) f = f->deriv(Var::x);
    for (int k = 0; k < dt; ++k) f = f->deriv(Var::t);
    return fn_cache_.emplace(key, std::move(f)).first->second;
  }

  const Expr& derived_deriv(const std::string& name, const Expr& base, int dx,
                            int dt) const {
    auto key = std::make_tuple(name, dx, dt);
    auto it = d_cache_.find(key);
    if (it != d_cache_.end()) return it->second;
    Expr e = base;
    for (int k = 0; k < dx; ++k) e = e.total(Var::x);
    for (int k = 0; k < dt; ++k) e = e.total(Var::t);
    return d_cache_.emplace(key, std::move(e)).first->second;
  }

  const Instantiation& inst_;
  mutable std::map<std::tuple<std::string, int, int>, NumFn::Ptr> fn_cache_;
  mutable std::map<std::tuple<std::string, int, int>, Expr> d_cache_;
  mutable std::map<std::tuple<std::string, bool, double, double>, std::complex<double>>
      quad_cache_;
};

// ---------------------------------------------------------------------------
// Reports and spot checks
// ---------------------------------------------------------------------------

struct CheckReport {
  std::string context;
  double max_abs = 0;
  double tolerance = 1e-9;
  double worst_x = 0, worst_t = 0;
  uint64_t seed = 0;
  int evaluated = 0;
  int skipped = 0;
  bool pass = false;

  nlohmann::json to_json() const {
    return {{"context", context},   {"max_abs", max_abs}, {"tolerance", tolerance},
            {"worst_x", worst_x},   {"worst_t", worst_t}, {"seed", seed},
            {"evaluated", evaluated}, {"skipped", skipped}, {"pass", pass}};
  }
  std::string summary() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s: max |residual| = %.3e (tol %.1e, seed %llu) %s",
                  context.c_str(), max_abs, tolerance,
                  static_cast<unsigned long long>(seed), pass ? "PASS" : "FAIL");
    return buf;
  }
};

inline std::complex<double> random_unit_disc(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    std::complex<double> z(u(rng), u(rng));
    if (std::abs(z) <= 1.0) return z;
  }
}

/// Evaluate a reduced matrix expression at random points; jet atoms get
/// independent random complex values in the unit disc.
inline CheckReport residual_spotcheck(const MatExpr& reduced, const Instantiation& inst,
                                      const std::string& context = "residual") {
  Evaluator ev(inst);
  CheckReport rep;
  rep.context = context;
  rep.tolerance = inst.tolerance;
  rep.seed = inst.seed;
  std::mt19937_64 rng(inst.seed);
  std::uniform_real_distribution<double> ux(inst.x0, inst.x1), ut(inst.t0, inst.t1);

  std::vector<Atom> jet_atoms;
  for (const auto& a : reduced.atoms())
    if (a.kind() == Atom::Kind::jet) jet_atoms.push_back(a);

  for (int p = 0; p < inst.points; ++p) {
    double x = ux(rng), t = ut(rng);
    JetVals jets;
    for (const auto& a : jet_atoms) jets[a] = random_unit_disc(rng);
    try {
      for (int i = 0; i < reduced.dim(); ++i)
        for (int j = 0; j < reduced.dim(); ++j) {
          double v = std::abs(ev.eval(reduced.at(i, j), x, t, &jets));
          if (v > rep.max_abs) {
            rep.max_abs = v;
            rep.worst_x = x;
            rep.worst_t = t;
          }
        }
      rep.evaluated++;
    } catch (const singular_point&) {
      rep.skipped++;
    }
  }
  rep.pass = rep.evaluated > 0 && rep.max_abs <= rep.tolerance;
  return rep;
}

/// Check that the instantiation satisfies a set of scalar constraints
/// (sampled on a small grid); used as the precondition gate before residual
/// spot checks.
inline CheckReport constraint_precheck(const ConstraintSet& cs, const Instantiation& inst,
                                       int grid = 4) {
  Evaluator ev(inst);
  CheckReport rep;
  rep.context = "constraint precheck (" + cs.system + ")";
  rep.tolerance = inst.tolerance;
  rep.seed = inst.seed;
  for (int a = 0; a <= grid; ++a)
    for (int b = 0; b <= grid; ++b) {
      double x = inst.x0 + (inst.x1 - inst.x0) * a / grid;
      double t = inst.t0 + (inst.t1 - inst.t0) * b / grid;
      for (const auto& c : cs.items) {
        if (!c.scalar) continue;
        try {
          double v = std::abs(ev.eval(c.expr, x, t));
          if (v > rep.max_abs) {
            rep.max_abs = v;
            rep.worst_x = x;
            rep.worst_t = t;
          }
          rep.evaluated++;
        } catch (const singular_point&) {
          rep.skipped++;
        }
      }
    }
  rep.pass = rep.evaluated > 0 && rep.max_abs <= rep.tolerance;
  return rep;
}

/// Fourth-order central finite difference of eval(e) along x, jets riding on
/// the instantiated q(x,t), r(x,t).
inline std::complex<double> fd_total_x(const Evaluator& ev, const Expr& e, double x,
                                       double t, double h) {
  auto f = [&](double xx) { return ev.eval(e, xx, t, nullptr); };
  return (-f(x + 2 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2 * h)) / (12.0 * h);
}

}  // namespace laxforge
