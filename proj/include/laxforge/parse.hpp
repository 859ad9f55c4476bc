// Small strict formula grammar for fixtures and user-supplied systems.
//
//   expr    := term (('+'|'-') term)*
//   term    := unary (('*'|'/') unary)*
//   unary   := '-' unary | factor
//   factor  := primary ('^' int)?
//   primary := integer | 'i' | '(' expr ')' | name | name '(' argspec ')'
//            | comm(M,N) | dx(e) | dt(e) | dxx(e) | dtt(e) | dxt(e)
//            | Int(e, x|t) | EInt(e, x|t)
//
// Names: x, t; jets q, r with derivative suffix (q_xx, r_xt); everything
// else is an unknown function, derivative suffix after '_' (f_x, a2_xt),
// arguments from the registry (default: functions of x and t). Explicit
// argument spec: c1() nullary, F2(x), h(t). Multiplication is always '*'.
// dx/dt are total derivatives. Matrix names come from the environment.
#pragma once

#include <laxforge/matexpr.hpp>

#include <cctype>

namespace laxforge {

struct ParseEnv {
  std::map<std::string, MatExpr> matrices;
  std::map<std::string, FnArgs> fn_args;
  bool allow_unknown_fns = true;

  static ParseEnv standard() {
    ParseEnv env;
    auto xt = FnArgs{true, true};
    for (const char* n : {"f", "g", "v", "gamma", "a1", "a2", "p1", "p2"})
      env.fn_args[n] = xt;
    for (int k = 1; k <= 8; ++k) env.fn_args["f" + std::to_string(k)] = xt;
    for (int k = 1; k <= 16; ++k) env.fn_args["g" + std::to_string(k)] = xt;
    env.fn_args["F1"] = {true, false};
    env.fn_args["F2"] = {true, false};
    env.fn_args["F3"] = {false, true};
    env.fn_args["F4"] = {false, true};
    env.fn_args["c1"] = {false, false};
    env.fn_args["c2"] = {false, false};
    env.fn_args["c1t"] = {false, true};
    env.fn_args["c2t"] = {false, true};
    env.fn_args["h"] = {false, true};
    env.fn_args["H"] = {false, true};
    return env;
  }

  ParseEnv& with_matrix(const std::string& name, MatExpr m) {
    matrices[name] = std::move(m);
    return *this;
  }
  /// X0..X4 as generic 2x2 matrices of unknown functions (entries X0_11, ...).
  ParseEnv& with_generic_matrices(int n = 2) {
    for (int k = 0; k <= 4; ++k) {
      std::string name = "X" + std::to_string(k);
      matrices[name] = MatExpr::sym(name, n);
    }
    return *this;
  }
};

class Parser {
 public:
  struct Value {
    bool is_mat = false;
    Expr e;
    MatExpr m;
    static Value scalar(Expr x) { return {false, std::move(x), MatExpr()}; }
    static Value matrix(MatExpr x) { return {true, Expr(), std::move(x)}; }
  };

  Parser(std::string src, const ParseEnv& env) : src_(std::move(src)), env_(env) {}

  Value parse() {
    Value v = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("trailing input");
    return v;
  }

  static Expr parse_scalar(const std::string& src, const ParseEnv& env) {
    Parser p(src, env);
    Value v = p.parse();
    if (v.is_mat) throw usage_error("expected scalar expression: " + src);
    return v.e;
  }
  static MatExpr parse_matrix(const std::string& src, const ParseEnv& env) {
    Parser p(src, env);
    Value v = p.parse();
    if (!v.is_mat) throw usage_error("expected matrix expression: " + src);
    return v.m;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw usage_error("parse error at offset " + std::to_string(pos_) + " in \"" + src_ +
                      "\": " + msg);
  }

  Value add(const Value& a, const Value& b, int sign) const {
    if (a.is_mat != b.is_mat) fail("cannot add scalar and matrix");
    if (a.is_mat) return Value::matrix(sign > 0 ? a.m + b.m : a.m - b.m);
    return Value::scalar(sign > 0 ? a.e + b.e : a.e - b.e);
  }
  Value mul(const Value& a, const Value& b) const {
    if (a.is_mat && b.is_mat) return Value::matrix(a.m * b.m);
    if (a.is_mat) return Value::matrix(a.m * b.e);
    if (b.is_mat) return Value::matrix(a.e * b.m);
    return Value::scalar(a.e * b.e);
  }
  Value div(const Value& a, const Value& b) const {
    if (b.is_mat) fail("cannot divide by a matrix");
    if (a.is_mat) return Value::matrix(a.m * b.e.pow(-1));
    return Value::scalar(a.e / b.e);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  Value parse_expr() {
    Value v = parse_term();
    while (true) {
      skip_ws();
      if (eat('+'))
        v = add(v, parse_term(), +1);
      else if (eat('-'))
        v = add(v, parse_term(), -1);
      else
        return v;
    }
  }

  Value parse_term() {
    Value v = parse_unary();
    while (true) {
      skip_ws();
      if (eat('*'))
        v = mul(v, parse_unary());
      else if (eat('/'))
        v = div(v, parse_unary());
      else
        return v;
    }
  }

  Value parse_unary() {
    if (eat('-')) {
      Value v = parse_unary();
      return v.is_mat ? Value::matrix(-v.m) : Value::scalar(-v.e);
    }
    return parse_factor();
  }

  Value parse_factor() {
    Value v = parse_primary();
    if (eat('^')) {
      int sign = eat('-') ? -1 : 1;
      skip_ws();
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("integer exponent expected");
      int n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
        n = n * 10 + (src_[pos_++] - '0');
      if (v.is_mat) fail("matrix exponent not supported");
      v.e = v.e.pow(sign * n);
    }
    return v;
  }

  Value parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      return Value::scalar(Expr::rational(parse_bigrat(src_.substr(start, pos_ - start))));
    }
    if (eat('(')) {
      Value v = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return v;
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) fail("unexpected character");
    std::string ident = read_ident();
    return resolve(ident);
  }

  std::string read_ident() {
    size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                  src_[pos_] == '_'))
      ++pos_;
    return src_.substr(start, pos_ - start);
  }

  Value resolve(const std::string& ident) {
    if (ident == "i") return Value::scalar(Expr::i());
    if (ident == "x") return Value::scalar(Expr::sym(Var::x));
    if (ident == "t") return Value::scalar(Expr::sym(Var::t));
    if (ident == "comm") return parse_comm();
    if (ident == "dx") return total_call(Var::x, 1);
    if (ident == "dt") return total_call(Var::t, 1);
    if (ident == "dxx") return total_call(Var::x, 2);
    if (ident == "dtt") return total_call(Var::t, 2);
    if (ident == "dxt") {
      Value v = total_call(Var::x, 1);
      return v.is_mat ? Value::matrix(v.m.total(Var::t)) : Value::scalar(v.e.total(Var::t));
    }
    if (ident == "Int" || ident == "EInt") return parse_int(ident == "EInt");

    // split derivative suffix
    std::string head = ident, suffix;
    if (auto u = ident.find('_'); u != std::string::npos) {
      head = ident.substr(0, u);
      suffix = ident.substr(u + 1);
      for (char s : suffix)
        if (s != 'x' && s != 't') fail("bad derivative suffix in " + ident);
    }
    int dx = static_cast<int>(std::count(suffix.begin(), suffix.end(), 'x'));
    int dt = static_cast<int>(std::count(suffix.begin(), suffix.end(), 't'));

    if (head == "q" || head == "r")
      return Value::scalar(Expr::jet(head == "q" ? Field::q : Field::r, dx, dt));

    if (auto mit = env_.matrices.find(head); mit != env_.matrices.end()) {
      if (dx || dt) fail("use dx()/dt() for matrix derivatives: " + ident);
      return Value::matrix(mit->second);
    }

    FnArgs args{true, true};
    if (auto fit = env_.fn_args.find(head); fit != env_.fn_args.end())
      args = fit->second;
    else if (!env_.allow_unknown_fns)
      fail("unknown function " + head);
    if (peek() == '(') args = parse_argspec(head);
    return Value::scalar(Expr::fn(head, args, dx, dt));
  }

  FnArgs parse_argspec(const std::string& name) {
    eat('(');
    FnArgs args{false, false};
    while (true) {
      skip_ws();
      if (eat(')')) return args;
      if (eat('x'))
        args.has_x = true;
      else if (eat('t'))
        args.has_t = true;
      else
        fail("bad argument list for " + name);
      eat(',');
    }
  }

  Value parse_comm() {
    if (!eat('(')) fail("expected '(' after comm");
    Value a = parse_expr();
    if (!eat(',')) fail("expected ',' in comm");
    Value b = parse_expr();
    if (!eat(')')) fail("expected ')'");
    if (!a.is_mat || !b.is_mat) fail("comm expects matrices");
    return Value::matrix(commutator(a.m, b.m));
  }

  Value total_call(Var v, int times) {
    if (!eat('(')) fail("expected '(' after derivative operator");
    Value a = parse_expr();
    if (!eat(')')) fail("expected ')'");
    for (int k = 0; k < times; ++k)
      a = a.is_mat ? Value::matrix(a.m.total(v)) : Value::scalar(a.e.total(v));
    return a;
  }

  Value parse_int(bool exponential) {
    if (!eat('(')) fail("expected '(' after Int");
    Value body = parse_expr();
    if (body.is_mat) fail("Int expects a scalar integrand");
    if (!eat(',')) fail("expected ',' in Int");
    skip_ws();
    Var v;
    if (eat('x'))
      v = Var::x;
    else if (eat('t'))
      v = Var::t;
    else
      fail("Int variable must be x or t");
    if (!eat(')')) fail("expected ')'");
    return Value::scalar(Expr::antideriv(v, body.e, exponential));
  }

  std::string src_;
  size_t pos_ = 0;
  const ParseEnv& env_;
};

inline Expr parse_expr(const std::string& src, const ParseEnv& env) {
  return Parser::parse_scalar(src, env);
}
inline MatExpr parse_mat(const std::string& src, const ParseEnv& env) {
  return Parser::parse_matrix(src, env);
}

}  // namespace laxforge
