// Atoms: the indeterminates of the expression kernel.
//
// Four kinds, in a fixed total order (base symbols < jets < unknown
// functions < antiderivatives) so canonical forms are stable across runs:
//   Sym       x, t
//   Jet       q_{mx,nt}, r_{mx,nt}  -- mutually independent coordinates
//   Fn        unknown function of a declared subset of {x,t}, indexed by
//             derivative multi-order (f, f_x, f_xt, ...)
//   Integral  opaque antiderivative with the single rule D_v(A) = integrand
//             (or D_v(A) = integrand*A for the exponential variant)
#pragma once

#include <laxforge/rational.hpp>

#include <compare>
#include <memory>
#include <string>
#include <tuple>

namespace laxforge {

class Expr;

enum class Var : int { x = 0, t = 1 };
enum class Field : int { q = 0, r = 1 };

inline const char* var_name(Var v) { return v == Var::x ? "x" : "t"; }
inline const char* field_name(Field f) { return f == Field::q ? "q" : "r"; }

struct FnArgs {
  bool has_x = true;
  bool has_t = true;
  friend auto operator<=>(const FnArgs&, const FnArgs&) = default;
  std::string str() const {
    std::string s;
    if (has_x) s += "x";
    if (has_t) s += "t";
    return s;
  }
};

class Atom {
 public:
  enum class Kind : int { sym = 0, jet = 1, fn = 2, integral = 3 };

  static Atom sym(Var v) {
    Atom a;
    a.kind_ = Kind::sym;
    a.var_ = v;
    return a;
  }
  static Atom jet(Field f, int mx = 0, int nt = 0) {
    if (mx < 0 || nt < 0) throw error("negative jet order");
    Atom a;
    a.kind_ = Kind::jet;
    a.field_ = f;
    a.mx_ = mx;
    a.nt_ = nt;
    return a;
  }
  static Atom fn(std::string name, FnArgs args = {}, int dx = 0, int dt = 0) {
    if (!args.has_x) dx = dx == 0 ? 0 : throw_bad_deriv(name);
    if (!args.has_t) dt = dt == 0 ? 0 : throw_bad_deriv(name);
    Atom a;
    a.kind_ = Kind::fn;
    a.name_ = std::move(name);
    a.args_ = args;
    a.mx_ = dx;
    a.nt_ = dt;
    return a;
  }
  // Constructed via Expr::antideriv, which canonicalizes the integrand and
  // fills the ordering key.
  static Atom integral_raw(Var v, bool exponential, std::shared_ptr<const Expr> integrand,
                           std::string key, std::string label) {
    Atom a;
    a.kind_ = Kind::integral;
    a.var_ = v;
    a.exp_ = exponential;
    a.integrand_ = std::move(integrand);
    a.name_ = std::move(label);
    a.ikey_ = std::move(key);
    return a;
  }

  Kind kind() const { return kind_; }
  Var var() const { return var_; }
  Field field() const { return field_; }
  int dx() const { return mx_; }
  int dt() const { return nt_; }
  const std::string& name() const { return name_; }
  FnArgs args() const { return args_; }
  bool exponential() const { return exp_; }
  const std::shared_ptr<const Expr>& integrand() const { return integrand_; }
  const std::string& integral_key() const { return ikey_; }

  Atom with_deriv(int dx, int dt) const {
    if (kind_ != Kind::fn) throw error("with_deriv on non-function atom");
    return fn(name_, args_, dx, dt);
  }
  Atom base_form() const {
    if (kind_ == Kind::fn) return fn(name_, args_, 0, 0);
    return *this;
  }

  friend bool operator==(const Atom& a, const Atom& b) { return a.key() == b.key(); }
  friend bool operator<(const Atom& a, const Atom& b) { return a.key() < b.key(); }

  std::string str() const {
    switch (kind_) {
      case Kind::sym:
        return var_name(var_);
      case Kind::jet:
      case Kind::fn: {
        std::string s = kind_ == Kind::jet ? field_name(field_) : name_;
        if (mx_ || nt_) {
          s += "_";
          s.append(mx_, 'x');
          s.append(nt_, 't');
        }
        return s;
      }
      case Kind::integral:
        return (exp_ ? std::string("EInt(") : std::string("Int(")) + ikey_ + ", " +
               var_name(var_) + ")";
    }
    return "?";
  }

 private:
  static int throw_bad_deriv(const std::string& name) {
    throw error("derivative along undeclared argument of " + name);
  }

  using Key = std::tuple<int, int, int, int, std::string, FnArgs, int, std::string>;
  Key key() const {
    // (kind, var/field, dx, dt, name, args, exp, ikey)
    int vf = kind_ == Kind::jet ? static_cast<int>(field_) : static_cast<int>(var_);
    return {static_cast<int>(kind_), vf, mx_, nt_, name_, args_, exp_ ? 1 : 0, ikey_};
  }

  Kind kind_ = Kind::sym;
  Var var_ = Var::x;
  Field field_ = Field::q;
  int mx_ = 0, nt_ = 0;  // jet orders / fn derivative orders
  std::string name_;
  FnArgs args_;
  bool exp_ = false;
  std::shared_ptr<const Expr> integrand_;
  std::string ikey_;
};

}  // namespace laxforge
