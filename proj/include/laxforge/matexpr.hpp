// Matrices over Expr with the Lie-algebraic operations the derivations use.
// Dimension is a runtime parameter (all built-in cases are 2x2, nothing here
// hard-codes 2). No symbolic inverses: the derivations never need them.
#pragma once

#include <laxforge/expr.hpp>

namespace laxforge {

class MatExpr {
 public:
  MatExpr() : n_(0) {}
  explicit MatExpr(int n) : n_(n), e_(static_cast<size_t>(n) * n) {
    if (n <= 0) throw error("matrix dimension must be positive");
  }
  MatExpr(int n, std::vector<Expr> entries) : n_(n), e_(std::move(entries)) {
    if (n <= 0 || e_.size() != static_cast<size_t>(n) * n)
      throw error("matrix dimension mismatch");
  }

  static MatExpr zero(int n) { return MatExpr(n); }

  /// Matrix of fresh unknown functions of (x,t): entries name_11, name_12, ...
  static MatExpr sym(const std::string& name, int n = 2) {
    MatExpr m(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        m.at(i, j) = Expr::fn(name + "_" + std::to_string(i + 1) + std::to_string(j + 1));
    return m;
  }

  int dim() const { return n_; }
  Expr& at(int i, int j) { return e_[static_cast<size_t>(i) * n_ + j]; }
  const Expr& at(int i, int j) const { return e_[static_cast<size_t>(i) * n_ + j]; }

  bool is_zero() const {
    for (const auto& x : e_)
      if (!x.is_zero()) return false;
    return true;
  }

  MatExpr map(const std::function<Expr(const Expr&)>& f) const {
    MatExpr r(n_);
    for (size_t k = 0; k < e_.size(); ++k) r.e_[k] = f(e_[k]);
    return r;
  }

  friend MatExpr operator+(const MatExpr& a, const MatExpr& b) {
    a.check_dims(b);
    MatExpr r(a.n_);
    for (size_t k = 0; k < a.e_.size(); ++k) r.e_[k] = a.e_[k] + b.e_[k];
    return r;
  }
  friend MatExpr operator-(const MatExpr& a, const MatExpr& b) { return a + (-b); }
  MatExpr operator-() const {
    return map([](const Expr& x) { return -x; });
  }
  friend MatExpr operator*(const MatExpr& a, const MatExpr& b) {
    a.check_dims(b);
    MatExpr r(a.n_);
    for (int i = 0; i < a.n_; ++i)
      for (int j = 0; j < a.n_; ++j) {
        Expr s;
        for (int k = 0; k < a.n_; ++k) s += a.at(i, k) * b.at(k, j);
        r.at(i, j) = s;
      }
    return r;
  }
  friend MatExpr operator*(const Expr& s, const MatExpr& m) {
    return m.map([&](const Expr& x) { return s * x; });
  }
  friend MatExpr operator*(const MatExpr& m, const Expr& s) { return s * m; }
  MatExpr& operator+=(const MatExpr& o) { return *this = *this + o; }
  MatExpr& operator-=(const MatExpr& o) { return *this = *this - o; }

  friend bool operator==(const MatExpr& a, const MatExpr& b) {
    return a.n_ == b.n_ && a.e_ == b.e_;
  }

  /// [A,B] = AB - BA.
  friend MatExpr commutator(const MatExpr& a, const MatExpr& b) { return a * b - b * a; }

  MatExpr total(Var s) const {
    return map([&](const Expr& x) { return x.total(s); });
  }
  MatExpr diff(const Atom& a) const {
    return map([&](const Expr& x) { return x.diff(a); });
  }
  MatExpr substitute(const Subst& rules) const {
    return map([&](const Expr& x) { return x.substitute(rules); });
  }

  /// Entrywise collect; the monomial set is the union over entries, absent
  /// coefficients are zero matrices.
  std::map<MonoKey, MatExpr, MonoKeyLess> collect(const std::vector<Atom>& vars) const {
    std::map<MonoKey, MatExpr, MonoKeyLess> out;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (auto& [key, c] : at(i, j).collect(vars)) {
          auto it = out.find(key);
          if (it == out.end()) it = out.emplace(key, MatExpr(n_)).first;
          it->second.at(i, j) = c;
        }
    return out;
  }

  std::set<Atom> atoms() const {
    std::set<Atom> s;
    for (const auto& x : e_) x.atoms(s);
    return s;
  }
  bool has_jets() const {
    for (const auto& x : e_)
      if (x.has_jets()) return true;
    return false;
  }

  std::string str() const {
    std::string s = "[";
    for (int i = 0; i < n_; ++i) {
      s += i ? "; " : "";
      for (int j = 0; j < n_; ++j) s += (j ? ", " : "") + at(i, j).str();
    }
    return s + "]";
  }

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < n_; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int j = 0; j < n_; ++j) row.push_back(at(i, j).to_json());
      rows.push_back(row);
    }
    return {{"n", n_}, {"entries", rows}};
  }
  static MatExpr from_json(const nlohmann::json& j) {
    int n = j.at("n");
    MatExpr m(n);
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj) m.at(i, jj) = Expr::from_json(j.at("entries")[i][jj]);
    return m;
  }

  std::string to_latex() const {
    std::string s = "\\begin{bmatrix}\n";
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        s += at(i, j).to_latex();
        if (j + 1 < n_) s += " & ";
      }
      s += i + 1 < n_ ? " \\\\\n" : "\n";
    }
    return s + "\\end{bmatrix}";
  }

 private:
  void check_dims(const MatExpr& o) const {
    if (n_ != o.n_) throw error("matrix dimension mismatch");
  }
  int n_;
  std::vector<Expr> e_;
};

/// Entrywise proportionality by one shared nonzero constant.
inline std::optional<GaussRat> mat_proportional(const MatExpr& a, const MatExpr& b) {
  if (a.dim() != b.dim()) return std::nullopt;
  std::optional<GaussRat> lambda;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) {
      const Expr &x = a.at(i, j), &y = b.at(i, j);
      if (x.is_zero() && y.is_zero()) continue;
      auto l = Expr::proportional(x, y);
      if (!l) return std::nullopt;
      if (lambda && !(*lambda == *l)) return std::nullopt;
      lambda = l;
    }
  return lambda ? lambda : std::optional<GaussRat>(GaussRat(1));
}

}  // namespace laxforge
