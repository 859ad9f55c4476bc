// Canonical symbolic expressions: every Expr is a flat, merged, sorted sum of
// monomials with exact Gaussian-rational coefficients. Construction is
// canonicalization, so algebraically equal inputs compare bitwise equal and
// the zero test is "no monomials".
//
// Exponent rules: base symbols and jets carry exponents >= 1 inside a
// monomial; unknown-function atoms may carry negative exponents (1/g^2 and
// friends). Antiderivative atoms are never inverted.
#pragma once

#include <laxforge/atom.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace laxforge {

struct Monomial {
  GaussRat coef;
  std::vector<std::pair<Atom, int>> pows;  // sorted by atom, exponents != 0

  int degree() const {
    int d = 0;
    for (auto& [a, k] : pows) d += k;
    return d;
  }
};

// Graded lexicographic order on monomial keys (coefficient ignored).
inline std::weak_ordering mono_key_cmp(const Monomial& a, const Monomial& b) {
  if (a.degree() != b.degree()) return a.degree() <=> b.degree();
  size_t n = std::min(a.pows.size(), b.pows.size());
  for (size_t i = 0; i < n; ++i) {
    if (a.pows[i].first < b.pows[i].first) return std::weak_ordering::less;
    if (b.pows[i].first < a.pows[i].first) return std::weak_ordering::greater;
    if (a.pows[i].second != b.pows[i].second) return a.pows[i].second <=> b.pows[i].second;
  }
  return a.pows.size() <=> b.pows.size();
}

inline bool mono_key_eq(const Monomial& a, const Monomial& b) {
  return mono_key_cmp(a, b) == std::weak_ordering::equivalent;
}

using MonoKey = std::vector<std::pair<Atom, int>>;

struct MonoKeyLess {
  bool operator()(const MonoKey& a, const MonoKey& b) const {
    Monomial ma{GaussRat(1), a}, mb{GaussRat(1), b};
    return mono_key_cmp(ma, mb) == std::weak_ordering::less;
  }
};

class Expr;
struct Subst {
  // Unknown-function rules keyed by name; occurrences with derivative orders
  // substitute the correspondingly differentiated right-hand side.
  std::map<std::string, Expr> fn_rules;
  // Exact-atom rules (jets, base symbols).
  std::map<std::string, Expr> atom_rules;  // keyed by Atom::str()
};

class Expr {
 public:
  static constexpr size_t kMaxTerms = 500000;

  Expr() = default;

  static Expr zero() { return Expr(); }
  static Expr integer(long long n) { return constant(GaussRat(n)); }
  static Expr rational(const BigRat& r) { return constant(GaussRat(r)); }
  static Expr constant(const GaussRat& c) {
    Expr e;
    if (!c.is_zero()) e.terms_.push_back({c, {}});
    return e;
  }
  static Expr i() { return constant(GaussRat::i()); }
  static Expr atom(const Atom& a) {
    Expr e;
    e.terms_.push_back({GaussRat(1), {{a, 1}}});
    return e;
  }
  static Expr sym(Var v) { return atom(Atom::sym(v)); }
  static Expr jet(Field f, int mx = 0, int nt = 0) { return atom(Atom::jet(f, mx, nt)); }
  static Expr fn(const std::string& name, FnArgs args = {}, int dx = 0, int dt = 0) {
    return atom(Atom::fn(name, args, dx, dt));
  }

  /// The opaque antiderivative of `integrand` along `v`. Structural identity:
  /// two antiderivatives of the same canonical integrand are the same atom
  /// (both denote the anchored primitive; integration constants are the
  /// caller's business). Zero integrand yields zero for the linear kind.
  static Expr antideriv(Var v, const Expr& integrand, bool exponential = false,
                        const std::string& label = "") {
    if (integrand.has_jets())
      throw unsupported_error("jet atoms may not appear inside antiderivative integrands");
    if (!exponential && integrand.is_zero()) return zero();
    auto shared = std::make_shared<const Expr>(integrand);
    return atom(Atom::integral_raw(v, exponential, shared, integrand.str(), label));
  }

  const std::vector<Monomial>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_[0].pows.empty());
  }
  size_t size() const { return terms_.size(); }

  /// Nonzero only when the whole expression is one invertible monomial.
  bool is_invertible_monomial() const {
    if (terms_.size() != 1) return false;
    for (auto& [a, k] : terms_[0].pows)
      if (a.kind() != Atom::Kind::fn) return false;
    return true;
  }

  friend bool operator==(const Expr& a, const Expr& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (size_t i = 0; i < a.terms_.size(); ++i) {
      if (a.terms_[i].coef != b.terms_[i].coef) return false;
      if (!mono_key_eq(a.terms_[i], b.terms_[i])) return false;
    }
    return true;
  }
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

  friend Expr operator+(const Expr& a, const Expr& b) {
    std::vector<Monomial> out;
    out.reserve(a.terms_.size() + b.terms_.size());
    out.insert(out.end(), a.terms_.begin(), a.terms_.end());
    out.insert(out.end(), b.terms_.begin(), b.terms_.end());
    return from_terms(std::move(out));
  }
  friend Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }
  Expr operator-() const {
    Expr e = *this;
    for (auto& m : e.terms_) m.coef = -m.coef;
    return e;
  }
  friend Expr operator*(const Expr& a, const Expr& b) {
    std::vector<Monomial> out;
    out.reserve(a.terms_.size() * b.terms_.size());
    if (a.terms_.size() * b.terms_.size() > kMaxTerms)
      throw resource_error("expression size limit exceeded in product");
    for (const auto& ma : a.terms_)
      for (const auto& mb : b.terms_) out.push_back(mul_mono(ma, mb));
    return from_terms(std::move(out));
  }
  friend Expr operator*(const GaussRat& c, const Expr& e) { return constant(c) * e; }
  Expr& operator+=(const Expr& o) { return *this = *this + o; }
  Expr& operator-=(const Expr& o) { return *this = *this - o; }
  Expr& operator*=(const Expr& o) { return *this = *this * o; }

  Expr pow(int n) const {
    if (n == 0) return integer(1);
    if (n < 0) {
      if (!is_invertible_monomial())
        throw unsupported_error("negative power of a non-invertible expression: " + str());
      Monomial m = terms_[0];
      m.coef = m.coef.inverse();
      for (auto& [a, k] : m.pows) k = -k;
      Expr inv;
      inv.terms_.push_back(std::move(m));
      return inv.pow(-n);
    }
    Expr acc = integer(1), base = *this;
    while (n) {
      if (n & 1) acc = acc * base;
      if (n >>= 1) base = base * base;
    }
    return acc;
  }

  /// Division; only division by an invertible monomial is defined.
  friend Expr operator/(const Expr& a, const Expr& b) { return a * b.pow(-1); }

  bool has_jets() const {
    for (auto& m : terms_)
      for (auto& [a, k] : m.pows)
        if (a.kind() == Atom::Kind::jet) return true;
    return false;
  }
  bool contains(const Atom& a) const {
    for (auto& m : terms_)
      for (auto& [b, k] : m.pows)
        if (a == b) return true;
    return false;
  }
  bool contains_fn(const std::string& name) const {
    for (auto& m : terms_)
      for (auto& [a, k] : m.pows)
        if (a.kind() == Atom::Kind::fn && a.name() == name) return true;
    return false;
  }
  void atoms(std::set<Atom>& out) const {
    for (auto& m : terms_)
      for (auto& [a, k] : m.pows) out.insert(a);
  }
  std::set<Atom> atoms() const {
    std::set<Atom> s;
    atoms(s);
    return s;
  }

  /// Generic derivation: Leibniz over monomials with the supplied atom rule.
  Expr derive(const std::function<Expr(const Atom&)>& datom) const {
    Expr out;
    for (const auto& m : terms_) {
      for (size_t i = 0; i < m.pows.size(); ++i) {
        const auto& [a, k] = m.pows[i];
        Expr da = datom(a);
        if (da.is_zero()) continue;
        Monomial rest;
        rest.coef = m.coef * GaussRat(k);
        for (size_t j = 0; j < m.pows.size(); ++j) {
          if (j == i) {
            if (k != 1) rest.pows.push_back({a, k - 1});
          } else {
            rest.pows.push_back(m.pows[j]);
          }
        }
        Expr r;
        r.terms_.push_back(std::move(rest));
        out += r * da;
      }
    }
    return out;
  }

  /// Partial derivative with respect to a base symbol or a jet coordinate.
  /// Jets are mutually independent; unknown functions and antiderivatives
  /// respond only to base symbols.
  Expr diff(const Atom& target) const {
    if (target.kind() != Atom::Kind::sym && target.kind() != Atom::Kind::jet)
      throw unsupported_error("diff target must be a base symbol or jet");
    return derive([&](const Atom& a) { return datom_partial(a, target); });
  }

  /// Total derivative D_x / D_t: shifts jet orders and differentiates the
  /// explicit x,t dependence.
  Expr total(Var s) const {
    return derive([&](const Atom& a) { return datom_total(a, s); });
  }

  Expr substitute(const Subst& rules) const {
    Expr out;
    for (const auto& m : terms_) {
      Expr term = constant(m.coef);
      for (const auto& [a, k] : m.pows) {
        Expr base;
        bool replaced = false;
        if (auto it = rules.atom_rules.find(a.str()); it != rules.atom_rules.end()) {
          base = it->second;
          replaced = true;
        } else if (a.kind() == Atom::Kind::fn) {
          if (auto fit = rules.fn_rules.find(a.name()); fit != rules.fn_rules.end()) {
            base = fit->second;
            for (int d = 0; d < a.dx(); ++d) base = base.total(Var::x);
            for (int d = 0; d < a.dt(); ++d) base = base.total(Var::t);
            replaced = true;
          }
        }
        if (!replaced)
          base = atom(a);
        term = term * base.pow(k);
        if (term.is_zero()) break;
      }
      out += term;
    }
    return out;
  }
  Expr substitute_fn(const std::string& name, const Expr& value) const {
    Subst s;
    s.fn_rules.emplace(name, value);
    return substitute(s);
  }

  /// Partition by monomials in the given jet atoms. Sum of key*coefficient
  /// reproduces the expression; coefficients are free of the listed atoms.
  std::map<MonoKey, Expr, MonoKeyLess> collect(const std::vector<Atom>& vars) const {
    std::map<MonoKey, Expr, MonoKeyLess> out;
    auto listed = [&](const Atom& a) {
      return std::find(vars.begin(), vars.end(), a) != vars.end();
    };
    for (const auto& m : terms_) {
      MonoKey key;
      Monomial rest;
      rest.coef = m.coef;
      for (const auto& p : m.pows)
        (listed(p.first) ? key : rest.pows).push_back(p);
      Expr r;
      r.terms_.push_back(std::move(rest));
      out[key] += r;
    }
    for (auto it = out.begin(); it != out.end();)
      it = it->second.is_zero() ? out.erase(it) : std::next(it);
    return out;
  }

  /// Coefficient of a single jet-monomial (empty key = jet-free part).
  Expr coeff(const MonoKey& key, const std::vector<Atom>& vars) const {
    auto parts = collect(vars);
    auto it = parts.find(key);
    return it == parts.end() ? zero() : it->second;
  }

  /// Antiderivative with respect to a jet coordinate, integration constant
  /// zero. Fails on negative powers of the target.
  Expr integrate(const Atom& target) const {
    if (target.kind() != Atom::Kind::jet)
      throw unsupported_error("integrate target must be a jet atom");
    Expr out;
    for (const auto& m : terms_) {
      int k = 0;
      Monomial nm;
      nm.coef = m.coef;
      for (const auto& [a, e] : m.pows) {
        if (a == target)
          k = e;
        else
          nm.pows.push_back({a, e});
      }
      if (k < 0) throw unsupported_error("non-polynomial dependence on " + target.str());
      nm.pows.push_back({target, k + 1});
      std::sort(nm.pows.begin(), nm.pows.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      nm.coef = nm.coef * GaussRat(BigRat(1, k + 1));
      Expr r;
      r.terms_.push_back(std::move(nm));
      out += r;
    }
    return out;
  }

  /// Common monomial content over unknown-function atoms: positive common
  /// powers divided out, negative powers (denominators) cleared. The result
  /// is the paper-style "primitive" form of a constraint; dividing assumes
  /// the content functions are not identically zero.
  Expr primitive_part() const {
    Monomial c = fn_content();
    if (c.pows.empty()) return *this;
    for (auto& [a, k] : c.pows) k = -k;
    Expr mult;
    mult.terms_.push_back(c);
    return *this * mult;
  }
  Monomial fn_content() const {
    Monomial content{GaussRat(1), {}};
    if (terms_.empty()) return content;
    if (terms_.size() == 1) {
      // a single-monomial constraint keeps its atoms (g2*f4 = 0 stays a
      // product equation); only denominators are cleared
      for (auto& [a, k] : terms_[0].pows)
        if (k < 0) content.pows.push_back({a, k});
      return content;
    }
    std::map<Atom, int> minexp;
    bool first = true;
    for (const auto& m : terms_) {
      std::map<Atom, int> cur;
      for (auto& [a, k] : m.pows)
        if (a.kind() == Atom::Kind::fn) cur[a] = k;
      if (first) {
        minexp = cur;
        first = false;
      } else {
        for (auto it = minexp.begin(); it != minexp.end();) {
          auto f = cur.find(it->first);
          int other = f == cur.end() ? 0 : f->second;
          it->second = std::min(it->second, other);
          ++it;
        }
        for (auto& [a, k] : cur)
          if (k < 0 && !minexp.count(a)) minexp[a] = std::min(k, 0);
      }
    }
    for (auto& [a, k] : minexp)
      if (k != 0) content.pows.push_back({a, k});
    return content;
  }

  /// lambda with a == lambda*b, when the two are proportional by a nonzero
  /// constant.
  static std::optional<GaussRat> proportional(const Expr& a, const Expr& b) {
    if (a.is_zero() && b.is_zero()) return GaussRat(1);
    if (a.is_zero() || b.is_zero()) return std::nullopt;
    if (a.terms_.size() != b.terms_.size()) return std::nullopt;
    GaussRat lambda = a.terms_[0].coef / b.terms_[0].coef;
    for (size_t i = 0; i < a.terms_.size(); ++i) {
      if (!mono_key_eq(a.terms_[i], b.terms_[i])) return std::nullopt;
      if (a.terms_[i].coef != lambda * b.terms_[i].coef) return std::nullopt;
    }
    return lambda;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (size_t i = 0; i < terms_.size(); ++i) {
      const auto& m = terms_[i];
      GaussRat c = m.coef;
      bool neg = c.im == 0 ? c.re < 0 : (c.re == 0 && c.im < 0);
      if (i == 0) {
        if (neg) s += "-";
      } else {
        s += neg ? " - " : " + ";
      }
      if (neg) c = -c;
      std::string atoms_str = mono_atoms_str(m);
      if (atoms_str.empty())
        s += c.str();
      else if (c.is_one())
        s += atoms_str;
      else
        s += c.str() + "*" + atoms_str;
    }
    return s;
  }

  nlohmann::json to_json() const;
  static Expr from_json(const nlohmann::json& j);
  std::string to_latex() const;

  static Expr from_terms(std::vector<Monomial> ms) {
    for (auto& m : ms) normalize_mono(m);
    std::sort(ms.begin(), ms.end(), [](const Monomial& a, const Monomial& b) {
      return mono_key_cmp(a, b) == std::weak_ordering::less;
    });
    std::vector<Monomial> merged;
    for (auto& m : ms) {
      if (m.coef.is_zero()) continue;
      if (!merged.empty() && mono_key_eq(merged.back(), m)) {
        merged.back().coef = merged.back().coef + m.coef;
        if (merged.back().coef.is_zero()) merged.pop_back();
      } else {
        merged.push_back(std::move(m));
      }
    }
    if (merged.size() > kMaxTerms) throw resource_error("expression size limit exceeded");
    Expr e;
    e.terms_ = std::move(merged);
    return e;
  }

 private:
  static void normalize_mono(Monomial& m) {
    std::sort(m.pows.begin(), m.pows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<Atom, int>> out;
    for (auto& p : m.pows) {
      if (!out.empty() && out.back().first == p.first)
        out.back().second += p.second;
      else
        out.push_back(p);
    }
    std::erase_if(out, [](const auto& p) { return p.second == 0; });
    for (auto& [a, k] : out)
      if (k < 0 && a.kind() != Atom::Kind::fn)
        throw unsupported_error("negative power of non-function atom " + a.str());
    m.pows = std::move(out);
  }

  static Monomial mul_mono(const Monomial& a, const Monomial& b) {
    Monomial m;
    m.coef = a.coef * b.coef;
    m.pows.reserve(a.pows.size() + b.pows.size());
    m.pows.insert(m.pows.end(), a.pows.begin(), a.pows.end());
    m.pows.insert(m.pows.end(), b.pows.begin(), b.pows.end());
    return m;
  }

  static std::string mono_atoms_str(const Monomial& m) {
    std::string s;
    for (size_t i = 0; i < m.pows.size(); ++i) {
      if (i) s += "*";
      s += m.pows[i].first.str();
      if (m.pows[i].second != 1) s += "^" + std::to_string(m.pows[i].second);
    }
    return s;
  }

  Expr datom_partial(const Atom& a, const Atom& target) const {
    if (target.kind() == Atom::Kind::jet) return a == target ? integer(1) : zero();
    Var s = target.var();
    switch (a.kind()) {
      case Atom::Kind::sym:
        return a.var() == s ? integer(1) : zero();
      case Atom::Kind::jet:
        return zero();
      case Atom::Kind::fn: {
        if (s == Var::x && !a.args().has_x) return zero();
        if (s == Var::t && !a.args().has_t) return zero();
        return atom(a.with_deriv(a.dx() + (s == Var::x), a.dt() + (s == Var::t)));
      }
      case Atom::Kind::integral: {
        const Expr& u = *a.integrand();
        if (a.var() == s) return a.exponential() ? u * atom(a) : u;
        if (a.exponential())
          throw unsupported_error(
              "cross-variable derivative of an exponential antiderivative");
        // differentiate under the integral sign
        return antideriv(a.var(), u.diff(Atom::sym(s)));
      }
    }
    return zero();
  }

  Expr datom_total(const Atom& a, Var s) const {
    if (a.kind() == Atom::Kind::jet)
      return jet(a.field(), a.dx() + (s == Var::x), a.dt() + (s == Var::t));
    return datom_partial(a, Atom::sym(s));
  }

  std::vector<Monomial> terms_;
};

inline std::string mono_key_str(const MonoKey& key) {
  if (key.empty()) return "1";
  std::string s;
  for (size_t i = 0; i < key.size(); ++i) {
    if (i) s += " ";
    s += key[i].first.str();
    if (key[i].second != 1) s += "^" + std::to_string(key[i].second);
  }
  return s;
}

inline std::string order_tag(const MonoKey& key) { return "O(" + mono_key_str(key) + ")"; }

/// Re-run normalization on an expression's own terms. Construction already
/// canonicalizes, so this is the identity; it exists so idempotence is a
/// testable statement rather than a convention.
inline Expr canonicalize(const Expr& e) { return Expr::from_terms(e.terms()); }

// ---------------------------------------------------------------------------
// JSON: nested tagged nodes. Emission is always the canonical
// sum-of-products form; parsing accepts any tree of sum/prod/pow/const/atom
// nodes and canonicalizes it, so round trips are bit-exact.
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json atom_to_json(const Atom& a) {
  nlohmann::json j;
  j["op"] = "atom";
  switch (a.kind()) {
    case Atom::Kind::sym:
      j["kind"] = "base";
      j["name"] = var_name(a.var());
      break;
    case Atom::Kind::jet:
      j["kind"] = "jet";
      j["field"] = field_name(a.field());
      j["dx"] = a.dx();
      j["dt"] = a.dt();
      break;
    case Atom::Kind::fn:
      j["kind"] = "fn";
      j["name"] = a.name();
      j["args"] = a.args().str();
      j["dx"] = a.dx();
      j["dt"] = a.dt();
      break;
    case Atom::Kind::integral:
      j["kind"] = "int";
      j["var"] = var_name(a.var());
      j["exp"] = a.exponential();
      if (!a.name().empty()) j["label"] = a.name();
      j["integrand"] = a.integrand()->to_json();
      break;
  }
  return j;
}

inline Atom atom_from_json(const nlohmann::json& j) {
  std::string kind = j.at("kind");
  if (kind == "base") return Atom::sym(j.at("name") == "x" ? Var::x : Var::t);
  if (kind == "jet")
    return Atom::jet(j.at("field") == "q" ? Field::q : Field::r, j.at("dx"), j.at("dt"));
  if (kind == "fn") {
    std::string args = j.at("args");
    FnArgs fa{args.find('x') != std::string::npos, args.find('t') != std::string::npos};
    return Atom::fn(j.at("name"), fa, j.at("dx"), j.at("dt"));
  }
  if (kind == "int") {
    Expr integrand = Expr::from_json(j.at("integrand"));
    Expr e = Expr::antideriv(j.at("var") == "x" ? Var::x : Var::t, integrand,
                             j.value("exp", false), j.value("label", std::string()));
    if (e.is_zero() || e.terms()[0].pows.empty())
      throw usage_error("degenerate antiderivative node");
    return e.terms()[0].pows[0].first;
  }
  throw usage_error("unknown atom kind: " + kind);
}

}  // namespace detail

inline nlohmann::json Expr::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& m : terms_) {
    nlohmann::json prod;
    prod["op"] = "prod";
    prod["coeff"] = {{"op", "const"},
                     {"re", GaussRat::rat_str(m.coef.re)},
                     {"im", GaussRat::rat_str(m.coef.im)}};
    nlohmann::json factors = nlohmann::json::array();
    for (const auto& [a, k] : m.pows) {
      if (k == 1)
        factors.push_back(detail::atom_to_json(a));
      else
        factors.push_back({{"op", "pow"}, {"base", detail::atom_to_json(a)}, {"exp", k}});
    }
    prod["factors"] = factors;
    terms.push_back(prod);
  }
  return nlohmann::json{{"op", "sum"}, {"terms", terms}};
}

inline Expr Expr::from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return integer(j.get<long long>());
  std::string op = j.at("op");
  if (op == "sum") {
    Expr e;
    for (const auto& tj : j.at("terms")) e += from_json(tj);
    return e;
  }
  if (op == "prod") {
    Expr e = integer(1);
    if (j.contains("coeff")) e = from_json(j.at("coeff"));
    for (const auto& fj : j.value("factors", nlohmann::json::array())) e = e * from_json(fj);
    return e;
  }
  if (op == "pow") return from_json(j.at("base")).pow(j.at("exp").get<int>());
  if (op == "const")
    return constant(GaussRat(parse_bigrat(j.at("re").get<std::string>()),
                             parse_bigrat(j.value("im", std::string("0")))));
  if (op == "atom") return atom(detail::atom_from_json(j));
  throw usage_error("unknown expression node op: " + op);
}

// ---------------------------------------------------------------------------
// LaTeX rendering.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string latex_name(const std::string& name) {
  static const std::map<std::string, std::string> greek = {
      {"gamma", "\\gamma"}, {"alpha", "\\alpha"}, {"beta", "\\beta"},
      {"upsilon", "\\upsilon"}};
  size_t d = name.size();
  while (d > 0 && std::isdigit(static_cast<unsigned char>(name[d - 1]))) --d;
  std::string head = name.substr(0, d), digits = name.substr(d);
  if (auto it = greek.find(head); it != greek.end()) head = it->second;
  if (digits.empty()) return head;
  return head + "_{" + digits + "}";
}

inline std::string latex_atom(const Atom& a);

inline std::string latex_sub(const std::string& base, int dx, int dt) {
  if (!dx && !dt) return base;
  std::string sub(dx, 'x');
  sub.append(dt, 't');
  auto p = base.rfind("_{");
  if (p != std::string::npos && base.back() == '}')
    return base.substr(0, base.size() - 1) + sub + "}";
  return base + "_{" + sub + "}";
}

inline std::string latex_rat(const BigRat& r) {
  if (boost::multiprecision::denominator(r) == 1) return GaussRat::rat_str(r);
  return "\\tfrac{" + boost::multiprecision::numerator(r).str() + "}{" +
         boost::multiprecision::denominator(r).str() + "}";
}

inline std::string latex_coef(const GaussRat& c) {
  if (c.im == 0) return latex_rat(c.re);
  if (c.re == 0) {
    if (c.im == 1) return "i";
    if (c.im == -1) return "-i";
    return latex_rat(c.im) + "i";
  }
  return "\\left(" + latex_rat(c.re) + (c.im > 0 ? "+" : "-") +
         (boost::multiprecision::abs(c.im) == 1
              ? std::string("i")
              : latex_rat(boost::multiprecision::abs(c.im)) + "i") +
         "\\right)";
}

}  // namespace detail

inline std::string Expr::to_latex() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (size_t i = 0; i < terms_.size(); ++i) {
    const auto& m = terms_[i];
    GaussRat c = m.coef;
    bool neg = c.im == 0 ? c.re < 0 : (c.re == 0 && c.im < 0);
    if (i == 0) {
      if (neg) s += "-";
    } else {
      s += neg ? " - " : " + ";
    }
    if (neg) c = -c;
    std::string atoms_str;
    for (const auto& [a, k] : m.pows) {
      if (!atoms_str.empty()) atoms_str += " ";
      std::string base = detail::latex_atom(a);
      atoms_str += k == 1 ? base : base + "^{" + std::to_string(k) + "}";
    }
    if (atoms_str.empty())
      s += detail::latex_coef(c);
    else if (c.is_one())
      s += atoms_str;
    else
      s += detail::latex_coef(c) + " " + atoms_str;
  }
  return s;
}

namespace detail {
inline std::string latex_atom(const Atom& a) {
  switch (a.kind()) {
    case Atom::Kind::sym:
      return var_name(a.var());
    case Atom::Kind::jet:
      return latex_sub(field_name(a.field()), a.dx(), a.dt());
    case Atom::Kind::fn:
      return latex_sub(latex_name(a.name()), a.dx(), a.dt());
    case Atom::Kind::integral: {
      std::string body = a.integrand()->to_latex();
      std::string in = "\\int \\left(" + body + "\\right)\\,d" + var_name(a.var());
      return a.exponential() ? "e^{" + in + "}" : in;
    }
  }
  return "?";
}
}  // namespace detail

}  // namespace laxforge
