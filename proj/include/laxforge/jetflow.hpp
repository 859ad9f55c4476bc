// Field systems (evolution rules q_t = ..., r_t = ...) and reduction of
// expressions modulo the evolution equations.
#pragma once

#include <laxforge/parse.hpp>

namespace laxforge {

/// A named two-field evolution system with first-order-in-time rules solved
/// for q_t and r_t. Rule right-hand sides contain no t-derivative jets. The
/// relation between r and q (conjugation / parity conjugation) is recorded
/// as documentation only and never imposed.
struct FieldSystem {
  std::string name;
  std::map<Field, Expr> rules;
  std::vector<std::string> coefficients;
  std::string relation_note;
  // F_field = mult * (field_t - rule): the defining equation in the implicit
  // "... = 0" form used by the off-diagonal compatibility convention.
  std::map<Field, GaussRat> implicit_mult;

  const Expr& rule(Field f) const {
    auto it = rules.find(f);
    if (it == rules.end()) throw error("no rule for field in system " + name);
    return it->second;
  }

  /// The defining equation of `f` as an expression that vanishes on
  /// solutions, e.g. i*q_t + f*q_xx + g*q^2*r + v*q + i*gamma*q for vc-nls.
  Expr implicit_form(Field f) const {
    GaussRat m = implicit_mult.count(f) ? implicit_mult.at(f) : GaussRat(1);
    return Expr::constant(m) * (Expr::jet(f, 0, 1) - rule(f));
  }

  void validate() const {
    for (auto& [f, rhs] : rules) {
      for (const auto& a : rhs.atoms()) {
        if (a.kind() == Atom::Kind::jet && a.dt() > 0)
          throw error("system " + name + ": rule right-hand side contains t-jets");
        if (a.kind() == Atom::Kind::fn &&
            std::find(coefficients.begin(), coefficients.end(), a.name()) ==
                coefficients.end())
          throw error("system " + name + ": undeclared coefficient " + a.name());
      }
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["rules"] = {{"q_t", rule(Field::q).to_json()}, {"r_t", rule(Field::r).to_json()}};
    j["coefficients"] = coefficients;
    j["relation"] = relation_note;
    j["implicit_mult"] = {
        {"q", {{"re", GaussRat::rat_str(implicit_mult.at(Field::q).re)},
               {"im", GaussRat::rat_str(implicit_mult.at(Field::q).im)}}},
        {"r", {{"re", GaussRat::rat_str(implicit_mult.at(Field::r).re)},
               {"im", GaussRat::rat_str(implicit_mult.at(Field::r).im)}}}};
    return j;
  }

  /// User systems: rules given either as expression trees or formula strings.
  static FieldSystem from_json(const nlohmann::json& j, const ParseEnv& env) {
    FieldSystem sys;
    sys.name = j.at("name");
    auto read_rule = [&](const nlohmann::json& rj) {
      return rj.is_string() ? parse_expr(rj.get<std::string>(), env) : Expr::from_json(rj);
    };
    sys.rules[Field::q] = read_rule(j.at("rules").at("q_t"));
    sys.rules[Field::r] = read_rule(j.at("rules").at("r_t"));
    for (auto& c : j.value("coefficients", nlohmann::json::array()))
      sys.coefficients.push_back(c.get<std::string>());
    sys.relation_note = j.value("relation", std::string());
    auto read_mult = [&](const char* f) -> GaussRat {
      if (!j.contains("implicit_mult")) return GaussRat(1);
      auto& mj = j.at("implicit_mult").at(f);
      return GaussRat(parse_bigrat(mj.at("re").get<std::string>()),
                      parse_bigrat(mj.at("im").get<std::string>()));
    };
    sys.implicit_mult[Field::q] = read_mult("q");
    sys.implicit_mult[Field::r] = read_mult("r");
    sys.validate();
    return sys;
  }
};

/// Built-in systems. Names: vc-nls, vc-ptnls, vc-dnls, vc-dnls-display.
inline FieldSystem make_system(const std::string& name) {
  ParseEnv env = ParseEnv::standard();
  FieldSystem sys;
  sys.name = name;
  if (name == "vc-nls") {
    // i q_t + f q_xx + g q^2 r + v q + i gamma q = 0 and the conjugate-role
    // equation, solved for the time derivatives.
    sys.rules[Field::q] = parse_expr("i*f*q_xx + i*g*q^2*r + (i*v - gamma)*q", env);
    sys.rules[Field::r] = parse_expr("-i*f*r_xx - i*g*r^2*q + (-i*v - gamma)*r", env);
    sys.coefficients = {"f", "g", "v", "gamma"};
    sys.relation_note = "r is the complex conjugate of q";
    sys.implicit_mult[Field::q] = GaussRat::i();
    sys.implicit_mult[Field::r] = -GaussRat::i();
  } else if (name == "vc-ptnls") {
    sys.rules[Field::q] = parse_expr("-i*a1*q_xx - i*a2*q^2*r", env);
    sys.rules[Field::r] = parse_expr("i*a1*r_xx + i*a2*r^2*q", env);
    sys.coefficients = {"a1", "a2"};
    sys.relation_note = "r(x,t) is the parity conjugate conj(q(-x,t))";
    sys.implicit_mult[Field::q] = GaussRat::i();
    sys.implicit_mult[Field::r] = -GaussRat::i();
  } else if (name == "vc-dnls") {
    // i q_t + a1 q_xx + i a2 (q^2 r)_x = 0 with the derivative expanded.
    sys.rules[Field::q] = parse_expr("i*a1*q_xx - a2*(2*q*r*q_x + q^2*r_x)", env);
    sys.rules[Field::r] = parse_expr("-i*a1*r_xx - a2*(2*q*r*r_x + r^2*q_x)", env);
    sys.coefficients = {"a1", "a2"};
    sys.relation_note = "r is the complex conjugate of q";
    sys.implicit_mult[Field::q] = GaussRat::i();
    sys.implicit_mult[Field::r] = -GaussRat::i();
  } else if (name == "vc-dnls-display") {
    // The variant with the nonlinear transport term missing its a2 factor,
    // kept constructible for comparison against vc-dnls.
    sys.rules[Field::q] = parse_expr("i*a1*q_xx - 2*q*r*q_x - a2*q^2*r_x", env);
    sys.rules[Field::r] = parse_expr("-i*a1*r_xx - 2*q*r*r_x - a2*r^2*q_x", env);
    sys.coefficients = {"a1", "a2"};
    sys.relation_note = "display variant of vc-dnls; see TYPOS.md";
    sys.implicit_mult[Field::q] = GaussRat::i();
    sys.implicit_mult[Field::r] = -GaussRat::i();
  } else {
    throw usage_error("unknown system: " + name);
  }
  sys.validate();
  return sys;
}

namespace detail {
inline int max_t_order(const std::set<Atom>& atoms) {
  int n = 0;
  for (const auto& a : atoms)
    if (a.kind() == Atom::Kind::jet) n = std::max(n, a.dt());
  return n;
}
}  // namespace detail

/// Eliminate q_t, r_t and their x-prolongations: every Jet(., m, 1) becomes
/// D_x^m applied to the corresponding rule. The result has no jets with
/// n >= 1; the operation is idempotent.
inline Expr reduce_mod(const Expr& e, const FieldSystem& sys) {
  auto atoms = e.atoms();
  if (detail::max_t_order(atoms) >= 2)
    throw unsupported_error("reduce_mod: jets with second or higher t-order present");
  Subst rules;
  for (const auto& a : atoms) {
    if (a.kind() != Atom::Kind::jet || a.dt() != 1) continue;
    Expr rhs = sys.rule(a.field());
    for (int k = 0; k < a.dx(); ++k) rhs = rhs.total(Var::x);
    rules.atom_rules.emplace(a.str(), rhs);
  }
  return rules.atom_rules.empty() ? e : e.substitute(rules);
}

inline MatExpr reduce_mod(const MatExpr& m, const FieldSystem& sys) {
  return m.map([&](const Expr& e) { return reduce_mod(e, sys); });
}

}  // namespace laxforge
