// Zero-curvature residual computation and constraint extraction.
//
// Two compatibility conventions coexist:
//   residual()           D_t F - D_x G + [F,G], reduced modulo the system,
//                        required to vanish (the total-derivative form);
//   check_offdiag_rhs()  D_t U - D_x V + [U,V] required to equal a prescribed
//                        matrix multiple of the unreduced field equations.
#pragma once

#include <laxforge/jetflow.hpp>

namespace laxforge {

struct LaxAnsatz {
  std::string id;
  MatExpr F;
  MatExpr G;
  std::vector<Atom> jets_F;  // declared jet dependencies
  std::vector<Atom> jets_G;

  void validate() const {
    auto check = [](const MatExpr& m, const std::vector<Atom>& declared, const char* which) {
      for (const auto& a : m.atoms())
        if (a.kind() == Atom::Kind::jet &&
            std::find(declared.begin(), declared.end(), a) == declared.end())
          throw error(std::string(which) + " contains undeclared jet " + a.str());
    };
    check(F, jets_F, "F");
    check(G, jets_G, "G");
  }
};

struct Constraint {
  std::string tag;      // monomial of origin, e.g. "O(q^2 r)"
  MonoKey monomial;
  bool scalar = false;  // matrix-level (X-slot) vs entry-level (scalar)
  MatExpr matrix;       // when !scalar
  Expr expr;            // when scalar
  std::string note;     // e.g. which entry it came from, removed content

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["tag"] = tag;
    j["monomial"] = mono_key_str(monomial);
    if (scalar)
      j["expr"] = expr.to_json();
    else
      j["matrix"] = matrix.to_json();
    if (!note.empty()) j["note"] = note;
    return j;
  }
  std::string to_latex() const {
    return tag + ":\\quad " + (scalar ? expr.to_latex() : matrix.to_latex()) + " = 0";
  }
};

struct ConstraintSet {
  std::string system;
  std::string stage;  // e.g. "matrix", "khawaja", "appendixA"
  std::vector<Constraint> items;
  // identically satisfied monomials, recorded rather than stored as
  // constraints (mirrors the Satisf1/Satisf2 bookkeeping)
  std::vector<std::string> identically_satisfied;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["system"] = system;
    j["stage"] = stage;
    j["constraints"] = nlohmann::json::array();
    for (auto& c : items) j["constraints"].push_back(c.to_json());
    j["identically_satisfied"] = identically_satisfied;
    return j;
  }
  std::string to_latex() const {
    std::string s = "\\begin{align*}\n";
    for (auto& c : items) s += c.to_latex() + " \\\\\n";
    s += "\\end{align*}\n";
    return s;
  }
};

/// All jet atoms of q,r up to the given x-order (used as collect variables).
inline std::vector<Atom> jet_vars(int max_x_order = 0) {
  std::vector<Atom> v;
  for (int m = 0; m <= max_x_order; ++m) {
    v.push_back(Atom::jet(Field::q, m, 0));
    v.push_back(Atom::jet(Field::r, m, 0));
  }
  return v;
}

/// reduce_mod(D_t F - D_x G + [F,G], sys), canonical.
inline MatExpr residual(const LaxAnsatz& ansatz, const FieldSystem& sys) {
  MatExpr raw = ansatz.F.total(Var::t) - ansatz.G.total(Var::x) +
                commutator(ansatz.F, ansatz.G);
  return reduce_mod(raw, sys);
}

/// Collect the residual by powers of the given jets; each nonzero
/// coefficient becomes a matrix constraint tagged by its monomial.
inline ConstraintSet extract_constraints(const MatExpr& R, const std::vector<Atom>& vars,
                                         const std::string& system = "",
                                         const std::string& stage = "matrix") {
  ConstraintSet cs;
  cs.system = system;
  cs.stage = stage;
  for (auto& [key, coeff] : R.collect(vars)) {
    Constraint c;
    c.tag = order_tag(key);
    c.monomial = key;
    c.matrix = coeff;
    cs.items.push_back(std::move(c));
  }
  return cs;
}

// ---------------------------------------------------------------------------
// Off-diagonal compatibility: D_t U - D_x V + [U,V] = sum over placements of
// p_field * (implicit field equation).
// ---------------------------------------------------------------------------

struct OffdiagPlacement {
  Field field;
  int row, col;   // where p*F[field] sits in the right-hand side
  Expr multiplier;  // p_1(x,t), p_2(x,t), ...
};

struct OffdiagReport {
  bool trivially_compatible = false;
  ConstraintSet leftovers;       // scalar constraints, deduplicated up to scale
  std::vector<std::string> structural_mismatches;

  bool ok() const { return structural_mismatches.empty(); }
};

/// Verify the unreduced residual of (U,V) equals the prescribed multiple of
/// the field equations; return the leftover constraints on the coefficient
/// functions after matching. Scalars are emitted in primitive form (common
/// nonzero function content divided out).
inline OffdiagReport check_offdiag_rhs(const LaxAnsatz& ansatz, const FieldSystem& sys,
                                       const std::vector<OffdiagPlacement>& placements) {
  const MatExpr& U = ansatz.F;
  const MatExpr& V = ansatz.G;
  MatExpr E = U.total(Var::t) - V.total(Var::x) + commutator(U, V);
  for (const auto& p : placements) {
    MatExpr rhs(U.dim());
    rhs.at(p.row, p.col) = p.multiplier * sys.implicit_form(p.field);
    E = E - rhs;
  }

  OffdiagReport rep;
  rep.leftovers.system = sys.name;
  rep.leftovers.stage = "offdiag";
  if (E.is_zero()) {
    rep.trivially_compatible = !U.atoms().empty() || U.is_zero();
    return rep;
  }

  // collect over every jet atom present
  std::vector<Atom> vars;
  for (const auto& a : E.atoms())
    if (a.kind() == Atom::Kind::jet) vars.push_back(a);

  for (auto& [key, coeff] : E.collect(vars)) {
    // coefficients on t-derivative or second-order jets cannot be legitimate
    // constraints on the (x,t) coefficient functions: the prescribed
    // right-hand side failed to absorb them
    for (auto& [a, k] : key)
      if (a.dt() > 0 || a.dx() >= 2)
        rep.structural_mismatches.push_back("unabsorbed jet monomial " + mono_key_str(key));
    for (int i = 0; i < coeff.dim(); ++i)
      for (int j = 0; j < coeff.dim(); ++j) {
        const Expr& e = coeff.at(i, j);
        if (e.is_zero()) continue;
        Expr prim = e.primitive_part();
        bool dup = false;
        for (auto& c : rep.leftovers.items)
          if (Expr::proportional(c.expr, prim)) {
            c.note += "; also " + order_tag(key) + " entry (" + std::to_string(i + 1) + "," +
                      std::to_string(j + 1) + ")";
            dup = true;
            break;
          }
        if (dup) continue;
        Constraint c;
        c.tag = order_tag(key);
        c.monomial = key;
        c.scalar = true;
        c.expr = prim;
        c.note = "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
        if (auto content = e.fn_content(); !content.pows.empty()) {
          Expr cm;
          c.note += "; content removed: " +
                    Expr::from_terms({Monomial{GaussRat(1), content.pows}}).str();
        }
        rep.leftovers.items.push_back(std::move(c));
      }
  }
  return rep;
}

}  // namespace laxforge
