#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace laxforge;
using laxforge::testing::ExprGen;

static ParseEnv penv = ParseEnv::standard();

static MatExpr mat2(const std::string& a, const std::string& b, const std::string& c,
                    const std::string& d) {
  MatExpr m(2);
  m.at(0, 0) = parse_expr(a, penv);
  m.at(0, 1) = parse_expr(b, penv);
  m.at(1, 0) = parse_expr(c, penv);
  m.at(1, 1) = parse_expr(d, penv);
  return m;
}

TEST_CASE("commutator basics") {
  ExprGen gen(3);
  MatExpr A = gen.gen_mat(2, 3);
  CHECK(commutator(A, A).is_zero());

  MatExpr X2 = mat2("0", "i*p1", "0", "0");
  MatExpr X3 = mat2("0", "0", "-i*p2", "0");
  CHECK(commutator(X2, X3) == mat2("p1*p2", "0", "0", "-p1*p2"));

  MatExpr X1 = mat2("f1", "0", "0", "f7");
  CHECK(commutator(X1, X2) == mat2("0", "i*p1*(f1 - f7)", "0", "0"));
}

TEST_CASE("commutator algebra on random matrices") {
  ExprGen gen(17);
  for (int k = 0; k < 60; ++k) {
    MatExpr A = gen.gen_mat(2, 3), B = gen.gen_mat(2, 3), C = gen.gen_mat(2, 2);
    CHECK(commutator(A, B) == -commutator(B, A));
    // bilinearity
    CHECK(commutator(A + B, C) == commutator(A, C) + commutator(B, C));
    // Jacobi identity
    MatExpr jac = commutator(A, commutator(B, C)) + commutator(B, commutator(C, A)) +
                  commutator(C, commutator(A, B));
    CHECK(jac.is_zero());
  }
}

TEST_CASE("total derivative is a derivation and orders commute") {
  ExprGen gen(29);
  for (int k = 0; k < 40; ++k) {
    MatExpr A = gen.gen_mat(2, 3), B = gen.gen_mat(2, 3);
    CHECK((A * B).total(Var::x) == A.total(Var::x) * B + A * B.total(Var::x));
    CHECK((A * B).total(Var::t) == A.total(Var::t) * B + A * B.total(Var::t));
    CHECK(A.total(Var::x).total(Var::t) == A.total(Var::t).total(Var::x));
  }
  // a constant matrix has zero derivative
  MatExpr c = mat2("1", "2", "i", "0");
  CHECK(c.total(Var::x).is_zero());
  // Leibniz entrywise through a jet factor
  MatExpr X2 = MatExpr::sym("X2");
  MatExpr m = X2 * Expr::jet(Field::q);
  CHECK(m.total(Var::t) ==
        X2.total(Var::t) * Expr::jet(Field::q) + X2 * Expr::jet(Field::q, 0, 1));
}

TEST_CASE("mat_collect") {
  MatExpr X2 = MatExpr::sym("X2"), X3 = MatExpr::sym("X3");
  MatExpr m = X2 * Expr::jet(Field::q) + X3 * Expr::jet(Field::r);
  auto parts = m.collect({Atom::jet(Field::q), Atom::jet(Field::r)});
  REQUIRE(parts.size() == 2);
  CHECK(parts.at({{Atom::jet(Field::q), 1}}) == X2);
  CHECK(parts.at({{Atom::jet(Field::r), 1}}) == X3);
  CHECK(MatExpr(2).collect({Atom::jet(Field::q)}).empty());
}

TEST_CASE("dimension checks and general n") {
  CHECK_THROWS_AS(MatExpr(2) + MatExpr(3), error);
  CHECK_THROWS_AS(MatExpr(0), error);
  ExprGen gen(5);
  MatExpr A = gen.gen_mat(3, 2), B = gen.gen_mat(3, 2), C = gen.gen_mat(3, 2);
  MatExpr jac = commutator(A, commutator(B, C)) + commutator(B, commutator(C, A)) +
                commutator(C, commutator(A, B));
  CHECK(jac.is_zero());
}

TEST_CASE("matrix JSON and LaTeX") {
  ExprGen gen(11);
  MatExpr A = gen.gen_mat(2, 3);
  CHECK(MatExpr::from_json(A.to_json()) == A);
  CHECK(MatExpr::from_json(A.to_json()).to_json().dump() == A.to_json().dump());
  CHECK(A.to_latex().find("\\begin{bmatrix}") == 0);
}

TEST_CASE("entrywise proportionality") {
  MatExpr X2 = mat2("0", "i*p1", "0", "0");
  auto lam = mat_proportional(Expr::constant(GaussRat(BigRat(-2))) * X2, X2);
  REQUIRE(lam);
  CHECK(*lam == GaussRat(BigRat(-2)));
  CHECK_FALSE(mat_proportional(X2, mat2("0", "i*p2", "0", "0")));
  // different scales per entry are rejected
  MatExpr a = mat2("q", "r", "0", "0");
  MatExpr b = mat2("q", "2*r", "0", "0");
  CHECK_FALSE(mat_proportional(a, b));
}
