// Shared test utilities: random expression/matrix generators and fixture
// directory resolution.
#pragma once

#include <laxforge/driver.hpp>

#include <random>

namespace laxforge::testing {

inline std::string fixture_dir() { return Casebook::default_dir(); }

struct ExprGen {
  std::mt19937_64 rng;
  std::vector<Expr> leaves;
  bool allow_pow = true;

  explicit ExprGen(uint64_t seed) : rng(seed) {
    leaves = {
        Expr::jet(Field::q),       Expr::jet(Field::r),      Expr::jet(Field::q, 1, 0),
        Expr::jet(Field::r, 1, 0), Expr::fn("f"),            Expr::fn("g"),
        Expr::fn("v"),             Expr::fn("gamma"),        Expr::sym(Var::x),
        Expr::sym(Var::t),         Expr::fn("f", {}, 1, 0),
    };
  }

  Expr constant() {
    std::uniform_int_distribution<int> num(-3, 3), den(1, 3), im(0, 2);
    GaussRat c(BigRat(num(rng), den(rng)));
    if (im(rng) == 0) c.im = BigRat(num(rng), den(rng));
    return Expr::constant(c);
  }

  Expr gen(int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : (allow_pow ? 4 : 3));
    switch (pick(rng)) {
      case 0:
        return constant();
      case 1: {
        std::uniform_int_distribution<size_t> li(0, leaves.size() - 1);
        return leaves[li(rng)];
      }
      case 2: {
        std::uniform_int_distribution<int> n(2, 3);
        Expr s;
        for (int k = n(rng); k; --k) s += gen(depth - 1);
        return s;
      }
      case 3:
        return gen(depth - 1) * gen(depth - 1);
      default: {
        std::uniform_int_distribution<int> e(2, 3);
        return gen(depth - 2 < 0 ? 0 : depth - 2).pow(e(rng));
      }
    }
  }

  MatExpr gen_mat(int n, int depth) {
    MatExpr m(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m.at(i, j) = gen(depth);
    return m;
  }
};

}  // namespace laxforge::testing
