#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "haantjes/expr.hpp"
#include "haantjes/harness.hpp"

using namespace haan;

TEST_CASE("parse atoms and structure") {
  const Expr x1 = parse("x1", 3);
  CHECK(x1.same_tree(Expr::coordinate(1, 3)));

  const Expr nested = parse("sin(x1 + x2 + x3)", 3);
  const Expr built = sin((Expr::coordinate(1, 3) + Expr::coordinate(2, 3)) +
                         Expr::coordinate(3, 3));
  CHECK(nested.same_tree(built));
}

TEST_CASE("parse reports byte offsets") {
  try {
    parse("x1 + * x2", 2);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 5);
  }

  CHECK_THROWS_AS(parse("x3", 2), ParseError);
  CHECK_THROWS_AS(parse("y1 + 2", 2), ParseError);
  CHECK_THROWS_AS(parse("sin(x1", 2), ParseError);
  CHECK_THROWS_AS(parse("x1 ^ x2", 2), ParseError);  // exponents are literals
  CHECK_THROWS_AS(parse("", 2), ParseError);
}

TEST_CASE("precedence and associativity") {
  CHECK(parse("1 + 2*x1", 1).same_tree(parse("1 + (2*x1)", 1)));
  CHECK(parse("x1 - 1 - 2", 1).same_tree(parse("(x1 - 1) - 2", 1)));
  CHECK(parse("x1/2/4", 1).same_tree(parse("(x1/2)/4", 1)));
  // the power binds tighter than unary minus
  CHECK(parse("-x1^2", 1).eval(Point{3.0}) == doctest::Approx(-9.0));
  CHECK(parse("(-x1)^2", 1).eval(Point{3.0}) == doctest::Approx(9.0));
}

TEST_CASE("eval basics") {
  CHECK(parse("x1*x2", 2).eval(Point{3.0, 4.0}) == doctest::Approx(12.0));
  CHECK(parse("exp(x1+x2+x3)-1", 3).eval(Point{0.0, 0.0, 0.0}) == doctest::Approx(0.0));
  CHECK(parse("2^3", 1).eval(Point{0.0}) == doctest::Approx(8.0));
  CHECK_THROWS_AS(parse("1/x1", 1).eval(Point{0.0}), DomainError);
  CHECK_THROWS_AS(parse("ln(x1)", 1).eval(Point{-1.0}), DomainError);
  CHECK_THROWS_AS(parse("sqrt(x1)", 1).eval(Point{-2.0}), DomainError);
}

TEST_CASE("eval_dual exact derivatives") {
  const DualScalar d = parse("x1*x2", 2).eval_dual(Point{3.0, 4.0});
  CHECK(d.value == doctest::Approx(12.0));
  CHECK(d.partials[0] == doctest::Approx(4.0));
  CHECK(d.partials[1] == doctest::Approx(3.0));

  const DualScalar c = parse("2.5", 2).eval_dual(Point{1.0, 2.0});
  CHECK(c.partials[0] == 0.0);
  CHECK(c.partials[1] == 0.0);

  // gradient of sin of the coordinate sum: every slot equals cos at the sum
  const Point p{0.3, 0.1, -0.2};
  const DualScalar s = parse("sin(x1+x2+x3)", 3).eval_dual(p);
  const double expected = std::cos(0.2);
  const std::vector<double> fd = grad_fd(parse("sin(x1+x2+x3)", 3), p, 1e-6);
  for (int k = 0; k < 3; ++k) {
    CHECK(s.partials[k] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(s.partials[k] - fd[k]) < 1e-6);
  }
}

TEST_CASE("grad_fd oracle") {
  const std::vector<double> g = grad_fd(parse("x1^2", 1), Point{2.0}, 1e-6);
  CHECK(std::abs(g[0] - 4.0) < 1e-6);
  const std::vector<double> z = grad_fd(parse("7", 2), Point{0.4, -0.3}, 1e-6);
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);
}

TEST_CASE("autodiff vs central differences on random polynomials") {
  Rng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = rng.uniform_int(1, 4);
    const Expr e = random_polynomial(rng, dim, 2, 2.0);
    const Point p = random_point(rng, dim);
    const DualScalar d = e.eval_dual(p);
    const std::vector<double> fd = grad_fd(e, p, 1e-6);
    double gmax = 0.0;
    for (int k = 0; k < dim; ++k) {
      gmax = std::max(gmax, std::abs(d.partials[k]));
      worst = std::max(worst, std::abs(d.partials[k] - fd[k]));
    }
    CHECK(worst < 1e-6 * (1.0 + gmax));
  }
}

TEST_CASE("dual arithmetic laws on random operands") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = rng.uniform_int(1, 4);
    DualScalar a(rng.uniform(-2, 2), dim), b(rng.uniform(-2, 2), dim);
    for (int k = 0; k < dim; ++k) {
      a.partials[k] = rng.uniform(-2, 2);
      b.partials[k] = rng.uniform(-2, 2);
    }
    const DualScalar prod = a * b;
    const DualScalar sum = a + b;
    for (int k = 0; k < dim; ++k) {
      CHECK(prod.partials[k] ==
            doctest::Approx(a.value * b.partials[k] + b.value * a.partials[k]));
      CHECK(sum.partials[k] == doctest::Approx(a.partials[k] + b.partials[k]));
    }
    if (std::abs(b.value) > 1e-3) {
      const DualScalar quot = a / b;
      for (int k = 0; k < dim; ++k)
        CHECK(quot.partials[k] ==
              doctest::Approx((a.partials[k] * b.value - a.value * b.partials[k]) /
                              (b.value * b.value)));
    }
    if (a.value > 0.1) {
      const DualScalar lg = ln(a);
      for (int k = 0; k < dim; ++k)
        CHECK(lg.partials[k] == doctest::Approx(a.partials[k] / a.value));
    }
    const DualScalar sn = sin(a);
    for (int k = 0; k < dim; ++k)
      CHECK(sn.partials[k] == doctest::Approx(std::cos(a.value) * a.partials[k]));
  }
}

TEST_CASE("print/parse round trip") {
  Rng rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = rng.uniform_int(1, 4);
    const Expr e = random_polynomial(rng, dim, 2, 2.0);
    CHECK(parse(e.str(), dim).same_tree(e));
  }
  for (const char* text : {"sin(x1)*cos(x2) - exp(x1/x2)", "-x1^2 + (x1 + x2)^3",
                           "sqrt(x1*x1 + 1) / (2 - ln(exp(x2)))", "-(x1 - x2)*(-x1)",
                           "x1^-2 + 2.5e-3*x2^0.5"}) {
    const Expr e = parse(text, 2);
    CHECK(parse(e.str(), 2).same_tree(e));
  }
  // a combinator-built negative exponent prints to parseable text
  const Expr inv = Expr::coordinate(1, 1).pow(-2.0);
  CHECK(parse(inv.str(), 1).same_tree(inv));
  CHECK(inv.eval(Point{2.0}) == doctest::Approx(0.25));
}

TEST_CASE("structural queries") {
  CHECK(parse("0", 2).is_literal_zero());
  CHECK(parse("1 - 1", 2).is_literal_zero());
  CHECK_FALSE(parse("x1", 2).is_literal_zero());
  CHECK(parse("2*3 + 1", 2).fold_constant() == 7.0);
  CHECK_FALSE(parse("x2 + 1", 2).fold_constant().has_value());
}
