#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "haantjes/fields.hpp"
#include "haantjes/harness.hpp"

using namespace haan;

namespace {

OperatorField random_field(Rng& rng, int n) {
  std::vector<Expr> e;
  for (int i = 0; i < n * n; ++i) e.push_back(random_polynomial(rng, n, 2, 1.0));
  return OperatorField(n, std::move(e));
}

}  // namespace

TEST_CASE("eval_operator on simple fields") {
  const OperatorField id = OperatorField::identity(3);
  const OpEval e = eval_operator(id, Point{0.4, -0.2, 1.0});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(e.val(i, j) == (i == j ? 1.0 : 0.0));
      for (int a = 0; a < 3; ++a) CHECK(e.d(i, j, a) == 0.0);
    }

  const OperatorField swap = OperatorField::diagonal(
      {Expr::coordinate(2, 2), Expr::coordinate(1, 2)});
  const OpEval s = eval_operator(swap, Point{1.0, 2.0});
  CHECK(s.val(0, 0) == 2.0);
  CHECK(s.val(1, 1) == 1.0);
  CHECK(s.d(0, 0, 1) == 1.0);
  CHECK(s.d(1, 1, 0) == 1.0);
  CHECK(s.d(0, 0, 0) == 0.0);
  CHECK(s.d(1, 1, 1) == 0.0);
}

TEST_CASE("eval_operator on the bundled example at the origin") {
  // entries evaluate to [[0,0,0],[0,0,1],[0,0,1]] at zero
  const Expr s = parse("x1 + x2 + x3", 3);
  const Expr zero = Expr::constant(0.0, 3);
  const OperatorField l(3, {exp(s) - 1.0, sin(s), zero,
                            zero, exp(s) - 1.0, cos(s),
                            zero, zero, exp(s * s)});
  const OpEval e = l.eval(Point{0.0, 0.0, 0.0});
  const double expected[3][3] = {{0, 0, 0}, {0, 0, 1}, {0, 0, 1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(e.val(i, j) == doctest::Approx(expected[i][j]));
}

TEST_CASE("operator Jacobian agrees with finite differences") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.uniform_int(2, 4);
    const OperatorField a = random_field(rng, n);
    const Point p = random_point(rng, n);
    const OpEval e = a.eval(p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const std::vector<double> fd = grad_fd(a.entry(i, j), p, 1e-6);
        for (int t = 0; t < n; ++t)
          CHECK(std::abs(e.d(i, j, t) - fd[t]) < 1e-6 * (1.0 + std::abs(fd[t])));
      }
  }
}

TEST_CASE("structural flags") {
  const OperatorField diag = OperatorField::diagonal(
      {parse("x1", 2), parse("x2 + 1", 2)});
  CHECK(diag.is_diagonal());
  CHECK_FALSE(diag.is_strictly_upper());
  CHECK_FALSE(diag.is_constant());

  const Expr z = Expr::constant(0.0, 2);
  const OperatorField shift(2, {z, Expr::constant(1.0, 2), z, z});
  CHECK(shift.is_strictly_upper());
  CHECK(shift.is_constant());
}

TEST_CASE("lie_bracket basics") {
  const int n = 2;
  const VectorField e1 = VectorField::coordinate_axis(1, n);
  const VectorField e2 = VectorField::coordinate_axis(2, n);
  for (double c : lie_bracket(e1, e2, Point{0.3, 0.7})) CHECK(c == 0.0);

  const VectorField x1e1(1, {parse("x1", 1)});
  const VectorField e(1, {parse("1", 1)});
  const std::vector<double> b = lie_bracket(x1e1, e, Point{2.0});
  CHECK(b[0] == doctest::Approx(-1.0));
}

TEST_CASE("lie_bracket antisymmetry on random polynomial fields") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = rng.uniform_int(2, 4);
    std::vector<Expr> xc, yc;
    for (int i = 0; i < n; ++i) {
      xc.push_back(random_polynomial(rng, n, 2, 1.0));
      yc.push_back(random_polynomial(rng, n, 2, 1.0));
    }
    const VectorField x(n, xc), y(n, yc);
    const Point p = random_point(rng, n);
    const std::vector<double> xy = lie_bracket(x, y, p);
    const std::vector<double> yx = lie_bracket(y, x, p);
    for (int i = 0; i < n; ++i) CHECK(xy[i] == doctest::Approx(-yx[i]));
  }
}

TEST_CASE("Jacobi identity through symbolically expanded brackets") {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.uniform_int(2, 3);
    auto field = [&] {
      std::vector<Expr> c;
      for (int i = 0; i < n; ++i) c.push_back(random_polynomial(rng, n, 2, 1.0));
      return VectorField(n, std::move(c));
    };
    const VectorField x = field(), y = field(), z = field();
    const Point p = random_point(rng, n);
    const std::vector<double> t1 = lie_bracket(x, lie_bracket_field(y, z), p);
    const std::vector<double> t2 = lie_bracket(y, lie_bracket_field(z, x), p);
    const std::vector<double> t3 = lie_bracket(z, lie_bracket_field(x, y), p);
    for (int i = 0; i < n; ++i) CHECK(std::abs(t1[i] + t2[i] + t3[i]) < 1e-8);
  }
}

TEST_CASE("Tensor12 skew symmetry is exact by construction") {
  Rng rng(17);
  const int n = 4;
  Tensor12 t = Tensor12::build(n, 0.0, [&](int, int, int) { return rng.uniform(-5, 5); });
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) CHECK(t(i, j, k) == -t(i, k, j));  // bitwise opposite
}

TEST_CASE("apply_tensor") {
  Rng rng(19);
  const int n = 3;
  const Tensor12 t = Tensor12::build(n, 0.0, [&](int, int, int) { return rng.uniform(-2, 2); });
  std::vector<double> u(n), v(n);
  for (int i = 0; i < n; ++i) {
    u[i] = rng.uniform(-2, 2);
    v[i] = rng.uniform(-2, 2);
  }
  // skew tensor kills repeated arguments
  for (double c : t.apply(u, u)) CHECK(std::abs(c) < 1e-14);
  const Tensor12 zero(n);
  for (double c : zero.apply(u, v)) CHECK(c == 0.0);
  // bilinearity in the first slot
  std::vector<double> u3(n);
  for (int i = 0; i < n; ++i) u3[i] = 3.0 * u[i];
  const std::vector<double> lhs = t.apply(u3, v);
  const std::vector<double> rhs = t.apply(u, v);
  for (int i = 0; i < n; ++i) CHECK(lhs[i] == doctest::Approx(3.0 * rhs[i]));
}

TEST_CASE("matrix_power_dual") {
  Rng rng(23);
  const int n = 3;
  const OperatorField a = random_field(rng, n);
  const Point p = random_point(rng, n);

  const OpEval p0 = matrix_power_dual(a, 0, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      CHECK(p0.val(i, j) == (i == j ? 1.0 : 0.0));
      for (int t = 0; t < n; ++t) CHECK(p0.d(i, j, t) == 0.0);
    }

  const OpEval p1 = matrix_power_dual(a, 1, p);
  const OpEval direct = a.eval(p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) CHECK(p1.val(i, j) == doctest::Approx(direct.val(i, j)));

  // nilpotent of maximal index: the n-th power vanishes
  const Expr z = Expr::constant(0.0, 3);
  const Expr one = Expr::constant(1.0, 3);
  const OperatorField shift(3, {z, one, z, z, z, one, z, z, z});
  const OpEval p3 = matrix_power_dual(shift, 3, p);
  CHECK(p3.value_max_abs() == 0.0);

  // power Jacobians against finite differences of the power values
  const OpEval p2 = matrix_power_dual(a, 2, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int t = 0; t < n; ++t) {
        Point plus = p, minus = p;
        plus.coords[t] += 1e-6;
        minus.coords[t] -= 1e-6;
        const std::vector<double> vp = mat_mul(n, a.value_at(plus), a.value_at(plus));
        const std::vector<double> vm = mat_mul(n, a.value_at(minus), a.value_at(minus));
        const double fd =
            (vp[static_cast<std::size_t>(i) * n + j] - vm[static_cast<std::size_t>(i) * n + j]) /
            2e-6;
        CHECK(std::abs(p2.d(i, j, t) - fd) < 1e-5 * (1.0 + std::abs(fd)));
      }
}

TEST_CASE("symbolic operator algebra matches pointwise algebra") {
  Rng rng(29);
  const int n = 3;
  const OperatorField a = random_field(rng, n);
  const OperatorField b = random_field(rng, n);
  const Point p = random_point(rng, n);
  const std::vector<double> prod = (a * b).value_at(p);
  const std::vector<double> expected = mat_mul(n, a.value_at(p), b.value_at(p));
  for (std::size_t i = 0; i < prod.size(); ++i)
    CHECK(prod[i] == doctest::Approx(expected[i]).epsilon(1e-12));

  const Expr f = random_polynomial(rng, n, 2, 1.0);
  const std::vector<double> shifted = OperatorField::shifted(f, a).value_at(p);
  const double fv = f.eval(p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double expect = a.value_at(p)[static_cast<std::size_t>(i) * n + j] +
                            (i == j ? fv : 0.0);
      CHECK(shifted[static_cast<std::size_t>(i) * n + j] == doctest::Approx(expect));
    }
}
