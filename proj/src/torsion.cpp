#include "haantjes/torsion.hpp"

#include <cmath>
#include <stdexcept>

namespace haan {

namespace {

// magnitude of the summands entering one tower step: the scale records the
// largest intermediate component, so it grows with the actual tensor
// magnitudes rather than with compounded worst-case bounds
double step_scale(int n, double op_mag, double t_mag) {
  return 2.0 * n * n * op_mag * op_mag * t_mag;
}

// directional derivative of f along the j-th column field of the value
// matrix m: sum_a m[a][j] * grad[a]
double column_derivative(int n, const std::vector<double>& m, const std::vector<double>& grad,
                         int j) {
  double acc = 0.0;
  for (int a = 0; a < n; ++a) acc += m[static_cast<std::size_t>(a) * n + j] * grad[a];
  return acc;
}

}  // namespace

Tensor12 nijenhuis(const OpEval& a) {
  const int n = a.n;
  const double hint = 4.0 * n * a.value_max_abs() * a.jac_max_abs();
  return Tensor12::build(n, hint, [&](int i, int j, int k) {
    double acc = 0.0;
    for (int al = 0; al < n; ++al)
      acc += a.d(i, k, al) * a.val(al, j) - a.d(i, j, al) * a.val(al, k) +
             (a.d(al, j, k) - a.d(al, k, j)) * a.val(i, al);
    return acc;
  });
}

Tensor12 nijenhuis(const OperatorField& a, const Point& p) { return nijenhuis(a.eval(p)); }

Tensor12 haantjes_step(const Tensor12& t, const OpEval& a) {
  const int n = a.n;
  const std::vector<double> a2 = mat_mul(n, a.value, a.value);
  Tensor12 r = Tensor12::build(n, 0.0, [&](int i, int j, int k) {
    double acc = 0.0;
    for (int be = 0; be < n; ++be) acc += a2[static_cast<std::size_t>(i) * n + be] * t(be, j, k);
    for (int al = 0; al < n; ++al)
      for (int be = 0; be < n; ++be) {
        acc += t(i, al, be) * a.val(al, j) * a.val(be, k);
        acc -= a.val(i, al) * (t(al, be, k) * a.val(be, j) + t(al, j, be) * a.val(be, k));
      }
    return acc;
  });
  r.bump_scale(t.scale());
  r.bump_scale(step_scale(n, a.value_max_abs(), t.max_abs()));
  return r;
}

Tensor12 binary_step(const Tensor12& t, const OpEval& a, const OpEval& b) {
  if (a.n != b.n) throw std::invalid_argument("operator dimension mismatch");
  const int n = a.n;
  const std::vector<double> anti = mat_add(mat_mul(n, a.value, b.value),
                                           mat_mul(n, b.value, a.value));
  Tensor12 r = Tensor12::build(n, 0.0, [&](int i, int j, int k) {
    double acc = 0.0;
    for (int be = 0; be < n; ++be) acc += anti[static_cast<std::size_t>(i) * n + be] * t(be, j, k);
    for (int al = 0; al < n; ++al)
      for (int be = 0; be < n; ++be) {
        acc += t(i, al, be) * (a.val(al, j) * b.val(be, k) + b.val(al, j) * a.val(be, k));
        acc -= a.val(i, al) * (t(al, j, be) * b.val(be, k) + t(al, be, k) * b.val(be, j));
        acc -= b.val(i, al) * (t(al, j, be) * a.val(be, k) + t(al, be, k) * a.val(be, j));
      }
    return acc;
  });
  r.bump_scale(t.scale());
  r.bump_scale(step_scale(n, std::max(a.value_max_abs(), b.value_max_abs()), t.max_abs()));
  return r;
}

Tensor12 haantjes(const OpEval& a) { return haantjes_step(nijenhuis(a), a); }

Tensor12 haantjes(const OperatorField& a, const Point& p) { return haantjes(a.eval(p)); }

Tensor12 fn_bracket(const OpEval& a, const OpEval& b) {
  if (a.n != b.n) throw std::invalid_argument("operator dimension mismatch");
  const int n = a.n;
  const double vmax = std::max(a.value_max_abs(), b.value_max_abs());
  const double jmax = std::max(a.jac_max_abs(), b.jac_max_abs());
  return Tensor12::build(n, 8.0 * n * vmax * jmax, [&](int i, int j, int k) {
    double acc = 0.0;
    for (int al = 0; al < n; ++al) {
      acc += a.val(al, j) * b.d(i, k, al) - b.val(al, k) * a.d(i, j, al) +
             b.val(al, j) * a.d(i, k, al) - a.val(al, k) * b.d(i, j, al);
      acc += a.val(i, al) * (b.d(al, j, k) - b.d(al, k, j)) +
             b.val(i, al) * (a.d(al, j, k) - a.d(al, k, j));
    }
    return acc;
  });
}

Tensor12 fn_bracket(const OperatorField& a, const OperatorField& b, const Point& p) {
  return fn_bracket(a.eval(p), b.eval(p));
}

Tensor12 binary_haantjes(const OpEval& a, const OpEval& b) {
  return binary_step(fn_bracket(a, b), a, b);
}

Tensor12 binary_haantjes(const OperatorField& a, const OperatorField& b, const Point& p) {
  return binary_haantjes(a.eval(p), b.eval(p));
}

Tensor12 binary_level(const OpEval& a, const OpEval& b, int m) {
  if (m < 1) throw std::invalid_argument("binary level must be >= 1");
  Tensor12 t = fn_bracket(a, b);
  for (int level = 2; level <= m; ++level) t = binary_step(t, a, b);
  return t;
}

Tensor12 binary_level(const OperatorField& a, const OperatorField& b, int m, const Point& p) {
  return binary_level(a.eval(p), b.eval(p), m);
}

Tensor12 tau_level(const OpEval& a, int m) {
  if (m < 1)
    throw std::invalid_argument(
        "torsion level must be >= 1 (level 0 is the bare commutator, not a tensor)");
  Tensor12 t = nijenhuis(a);
  for (int level = 2; level <= m; ++level) t = haantjes_step(t, a);
  return t;
}

Tensor12 tau_level(const OperatorField& a, int m, const Point& p) {
  return tau_level(a.eval(p), m);
}

namespace {

long long binomial(int m, int k) {
  long long acc = 1;
  for (int i = 1; i <= k; ++i) acc = acc * (m - k + i) / i;
  return acc;
}

}  // namespace

Tensor12 tau_closed_form(const OpEval& a, int m) {
  if (m < 1) throw std::invalid_argument("torsion level must be >= 1");
  if (m > 12)
    throw std::invalid_argument(
        "closed form limited to level 12 (exact binomials); use the recursion");
  const int n = a.n;
  const std::vector<OpEval> pw = dual_power_table(a, 2 * m);

  // [A^{m-p} e_j, A^{m-q} e_k]^beta from power values and Jacobians
  auto bracket = [&](int mp, int mq, int j, int k, int be) {
    double acc = 0.0;
    for (int al = 0; al < n; ++al)
      acc += pw[mp].val(al, j) * pw[mq].d(be, k, al) - pw[mq].val(al, k) * pw[mp].d(be, j, al);
    return acc;
  };

  double coef_mass = 0.0;
  for (int p = 0; p <= m; ++p)
    for (int q = 0; q <= m; ++q)
      coef_mass += static_cast<double>(binomial(m, p)) * static_cast<double>(binomial(m, q));
  double pw_val = 0.0, pw_jac = 0.0;
  for (const OpEval& t : pw) {
    pw_val = std::max(pw_val, t.value_max_abs());
    pw_jac = std::max(pw_jac, t.jac_max_abs());
  }
  const double hint = coef_mass * n * n * std::max(1.0, pw_val) * std::max(1.0, pw_val) * pw_jac;

  return Tensor12::build(n, hint, [&](int i, int j, int k) {
    double acc = 0.0;
    for (int p = 0; p <= m; ++p)
      for (int q = 0; q <= m; ++q) {
        const double coef = (((p + q) % 2) ? -1.0 : 1.0) *
                            static_cast<double>(binomial(m, p)) *
                            static_cast<double>(binomial(m, q));
        double applied = 0.0;
        for (int be = 0; be < n; ++be)
          applied += pw[p + q].val(i, be) * bracket(m - p, m - q, j, k, be);
        acc += coef * applied;
      }
    return acc;
  });
}

Tensor12 tau_closed_form(const OperatorField& a, int m, const Point& p) {
  return tau_closed_form(a.eval(p), m);
}

Tensor12 delta_tensor(const OpEval& a, const OpEval& b) {
  if (a.n != b.n) throw std::invalid_argument("operator dimension mismatch");
  const int n = a.n;
  const Tensor12 ta = nijenhuis(a);
  const Tensor12 tb = nijenhuis(b);
  const Tensor12 fn = fn_bracket(a, b);

  // the explicit half; the full tensor adds the copy with the operands (and
  // their torsions) swapped
  auto half = [&](const OpEval& A, const OpEval& B, const Tensor12& tA, const Tensor12& tB) {
    const std::vector<double> a2 = mat_mul(n, A.value, A.value);
    const std::vector<double> ab = mat_mul(n, A.value, B.value);
    return Tensor12::build(n, 0.0, [&](int i, int j, int k) {
      double acc = 0.0;
      for (int be = 0; be < n; ++be) {
        const double a2ib = a2[static_cast<std::size_t>(i) * n + be];
        const double abib = ab[static_cast<std::size_t>(i) * n + be];
        acc += a2ib * (tB(be, j, k) + fn(be, j, k)) + abib * (tA(be, j, k) + tB(be, j, k));
      }
      for (int al = 0; al < n; ++al)
        for (int be = 0; be < n; ++be) {
          acc += fn(i, al, be) * A.val(al, j) * A.val(be, k);
          acc += tA(i, al, be) * (A.val(al, j) * B.val(be, k) + B.val(al, j) * A.val(be, k) +
                                  B.val(al, j) * B.val(be, k));
          acc -= A.val(i, al) *
                 (fn(al, be, k) * A.val(be, j) + fn(al, j, be) * A.val(be, k) +
                  tA(al, be, k) * B.val(be, j) + tA(al, j, be) * B.val(be, k) +
                  tB(al, j, be) * A.val(be, k) + tB(al, be, k) * A.val(be, j) +
                  tB(al, j, be) * B.val(be, k) + tB(al, be, k) * B.val(be, j));
        }
      return acc;
    });
  };

  Tensor12 r = half(a, b, ta, tb) + half(b, a, tb, ta);
  const double tmax = std::max({ta.max_abs(), tb.max_abs(), fn.max_abs()});
  r.bump_scale(std::max({ta.scale(), tb.scale(), fn.scale()}));
  r.bump_scale(step_scale(n, std::max(a.value_max_abs(), b.value_max_abs()), tmax));
  return r;
}

Tensor12 delta_tensor(const OperatorField& a, const OperatorField& b, const Point& p) {
  return delta_tensor(a.eval(p), b.eval(p));
}

// ---------------------------------------------------------------------------
// Function-scaling identities

ResidualReport fn_scaling_residual(const OperatorField& a, const OperatorField& b, const Expr& f,
                                   const Point& p) {
  const int n = a.dim();
  const Tensor12 lhs = fn_bracket(OperatorField::scaled(f, a), b, p);

  const OpEval ae = a.eval(p);
  const OpEval be = b.eval(p);
  const Tensor12 fnab = fn_bracket(ae, be);
  const DualScalar fd = f.eval_dual(p);
  const std::vector<double> ba = mat_mul(n, be.value, ae.value);

  const Tensor12 rhs = Tensor12::build(n, fnab.scale(), [&](int i, int j, int k) {
    const double bj = column_derivative(n, be.value, fd.partials, j);  // (B e_j)(f)
    const double bk = column_derivative(n, be.value, fd.partials, k);
    double acc = fd.value * fnab(i, j, k);
    acc += bj * ae.val(i, k) - fd.partials[j] * ba[static_cast<std::size_t>(i) * n + k];
    acc -= bk * ae.val(i, j) - fd.partials[k] * ba[static_cast<std::size_t>(i) * n + j];
    return acc;
  });

  const Tensor12 diff = lhs - rhs;
  return {diff.max_abs(), std::max(lhs.scale(), rhs.scale())};
}

ResidualReport fab_identity_residual(const OperatorField& a, const OperatorField& b, const Expr& f,
                                     const Point& p) {
  const int n = a.dim();
  const Tensor12 lhs = binary_haantjes(OperatorField::scaled(f, a), b, p);

  const OpEval ae = a.eval(p);
  const OpEval be = b.eval(p);
  const Tensor12 hab = binary_haantjes(ae, be);
  const DualScalar fd = f.eval_dual(p);

  const std::vector<double>& av = ae.value;
  const std::vector<double>& bv = be.value;
  const std::vector<double> comm = mat_sub(mat_mul(n, av, bv), mat_mul(n, bv, av));
  const std::vector<double> m1 = mat_sub(mat_mul(n, av, comm), mat_mul(n, comm, av));
  const std::vector<double> m2 =
      mat_sub(mat_mul(n, bv, mat_mul(n, comm, av)), mat_mul(n, av, mat_mul(n, bv, comm)));
  const std::vector<double> m4 = mat_mul(n, bv, comm);
  const std::vector<double> ba = mat_mul(n, bv, av);

  // row i of the coefficient operator attached to the argument index z
  auto weight = [&](int i, int col, int z) {
    const double c1 = column_derivative(n, bv, fd.partials, z);   // (B e_z)(f)
    const double c2 = fd.partials[z];                             // e_z(f)
    const double c3 = column_derivative(n, ba, fd.partials, z);   // (BA e_z)(f)
    const double c4 = column_derivative(n, av, fd.partials, z);   // (A e_z)(f)
    const std::size_t at = static_cast<std::size_t>(i) * n + col;
    return c1 * m1[at] + c2 * m2[at] - c3 * comm[at] + c4 * m4[at];
  };

  const double f2 = fd.value * fd.value;
  const Tensor12 rhs = Tensor12::build(n, hab.scale(), [&](int i, int j, int k) {
    return f2 * hab(i, j, k) + fd.value * (weight(i, j, k) - weight(i, k, j));
  });

  const Tensor12 diff = lhs - rhs;
  return {diff.max_abs(), std::max(lhs.scale(), rhs.scale())};
}

ResidualReport shift_identity_residual(const OperatorField& a, const OperatorField& b,
                                       const Expr& f, const Point& p) {
  const int n = a.dim();
  const OperatorField shiftedA = OperatorField::shifted(f, a);
  const Tensor12 lhs = binary_haantjes(shiftedA, b, p);

  const OpEval ae = a.eval(p);
  const OpEval be = b.eval(p);
  const Tensor12 hab = binary_haantjes(ae, be);
  const Tensor12 hfb =
      binary_haantjes(OperatorField::scaled(f, OperatorField::identity(n)), b, p);
  const DualScalar fd = f.eval_dual(p);
  const std::vector<double> comm =
      mat_sub(mat_mul(n, ae.value, be.value), mat_mul(n, be.value, ae.value));
  const std::vector<double> bcomm = mat_mul(n, be.value, comm);

  const Tensor12 rhs = Tensor12::build(n, std::max(hab.scale(), hfb.scale()),
                                       [&](int i, int j, int k) {
    const double bj = column_derivative(n, be.value, fd.partials, j);
    const double bk = column_derivative(n, be.value, fd.partials, k);
    double acc = hab(i, j, k) + hfb(i, j, k);
    acc -= fd.partials[j] * bcomm[static_cast<std::size_t>(i) * n + k];
    acc += fd.partials[k] * bcomm[static_cast<std::size_t>(i) * n + j];
    acc += bj * comm[static_cast<std::size_t>(i) * n + k];
    acc -= bk * comm[static_cast<std::size_t>(i) * n + j];
    return acc;
  });

  const Tensor12 diff = lhs - rhs;
  return {diff.max_abs(), std::max(lhs.scale(), rhs.scale())};
}

ResidualReport nijenhuis_scaling_residual(const OperatorField& a, const Expr& g, const Point& p) {
  const int n = a.dim();
  const Tensor12 lhs = nijenhuis(OperatorField::scaled(g, a), p);

  const OpEval ae = a.eval(p);
  const Tensor12 ta = nijenhuis(ae);
  const DualScalar gd = g.eval_dual(p);
  const std::vector<double> a2 = mat_mul(n, ae.value, ae.value);

  const Tensor12 rhs = Tensor12::build(n, ta.scale(), [&](int i, int j, int k) {
    const double aj = column_derivative(n, ae.value, gd.partials, j);  // (A e_j)(g)
    const double ak = column_derivative(n, ae.value, gd.partials, k);
    double acc = gd.value * gd.value * ta(i, j, k);
    acc += gd.value * (aj * ae.val(i, k) - ak * ae.val(i, j) +
                       gd.partials[k] * a2[static_cast<std::size_t>(i) * n + j] -
                       gd.partials[j] * a2[static_cast<std::size_t>(i) * n + k]);
    return acc;
  });

  const Tensor12 diff = lhs - rhs;
  return {diff.max_abs(), std::max(lhs.scale(), rhs.scale())};
}

}  // namespace haan
