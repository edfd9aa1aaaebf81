// Test-only definitional oracles: the torsion tensors evaluated on natural
// frame pairs straight from their field-level definitions, with every Lie
// bracket taken between expression-level column fields. Independent of the
// assembled component formulas in the library.
#pragma once

#include "haantjes/torsion.hpp"

namespace haan::oracles {

inline VectorField column_field(const OperatorField& a, int j) {
  std::vector<Expr> comps;
  comps.reserve(static_cast<std::size_t>(a.dim()));
  for (int i = 0; i < a.dim(); ++i) comps.push_back(a.entry(i, j));
  return VectorField(a.dim(), std::move(comps));
}

// A^2[X,Y] + [AX,AY] - A([X,AY] + [AX,Y]) on (e_j, e_k)
inline Tensor12 nijenhuis_definitional(const OperatorField& a, const Point& p) {
  const int n = a.dim();
  const std::vector<double> av = a.value_at(p);
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(n));
  auto axis = [&](int j) { return VectorField::coordinate_axis(j + 1, n); };
  std::vector<VectorField> acol;
  for (int j = 0; j < n; ++j) acol.push_back(column_field(a, j));

  return Tensor12::build(n, 0.0, [&](int i, int j, int k) {
    const std::vector<double> t1 = lie_bracket(acol[j], acol[k], p);
    const std::vector<double> t2 = lie_bracket(axis(j), acol[k], p);
    const std::vector<double> t3 = lie_bracket(acol[j], axis(k), p);
    std::vector<double> inner(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) inner[c] = t2[c] + t3[c];
    const std::vector<double> applied = mat_apply(n, av, inner);
    return t1[i] - applied[i];  // the A^2[e_j, e_k] term vanishes
  });
}

// (AB+BA)[X,Y] + [AX,BY] + [BX,AY] - A([X,BY] + [BX,Y]) - B([X,AY] + [AX,Y])
inline Tensor12 fn_bracket_definitional(const OperatorField& a, const OperatorField& b,
                                        const Point& p) {
  const int n = a.dim();
  const std::vector<double> av = a.value_at(p);
  const std::vector<double> bv = b.value_at(p);
  auto axis = [&](int j) { return VectorField::coordinate_axis(j + 1, n); };
  std::vector<VectorField> acol, bcol;
  for (int j = 0; j < n; ++j) {
    acol.push_back(column_field(a, j));
    bcol.push_back(column_field(b, j));
  }

  return Tensor12::build(n, 0.0, [&](int i, int j, int k) {
    const std::vector<double> ab = lie_bracket(acol[j], bcol[k], p);
    const std::vector<double> ba = lie_bracket(bcol[j], acol[k], p);
    std::vector<double> a_arg(static_cast<std::size_t>(n)), b_arg(static_cast<std::size_t>(n));
    const std::vector<double> xby = lie_bracket(axis(j), bcol[k], p);
    const std::vector<double> bxy = lie_bracket(bcol[j], axis(k), p);
    const std::vector<double> xay = lie_bracket(axis(j), acol[k], p);
    const std::vector<double> axy = lie_bracket(acol[j], axis(k), p);
    for (int c = 0; c < n; ++c) {
      a_arg[c] = xby[c] + bxy[c];
      b_arg[c] = xay[c] + axy[c];
    }
    const std::vector<double> a_app = mat_apply(n, av, a_arg);
    const std::vector<double> b_app = mat_apply(n, bv, b_arg);
    return ab[i] + ba[i] - a_app[i] - b_app[i];
  });
}

// A^2 T(X,Y) + T(AX,AY) - A(T(X,AY) + T(AX,Y)) with T applied through
// apply_tensor on column values (loop structure independent of the library's
// contraction kernel).
inline Tensor12 haantjes_definitional(const OperatorField& a, const Point& p) {
  const int n = a.dim();
  const Tensor12 t = nijenhuis_definitional(a, p);
  const std::vector<double> av = a.value_at(p);
  const std::vector<double> a2 = mat_mul(n, av, av);
  auto unit = [&](int j) {
    std::vector<double> u(static_cast<std::size_t>(n), 0.0);
    u[j] = 1.0;
    return u;
  };
  auto col = [&](int j) {
    std::vector<double> c(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) c[i] = av[static_cast<std::size_t>(i) * n + j];
    return c;
  };

  return Tensor12::build(n, 0.0, [&](int i, int j, int k) {
    const std::vector<double> term1 = mat_apply(n, a2, t.apply(unit(j), unit(k)));
    const std::vector<double> term2 = t.apply(col(j), col(k));
    std::vector<double> inner = t.apply(unit(j), col(k));
    const std::vector<double> other = t.apply(col(j), unit(k));
    for (int c = 0; c < n; ++c) inner[c] += other[c];
    const std::vector<double> term3 = mat_apply(n, av, inner);
    return term1[i] + term2[i] - term3[i];
  });
}

// A.X as a field, entries expanded symbolically
inline VectorField apply_field(const OperatorField& a, const VectorField& x) {
  const int n = a.dim();
  std::vector<Expr> comps;
  comps.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Expr acc = Expr::constant(0.0, n);
    for (int j = 0; j < n; ++j) acc = acc + a.entry(i, j) * x.components[j];
    comps.push_back(acc);
  }
  return VectorField(n, std::move(comps));
}

// the four-term torsion expression on arbitrary expression-level fields
inline std::vector<double> nijenhuis_on_fields(const OperatorField& a, const VectorField& x,
                                               const VectorField& y, const Point& p) {
  const int n = a.dim();
  const std::vector<double> av = a.value_at(p);
  const std::vector<double> a2 = mat_mul(n, av, av);
  const VectorField ax = apply_field(a, x);
  const VectorField ay = apply_field(a, y);
  const std::vector<double> t0 = mat_apply(n, a2, lie_bracket(x, y, p));
  const std::vector<double> t1 = lie_bracket(ax, ay, p);
  const std::vector<double> t2 = lie_bracket(x, ay, p);
  const std::vector<double> t3 = lie_bracket(ax, y, p);
  std::vector<double> inner(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) inner[c] = t2[c] + t3[c];
  const std::vector<double> applied = mat_apply(n, av, inner);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) out[c] = t0[c] + t1[c] - applied[c];
  return out;
}

inline std::vector<double> fn_on_fields(const OperatorField& a, const OperatorField& b,
                                        const VectorField& x, const VectorField& y,
                                        const Point& p) {
  const int n = a.dim();
  const std::vector<double> av = a.value_at(p);
  const std::vector<double> bv = b.value_at(p);
  const std::vector<double> anti = mat_add(mat_mul(n, av, bv), mat_mul(n, bv, av));
  const VectorField ax = apply_field(a, x), ay = apply_field(a, y);
  const VectorField bx = apply_field(b, x), by = apply_field(b, y);
  const std::vector<double> t0 = mat_apply(n, anti, lie_bracket(x, y, p));
  const std::vector<double> t1 = lie_bracket(ax, by, p);
  const std::vector<double> t2 = lie_bracket(bx, ay, p);
  std::vector<double> a_arg(static_cast<std::size_t>(n)), b_arg(static_cast<std::size_t>(n));
  const std::vector<double> xby = lie_bracket(x, by, p);
  const std::vector<double> bxy = lie_bracket(bx, y, p);
  const std::vector<double> xay = lie_bracket(x, ay, p);
  const std::vector<double> axy = lie_bracket(ax, y, p);
  for (int c = 0; c < n; ++c) {
    a_arg[c] = xby[c] + bxy[c];
    b_arg[c] = xay[c] + axy[c];
  }
  const std::vector<double> a_app = mat_apply(n, av, a_arg);
  const std::vector<double> b_app = mat_apply(n, bv, b_arg);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) out[c] = t0[c] + t1[c] + t2[c] - a_app[c] - b_app[c];
  return out;
}

}  // namespace haan::oracles
