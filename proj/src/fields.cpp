#include "haantjes/fields.hpp"

#include <cmath>
#include <stdexcept>

namespace haan {

double OpEval::value_max_abs() const { return mat_max_abs(value); }

double OpEval::jac_max_abs() const {
  double m = 0.0;
  for (double v : jac) m = std::max(m, std::abs(v));
  return m;
}

OpEval dual_identity(int n) {
  OpEval e(n);
  for (int i = 0; i < n; ++i) e.val(i, i) = 1.0;
  return e;
}

OpEval dual_product(const OpEval& x, const OpEval& y) {
  if (x.n != y.n) throw std::invalid_argument("operator dimension mismatch");
  const int n = x.n;
  OpEval r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = 0.0;
      for (int a = 0; a < n; ++a) v += x.val(i, a) * y.val(a, j);
      r.val(i, j) = v;
      for (int t = 0; t < n; ++t) {
        double dv = 0.0;
        for (int a = 0; a < n; ++a)
          dv += x.d(i, a, t) * y.val(a, j) + x.val(i, a) * y.d(a, j, t);
        r.d(i, j, t) = dv;
      }
    }
  return r;
}

std::vector<double> mat_identity(int n) {
  std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i) * n + i] = 1.0;
  return m;
}

std::vector<double> mat_mul(int n, const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> r(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double aik = a[static_cast<std::size_t>(i) * n + k];
      if (aik == 0.0) continue;
      for (int j = 0; j < n; ++j)
        r[static_cast<std::size_t>(i) * n + j] += aik * b[static_cast<std::size_t>(k) * n + j];
    }
  return r;
}

std::vector<double> mat_add(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

std::vector<double> mat_sub(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

std::vector<double> mat_scale(double s, const std::vector<double>& a) {
  std::vector<double> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

double mat_max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> mat_apply(int n, const std::vector<double>& a, const std::vector<double>& v) {
  std::vector<double> r(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r[i] += a[static_cast<std::size_t>(i) * n + j] * v[j];
  return r;
}

// ---------------------------------------------------------------------------

OperatorField::OperatorField(int dim, std::vector<Expr> entries)
    : dim_(dim), entries_(std::move(entries)) {
  if (dim < 1) throw std::invalid_argument("operator dimension must be >= 1");
  if (entries_.size() != static_cast<std::size_t>(dim) * dim)
    throw std::invalid_argument("operator entry count does not match dimension");
  diagonal_ = strictly_upper_ = constant_ = true;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      const Expr& e = entry(i, j);
      if (!e.valid()) throw std::invalid_argument("empty operator entry");
      if (e.dim() != dim) throw std::invalid_argument("entry chart dimension mismatch");
      if (!e.is_constant()) constant_ = false;
      if (i != j && !e.is_literal_zero()) diagonal_ = false;
      if (i >= j && !e.is_literal_zero()) strictly_upper_ = false;
    }
}

OperatorField OperatorField::identity(int dim) {
  std::vector<Expr> e;
  e.reserve(static_cast<std::size_t>(dim) * dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) e.push_back(Expr::constant(i == j ? 1.0 : 0.0, dim));
  return OperatorField(dim, std::move(e));
}

OperatorField OperatorField::zero(int dim) {
  std::vector<Expr> e(static_cast<std::size_t>(dim) * dim, Expr::constant(0.0, dim));
  return OperatorField(dim, std::move(e));
}

OperatorField OperatorField::diagonal(std::vector<Expr> diag) {
  const int n = static_cast<int>(diag.size());
  if (n < 1) throw std::invalid_argument("empty diagonal");
  std::vector<Expr> e(static_cast<std::size_t>(n) * n, Expr::constant(0.0, n));
  for (int i = 0; i < n; ++i) e[static_cast<std::size_t>(i) * n + i] = diag[i];
  return OperatorField(n, std::move(e));
}

OperatorField OperatorField::scaled(const Expr& f, const OperatorField& a) {
  const int n = a.dim();
  if (f.dim() != n) throw std::invalid_argument("scalar field dimension mismatch");
  std::vector<Expr> e;
  e.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      e.push_back(a.entry(i, j).is_literal_zero() ? Expr::constant(0.0, n) : f * a.entry(i, j));
  return OperatorField(n, std::move(e));
}

OperatorField OperatorField::shifted(const Expr& f, const OperatorField& a) {
  const int n = a.dim();
  if (f.dim() != n) throw std::invalid_argument("scalar field dimension mismatch");
  std::vector<Expr> e;
  e.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      e.push_back(i == j ? f + a.entry(i, j) : a.entry(i, j));
  return OperatorField(n, std::move(e));
}

OperatorField operator+(const OperatorField& a, const OperatorField& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("operator dimension mismatch");
  const int n = a.dim();
  std::vector<Expr> e;
  e.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) e.push_back(a.entry(i, j) + b.entry(i, j));
  return OperatorField(n, std::move(e));
}

OperatorField operator*(const OperatorField& a, const OperatorField& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("operator dimension mismatch");
  const int n = a.dim();
  std::vector<Expr> e;
  e.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Expr acc;
      for (int k = 0; k < n; ++k) {
        if (a.entry(i, k).is_literal_zero() || b.entry(k, j).is_literal_zero()) continue;
        Expr term = a.entry(i, k) * b.entry(k, j);
        acc = acc.valid() ? acc + term : term;
      }
      e.push_back(acc.valid() ? acc : Expr::constant(0.0, n));
    }
  return OperatorField(n, std::move(e));
}

OpEval OperatorField::eval(const Point& p) const {
  if (p.dim() != dim_) throw std::invalid_argument("point dimension mismatch");
  OpEval r(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) {
      DualScalar d = entry(i, j).eval_dual(p);
      r.val(i, j) = d.value;
      for (int a = 0; a < dim_; ++a) r.d(i, j, a) = d.partials[a];
    }
  return r;
}

std::vector<double> OperatorField::value_at(const Point& p) const {
  std::vector<double> v(static_cast<std::size_t>(dim_) * dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      v[static_cast<std::size_t>(i) * dim_ + j] = entry(i, j).eval(p);
  return v;
}

// ---------------------------------------------------------------------------

VectorField::VectorField(int d, std::vector<Expr> comps) : dim(d), components(std::move(comps)) {
  if (components.size() != static_cast<std::size_t>(d))
    throw std::invalid_argument("vector field component count mismatch");
  for (const Expr& e : components)
    if (!e.valid() || e.dim() != d)
      throw std::invalid_argument("vector field component dimension mismatch");
}

VectorField VectorField::coordinate_axis(int index1, int dim) {
  std::vector<Expr> comps;
  comps.reserve(static_cast<std::size_t>(dim));
  for (int i = 1; i <= dim; ++i) comps.push_back(Expr::constant(i == index1 ? 1.0 : 0.0, dim));
  return VectorField(dim, std::move(comps));
}

std::vector<double> VectorField::value_at(const Point& p) const {
  std::vector<double> v(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) v[i] = components[i].eval(p);
  return v;
}

void VectorField::eval(const Point& p, std::vector<double>& value,
                       std::vector<double>& jacobian) const {
  value.assign(static_cast<std::size_t>(dim), 0.0);
  jacobian.assign(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i) {
    DualScalar d = components[i].eval_dual(p);
    value[i] = d.value;
    for (int a = 0; a < dim; ++a) jacobian[static_cast<std::size_t>(i) * dim + a] = d.partials[a];
  }
}

std::vector<double> lie_bracket(const VectorField& x, const VectorField& y, const Point& p) {
  if (x.dim != y.dim) throw std::invalid_argument("vector field dimension mismatch");
  const int n = x.dim;
  std::vector<double> xv, xj, yv, yj;
  x.eval(p, xv, xj);
  y.eval(p, yv, yj);
  std::vector<double> r(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int a = 0; a < n; ++a)
      acc += xv[a] * yj[static_cast<std::size_t>(i) * n + a] -
             yv[a] * xj[static_cast<std::size_t>(i) * n + a];
    r[i] = acc;
  }
  return r;
}

VectorField lie_bracket_field(const VectorField& x, const VectorField& y) {
  if (x.dim != y.dim) throw std::invalid_argument("vector field dimension mismatch");
  const int n = x.dim;
  std::vector<Expr> comps;
  comps.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Expr acc = Expr::constant(0.0, n);
    for (int a = 0; a < n; ++a)
      acc = acc + x.components[a] * y.components[i].derivative(a + 1) -
            y.components[a] * x.components[i].derivative(a + 1);
    comps.push_back(acc);
  }
  return VectorField(n, std::move(comps));
}

// ---------------------------------------------------------------------------

double Tensor12::max_abs() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> Tensor12::apply(const std::vector<double>& u,
                                    const std::vector<double>& v) const {
  if (u.size() != static_cast<std::size_t>(n_) || v.size() != static_cast<std::size_t>(n_))
    throw std::invalid_argument("argument dimension mismatch");
  std::vector<double> r(static_cast<std::size_t>(n_), 0.0);
  for (int i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) acc += c_[index(i, j, k)] * u[j] * v[k];
    r[i] = acc;
  }
  return r;
}

Tensor12 operator+(const Tensor12& a, const Tensor12& b) {
  if (a.n_ != b.n_) throw std::invalid_argument("tensor dimension mismatch");
  Tensor12 r(a.n_);
  for (std::size_t i = 0; i < a.c_.size(); ++i) r.c_[i] = a.c_[i] + b.c_[i];
  r.scale_ = std::max(a.scale_, b.scale_);
  if (double m = r.max_abs(); m > r.scale_) r.scale_ = m;
  return r;
}

Tensor12 operator-(const Tensor12& a, const Tensor12& b) {
  if (a.n_ != b.n_) throw std::invalid_argument("tensor dimension mismatch");
  Tensor12 r(a.n_);
  for (std::size_t i = 0; i < a.c_.size(); ++i) r.c_[i] = a.c_[i] - b.c_[i];
  r.scale_ = std::max(a.scale_, b.scale_);
  if (double m = r.max_abs(); m > r.scale_) r.scale_ = m;
  return r;
}

Tensor12 operator*(double s, const Tensor12& a) {
  Tensor12 r(a.n_);
  for (std::size_t i = 0; i < a.c_.size(); ++i) r.c_[i] = s * a.c_[i];
  r.scale_ = std::abs(s) * a.scale_;
  if (double m = r.max_abs(); m > r.scale_) r.scale_ = m;
  return r;
}

std::vector<double> apply_tensor(const Tensor12& t, const std::vector<double>& u,
                                 const std::vector<double>& v) {
  return t.apply(u, v);
}

OpEval eval_operator(const OperatorField& a, const Point& p) { return a.eval(p); }

OpEval matrix_power_dual(const OperatorField& a, int k, const Point& p) {
  if (k < 0) throw std::invalid_argument("matrix power must be >= 0");
  OpEval base = a.eval(p);
  OpEval acc = dual_identity(a.dim());
  for (int t = 0; t < k; ++t) acc = dual_product(acc, base);
  return acc;
}

std::vector<OpEval> dual_power_table(const OpEval& a, int max_power) {
  if (max_power < 0) throw std::invalid_argument("matrix power must be >= 0");
  std::vector<OpEval> table;
  table.reserve(static_cast<std::size_t>(max_power) + 1);
  table.push_back(dual_identity(a.n));
  for (int t = 1; t <= max_power; ++t) table.push_back(dual_product(table.back(), a));
  return table;
}

}  // namespace haan
