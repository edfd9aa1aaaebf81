#pragma once

#include <vector>

#include "haantjes/expr.hpp"

namespace haan {

/// Pointwise evaluation of an operator field: the value matrix A^i_j and its
/// Jacobian dA^i_j/dx^a, both exact (dual arithmetic).
struct OpEval {
  int n = 0;
  std::vector<double> value;  // n*n row-major
  std::vector<double> jac;    // n*n*n

  OpEval() = default;
  explicit OpEval(int dim)
      : n(dim),
        value(static_cast<std::size_t>(dim) * dim, 0.0),
        jac(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}

  double val(int i, int j) const { return value[static_cast<std::size_t>(i) * n + j]; }
  double& val(int i, int j) { return value[static_cast<std::size_t>(i) * n + j]; }
  /// dA^i_j/dx^a
  double d(int i, int j, int a) const {
    return jac[(static_cast<std::size_t>(i) * n + j) * n + a];
  }
  double& d(int i, int j, int a) { return jac[(static_cast<std::size_t>(i) * n + j) * n + a]; }

  double value_max_abs() const;
  double jac_max_abs() const;
};

/// Dual-arithmetic matrix product: value and Jacobian of X*Y.
OpEval dual_product(const OpEval& x, const OpEval& y);
OpEval dual_identity(int n);

// plain n x n value-matrix helpers (row-major std::vector<double>)
std::vector<double> mat_identity(int n);
std::vector<double> mat_mul(int n, const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> mat_add(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> mat_sub(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> mat_scale(double s, const std::vector<double>& a);
double mat_max_abs(const std::vector<double>& a);
std::vector<double> mat_apply(int n, const std::vector<double>& a, const std::vector<double>& v);

/// An n x n matrix of chart functions: a (1,1) tensor field in coordinates.
/// Structural flags are derived from the entry trees at construction.
class OperatorField {
 public:
  OperatorField(int dim, std::vector<Expr> entries);  // row-major, size dim*dim

  static OperatorField identity(int dim);
  static OperatorField zero(int dim);
  static OperatorField diagonal(std::vector<Expr> diag);
  /// f*A, entrywise product with a scalar field
  static OperatorField scaled(const Expr& f, const OperatorField& a);
  /// f*I + A
  static OperatorField shifted(const Expr& f, const OperatorField& a);

  int dim() const { return dim_; }
  const Expr& entry(int i, int j) const {  // 0-based
    return entries_[static_cast<std::size_t>(i) * dim_ + j];
  }

  bool is_diagonal() const { return diagonal_; }
  bool is_strictly_upper() const { return strictly_upper_; }
  bool is_constant() const { return constant_; }

  OpEval eval(const Point& p) const;
  std::vector<double> value_at(const Point& p) const;  // values only

  friend OperatorField operator+(const OperatorField& a, const OperatorField& b);
  friend OperatorField operator*(const OperatorField& a, const OperatorField& b);  // composition

 private:
  int dim_;
  std::vector<Expr> entries_;
  bool diagonal_ = false, strictly_upper_ = false, constant_ = false;
};

struct VectorField {
  int dim = 0;
  std::vector<Expr> components;

  VectorField() = default;
  VectorField(int d, std::vector<Expr> comps);
  static VectorField coordinate_axis(int index1, int dim);  // the frame field e_{index1}

  std::vector<double> value_at(const Point& p) const;
  /// value and Jacobian dX^i/dx^a (row-major n*n, [i*n+a])
  void eval(const Point& p, std::vector<double>& value, std::vector<double>& jacobian) const;
};

/// [X,Y]^i = sum_a (X^a dY^i/dx^a - Y^a dX^i/dx^a) at p.
std::vector<double> lie_bracket(const VectorField& x, const VectorField& y, const Point& p);

/// The bracket as a field, components expanded through Expr::derivative.
VectorField lie_bracket_field(const VectorField& x, const VectorField& y);

/// Pointwise (1,2) tensor c^i_{jk}, skew-symmetric in (j,k) by construction:
/// producers fill j < k and the mirror is written with the exact opposite
/// sign. `scale` records the largest intermediate magnitude that entered the
/// computation, for scale-relative residual tolerances.
class Tensor12 {
 public:
  explicit Tensor12(int n)
      : n_(n), c_(static_cast<std::size_t>(n) * n * n, 0.0), scale_(0.0) {}

  template <class Fill>
  static Tensor12 build(int n, double scale_hint, Fill&& fill) {
    Tensor12 t(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
          const double v = fill(i, j, k);
          t.c_[t.index(i, j, k)] = v;
          t.c_[t.index(i, k, j)] = -v;
        }
    t.scale_ = scale_hint;
    if (double m = t.max_abs(); m > t.scale_) t.scale_ = m;
    return t;
  }

  int dim() const { return n_; }
  double operator()(int i, int j, int k) const { return c_[index(i, j, k)]; }
  double max_abs() const;
  double scale() const { return scale_; }
  void bump_scale(double s) { if (s > scale_) scale_ = s; }

  std::vector<double> apply(const std::vector<double>& u, const std::vector<double>& v) const;

  friend Tensor12 operator+(const Tensor12& a, const Tensor12& b);
  friend Tensor12 operator-(const Tensor12& a, const Tensor12& b);
  friend Tensor12 operator*(double s, const Tensor12& a);

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
  }

  int n_;
  std::vector<double> c_;
  double scale_;
};

/// out^i = sum_{jk} T^i_{jk} u^j v^k
std::vector<double> apply_tensor(const Tensor12& t, const std::vector<double>& u,
                                 const std::vector<double>& v);

OpEval eval_operator(const OperatorField& a, const Point& p);

/// Value and Jacobian of the k-th matrix power, k >= 0, exact via the dual
/// product rule.
OpEval matrix_power_dual(const OperatorField& a, int k, const Point& p);

/// Powers 0..max_power of an already evaluated operator.
std::vector<OpEval> dual_power_table(const OpEval& a, int max_power);

}  // namespace haan
