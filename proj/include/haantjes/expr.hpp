#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace haan {

/// A point of a local chart. Coordinates are x1..xn, stored 0-based.
struct Point {
  std::vector<double> coords;

  Point() = default;
  explicit Point(std::vector<double> c) : coords(std::move(c)) {}
  Point(std::initializer_list<double> c) : coords(c) {}

  int dim() const { return static_cast<int>(coords.size()); }
  double operator[](int k) const { return coords[static_cast<std::size_t>(k)]; }
  bool finite() const;
};

/// Forward-mode derivative carrier: a value together with its full gradient
/// with respect to the chart coordinates.
struct DualScalar {
  double value = 0.0;
  std::vector<double> partials;

  DualScalar() = default;
  DualScalar(double v, int dim) : value(v), partials(static_cast<std::size_t>(dim), 0.0) {}

  static DualScalar constant(double v, int dim) { return DualScalar(v, dim); }
  static DualScalar coordinate(double v, int index0, int dim);

  int dim() const { return static_cast<int>(partials.size()); }
};

DualScalar operator+(const DualScalar& a, const DualScalar& b);
DualScalar operator-(const DualScalar& a, const DualScalar& b);
DualScalar operator-(const DualScalar& a);
DualScalar operator*(const DualScalar& a, const DualScalar& b);
DualScalar operator/(const DualScalar& a, const DualScalar& b);
DualScalar sin(const DualScalar& a);
DualScalar cos(const DualScalar& a);
DualScalar exp(const DualScalar& a);
DualScalar sqrt(const DualScalar& a);
DualScalar ln(const DualScalar& a);
DualScalar pow(const DualScalar& a, double exponent);

/// Raised on malformed expression text; carries the 0-based byte offset of
/// the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Raised when an expression is evaluated outside its domain (division by
/// zero, ln of a non-positive value, ...). The message names the offending
/// subexpression.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable expression tree in the chart coordinates x1..xn.
///
/// Grammar (see README):
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := base ('^' '-'? number)?
///   base   := number | 'x'digits | func '(' expr ')' | '(' expr ')' | '-' factor
///   func   := sin | cos | exp | sqrt | ln
///
/// Exponents are numeric literals, so differentiation stays total. Trees are
/// shared and never mutated after construction; evaluation is pure.
class Expr {
 public:
  Expr() = default;  // empty handle; evaluating it is a usage error

  static Expr constant(double value, int dim);
  static Expr coordinate(int index1, int dim);  // 1-based coordinate index

  bool valid() const { return node_ != nullptr; }
  int dim() const { return dim_; }

  double eval(const Point& p) const;
  DualScalar eval_dual(const Point& p) const;

  /// Value of a coordinate-free tree, std::nullopt if any coordinate occurs.
  std::optional<double> fold_constant() const;
  bool is_constant() const { return fold_constant().has_value(); }
  bool is_literal_zero() const;

  /// Partial derivative with respect to x<index1>, as a new tree (the DSL is
  /// closed under differentiation; no simplification is attempted).
  Expr derivative(int index1) const;

  /// Canonical text form; parse(str(), dim()) rebuilds an identical tree.
  std::string str() const;

  bool same_tree(const Expr& other) const;

  Expr pow(double exponent) const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr exp(const Expr& a);
  friend Expr sqrt(const Expr& a);
  friend Expr ln(const Expr& a);
  friend Expr parse(const std::string& text, int dim);

  struct Node;  // opaque; defined in expr.cpp
  using NodePtr = std::shared_ptr<const Node>;

 private:
  Expr(NodePtr node, int dim) : node_(std::move(node)), dim_(dim) {}

  NodePtr node_;
  int dim_ = 0;
};

Expr operator+(const Expr& a, double b);
Expr operator+(double a, const Expr& b);
Expr operator-(const Expr& a, double b);
Expr operator*(double a, const Expr& b);
Expr operator*(const Expr& a, double b);

/// Parse expression text against a chart of dimension `dim` (>= 1).
Expr parse(const std::string& text, int dim);

/// Central-difference gradient with step h, the testing oracle for
/// Expr::eval_dual.
std::vector<double> grad_fd(const Expr& e, const Point& p, double h);

}  // namespace haan
