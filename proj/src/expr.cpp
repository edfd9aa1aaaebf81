#include "haantjes/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>

namespace haan {

bool Point::finite() const {
  for (double c : coords)
    if (!std::isfinite(c)) return false;
  return true;
}

DualScalar DualScalar::coordinate(double v, int index0, int dim) {
  DualScalar d(v, dim);
  d.partials[static_cast<std::size_t>(index0)] = 1.0;
  return d;
}

static void check_same_dim(const DualScalar& a, const DualScalar& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("DualScalar dimension mismatch");
}

DualScalar operator+(const DualScalar& a, const DualScalar& b) {
  check_same_dim(a, b);
  DualScalar r(a.value + b.value, a.dim());
  for (int i = 0; i < a.dim(); ++i) r.partials[i] = a.partials[i] + b.partials[i];
  return r;
}

DualScalar operator-(const DualScalar& a, const DualScalar& b) {
  check_same_dim(a, b);
  DualScalar r(a.value - b.value, a.dim());
  for (int i = 0; i < a.dim(); ++i) r.partials[i] = a.partials[i] - b.partials[i];
  return r;
}

DualScalar operator-(const DualScalar& a) {
  DualScalar r(-a.value, a.dim());
  for (int i = 0; i < a.dim(); ++i) r.partials[i] = -a.partials[i];
  return r;
}

DualScalar operator*(const DualScalar& a, const DualScalar& b) {
  check_same_dim(a, b);
  DualScalar r(a.value * b.value, a.dim());
  for (int i = 0; i < a.dim(); ++i)
    r.partials[i] = a.value * b.partials[i] + b.value * a.partials[i];
  return r;
}

DualScalar operator/(const DualScalar& a, const DualScalar& b) {
  check_same_dim(a, b);
  if (b.value == 0.0) throw DomainError("division by zero");
  DualScalar r(a.value / b.value, a.dim());
  const double inv2 = 1.0 / (b.value * b.value);
  for (int i = 0; i < a.dim(); ++i)
    r.partials[i] = (a.partials[i] * b.value - a.value * b.partials[i]) * inv2;
  return r;
}

static DualScalar chain(const DualScalar& a, double v, double dv) {
  DualScalar r(v, a.dim());
  for (int i = 0; i < a.dim(); ++i) r.partials[i] = dv * a.partials[i];
  return r;
}

DualScalar sin(const DualScalar& a) { return chain(a, std::sin(a.value), std::cos(a.value)); }
DualScalar cos(const DualScalar& a) { return chain(a, std::cos(a.value), -std::sin(a.value)); }
DualScalar exp(const DualScalar& a) { return chain(a, std::exp(a.value), std::exp(a.value)); }

DualScalar sqrt(const DualScalar& a) {
  if (a.value < 0.0) throw DomainError("sqrt of a negative value");
  if (a.value == 0.0) throw DomainError("sqrt derivative at zero");
  const double s = std::sqrt(a.value);
  return chain(a, s, 0.5 / s);
}

DualScalar ln(const DualScalar& a) {
  if (a.value <= 0.0) throw DomainError("ln of a non-positive value");
  return chain(a, std::log(a.value), 1.0 / a.value);
}

DualScalar pow(const DualScalar& a, double k) {
  if (k == 0.0) return DualScalar::constant(1.0, a.dim());
  const bool integral = (k == std::floor(k));
  if (!integral && a.value <= 0.0)
    throw DomainError("non-integer power of a non-positive value");
  if (integral && k < 0.0 && a.value == 0.0)
    throw DomainError("negative power of zero");
  if (integral && 0.0 < k && k < 1.0 && a.value == 0.0)
    throw DomainError("fractional power derivative at zero");
  const double v = std::pow(a.value, k);
  double dv;
  if (a.value == 0.0)
    dv = (k == 1.0) ? 1.0 : 0.0;  // k > 1 integral
  else
    dv = k * std::pow(a.value, k - 1.0);
  return chain(a, v, dv);
}

ParseError::ParseError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " (byte " + std::to_string(offset) + ")"), offset_(offset) {}

// ---------------------------------------------------------------------------
// Expression nodes

struct Expr::Node {
  enum class Op : std::uint8_t {
    Constant, Coord,
    Neg, Sin, Cos, Exp, Sqrt, Ln,
    Add, Sub, Mul, Div,
    Pow,  // exponent stored in `number`
  };

  Op op;
  double number = 0.0;  // Constant value or Pow exponent
  int coord = 0;        // 1-based coordinate index for Coord
  NodePtr lhs, rhs;
};

using Node = Expr::Node;
using Op = Node::Op;

static Expr::NodePtr make_node(Op op, Expr::NodePtr lhs = nullptr,
                               Expr::NodePtr rhs = nullptr, double number = 0.0,
                               int coord = 0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->number = number;
  n->coord = coord;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

Expr Expr::constant(double value, int dim) {
  if (dim < 1) throw std::invalid_argument("chart dimension must be >= 1");
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite constant");
  return Expr(make_node(Op::Constant, nullptr, nullptr, value), dim);
}

Expr Expr::coordinate(int index1, int dim) {
  if (dim < 1) throw std::invalid_argument("chart dimension must be >= 1");
  if (index1 < 1 || index1 > dim)
    throw std::invalid_argument("coordinate index x" + std::to_string(index1) +
                                " out of range for dimension " + std::to_string(dim));
  return Expr(make_node(Op::Coord, nullptr, nullptr, 0.0, index1), dim);
}

static void require_valid(const Expr& e) {
  if (!e.valid()) throw std::invalid_argument("empty expression");
}

static int combined_dim(const Expr& a, const Expr& b) {
  require_valid(a);
  require_valid(b);
  if (a.dim() != b.dim()) throw std::invalid_argument("expression dimension mismatch");
  return a.dim();
}

Expr operator+(const Expr& a, const Expr& b) {
  return Expr(make_node(Op::Add, a.node_, b.node_), combined_dim(a, b));
}
Expr operator-(const Expr& a, const Expr& b) {
  return Expr(make_node(Op::Sub, a.node_, b.node_), combined_dim(a, b));
}
Expr operator-(const Expr& a) {
  require_valid(a);
  return Expr(make_node(Op::Neg, a.node_), a.dim());
}
Expr operator*(const Expr& a, const Expr& b) {
  return Expr(make_node(Op::Mul, a.node_, b.node_), combined_dim(a, b));
}
Expr operator/(const Expr& a, const Expr& b) {
  return Expr(make_node(Op::Div, a.node_, b.node_), combined_dim(a, b));
}
Expr sin(const Expr& a) { require_valid(a); return Expr(make_node(Op::Sin, a.node_), a.dim()); }
Expr cos(const Expr& a) { require_valid(a); return Expr(make_node(Op::Cos, a.node_), a.dim()); }
Expr exp(const Expr& a) { require_valid(a); return Expr(make_node(Op::Exp, a.node_), a.dim()); }
Expr sqrt(const Expr& a) { require_valid(a); return Expr(make_node(Op::Sqrt, a.node_), a.dim()); }
Expr ln(const Expr& a) { require_valid(a); return Expr(make_node(Op::Ln, a.node_), a.dim()); }

Expr Expr::pow(double exponent) const {
  require_valid(*this);
  if (!std::isfinite(exponent)) throw std::invalid_argument("non-finite exponent");
  return Expr(make_node(Op::Pow, node_, nullptr, exponent), dim_);
}

Expr operator+(const Expr& a, double b) { return a + Expr::constant(b, a.dim()); }
Expr operator+(double a, const Expr& b) { return Expr::constant(a, b.dim()) + b; }
Expr operator-(const Expr& a, double b) { return a - Expr::constant(b, a.dim()); }
Expr operator*(double a, const Expr& b) { return Expr::constant(a, b.dim()) * b; }
Expr operator*(const Expr& a, double b) { return a * Expr::constant(b, a.dim()); }

// ---------------------------------------------------------------------------
// Evaluation

namespace {

std::string short_str(const Node* n);

[[noreturn]] void domain_fail(const char* what, const Node* n) {
  throw DomainError(std::string(what) + " in '" + short_str(n) + "'");
}

double eval_node(const Node* n, const Point& p) {
  switch (n->op) {
    case Op::Constant: return n->number;
    case Op::Coord: return p[n->coord - 1];
    case Op::Neg: return -eval_node(n->lhs.get(), p);
    case Op::Sin: return std::sin(eval_node(n->lhs.get(), p));
    case Op::Cos: return std::cos(eval_node(n->lhs.get(), p));
    case Op::Exp: return std::exp(eval_node(n->lhs.get(), p));
    case Op::Sqrt: {
      double v = eval_node(n->lhs.get(), p);
      if (v < 0.0) domain_fail("sqrt of a negative value", n);
      return std::sqrt(v);
    }
    case Op::Ln: {
      double v = eval_node(n->lhs.get(), p);
      if (v <= 0.0) domain_fail("ln of a non-positive value", n);
      return std::log(v);
    }
    case Op::Add: return eval_node(n->lhs.get(), p) + eval_node(n->rhs.get(), p);
    case Op::Sub: return eval_node(n->lhs.get(), p) - eval_node(n->rhs.get(), p);
    case Op::Mul: return eval_node(n->lhs.get(), p) * eval_node(n->rhs.get(), p);
    case Op::Div: {
      double num = eval_node(n->lhs.get(), p);
      double den = eval_node(n->rhs.get(), p);
      if (den == 0.0) domain_fail("division by zero", n);
      return num / den;
    }
    case Op::Pow: {
      double base = eval_node(n->lhs.get(), p);
      double k = n->number;
      if (k == 0.0) return 1.0;
      const bool integral = (k == std::floor(k));
      if (!integral && base < 0.0) domain_fail("non-integer power of a negative value", n);
      if (k < 0.0 && base == 0.0) domain_fail("negative power of zero", n);
      return std::pow(base, k);
    }
  }
  throw std::logic_error("unreachable expression op");
}

DualScalar eval_dual_node(const Node* n, const Point& p) {
  const int dim = p.dim();
  try {
    switch (n->op) {
      case Op::Constant: return DualScalar::constant(n->number, dim);
      case Op::Coord: return DualScalar::coordinate(p[n->coord - 1], n->coord - 1, dim);
      case Op::Neg: return -eval_dual_node(n->lhs.get(), p);
      case Op::Sin: return sin(eval_dual_node(n->lhs.get(), p));
      case Op::Cos: return cos(eval_dual_node(n->lhs.get(), p));
      case Op::Exp: return exp(eval_dual_node(n->lhs.get(), p));
      case Op::Sqrt: return sqrt(eval_dual_node(n->lhs.get(), p));
      case Op::Ln: return ln(eval_dual_node(n->lhs.get(), p));
      case Op::Add: return eval_dual_node(n->lhs.get(), p) + eval_dual_node(n->rhs.get(), p);
      case Op::Sub: return eval_dual_node(n->lhs.get(), p) - eval_dual_node(n->rhs.get(), p);
      case Op::Mul: return eval_dual_node(n->lhs.get(), p) * eval_dual_node(n->rhs.get(), p);
      case Op::Div: return eval_dual_node(n->lhs.get(), p) / eval_dual_node(n->rhs.get(), p);
      case Op::Pow: return pow(eval_dual_node(n->lhs.get(), p), n->number);
    }
  } catch (const DomainError& e) {
    // re-raise with the subtree named once, at the node that failed
    if (std::strchr(e.what(), '\'') == nullptr)
      throw DomainError(std::string(e.what()) + " in '" + short_str(n) + "'");
    throw;
  }
  throw std::logic_error("unreachable expression op");
}

}  // namespace

double Expr::eval(const Point& p) const {
  require_valid(*this);
  if (p.dim() != dim_) throw std::invalid_argument("point dimension mismatch");
  return eval_node(node_.get(), p);
}

DualScalar Expr::eval_dual(const Point& p) const {
  require_valid(*this);
  if (p.dim() != dim_) throw std::invalid_argument("point dimension mismatch");
  return eval_dual_node(node_.get(), p);
}

std::optional<double> Expr::fold_constant() const {
  require_valid(*this);
  // a coordinate-free tree evaluates identically everywhere
  std::function<bool(const Node*)> free = [&](const Node* n) {
    if (n->op == Op::Coord) return false;
    if (n->lhs && !free(n->lhs.get())) return false;
    if (n->rhs && !free(n->rhs.get())) return false;
    return true;
  };
  if (!free(node_.get())) return std::nullopt;
  Point origin(std::vector<double>(static_cast<std::size_t>(dim_), 0.0));
  try {
    return eval_node(node_.get(), origin);
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

bool Expr::is_literal_zero() const {
  auto v = fold_constant();
  return v.has_value() && *v == 0.0;
}

Expr Expr::derivative(int index1) const {
  require_valid(*this);
  if (index1 < 1 || index1 > dim_) throw std::invalid_argument("coordinate index out of range");
  const int n = dim_;
  std::function<Expr(const Node*)> d = [&](const Node* node) -> Expr {
    const Expr u = node->lhs ? Expr(node->lhs, n) : Expr();
    const Expr v = node->rhs ? Expr(node->rhs, n) : Expr();
    switch (node->op) {
      case Op::Constant: return constant(0.0, n);
      case Op::Coord: return constant(node->coord == index1 ? 1.0 : 0.0, n);
      case Op::Neg: return -d(node->lhs.get());
      case Op::Sin: return cos(u) * d(node->lhs.get());
      case Op::Cos: return -(sin(u) * d(node->lhs.get()));
      case Op::Exp: return exp(u) * d(node->lhs.get());
      case Op::Sqrt: return d(node->lhs.get()) / (constant(2.0, n) * sqrt(u));
      case Op::Ln: return d(node->lhs.get()) / u;
      case Op::Add: return d(node->lhs.get()) + d(node->rhs.get());
      case Op::Sub: return d(node->lhs.get()) - d(node->rhs.get());
      case Op::Mul: return d(node->lhs.get()) * v + u * d(node->rhs.get());
      case Op::Div:
        return (d(node->lhs.get()) * v - u * d(node->rhs.get())) / (v * v);
      case Op::Pow:
        if (node->number == 0.0) return constant(0.0, n);
        return constant(node->number, n) * u.pow(node->number - 1.0) * d(node->lhs.get());
    }
    throw std::logic_error("unreachable expression op");
  };
  return d(node_.get());
}

bool Expr::same_tree(const Expr& other) const {
  std::function<bool(const Node*, const Node*)> eq = [&](const Node* a, const Node* b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->op != b->op || a->number != b->number || a->coord != b->coord) return false;
    return eq(a->lhs.get(), b->lhs.get()) && eq(a->rhs.get(), b->rhs.get());
  };
  return dim_ == other.dim_ && eq(node_.get(), other.node_.get());
}

// ---------------------------------------------------------------------------
// Printing. Precedence levels: 1 add/sub, 2 mul/div, 3 unary minus, 4 pow,
// 5 atoms. A child is parenthesized when its level is below what its
// position requires.

namespace {

int node_level(const Node* n) {
  switch (n->op) {
    case Op::Add: case Op::Sub: return 1;
    case Op::Mul: case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    default: return 5;
  }
}

void print_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void print_node(std::string& out, const Node* n, int min_level) {
  const int lv = node_level(n);
  const bool paren = lv < min_level;
  if (paren) out += '(';
  switch (n->op) {
    case Op::Constant:
      if (n->number < 0.0) {  // print as negated literal so it reparses
        out += '-';
        print_number(out, -n->number);
      } else {
        print_number(out, n->number);
      }
      break;
    case Op::Coord:
      out += 'x';
      out += std::to_string(n->coord);
      break;
    case Op::Neg:
      out += '-';
      print_node(out, n->lhs.get(), 4);
      break;
    case Op::Sin: out += "sin("; print_node(out, n->lhs.get(), 1); out += ')'; break;
    case Op::Cos: out += "cos("; print_node(out, n->lhs.get(), 1); out += ')'; break;
    case Op::Exp: out += "exp("; print_node(out, n->lhs.get(), 1); out += ')'; break;
    case Op::Sqrt: out += "sqrt("; print_node(out, n->lhs.get(), 1); out += ')'; break;
    case Op::Ln: out += "ln("; print_node(out, n->lhs.get(), 1); out += ')'; break;
    case Op::Add:
      print_node(out, n->lhs.get(), 1); out += " + "; print_node(out, n->rhs.get(), 2);
      break;
    case Op::Sub:
      print_node(out, n->lhs.get(), 1); out += " - "; print_node(out, n->rhs.get(), 2);
      break;
    case Op::Mul:
      print_node(out, n->lhs.get(), 2); out += '*'; print_node(out, n->rhs.get(), 3);
      break;
    case Op::Div:
      print_node(out, n->lhs.get(), 2); out += '/'; print_node(out, n->rhs.get(), 3);
      break;
    case Op::Pow:
      print_node(out, n->lhs.get(), 5);
      out += '^';
      if (n->number < 0.0) {
        out += '-';
        print_number(out, -n->number);
      } else {
        print_number(out, n->number);
      }
      break;
  }
  if (paren) out += ')';
}

std::string short_str(const Node* n) {
  std::string s;
  print_node(s, n, 1);
  if (s.size() > 60) s = s.substr(0, 57) + "...";
  return s;
}

}  // namespace

std::string Expr::str() const {
  require_valid(*this);
  std::string s;
  print_node(s, node_.get(), 1);
  return s;
}

// ---------------------------------------------------------------------------
// Parser: recursive descent over the grammar in the class comment.

namespace {

class Parser {
 public:
  Parser(const std::string& text, int dim) : text_(text), dim_(dim) {}

  Expr::NodePtr run() {
    auto node = parse_expr();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError("syntax error: unexpected trailing input", pos_);
    return node;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek_char(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool accept_char(char c) {
    if (peek_char(c)) { ++pos_; return true; }
    return false;
  }

  Expr::NodePtr parse_expr() {
    auto lhs = parse_term();
    for (;;) {
      if (accept_char('+')) lhs = make_node(Op::Add, lhs, parse_term());
      else if (accept_char('-')) lhs = make_node(Op::Sub, lhs, parse_term());
      else return lhs;
    }
  }

  Expr::NodePtr parse_term() {
    auto lhs = parse_factor();
    for (;;) {
      if (accept_char('*')) lhs = make_node(Op::Mul, lhs, parse_factor());
      else if (accept_char('/')) lhs = make_node(Op::Div, lhs, parse_factor());
      else return lhs;
    }
  }

  Expr::NodePtr parse_factor() {
    auto base = parse_base();
    if (accept_char('^')) {
      skip_ws();
      const bool negated = accept_char('-');
      double k = parse_number_token();
      return make_node(Op::Pow, base, nullptr, negated ? -k : k);
    }
    return base;
  }

  Expr::NodePtr parse_base() {
    skip_ws();
    if (pos_ >= text_.size())
      throw ParseError("syntax error: expected an expression at end of input", pos_);
    const char c = text_[pos_];
    if (c == '-') {
      ++pos_;
      auto inner = parse_factor();
      if (inner->op == Op::Constant)  // fold the sign into the literal
        return make_node(Op::Constant, nullptr, nullptr, -inner->number);
      return make_node(Op::Neg, inner);
    }
    if (c == '(') {
      ++pos_;
      auto inner = parse_expr();
      skip_ws();
      if (!accept_char(')')) throw ParseError("syntax error: expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return make_node(Op::Constant, nullptr, nullptr, parse_number_token());
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    throw ParseError(std::string("syntax error: unexpected '") + c + "'", pos_);
  }

  double parse_number_token() {
    skip_ws();
    const std::size_t at = pos_;
    std::size_t i = pos_;
    while (i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]))) ++i;
    if (i < text_.size() && text_[i] == '.') {
      ++i;
      while (i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]))) ++i;
    }
    if (i == pos_ || (i == pos_ + 1 && text_[pos_] == '.'))
      throw ParseError("syntax error: expected a number", at);
    if (i < text_.size() && (text_[i] == 'e' || text_[i] == 'E')) {
      std::size_t j = i + 1;
      if (j < text_.size() && (text_[j] == '+' || text_[j] == '-')) ++j;
      std::size_t k = j;
      while (k < text_.size() && std::isdigit(static_cast<unsigned char>(text_[k]))) ++k;
      if (k > j) i = k;  // exponent present, consume it; otherwise 'e' is not ours
    }
    // convert exactly the scanned token so strtod cannot read past it
    const std::string token = text_.substr(pos_, i - pos_);
    double v = std::strtod(token.c_str(), nullptr);
    if (!std::isfinite(v)) throw ParseError("numeric literal out of range", at);
    pos_ = i;
    return v;
  }

  Expr::NodePtr parse_ident() {
    const std::size_t at = pos_;
    std::size_t i = pos_;
    while (i < text_.size() && std::isalnum(static_cast<unsigned char>(text_[i]))) ++i;
    std::string name = text_.substr(pos_, i - pos_);
    pos_ = i;
    if (name.size() >= 2 && name[0] == 'x' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos) {
      int idx = 0;
      for (std::size_t k = 1; k < name.size(); ++k) idx = idx * 10 + (name[k] - '0');
      if (idx < 1 || idx > dim_)
        throw ParseError("coordinate " + name + " out of range for dimension " +
                             std::to_string(dim_), at);
      return make_node(Op::Coord, nullptr, nullptr, 0.0, idx);
    }
    Op op;
    if (name == "sin") op = Op::Sin;
    else if (name == "cos") op = Op::Cos;
    else if (name == "exp") op = Op::Exp;
    else if (name == "sqrt") op = Op::Sqrt;
    else if (name == "ln") op = Op::Ln;
    else throw ParseError("unknown identifier '" + name + "'", at);
    skip_ws();
    if (!accept_char('('))
      throw ParseError("syntax error: expected '(' after '" + name + "'", pos_);
    auto arg = parse_expr();
    skip_ws();
    if (!accept_char(')')) throw ParseError("syntax error: expected ')'", pos_);
    return make_node(op, arg);
  }

  const std::string& text_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(const std::string& text, int dim) {
  if (dim < 1) throw std::invalid_argument("chart dimension must be >= 1");
  Parser parser(text, dim);
  return Expr(parser.run(), dim);
}

std::vector<double> grad_fd(const Expr& e, const Point& p, double h) {
  if (h <= 0.0) throw std::invalid_argument("finite-difference step must be positive");
  const int n = p.dim();
  std::vector<double> g(static_cast<std::size_t>(n));
  Point q = p;
  for (int k = 0; k < n; ++k) {
    q.coords[k] = p[k] + h;
    const double fp = e.eval(q);
    q.coords[k] = p[k] - h;
    const double fm = e.eval(q);
    q.coords[k] = p[k];
    g[k] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace haan
