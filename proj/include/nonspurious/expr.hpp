#pragma once

// Arithmetic expressions in the variables t and x: parsing, evaluation,
// symbolic differentiation with respect to x, and precedence-aware printing.
//
// Grammar (no implicit multiplication, '^' is right-associative and binds
// tighter than unary minus, which binds tighter than '*' and '/'):
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' factor)?
//   atom   := number | 't' | 'x' | func '(' expr ')' | '(' expr ')'
//   func   := exp | log | sqrt | abs | sin | cos | atan | sinh | cosh

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace nonspurious {

class ExprError : public std::runtime_error {
 public:
  ExprError(const std::string& what, int column)
      : std::runtime_error(what), column_(column) {}
  // 1-based position in the source text; 0 for nodes created by
  // differentiation, which have no source location.
  int column() const { return column_; }

 private:
  int column_;
};

class ParseError : public ExprError {
 public:
  using ExprError::ExprError;
};

// Raised when evaluation leaves the reals (log of a non-positive number,
// division by zero, overflow to infinity, ...).
class EvalError : public ExprError {
 public:
  using ExprError::ExprError;
};

// Raised by diff_x when the expression contains abs of an x-dependent
// subexpression; callers fall back to numerical derivatives.
class NonDifferentiableError : public ExprError {
 public:
  using ExprError::ExprError;
};

enum class ExprVar { T, X };
enum class ExprBinaryOp { Add, Sub, Mul, Div, Pow };
enum class ExprFunc { Exp, Log, Sqrt, Abs, Sin, Cos, Atan, Sinh, Cosh };

namespace detail {

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Kind { Constant, Variable, Negate, Binary, Call } kind;
  double value = 0.0;                      // Constant
  ExprVar var = ExprVar::T;                // Variable
  ExprBinaryOp op = ExprBinaryOp::Add;     // Binary
  ExprFunc func = ExprFunc::Exp;           // Call
  NodePtr a, b;                            // operands (Negate/Call use a only)
  int column = 0;
};

inline NodePtr make_constant(double v, int column = 0) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Constant;
  n->value = v;
  n->column = column;
  return n;
}

inline NodePtr make_variable(ExprVar v, int column = 0) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Variable;
  n->var = v;
  n->column = column;
  return n;
}

inline NodePtr make_negate(NodePtr a, int column = 0) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Negate;
  n->a = std::move(a);
  n->column = column;
  return n;
}

inline NodePtr make_binary(ExprBinaryOp op, NodePtr a, NodePtr b,
                           int column = 0) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Binary;
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  n->column = column;
  return n;
}

inline NodePtr make_call(ExprFunc f, NodePtr a, int column = 0) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Call;
  n->func = f;
  n->a = std::move(a);
  n->column = column;
  return n;
}

inline bool is_constant(const NodePtr& n, double v) {
  return n->kind == ExprNode::Kind::Constant && n->value == v;
}

// Simplifying constructors used while building derivatives; they fold only
// the 0/1 identities so derivative trees stay readable.
inline NodePtr s_add(NodePtr a, NodePtr b) {
  if (is_constant(a, 0.0)) return b;
  if (is_constant(b, 0.0)) return a;
  return make_binary(ExprBinaryOp::Add, std::move(a), std::move(b));
}

inline NodePtr s_sub(NodePtr a, NodePtr b) {
  if (is_constant(b, 0.0)) return a;
  if (is_constant(a, 0.0)) return make_negate(std::move(b));
  return make_binary(ExprBinaryOp::Sub, std::move(a), std::move(b));
}

inline NodePtr s_mul(NodePtr a, NodePtr b) {
  if (is_constant(a, 0.0) || is_constant(b, 0.0)) return make_constant(0.0);
  if (is_constant(a, 1.0)) return b;
  if (is_constant(b, 1.0)) return a;
  return make_binary(ExprBinaryOp::Mul, std::move(a), std::move(b));
}

inline NodePtr s_div(NodePtr a, NodePtr b) {
  if (is_constant(a, 0.0)) return a;
  if (is_constant(b, 1.0)) return a;
  return make_binary(ExprBinaryOp::Div, std::move(a), std::move(b));
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    NodePtr e = parse_expr();
    skip_spaces();
    if (pos_ != text_.size())
      fail("unexpected trailing input", static_cast<int>(pos_) + 1);
    return e;
  }

 private:
  std::string_view text_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what, int column) {
    throw ParseError(what, column);
  }

  void skip_spaces() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  // Returns '\0' at end of input.
  char peek() {
    skip_spaces();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  int here() { return static_cast<int>(pos_) + 1; }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      char c = peek();
      if (c != '+' && c != '-') return lhs;
      int col = here();
      ++pos_;
      NodePtr rhs = parse_term();
      lhs = make_binary(c == '+' ? ExprBinaryOp::Add : ExprBinaryOp::Sub,
                        std::move(lhs), std::move(rhs), col);
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    for (;;) {
      char c = peek();
      if (c != '*' && c != '/') return lhs;
      int col = here();
      ++pos_;
      NodePtr rhs = parse_factor();
      lhs = make_binary(c == '*' ? ExprBinaryOp::Mul : ExprBinaryOp::Div,
                        std::move(lhs), std::move(rhs), col);
    }
  }

  NodePtr parse_factor() {
    if (peek() == '-') {
      int col = here();
      ++pos_;
      return make_negate(parse_factor(), col);
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (peek() == '^') {
      int col = here();
      ++pos_;
      // Right-associative: the exponent is a factor, so "2^3^2" is 2^(3^2)
      // and "2^-x" parses without parentheses.
      NodePtr exponent = parse_factor();
      return make_binary(ExprBinaryOp::Pow, std::move(base),
                         std::move(exponent), col);
    }
    return base;
  }

  NodePtr parse_atom() {
    char c = peek();
    int col = here();
    if (c == '\0') fail("unexpected end of input", col);

    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return parse_number();

    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();

    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (peek() != ')') fail("expected ')'", here());
      ++pos_;
      return inner;
    }
    fail(std::string("unexpected character '") + c + "'", col);
  }

  NodePtr parse_number() {
    skip_spaces();
    int col = here();
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) fail("malformed number", col);
    pos_ += static_cast<size_t>(ptr - begin);
    return make_constant(value, col);
  }

  NodePtr parse_identifier() {
    skip_spaces();
    int col = here();
    size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isalnum(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    std::string_view name = text_.substr(start, pos_ - start);

    if (name == "t") return make_variable(ExprVar::T, col);
    if (name == "x") return make_variable(ExprVar::X, col);

    static constexpr std::pair<std::string_view, ExprFunc> kFuncs[] = {
        {"exp", ExprFunc::Exp},   {"log", ExprFunc::Log},
        {"sqrt", ExprFunc::Sqrt}, {"abs", ExprFunc::Abs},
        {"sin", ExprFunc::Sin},   {"cos", ExprFunc::Cos},
        {"atan", ExprFunc::Atan}, {"sinh", ExprFunc::Sinh},
        {"cosh", ExprFunc::Cosh}};
    for (const auto& [fname, fid] : kFuncs) {
      if (name == fname) {
        if (peek() != '(')
          fail("expected '(' after function name '" + std::string(name) + "'",
               here());
        ++pos_;
        NodePtr arg = parse_expr();
        if (peek() != ')') fail("expected ')'", here());
        ++pos_;
        return make_call(fid, std::move(arg), col);
      }
    }
    fail("unknown identifier '" + std::string(name) + "'", col);
  }
};

inline const char* func_name(ExprFunc f) {
  switch (f) {
    case ExprFunc::Exp: return "exp";
    case ExprFunc::Log: return "log";
    case ExprFunc::Sqrt: return "sqrt";
    case ExprFunc::Abs: return "abs";
    case ExprFunc::Sin: return "sin";
    case ExprFunc::Cos: return "cos";
    case ExprFunc::Atan: return "atan";
    case ExprFunc::Sinh: return "sinh";
    case ExprFunc::Cosh: return "cosh";
  }
  return "?";
}

inline double eval_node(const ExprNode& n, double t, double x) {
  double r = 0.0;
  switch (n.kind) {
    case ExprNode::Kind::Constant:
      r = n.value;
      break;
    case ExprNode::Kind::Variable:
      r = (n.var == ExprVar::T) ? t : x;
      break;
    case ExprNode::Kind::Negate:
      r = -eval_node(*n.a, t, x);
      break;
    case ExprNode::Kind::Binary: {
      double a = eval_node(*n.a, t, x);
      double b = eval_node(*n.b, t, x);
      switch (n.op) {
        case ExprBinaryOp::Add: r = a + b; break;
        case ExprBinaryOp::Sub: r = a - b; break;
        case ExprBinaryOp::Mul: r = a * b; break;
        case ExprBinaryOp::Div:
          if (b == 0.0) throw EvalError("division by zero", n.column);
          r = a / b;
          break;
        case ExprBinaryOp::Pow:
          if (a < 0.0 && b != std::floor(b))
            throw EvalError("non-integer power of a negative base", n.column);
          r = std::pow(a, b);
          break;
      }
      break;
    }
    case ExprNode::Kind::Call: {
      double a = eval_node(*n.a, t, x);
      switch (n.func) {
        case ExprFunc::Exp: r = std::exp(a); break;
        case ExprFunc::Log:
          if (a <= 0.0)
            throw EvalError("log of a non-positive argument", n.column);
          r = std::log(a);
          break;
        case ExprFunc::Sqrt:
          if (a < 0.0)
            throw EvalError("sqrt of a negative argument", n.column);
          r = std::sqrt(a);
          break;
        case ExprFunc::Abs: r = std::fabs(a); break;
        case ExprFunc::Sin: r = std::sin(a); break;
        case ExprFunc::Cos: r = std::cos(a); break;
        case ExprFunc::Atan: r = std::atan(a); break;
        case ExprFunc::Sinh: r = std::sinh(a); break;
        case ExprFunc::Cosh: r = std::cosh(a); break;
      }
      break;
    }
  }
  if (!std::isfinite(r))
    throw EvalError("evaluation produced a non-finite value", n.column);
  return r;
}

inline bool depends_on_x(const ExprNode& n) {
  switch (n.kind) {
    case ExprNode::Kind::Constant: return false;
    case ExprNode::Kind::Variable: return n.var == ExprVar::X;
    case ExprNode::Kind::Negate: return depends_on_x(*n.a);
    case ExprNode::Kind::Binary:
      return depends_on_x(*n.a) || depends_on_x(*n.b);
    case ExprNode::Kind::Call: return depends_on_x(*n.a);
  }
  return false;
}

inline NodePtr diff_node(const NodePtr& n) {
  if (!depends_on_x(*n)) return make_constant(0.0);
  switch (n->kind) {
    case ExprNode::Kind::Constant:
      return make_constant(0.0);  // unreachable after the x-dependence check
    case ExprNode::Kind::Variable:
      return make_constant(1.0);
    case ExprNode::Kind::Negate:
      return make_negate(diff_node(n->a));
    case ExprNode::Kind::Binary: {
      switch (n->op) {
        case ExprBinaryOp::Add:
          return s_add(diff_node(n->a), diff_node(n->b));
        case ExprBinaryOp::Sub:
          return s_sub(diff_node(n->a), diff_node(n->b));
        case ExprBinaryOp::Mul:
          return s_add(s_mul(diff_node(n->a), n->b),
                       s_mul(n->a, diff_node(n->b)));
        case ExprBinaryOp::Div:
          return s_div(s_sub(s_mul(diff_node(n->a), n->b),
                             s_mul(n->a, diff_node(n->b))),
                       s_mul(n->b, n->b));
        case ExprBinaryOp::Pow: {
          if (!depends_on_x(*n->b)) {
            // d/dx a^c = c * a^(c-1) * a'
            NodePtr power = make_binary(
                ExprBinaryOp::Pow, n->a,
                s_sub(n->b, make_constant(1.0)));
            return s_mul(s_mul(n->b, std::move(power)), diff_node(n->a));
          }
          // General case: d/dx a^b = a^b * (b' log a + b a' / a).
          NodePtr self = make_binary(ExprBinaryOp::Pow, n->a, n->b);
          NodePtr term1 =
              s_mul(diff_node(n->b), make_call(ExprFunc::Log, n->a));
          NodePtr term2 = s_div(s_mul(n->b, diff_node(n->a)), n->a);
          return s_mul(std::move(self),
                       s_add(std::move(term1), std::move(term2)));
        }
      }
      break;
    }
    case ExprNode::Kind::Call: {
      NodePtr inner = diff_node(n->a);
      switch (n->func) {
        case ExprFunc::Exp:
          return s_mul(make_call(ExprFunc::Exp, n->a), std::move(inner));
        case ExprFunc::Log:
          return s_div(std::move(inner), n->a);
        case ExprFunc::Sqrt:
          return s_div(std::move(inner),
                       s_mul(make_constant(2.0),
                             make_call(ExprFunc::Sqrt, n->a)));
        case ExprFunc::Abs:
          throw NonDifferentiableError(
              "abs is not differentiable; use a numerical derivative",
              n->column);
        case ExprFunc::Sin:
          return s_mul(make_call(ExprFunc::Cos, n->a), std::move(inner));
        case ExprFunc::Cos:
          return make_negate(
              s_mul(make_call(ExprFunc::Sin, n->a), std::move(inner)));
        case ExprFunc::Atan:
          return s_div(std::move(inner),
                       s_add(make_constant(1.0),
                             make_binary(ExprBinaryOp::Mul, n->a, n->a)));
        case ExprFunc::Sinh:
          return s_mul(make_call(ExprFunc::Cosh, n->a), std::move(inner));
        case ExprFunc::Cosh:
          return s_mul(make_call(ExprFunc::Sinh, n->a), std::move(inner));
      }
      break;
    }
  }
  return make_constant(0.0);  // unreachable
}

// Printing precedences; a child is parenthesized when its precedence is
// below what its position requires.
//   1: + -     2: * /     3: unary -     4: ^     5: atoms
inline int node_precedence(const ExprNode& n) {
  switch (n.kind) {
    case ExprNode::Kind::Constant:
      return n.value < 0.0 ? 3 : 5;  // negatives print as unary minus
    case ExprNode::Kind::Variable: return 5;
    case ExprNode::Kind::Negate: return 3;
    case ExprNode::Kind::Binary:
      switch (n.op) {
        case ExprBinaryOp::Add:
        case ExprBinaryOp::Sub: return 1;
        case ExprBinaryOp::Mul:
        case ExprBinaryOp::Div: return 2;
        case ExprBinaryOp::Pow: return 4;
      }
      return 5;
    case ExprNode::Kind::Call: return 5;
  }
  return 5;
}

inline void format_node(const ExprNode& n, std::string& out);

inline void format_child(const ExprNode& child, std::string& out,
                         int min_prec) {
  if (node_precedence(child) < min_prec) {
    out += '(';
    format_node(child, out);
    out += ')';
  } else {
    format_node(child, out);
  }
}

inline void format_node(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case ExprNode::Kind::Constant: {
      if (n.value < 0.0) {
        out += '-';
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", -n.value);
        out += buf;
      } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        out += buf;
      }
      break;
    }
    case ExprNode::Kind::Variable:
      out += (n.var == ExprVar::T) ? 't' : 'x';
      break;
    case ExprNode::Kind::Negate:
      out += '-';
      format_child(*n.a, out, 3);
      break;
    case ExprNode::Kind::Binary: {
      // Left-associative operators require strictly higher precedence on the
      // right; '^' is right-associative and requires an atom on the left.
      int left_min = 0, right_min = 0;
      const char* opstr = "";
      switch (n.op) {
        case ExprBinaryOp::Add: opstr = " + "; left_min = 1; right_min = 2; break;
        case ExprBinaryOp::Sub: opstr = " - "; left_min = 1; right_min = 2; break;
        case ExprBinaryOp::Mul: opstr = " * "; left_min = 2; right_min = 3; break;
        case ExprBinaryOp::Div: opstr = " / "; left_min = 2; right_min = 3; break;
        case ExprBinaryOp::Pow: opstr = "^";   left_min = 5; right_min = 3; break;
      }
      format_child(*n.a, out, left_min);
      out += opstr;
      format_child(*n.b, out, right_min);
      break;
    }
    case ExprNode::Kind::Call:
      out += func_name(n.func);
      out += '(';
      format_node(*n.a, out);
      out += ')';
      break;
  }
}

inline bool equal_nodes(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprNode::Kind::Constant:
      // Bit-compare so 0.0 vs -0.0 count as different spellings of a constant
      // only when they genuinely differ as values; here == suffices because
      // parsing never produces NaN.
      return a.value == b.value;
    case ExprNode::Kind::Variable: return a.var == b.var;
    case ExprNode::Kind::Negate: return equal_nodes(*a.a, *b.a);
    case ExprNode::Kind::Binary:
      return a.op == b.op && equal_nodes(*a.a, *b.a) && equal_nodes(*a.b, *b.b);
    case ExprNode::Kind::Call:
      return a.func == b.func && equal_nodes(*a.a, *b.a);
  }
  return false;
}

}  // namespace detail

// Immutable expression tree in the variables t and x.
class Expr {
 public:
  Expr() = default;

  // Throws ParseError (with 1-based column) on malformed input.
  static Expr parse(std::string_view text) {
    return Expr(detail::Parser(text).parse());
  }

  bool empty() const { return root_ == nullptr; }

  // Throws EvalError when the result (or any intermediate) is not a finite
  // real number.
  double eval(double t, double x) const {
    return detail::eval_node(*root_, t, x);
  }

  // Symbolic d/dx. Throws NonDifferentiableError when the tree contains abs
  // of an x-dependent subexpression.
  Expr diff_x() const { return Expr(detail::diff_node(root_)); }

  bool depends_on_x() const { return detail::depends_on_x(*root_); }

  // True when diff_x would succeed.
  bool differentiable_in_x() const {
    return !contains_x_dependent_abs(*root_);
  }

  // Canonical text form; parse(format()) reproduces the tree exactly.
  std::string format() const {
    std::string out;
    detail::format_node(*root_, out);
    return out;
  }

  bool equals(const Expr& other) const {
    if (!root_ || !other.root_) return root_ == other.root_;
    return detail::equal_nodes(*root_, *other.root_);
  }

  bool is_constant(double v) const {
    return root_ && detail::is_constant(root_, v);
  }

 private:
  explicit Expr(detail::NodePtr root) : root_(std::move(root)) {}

  static bool contains_x_dependent_abs(const detail::ExprNode& n) {
    using K = detail::ExprNode::Kind;
    if (n.kind == K::Call && n.func == ExprFunc::Abs &&
        detail::depends_on_x(*n.a))
      return true;
    if (n.a && contains_x_dependent_abs(*n.a)) return true;
    if (n.b && contains_x_dependent_abs(*n.b)) return true;
    return false;
  }

  detail::NodePtr root_;
};

}  // namespace nonspurious
