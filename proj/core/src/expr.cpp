#include "confcurv/expr.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "confcurv/errors.hpp"

namespace confcurv {

namespace {

constexpr Func kAllFuncs[] = {Func::Exp,  Func::Log,  Func::Sin,  Func::Cos, Func::Sinh,
                              Func::Cosh, Func::Tanh, Func::Sqrt, Func::Abs};

ExprNodePtr make_constant(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Constant;
  n->value = v;
  return n;
}

ExprNodePtr make_variable(int index) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Variable;
  n->var = index;
  return n;
}

ExprNodePtr make_negate(ExprNodePtr operand) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Negate;
  n->lhs = std::move(operand);
  return n;
}

ExprNodePtr make_binary(BinOp op, ExprNodePtr lhs, ExprNodePtr rhs) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Binary;
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

ExprNodePtr make_call(Func f, ExprNodePtr arg) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Call;
  n->fn = f;
  n->lhs = std::move(arg);
  return n;
}

class Parser {
 public:
  Parser(std::string_view text, int dim) : text_(text), dim_(dim) {}

  ExprNodePtr parse_all() {
    auto e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError(pos_, "operator or end of input");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExprNodePtr parse_expr() {
    auto lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = make_binary(BinOp::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = make_binary(BinOp::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  ExprNodePtr parse_term() {
    auto lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_binary(BinOp::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = make_binary(BinOp::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  ExprNodePtr parse_unary() {
    if (accept('-')) return make_negate(parse_unary());
    return parse_power();
  }

  ExprNodePtr parse_power() {
    auto base = parse_primary();
    if (accept('^')) return make_binary(BinOp::Pow, base, parse_unary());
    return base;
  }

  ExprNodePtr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError(pos_, "operand");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = parse_expr();
      if (!accept(')')) throw ParseError(pos_, "')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ParseError(pos_, "operand");
  }

  ExprNodePtr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError(start, "digits");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw ParseError(pos_, "exponent digits");
    }
    double v = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
      throw ParseError(start, "finite numeric literal");
    }
    return make_constant(v);
  }

  ExprNodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);

    if (name.size() > 1 && name[0] == 'x' &&
        name.find_first_not_of("0123456789", 1) == std::string_view::npos) {
      int index = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (ec != std::errc() || index < 1 || index > dim_) {
        throw ParseError(start, "variable x1..x" + std::to_string(dim_));
      }
      return make_variable(index - 1);
    }

    for (Func f : kAllFuncs) {
      if (name == func_name(f)) {
        if (!accept('(')) throw ParseError(pos_, "'(' after function name");
        auto arg = parse_expr();
        if (!accept(')')) throw ParseError(pos_, "')'");
        return make_call(f, std::move(arg));
      }
    }
    throw ParseError(start, "function name or variable x1..x" + std::to_string(dim_));
  }

  std::string_view text_;
  int dim_;
  std::size_t pos_ = 0;
};

bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v; }

double eval_node(const ExprNode& n, std::span<const double> p) {
  using K = ExprNode::Kind;
  switch (n.kind) {
    case K::Constant:
      return n.value;
    case K::Variable:
      return p[static_cast<std::size_t>(n.var)];
    case K::Negate:
      return -eval_node(*n.lhs, p);
    case K::Binary: {
      const double a = eval_node(*n.lhs, p);
      const double b = eval_node(*n.rhs, p);
      switch (n.op) {
        case BinOp::Add:
          return a + b;
        case BinOp::Sub:
          return a - b;
        case BinOp::Mul:
          return a * b;
        case BinOp::Div:
          if (b == 0.0) throw DomainError("division by zero");
          return a / b;
        case BinOp::Pow:
          if (a < 0.0 && !is_integer(b)) throw DomainError("non-integer power of a negative base");
          if (a == 0.0 && b < 0.0) throw DomainError("division by zero in negative power");
          return std::pow(a, b);
      }
      break;
    }
    case K::Call: {
      const double a = eval_node(*n.lhs, p);
      switch (n.fn) {
        case Func::Exp:
          return std::exp(a);
        case Func::Log:
          if (a < 0.0) throw DomainError("log of a negative number");
          return std::log(a);
        case Func::Sin:
          return std::sin(a);
        case Func::Cos:
          return std::cos(a);
        case Func::Sinh:
          return std::sinh(a);
        case Func::Cosh:
          return std::cosh(a);
        case Func::Tanh:
          return std::tanh(a);
        case Func::Sqrt:
          if (a < 0.0) throw DomainError("sqrt of a negative number");
          return std::sqrt(a);
        case Func::Abs:
          return std::abs(a);
      }
      break;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

void format_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

void write_node(std::string& out, const ExprNode& n) {
  using K = ExprNode::Kind;
  switch (n.kind) {
    case K::Constant:
      format_number(out, n.value);
      return;
    case K::Variable:
      out += 'x';
      out += std::to_string(n.var + 1);
      return;
    case K::Negate:
      out += "(-";
      write_node(out, *n.lhs);
      out += ')';
      return;
    case K::Binary:
      out += '(';
      write_node(out, *n.lhs);
      out += ' ';
      out += binop_symbol(n.op);
      out += ' ';
      write_node(out, *n.rhs);
      out += ')';
      return;
    case K::Call:
      out += func_name(n.fn);
      out += '(';
      write_node(out, *n.lhs);
      out += ')';
      return;
  }
}

bool nodes_equal(const ExprNode& a, const ExprNode& b) {
  if (&a == &b) return true;
  if (a.kind != b.kind) return false;
  using K = ExprNode::Kind;
  switch (a.kind) {
    case K::Constant:
      return std::bit_cast<std::uint64_t>(a.value) == std::bit_cast<std::uint64_t>(b.value);
    case K::Variable:
      return a.var == b.var;
    case K::Negate:
      return nodes_equal(*a.lhs, *b.lhs);
    case K::Binary:
      return a.op == b.op && nodes_equal(*a.lhs, *b.lhs) && nodes_equal(*a.rhs, *b.rhs);
    case K::Call:
      return a.fn == b.fn && nodes_equal(*a.lhs, *b.lhs);
  }
  return false;
}

void collect_vars(const ExprNode& n, std::vector<bool>& seen) {
  switch (n.kind) {
    case ExprNode::Kind::Constant:
      return;
    case ExprNode::Kind::Variable:
      seen[static_cast<std::size_t>(n.var)] = true;
      return;
    case ExprNode::Kind::Binary:
      collect_vars(*n.rhs, seen);
      [[fallthrough]];
    default:
      collect_vars(*n.lhs, seen);
  }
}

void require_same_dim(const ScalarExpr& a, const ScalarExpr& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("expressions over different variable counts");
}

}  // namespace

std::string_view func_name(Func f) {
  switch (f) {
    case Func::Exp:
      return "exp";
    case Func::Log:
      return "log";
    case Func::Sin:
      return "sin";
    case Func::Cos:
      return "cos";
    case Func::Sinh:
      return "sinh";
    case Func::Cosh:
      return "cosh";
    case Func::Tanh:
      return "tanh";
    case Func::Sqrt:
      return "sqrt";
    case Func::Abs:
      return "abs";
  }
  return "?";
}

char binop_symbol(BinOp op) {
  switch (op) {
    case BinOp::Add:
      return '+';
    case BinOp::Sub:
      return '-';
    case BinOp::Mul:
      return '*';
    case BinOp::Div:
      return '/';
    case BinOp::Pow:
      return '^';
  }
  return '?';
}

ScalarExpr ScalarExpr::parse(std::string_view text, int dim) {
  if (dim < 1) throw DimensionMismatch("expression dimension must be positive");
  return ScalarExpr(Parser(text, dim).parse_all(), dim);
}

ScalarExpr ScalarExpr::constant(double v, int dim) {
  if (!std::isfinite(v)) throw DomainError("non-finite constant");
  // Negative constants are stored the way the parser would produce them.
  if (std::signbit(v)) return ScalarExpr(make_negate(make_constant(-v)), dim);
  return ScalarExpr(make_constant(v), dim);
}

ScalarExpr ScalarExpr::variable(int index, int dim) {
  if (index < 0 || index >= dim) throw DimensionMismatch("variable index out of range");
  return ScalarExpr(make_variable(index), dim);
}

double ScalarExpr::eval(std::span<const double> p) const {
  if (p.size() != static_cast<std::size_t>(dim_)) {
    throw DimensionMismatch("point has " + std::to_string(p.size()) + " coordinates, expected " +
                            std::to_string(dim_));
  }
  return eval_node(*root_, p);
}

std::string ScalarExpr::to_canonical_text() const {
  std::string out;
  write_node(out, *root_);
  return out;
}

bool ScalarExpr::structurally_equal(const ScalarExpr& other) const {
  return dim_ == other.dim_ && nodes_equal(*root_, *other.root_);
}

std::vector<bool> ScalarExpr::free_variables() const {
  std::vector<bool> seen(static_cast<std::size_t>(dim_), false);
  collect_vars(*root_, seen);
  return seen;
}

bool ScalarExpr::is_constant() const {
  for (bool b : free_variables()) {
    if (b) return false;
  }
  return true;
}

ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) {
  require_same_dim(a, b);
  return ScalarExpr(make_binary(BinOp::Add, a.root_, b.root_), a.dim_);
}

ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) {
  require_same_dim(a, b);
  return ScalarExpr(make_binary(BinOp::Sub, a.root_, b.root_), a.dim_);
}

ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) {
  require_same_dim(a, b);
  return ScalarExpr(make_binary(BinOp::Mul, a.root_, b.root_), a.dim_);
}

ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b) {
  require_same_dim(a, b);
  return ScalarExpr(make_binary(BinOp::Div, a.root_, b.root_), a.dim_);
}

ScalarExpr operator-(const ScalarExpr& a) { return ScalarExpr(make_negate(a.root_), a.dim_); }

ScalarExpr pow(const ScalarExpr& base, const ScalarExpr& exponent) {
  require_same_dim(base, exponent);
  return ScalarExpr(make_binary(BinOp::Pow, base.root_, exponent.root_), base.dim_);
}

ScalarExpr apply(Func f, const ScalarExpr& arg) { return ScalarExpr(make_call(f, arg.root_), arg.dim_); }

}  // namespace confcurv
