#pragma once

// Expression language for scalar fields in the variables x1..xn.
//
// Grammar (whitespace insignificant):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | 'x' digits | func '(' expr ')' | '(' expr ')'
//   func    := exp | log | sin | cos | sinh | cosh | tanh | sqrt | abs
//
// No implicit multiplication and no constant folding: the tree keeps
// exactly what was written.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace confcurv {

enum class Func : std::uint8_t { Exp, Log, Sin, Cos, Sinh, Cosh, Tanh, Sqrt, Abs };
enum class BinOp : std::uint8_t { Add, Sub, Mul, Div, Pow };

std::string_view func_name(Func f);
char binop_symbol(BinOp op);

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Kind : std::uint8_t { Constant, Variable, Negate, Binary, Call };

  Kind kind = Kind::Constant;
  double value = 0.0;  // Constant
  int var = 0;         // Variable, 0-based
  BinOp op = BinOp::Add;
  Func fn = Func::Exp;
  ExprNodePtr lhs;  // Negate / Call operand, Binary left
  ExprNodePtr rhs;  // Binary right
};

/// Immutable expression tree over `dim` variables. Cheap to copy (shared
/// nodes) and safe to share between threads.
class ScalarExpr {
 public:
  static ScalarExpr parse(std::string_view text, int dim);

  static ScalarExpr constant(double v, int dim);
  /// 0-based variable index.
  static ScalarExpr variable(int index, int dim);

  int dim() const noexcept { return dim_; }
  const ExprNode& root() const noexcept { return *root_; }
  const ExprNodePtr& root_ptr() const noexcept { return root_; }

  /// IEEE double evaluation; throws DomainError (see errors.hpp).
  double eval(std::span<const double> p) const;

  /// Fully parenthesized text that re-parses to a structurally equal tree.
  std::string to_canonical_text() const;

  /// Bitwise-equal constants, same shape, same dim.
  bool structurally_equal(const ScalarExpr& other) const;

  /// Flags per variable (size dim): true when xi occurs in the tree.
  std::vector<bool> free_variables() const;
  bool is_constant() const;

  friend ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b);
  friend ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b);
  friend ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b);
  friend ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b);
  friend ScalarExpr operator-(const ScalarExpr& a);
  friend ScalarExpr pow(const ScalarExpr& base, const ScalarExpr& exponent);
  friend ScalarExpr apply(Func f, const ScalarExpr& arg);

 private:
  ScalarExpr(ExprNodePtr root, int dim) : root_(std::move(root)), dim_(dim) {}

  ExprNodePtr root_;
  int dim_ = 0;
};

}  // namespace confcurv
