#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "groupblame/source_span.hpp"

namespace groupblame::causal {

// Runtime value of an expression. Symbols are range values such as `yes`;
// the view points into storage owned by the expression or the model.
using Value = std::variant<bool, double, std::string_view>;

std::string value_to_string(const Value& v);

enum class UnaryOp { Not, Negate };

enum class BinaryOp { Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

std::string_view op_symbol(BinaryOp op);

// Name lookup used during evaluation. Returning nullopt makes the
// identifier evaluate to a symbol carrying its own name.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::optional<Value> lookup(std::string_view name) const = 0;
};

// Environment with no bindings: every identifier is a symbol.
class EmptyEnvironment final : public Environment {
 public:
  std::optional<Value> lookup(std::string_view) const override { return std::nullopt; }
};

// Immutable expression tree shared by structural equations, option costs
// and effect magnitudes. Copies share nodes.
class Expr {
 public:
  enum class Kind { Number, Boolean, Identifier, Unary, Binary, Conditional, Count };

  Expr();  // the number 0

  static Expr number(double value, SourceSpan span = {});
  static Expr boolean(bool value, SourceSpan span = {});
  static Expr identifier(std::string name, SourceSpan span = {});
  static Expr unary(UnaryOp op, Expr operand, SourceSpan span = {});
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs, SourceSpan span = {});
  static Expr conditional(Expr cond, Expr then_branch, Expr else_branch, SourceSpan span = {});
  static Expr count(std::vector<Expr> operands, SourceSpan span = {});

  Kind kind() const;
  double number_value() const;
  bool bool_value() const;
  const std::string& name() const;
  UnaryOp unary_op() const;
  BinaryOp binary_op() const;
  const std::vector<Expr>& operands() const;
  const SourceSpan& span() const;

  // Throws EvaluationError on type mismatches.
  Value evaluate(const Environment& env) const;
  double evaluate_number(const Environment& env) const;

  void collect_identifiers(std::set<std::string>& out) const;
  std::set<std::string> identifiers() const;

  // Numeric literals in pre-order; used to address sweepable leaves.
  std::vector<double> number_leaves() const;
  Expr with_number_leaf(std::size_t index, double value) const;

  // Canonical text, parseable by the scenario language.
  std::string to_string() const;

  // Structural equality; spans are ignored.
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

// Shortest round-trip decimal text; `inf` for +infinity.
std::string format_number(double v);

}  // namespace groupblame::causal
