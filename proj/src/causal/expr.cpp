#include "groupblame/causal/expr.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "groupblame/error.hpp"

namespace groupblame::causal {

struct Expr::Node {
  Kind kind = Kind::Number;
  double number = 0.0;
  bool boolean = false;
  std::string name;
  UnaryOp unary = UnaryOp::Not;
  BinaryOp binary = BinaryOp::Add;
  std::vector<Expr> operands;
  SourceSpan span;
};

namespace {

const char* kind_name(const Value& v) {
  if (std::holds_alternative<bool>(v)) return "boolean";
  if (std::holds_alternative<double>(v)) return "number";
  return "symbol";
}

bool as_bool(const Value& v, std::string_view context) {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw EvaluationError(std::string(context) + " expects a boolean, got " + kind_name(v) + " `" +
                        value_to_string(v) + "`");
}

double as_number(const Value& v, std::string_view context) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw EvaluationError(std::string(context) + " expects a number, got " + kind_name(v) + " `" +
                        value_to_string(v) + "`");
}

// Binding strength used by the printer; mirrors the parser.
int precedence(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Conditional:
      return 0;
    case Expr::Kind::Binary:
      switch (e.binary_op()) {
        case BinaryOp::Or: return 1;
        case BinaryOp::And: return 2;
        case BinaryOp::Eq:
        case BinaryOp::Ne:
        case BinaryOp::Lt:
        case BinaryOp::Le:
        case BinaryOp::Gt:
        case BinaryOp::Ge: return 4;
        case BinaryOp::Add:
        case BinaryOp::Sub: return 5;
        case BinaryOp::Mul: return 6;
      }
      return 6;
    case Expr::Kind::Unary:
      return e.unary_op() == UnaryOp::Not ? 3 : 7;
    case Expr::Kind::Number:
      return e.number_value() < 0 ? 7 : 8;
    default:
      return 8;
  }
}

void print(const Expr& e, std::string& out);

void print_operand(const Expr& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    print(e, out);
    out += ')';
  } else {
    print(e, out);
  }
}

void print(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case Expr::Kind::Number:
      out += format_number(e.number_value());
      return;
    case Expr::Kind::Boolean:
      out += e.bool_value() ? "true" : "false";
      return;
    case Expr::Kind::Identifier:
      out += e.name();
      return;
    case Expr::Kind::Unary:
      if (e.unary_op() == UnaryOp::Not) {
        out += "not ";
        print_operand(e.operands()[0], 3, out);
      } else {
        out += '-';
        print_operand(e.operands()[0], 8, out);
      }
      return;
    case Expr::Kind::Binary: {
      int p = precedence(e);
      bool comparison = p == 4;
      print_operand(e.operands()[0], comparison ? p + 1 : p, out);
      out += ' ';
      out += op_symbol(e.binary_op());
      out += ' ';
      print_operand(e.operands()[1], p + 1, out);
      return;
    }
    case Expr::Kind::Conditional:
      out += "if ";
      print_operand(e.operands()[0], 1, out);
      out += " then ";
      print_operand(e.operands()[1], 1, out);
      out += " else ";
      print(e.operands()[2], out);
      return;
    case Expr::Kind::Count:
      out += "count(";
      for (std::size_t i = 0; i < e.operands().size(); ++i) {
        if (i) out += ", ";
        print(e.operands()[i], out);
      }
      out += ')';
      return;
  }
}

}  // namespace

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  if (v == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string value_to_string(const Value& v) {
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const auto* d = std::get_if<double>(&v)) return format_number(*d);
  return std::string(std::get<std::string_view>(v));
}

std::string_view op_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Eq: return "=";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "and";
    case BinaryOp::Or: return "or";
  }
  return "?";
}

Expr::Expr() : Expr(number(0.0)) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::number(double value, SourceSpan span) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Number;
  n->number = value;
  n->span = span;
  return Expr(std::move(n));
}

Expr Expr::boolean(bool value, SourceSpan span) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Boolean;
  n->boolean = value;
  n->span = span;
  return Expr(std::move(n));
}

Expr Expr::identifier(std::string name, SourceSpan span) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Identifier;
  n->name = std::move(name);
  n->span = span;
  return Expr(std::move(n));
}

Expr Expr::unary(UnaryOp op, Expr operand, SourceSpan span) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Unary;
  n->unary = op;
  n->operands.push_back(std::move(operand));
  n->span = span;
  return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs, SourceSpan span) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Binary;
  n->binary = op;
  n->operands.push_back(std::move(lhs));
  n->operands.push_back(std::move(rhs));
  n->span = span;
  return Expr(std::move(n));
}

Expr Expr::conditional(Expr cond, Expr then_branch, Expr else_branch, SourceSpan span) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Conditional;
  n->operands = {std::move(cond), std::move(then_branch), std::move(else_branch)};
  n->span = span;
  return Expr(std::move(n));
}

Expr Expr::count(std::vector<Expr> operands, SourceSpan span) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Count;
  n->operands = std::move(operands);
  n->span = span;
  return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::number_value() const { return node_->number; }
bool Expr::bool_value() const { return node_->boolean; }
const std::string& Expr::name() const { return node_->name; }
UnaryOp Expr::unary_op() const { return node_->unary; }
BinaryOp Expr::binary_op() const { return node_->binary; }
const std::vector<Expr>& Expr::operands() const { return node_->operands; }
const SourceSpan& Expr::span() const { return node_->span; }

Value Expr::evaluate(const Environment& env) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Number:
      return n.number;
    case Kind::Boolean:
      return n.boolean;
    case Kind::Identifier: {
      if (auto v = env.lookup(n.name)) return *v;
      return std::string_view(n.name);
    }
    case Kind::Unary: {
      Value v = n.operands[0].evaluate(env);
      if (n.unary == UnaryOp::Not) return !as_bool(v, "`not`");
      return -as_number(v, "unary `-`");
    }
    case Kind::Binary: {
      // and/or short-circuit
      if (n.binary == BinaryOp::And) {
        if (!as_bool(n.operands[0].evaluate(env), "`and`")) return false;
        return as_bool(n.operands[1].evaluate(env), "`and`");
      }
      if (n.binary == BinaryOp::Or) {
        if (as_bool(n.operands[0].evaluate(env), "`or`")) return true;
        return as_bool(n.operands[1].evaluate(env), "`or`");
      }
      Value a = n.operands[0].evaluate(env);
      Value b = n.operands[1].evaluate(env);
      switch (n.binary) {
        case BinaryOp::Eq:
        case BinaryOp::Ne: {
          if (a.index() != b.index()) {
            throw EvaluationError(std::string("cannot compare ") + kind_name(a) + " `" +
                                  value_to_string(a) + "` with " + kind_name(b) + " `" +
                                  value_to_string(b) + "`");
          }
          bool eq = a == b;
          return n.binary == BinaryOp::Eq ? eq : !eq;
        }
        case BinaryOp::Add: return as_number(a, "`+`") + as_number(b, "`+`");
        case BinaryOp::Sub: return as_number(a, "`-`") - as_number(b, "`-`");
        case BinaryOp::Mul: {
          double x = as_number(a, "`*`");
          double y = as_number(b, "`*`");
          // 0 * inf is taken as 0 so that `n * inf` stays 0 when n = 0.
          if (x == 0.0 || y == 0.0) return 0.0;
          return x * y;
        }
        case BinaryOp::Lt: return as_number(a, "`<`") < as_number(b, "`<`");
        case BinaryOp::Le: return as_number(a, "`<=`") <= as_number(b, "`<=`");
        case BinaryOp::Gt: return as_number(a, "`>`") > as_number(b, "`>`");
        case BinaryOp::Ge: return as_number(a, "`>=`") >= as_number(b, "`>=`");
        default: break;
      }
      throw EvaluationError("unhandled operator");
    }
    case Kind::Conditional:
      return as_bool(n.operands[0].evaluate(env), "`if`") ? n.operands[1].evaluate(env)
                                                          : n.operands[2].evaluate(env);
    case Kind::Count: {
      double total = 0;
      for (const Expr& e : n.operands) {
        if (as_bool(e.evaluate(env), "`count`")) total += 1;
      }
      return total;
    }
  }
  throw EvaluationError("unhandled expression kind");
}

double Expr::evaluate_number(const Environment& env) const {
  return as_number(evaluate(env), "numeric expression");
}

void Expr::collect_identifiers(std::set<std::string>& out) const {
  if (node_->kind == Kind::Identifier) out.insert(node_->name);
  for (const Expr& e : node_->operands) e.collect_identifiers(out);
}

std::set<std::string> Expr::identifiers() const {
  std::set<std::string> out;
  collect_identifiers(out);
  return out;
}

std::vector<double> Expr::number_leaves() const {
  std::vector<double> out;
  if (node_->kind == Kind::Number) out.push_back(node_->number);
  for (const Expr& e : node_->operands) {
    auto sub = e.number_leaves();
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

namespace {

Expr replace_leaf(const Expr& e, std::size_t& remaining, double value, bool& done) {
  if (done) return e;
  if (e.kind() == Expr::Kind::Number) {
    if (remaining == 0) {
      done = true;
      return Expr::number(value, e.span());
    }
    --remaining;
    return e;
  }
  if (e.operands().empty()) return e;
  std::vector<Expr> ops;
  bool changed = false;
  for (const Expr& op : e.operands()) {
    bool was_done = done;
    ops.push_back(replace_leaf(op, remaining, value, done));
    changed = changed || (!was_done && done);
  }
  if (!changed) return e;
  switch (e.kind()) {
    case Expr::Kind::Unary: return Expr::unary(e.unary_op(), ops[0], e.span());
    case Expr::Kind::Binary: return Expr::binary(e.binary_op(), ops[0], ops[1], e.span());
    case Expr::Kind::Conditional: return Expr::conditional(ops[0], ops[1], ops[2], e.span());
    case Expr::Kind::Count: return Expr::count(std::move(ops), e.span());
    default: return e;
  }
}

}  // namespace

Expr Expr::with_number_leaf(std::size_t index, double value) const {
  bool done = false;
  std::size_t remaining = index;
  Expr out = replace_leaf(*this, remaining, value, done);
  if (!done) {
    throw EvaluationError("expression `" + to_string() + "` has no numeric leaf #" +
                          std::to_string(index));
  }
  return out;
}

std::string Expr::to_string() const {
  std::string out;
  print(*this, out);
  return out;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case Expr::Kind::Number:
      return x.number == y.number || (std::isnan(x.number) && std::isnan(y.number));
    case Expr::Kind::Boolean: return x.boolean == y.boolean;
    case Expr::Kind::Identifier: return x.name == y.name;
    case Expr::Kind::Unary:
      if (x.unary != y.unary) return false;
      break;
    case Expr::Kind::Binary:
      if (x.binary != y.binary) return false;
      break;
    default: break;
  }
  return x.operands == y.operands;
}

}  // namespace groupblame::causal
