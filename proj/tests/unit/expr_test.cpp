#include "groupblame/causal/expr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "groupblame/error.hpp"

namespace groupblame::causal {
namespace {

class MapEnvironment : public Environment {
 public:
  explicit MapEnvironment(std::map<std::string, std::string> values) : values_(std::move(values)) {}
  std::optional<Value> lookup(std::string_view name) const override {
    auto it = values_.find(std::string(name));
    if (it == values_.end()) return std::nullopt;
    return std::string_view(it->second);
  }

 private:
  std::map<std::string, std::string> values_;
};

class NumberEnvironment : public Environment {
 public:
  explicit NumberEnvironment(double n) : n_(n) {}
  std::optional<Value> lookup(std::string_view name) const override {
    if (name == "n") return n_;
    return std::nullopt;
  }

 private:
  double n_;
};

Expr eq(const char* var, const char* value) {
  return Expr::binary(BinaryOp::Eq, Expr::identifier(var), Expr::identifier(value));
}

TEST(ExprTest, CountsTrueOperands) {
  MapEnvironment env({{"A", "yes"}, {"B", "no"}, {"C", "yes"}});
  Expr e = Expr::count({eq("A", "yes"), eq("B", "yes"), eq("C", "yes")});
  EXPECT_EQ(std::get<double>(e.evaluate(env)), 2.0);
}

TEST(ExprTest, UnboundIdentifierIsSymbol) {
  EmptyEnvironment env;
  Value v = Expr::identifier("yes").evaluate(env);
  EXPECT_EQ(std::get<std::string_view>(v), "yes");
}

TEST(ExprTest, ArithmeticOverParameter) {
  NumberEnvironment env(7);
  Expr cost = Expr::binary(BinaryOp::Add,
                           Expr::binary(BinaryOp::Mul, Expr::identifier("n"), Expr::number(100)),
                           Expr::number(2000));
  EXPECT_DOUBLE_EQ(cost.evaluate_number(env), 2700);
}

TEST(ExprTest, ZeroTimesInfinityIsZero) {
  NumberEnvironment env(0);
  Expr cost = Expr::binary(BinaryOp::Mul, Expr::identifier("n"),
                           Expr::number(std::numeric_limits<double>::infinity()));
  EXPECT_EQ(cost.evaluate_number(env), 0.0);
}

TEST(ExprTest, TypeMismatchThrows) {
  MapEnvironment env(std::map<std::string, std::string>{{"A", "yes"}});
  Expr bad = Expr::binary(BinaryOp::Add, Expr::identifier("A"), Expr::number(1));
  EXPECT_THROW(bad.evaluate(env), EvaluationError);
  Expr cmp = Expr::binary(BinaryOp::Eq, Expr::identifier("A"), Expr::number(1));
  EXPECT_THROW(cmp.evaluate(env), EvaluationError);
}

TEST(ExprTest, ConditionalPicksBranch) {
  MapEnvironment env(std::map<std::string, std::string>{{"A", "yes"}});
  Expr e = Expr::conditional(eq("A", "yes"), Expr::identifier("on"), Expr::identifier("off"));
  EXPECT_EQ(std::get<std::string_view>(e.evaluate(env)), "on");
}

TEST(ExprTest, PrintsWithMinimalParentheses) {
  Expr e = Expr::binary(BinaryOp::Mul,
                        Expr::binary(BinaryOp::Add, Expr::identifier("n"), Expr::number(1)),
                        Expr::number(0.05));
  EXPECT_EQ(e.to_string(), "(n + 1) * 0.05");
  Expr sub = Expr::binary(BinaryOp::Sub, Expr::identifier("a"),
                          Expr::binary(BinaryOp::Sub, Expr::identifier("b"), Expr::identifier("c")));
  EXPECT_EQ(sub.to_string(), "a - (b - c)");
  Expr neg = Expr::unary(UnaryOp::Not, eq("A", "yes"));
  EXPECT_EQ(neg.to_string(), "not A = yes");
}

TEST(ExprTest, NumberLeavesCanBeReplaced) {
  Expr cost = Expr::binary(BinaryOp::Add,
                           Expr::binary(BinaryOp::Mul, Expr::identifier("n"), Expr::number(100)),
                           Expr::number(2000));
  EXPECT_EQ(cost.number_leaves(), (std::vector<double>{100, 2000}));
  Expr changed = cost.with_number_leaf(0, 150);
  EXPECT_EQ(changed.to_string(), "n * 150 + 2000");
  EXPECT_EQ(cost.to_string(), "n * 100 + 2000");
  EXPECT_THROW(cost.with_number_leaf(2, 1), EvaluationError);
}

TEST(ExprTest, EqualityIgnoresSpans) {
  Expr a = Expr::number(3, SourceSpan{1, 1, 0, 1});
  Expr b = Expr::number(3);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a == Expr::number(4));
}

TEST(ExprTest, FormatNumberRoundTrips) {
  EXPECT_EQ(format_number(0.05), "0.05");
  EXPECT_EQ(format_number(5000), "5000");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_number(0.1 + 0.2), "0.30000000000000004");
}

}  // namespace
}  // namespace groupblame::causal
