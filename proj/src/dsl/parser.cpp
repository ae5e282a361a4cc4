#include "groupblame/dsl/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "groupblame/dsl/lexer.hpp"
#include "groupblame/error.hpp"

namespace groupblame::dsl {

namespace {

using causal::BinaryOp;
using causal::Expr;
using causal::OutcomeFormula;

const std::set<std::string_view> kSectionWords{"scenario", "agents",  "param",  "exogenous", "endogenous",
                                               "action",   "outcome", "option", "state"};
const std::set<std::string_view> kOtherWords{"context", "requires", "uncounted", "cost", "shift", "set",
                                             "if",      "then",     "else",      "count", "not", "and",
                                             "or",      "true",     "false",     "inf",   "bernoulli", "in"};

// Stop collecting once input is hopeless; keeps fuzzed garbage cheap.
constexpr std::size_t kMaxDiagnostics = 100;

struct Name {
  std::string text;
  SourceSpan span;
};

struct Distribution {
  bool bernoulli = false;
  std::vector<std::pair<Name, double>> entries;
  std::vector<SourceSpan> number_spans;
  SourceSpan span;
};

struct VariableDecl {
  Name name;
  std::vector<Name> range;
  bool exogenous = false;
  std::optional<Distribution> distribution;
  std::optional<Expr> equation;
};

struct ActionDecl {
  Name variable;
  Name agent;
};

struct ContextDecl {
  double weight = 0;
  SourceSpan weight_span;
  std::vector<std::pair<Name, Name>> assignments;
  SourceSpan span;
};

struct ShiftDecl {
  Name variable;
  Name value;
  Expr delta;
};
struct SetDistDecl {
  Name variable;
  std::vector<std::pair<Name, Expr>> distribution;
};
struct SetActionDecl {
  Name variable;
  Name value;
};
using EffectDecl = std::variant<ShiftDecl, SetDistDecl, SetActionDecl>;

struct OptionDecl {
  Name name;
  std::optional<Name> symbol;
  double lo = 0;
  double hi = 0;
  SourceSpan range_span;
  std::vector<Name> required;
  std::vector<Name> uncounted;
  std::optional<Expr> cost;
  std::vector<EffectDecl> effects;
};

// Thrown after a syntax error has been reported; caught at section level.
struct SyntaxError {};

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<Diagnostic>& diags)
      : toks_(std::move(tokens)), diags_(diags) {}

  // Scenario file.
  void parse_file();
  ParseResult assemble();

  // Standalone pieces.
  Expr expression() { return parse_expr(); }
  OutcomeFormula formula() { return parse_formula(); }
  bool at_end() const { return peek().kind == TokenKind::End; }
  const Token& peek() const { return toks_[pos_]; }

  void error(std::string code, std::string message, SourceSpan span) {
    if (diags_.size() < kMaxDiagnostics) {
      diags_.push_back({Severity::Error, std::move(code), std::move(message), span});
    }
  }

  [[noreturn]] void fail_expected(std::string_view what) {
    const Token& t = peek();
    std::string found = t.kind == TokenKind::Identifier ? "`" + t.text + "`"
                        : t.kind == TokenKind::Number   ? "number `" + t.text + "`"
                                                        : std::string(token_name(t.kind));
    error("expected_token", "expected " + std::string(what) + ", found " + found, t.span);
    throw SyntaxError{};
  }

 private:
  bool at(TokenKind kind) const { return peek().kind == kind; }
  bool at_word(std::string_view word) const {
    return peek().kind == TokenKind::Identifier && peek().text == word;
  }
  const Token& advance() {
    const Token& t = toks_[pos_];
    if (t.kind != TokenKind::End) ++pos_;
    return t;
  }
  const Token& expect(TokenKind kind, std::string_view what) {
    if (!at(kind)) fail_expected(what);
    return advance();
  }
  void expect_word(std::string_view word) {
    if (!at_word(word)) fail_expected("`" + std::string(word) + "`");
    advance();
  }
  bool accept(TokenKind kind) {
    if (!at(kind)) return false;
    advance();
    return true;
  }
  SourceSpan previous_span() const { return toks_[pos_ == 0 ? 0 : pos_ - 1].span; }

  Name name(std::string_view what) {
    if (!at(TokenKind::Identifier)) fail_expected(what);
    const Token& t = advance();
    if (is_reserved(t.text)) {
      error("reserved_word", "`" + t.text + "` is a reserved word and cannot be used as " +
                                 std::string(what),
            t.span);
    }
    return Name{t.text, t.span};
  }
  std::vector<Name> name_list(std::string_view what) {
    std::vector<Name> out{name(what)};
    while (accept(TokenKind::Comma)) out.push_back(name(what));
    return out;
  }
  double signed_number(SourceSpan& span) {
    bool negative = at(TokenKind::Minus);
    SourceSpan start = peek().span;
    if (negative) advance();
    double v;
    if (at_word("inf")) {
      v = INFINITY;
      advance();
    } else {
      v = expect(TokenKind::Number, "a number").number;
    }
    span = SourceSpan::cover(start, previous_span());
    return negative ? -v : v;
  }

  void sync();
  void section();
  void parse_param();
  void parse_variable(bool exogenous);
  std::vector<Name> parse_range();
  Distribution parse_distribution();
  void parse_state();
  void parse_option();

  Expr parse_expr();
  Expr parse_or();
  Expr parse_and();
  Expr parse_not();
  Expr parse_comparison();
  Expr parse_additive();
  Expr parse_multiplicative();
  Expr parse_unary();
  Expr parse_primary();

  OutcomeFormula parse_formula();
  OutcomeFormula parse_formula_and();
  OutcomeFormula parse_formula_not();
  OutcomeFormula parse_formula_atom();

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > kMaxNesting) {
        p.error("nesting_too_deep", "expression nesting exceeds " + std::to_string(kMaxNesting) + " levels",
                p.peek().span);
        throw SyntaxError{};
      }
    }
    ~DepthGuard() { --p.depth_; }
  };

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t depth_ = 0;
  std::vector<Diagnostic>& diags_;

  // Collected declarations.
  std::optional<Name> header_;
  std::vector<Name> agents_;
  std::map<std::string, std::pair<Expr, SourceSpan>> params_;
  std::optional<Name> focal_;
  std::vector<VariableDecl> variables_;
  std::vector<ActionDecl> actions_;
  std::optional<std::pair<OutcomeFormula, SourceSpan>> outcome_;
  std::optional<std::vector<ContextDecl>> contexts_;
  SourceSpan state_span_;
  std::vector<OptionDecl> options_;
};

// Skips to the next token that can start a section.
void Parser::sync() {
  while (!at_end()) {
    if (peek().kind == TokenKind::Identifier && kSectionWords.contains(peek().text)) return;
    advance();
  }
}

void Parser::parse_file() {
  while (!at_end()) {
    if (diags_.size() >= kMaxDiagnostics) return;
    try {
      section();
    } catch (const SyntaxError&) {
      // The offending token is skipped even when it starts a section, so a
      // bad section keyword cannot loop.
      if (!at_end() && !(peek().kind == TokenKind::Identifier && kSectionWords.contains(peek().text))) {
        advance();
      }
      sync();
    }
  }
}

void Parser::section() {
  if (accept(TokenKind::Semicolon)) return;
  if (!at(TokenKind::Identifier) || !kSectionWords.contains(peek().text)) {
    const Token& t = peek();
    error("unexpected_token", "expected a section keyword, found " +
                                  (t.kind == TokenKind::Identifier ? "`" + t.text + "`"
                                                                   : std::string(token_name(t.kind))),
          t.span);
    advance();
    sync();
    return;
  }
  const Token kw = advance();
  const std::string& w = kw.text;
  if (w == "scenario") {
    Name n = name("a scenario name");
    if (header_) {
      error("duplicate_header", "the scenario name is already given", kw.span);
    } else {
      header_ = n;
    }
  } else if (w == "agents") {
    for (auto& n : name_list("an agent name")) {
      bool dup = std::any_of(agents_.begin(), agents_.end(), [&](const Name& a) { return a.text == n.text; });
      if (dup) {
        error("duplicate_agent", "agent `" + n.text + "` is already declared", n.span);
      } else {
        agents_.push_back(n);
      }
    }
  } else if (w == "param") {
    parse_param();
  } else if (w == "exogenous" || w == "endogenous") {
    parse_variable(w == "exogenous");
  } else if (w == "action") {
    Name var = name("an action variable");
    expect(TokenKind::Arrow, "`->`");
    Name agent = name("an agent name");
    actions_.push_back({var, agent});
  } else if (w == "outcome") {
    SourceSpan start = peek().span;
    auto f = parse_formula();
    SourceSpan span = SourceSpan::cover(start, previous_span());
    if (outcome_) {
      error("duplicate_outcome", "the outcome is already given", span);
    } else {
      outcome_ = {f, span};
    }
  } else if (w == "state") {
    parse_state();
  } else if (w == "option") {
    parse_option();
  }
  accept(TokenKind::Semicolon);
}

void Parser::parse_param() {
  Name key = name("a parameter name");
  expect(TokenKind::Assign, "`=`");
  if (key.text == "focal") {
    Name value = name("an agent name or `society`");
    if (focal_) {
      error("duplicate_param", "parameter `focal` is already set", key.span);
    } else {
      focal_ = value;
    }
    return;
  }
  if (key.text != "N" && key.text != "baseline_cost") {
    error("unknown_param", "unknown parameter `" + key.text + "`; expected N, baseline_cost or focal",
          key.span);
    throw SyntaxError{};
  }
  SourceSpan start = peek().span;
  Expr value = parse_expr();
  SourceSpan span = SourceSpan::cover(start, previous_span());
  if (params_.contains(key.text)) {
    error("duplicate_param", "parameter `" + key.text + "` is already set", key.span);
    return;
  }
  params_.emplace(key.text, std::pair{value, span});
}

std::vector<Name> Parser::parse_range() {
  expect(TokenKind::LBrace, "`{`");
  std::vector<Name> values;
  if (!at(TokenKind::RBrace)) {
    do {
      Name v = name("a value");
      bool dup = std::any_of(values.begin(), values.end(), [&](const Name& x) { return x.text == v.text; });
      if (dup) {
        error("duplicate_value", "value `" + v.text + "` is listed twice", v.span);
      } else {
        values.push_back(v);
      }
    } while (accept(TokenKind::Comma));
  }
  expect(TokenKind::RBrace, "`}`");
  return values;
}

Distribution Parser::parse_distribution() {
  Distribution d;
  SourceSpan start = peek().span;
  auto entry = [&] {
    Name v = name("a value");
    expect(TokenKind::Colon, "`:`");
    SourceSpan ns;
    double p = signed_number(ns);
    d.entries.push_back({v, p});
    d.number_spans.push_back(ns);
  };
  if (at_word("bernoulli")) {
    advance();
    d.bernoulli = true;
    expect(TokenKind::LParen, "`(`");
    entry();
    expect(TokenKind::RParen, "`)`");
  } else {
    expect(TokenKind::LBrace, "`bernoulli(...)` or `{`");
    do {
      entry();
    } while (accept(TokenKind::Comma));
    expect(TokenKind::RBrace, "`}`");
  }
  d.span = SourceSpan::cover(start, previous_span());
  return d;
}

void Parser::parse_variable(bool exogenous) {
  VariableDecl decl;
  decl.exogenous = exogenous;
  decl.name = name("a variable name");
  expect(TokenKind::Colon, "`:`");
  decl.range = parse_range();
  if (exogenous) {
    if (accept(TokenKind::Tilde)) decl.distribution = parse_distribution();
  } else {
    expect(TokenKind::Assign, "`=`");
    decl.equation = parse_expr();
  }
  variables_.push_back(std::move(decl));
}

void Parser::parse_state() {
  SourceSpan start = previous_span();
  expect(TokenKind::LBrace, "`{`");
  std::vector<ContextDecl> contexts;
  while (at_word("context")) {
    ContextDecl c;
    SourceSpan cstart = advance().span;
    c.weight = signed_number(c.weight_span);
    expect(TokenKind::LBrace, "`{`");
    if (!at(TokenKind::RBrace)) {
      do {
        Name var = name("an exogenous variable");
        expect(TokenKind::Assign, "`=`");
        Name value = name("a value");
        c.assignments.push_back({var, value});
      } while (accept(TokenKind::Comma));
    }
    expect(TokenKind::RBrace, "`}`");
    c.span = SourceSpan::cover(cstart, previous_span());
    contexts.push_back(std::move(c));
    accept(TokenKind::Semicolon);
  }
  expect(TokenKind::RBrace, "`context` or `}`");
  SourceSpan span = SourceSpan::cover(start, previous_span());
  if (contexts_) {
    error("duplicate_state", "the explicit state is already given", span);
    return;
  }
  contexts_ = std::move(contexts);
  state_span_ = span;
}

void Parser::parse_option() {
  OptionDecl o;
  o.name = name("an option name");
  if (accept(TokenKind::LParen)) {
    SourceSpan start = previous_span();
    o.symbol = name("a size parameter");
    expect_word("in");
    SourceSpan ls, hs;
    o.lo = signed_number(ls);
    expect(TokenKind::DotDot, "`..`");
    o.hi = signed_number(hs);
    expect(TokenKind::RParen, "`)`");
    o.range_span = SourceSpan::cover(start, previous_span());
  }
  expect(TokenKind::LBrace, "`{`");
  while (!at(TokenKind::RBrace)) {
    if (accept(TokenKind::Semicolon)) continue;
    if (at_word("requires") || at_word("uncounted")) {
      bool req = advance().text == "requires";
      auto names = name_list("an agent name");
      auto& into = req ? o.required : o.uncounted;
      into.insert(into.end(), names.begin(), names.end());
    } else if (at_word("cost")) {
      SourceSpan kw = advance().span;
      expect(TokenKind::Assign, "`=`");
      Expr c = parse_expr();
      if (o.cost) {
        error("duplicate_cost", "option `" + o.name.text + "` already has a cost", kw);
      } else {
        o.cost = c;
      }
    } else if (at_word("shift")) {
      advance();
      ShiftDecl s;
      s.variable = name("an exogenous variable");
      expect(TokenKind::Dot, "`.`");
      s.value = name("a value");
      expect(TokenKind::PlusAssign, "`+=`");
      s.delta = parse_expr();
      o.effects.push_back(std::move(s));
    } else if (at_word("set")) {
      advance();
      Name var = name("a variable");
      if (accept(TokenKind::Tilde)) {
        SetDistDecl s{var, {}};
        expect(TokenKind::LBrace, "`{`");
        do {
          Name v = name("a value");
          expect(TokenKind::Colon, "`:`");
          s.distribution.push_back({v, parse_expr()});
        } while (accept(TokenKind::Comma));
        expect(TokenKind::RBrace, "`}`");
        o.effects.push_back(std::move(s));
      } else {
        expect(TokenKind::Assign, "`=` or `~`");
        o.effects.push_back(SetActionDecl{var, name("a value")});
      }
    } else {
      fail_expected("`requires`, `uncounted`, `cost`, `shift`, `set` or `}`");
    }
  }
  advance();
  if (!o.cost) {
    error("missing_cost", "option `" + o.name.text + "` has no `cost` statement", o.name.span);
  }
  options_.push_back(std::move(o));
}

Expr Parser::parse_expr() {
  DepthGuard guard(*this);
  if (at_word("if")) {
    SourceSpan start = advance().span;
    Expr cond = parse_or();
    expect_word("then");
    Expr then_branch = parse_or();
    expect_word("else");
    Expr else_branch = parse_expr();
    return Expr::conditional(cond, then_branch, else_branch, SourceSpan::cover(start, previous_span()));
  }
  return parse_or();
}

Expr Parser::parse_or() {
  Expr lhs = parse_and();
  while (at_word("or")) {
    advance();
    Expr rhs = parse_and();
    lhs = Expr::binary(BinaryOp::Or, lhs, rhs, SourceSpan::cover(lhs.span(), rhs.span()));
  }
  return lhs;
}

Expr Parser::parse_and() {
  Expr lhs = parse_not();
  while (at_word("and")) {
    advance();
    Expr rhs = parse_not();
    lhs = Expr::binary(BinaryOp::And, lhs, rhs, SourceSpan::cover(lhs.span(), rhs.span()));
  }
  return lhs;
}

Expr Parser::parse_not() {
  if (at_word("not")) {
    DepthGuard guard(*this);
    SourceSpan start = advance().span;
    Expr operand = parse_not();
    return Expr::unary(causal::UnaryOp::Not, operand, SourceSpan::cover(start, operand.span()));
  }
  return parse_comparison();
}

std::optional<BinaryOp> comparison_op(TokenKind k) {
  switch (k) {
    case TokenKind::Assign: return BinaryOp::Eq;
    case TokenKind::NotEqual: return BinaryOp::Ne;
    case TokenKind::Less: return BinaryOp::Lt;
    case TokenKind::LessEq: return BinaryOp::Le;
    case TokenKind::Greater: return BinaryOp::Gt;
    case TokenKind::GreaterEq: return BinaryOp::Ge;
    default: return std::nullopt;
  }
}

Expr Parser::parse_comparison() {
  Expr lhs = parse_additive();
  if (auto op = comparison_op(peek().kind)) {
    advance();
    Expr rhs = parse_additive();
    Expr out = Expr::binary(*op, lhs, rhs, SourceSpan::cover(lhs.span(), rhs.span()));
    if (comparison_op(peek().kind)) {
      error("chained_comparison", "comparisons do not chain; add parentheses", peek().span);
      throw SyntaxError{};
    }
    return out;
  }
  return lhs;
}

Expr Parser::parse_additive() {
  Expr lhs = parse_multiplicative();
  while (at(TokenKind::Plus) || at(TokenKind::Minus)) {
    BinaryOp op = advance().kind == TokenKind::Plus ? BinaryOp::Add : BinaryOp::Sub;
    Expr rhs = parse_multiplicative();
    lhs = Expr::binary(op, lhs, rhs, SourceSpan::cover(lhs.span(), rhs.span()));
  }
  return lhs;
}

Expr Parser::parse_multiplicative() {
  Expr lhs = parse_unary();
  while (accept(TokenKind::Star)) {
    Expr rhs = parse_unary();
    lhs = Expr::binary(BinaryOp::Mul, lhs, rhs, SourceSpan::cover(lhs.span(), rhs.span()));
  }
  return lhs;
}

Expr Parser::parse_unary() {
  if (at(TokenKind::Minus)) {
    DepthGuard guard(*this);
    SourceSpan start = advance().span;
    Expr operand = parse_unary();
    SourceSpan span = SourceSpan::cover(start, operand.span());
    // Negative literals are numbers, as the printer writes them.
    if (operand.kind() == Expr::Kind::Number && operand.number_value() >= 0) {
      return Expr::number(-operand.number_value(), span);
    }
    return Expr::unary(causal::UnaryOp::Negate, operand, span);
  }
  return parse_primary();
}

Expr Parser::parse_primary() {
  const Token& t = peek();
  if (t.kind == TokenKind::Number) {
    advance();
    return Expr::number(t.number, t.span);
  }
  if (t.kind == TokenKind::LParen) {
    advance();
    Expr inner = parse_expr();
    expect(TokenKind::RParen, "`)`");
    return inner;
  }
  if (t.kind == TokenKind::Identifier) {
    if (t.text == "inf") {
      advance();
      return Expr::number(INFINITY, t.span);
    }
    if (t.text == "true" || t.text == "false") {
      advance();
      return Expr::boolean(t.text == "true", t.span);
    }
    if (t.text == "count") {
      SourceSpan start = advance().span;
      expect(TokenKind::LParen, "`(`");
      std::vector<Expr> operands;
      if (!at(TokenKind::RParen)) {
        do {
          operands.push_back(parse_expr());
        } while (accept(TokenKind::Comma));
      }
      expect(TokenKind::RParen, "`)`");
      return Expr::count(std::move(operands), SourceSpan::cover(start, previous_span()));
    }
    if (!is_reserved(t.text)) {
      advance();
      return Expr::identifier(t.text, t.span);
    }
  }
  fail_expected("an expression");
}

OutcomeFormula Parser::parse_formula() {
  OutcomeFormula lhs = parse_formula_and();
  while (at_word("or")) {
    advance();
    lhs = OutcomeFormula::disjunction(lhs, parse_formula_and());
  }
  return lhs;
}

OutcomeFormula Parser::parse_formula_and() {
  OutcomeFormula lhs = parse_formula_not();
  while (at_word("and")) {
    advance();
    lhs = OutcomeFormula::conjunction(lhs, parse_formula_not());
  }
  return lhs;
}

OutcomeFormula Parser::parse_formula_not() {
  DepthGuard guard(*this);
  if (at_word("not")) {
    advance();
    return OutcomeFormula::negation(parse_formula_not());
  }
  return parse_formula_atom();
}

OutcomeFormula Parser::parse_formula_atom() {
  if (at_word("true") || at_word("false")) {
    return advance().text == "true" ? OutcomeFormula::truth() : OutcomeFormula::falsity();
  }
  if (accept(TokenKind::LParen)) {
    OutcomeFormula inner = parse_formula();
    expect(TokenKind::RParen, "`)`");
    return inner;
  }
  if (!at(TokenKind::Identifier) || is_reserved(peek().text)) fail_expected("an event such as `X = x`");
  Name var = name("a variable");
  bool negated = false;
  if (accept(TokenKind::NotEqual)) {
    negated = true;
  } else {
    expect(TokenKind::Assign, "`=` or `!=`");
  }
  Name value = name("a value");
  auto event = OutcomeFormula::event(var.text, value.text, SourceSpan::cover(var.span, value.span));
  return negated ? OutcomeFormula::negation(event) : event;
}

// ---------------------------------------------------------------------------
// Semantic assembly

const Expr* find_identifier(const Expr& e, const std::string& name) {
  if (e.kind() == Expr::Kind::Identifier) return e.name() == name ? &e : nullptr;
  if (e.kind() == Expr::Kind::Number || e.kind() == Expr::Kind::Boolean) return nullptr;
  for (const auto& op : e.operands()) {
    if (const auto* hit = find_identifier(op, name)) return hit;
  }
  return nullptr;
}

// Identifiers other than `allowed`, in source order.
void unbound_identifiers(const Expr& e, const std::string& allowed, std::vector<const Expr*>& out) {
  if (e.kind() == Expr::Kind::Identifier) {
    if (e.name() != allowed) out.push_back(&e);
    return;
  }
  if (e.kind() == Expr::Kind::Number || e.kind() == Expr::Kind::Boolean) return;
  for (const auto& op : e.operands()) unbound_identifiers(op, allowed, out);
}

ParseResult Parser::assemble() {
  ParseResult result;
  const SourceSpan file_span = toks_.front().span;
  if (!header_) error("missing_header", "the file must start with `scenario <name>`", file_span);
  const SourceSpan anchor = header_ ? header_->span : file_span;
  if (agents_.empty()) error("missing_agents", "no `agents` line", anchor);
  if (!params_.contains("N")) error("missing_param", "parameter N (the balance) is not set", anchor);
  if (!outcome_) error("missing_outcome", "no `outcome` line", anchor);
  if (has_errors(diags_)) return result;

  std::set<std::string> agent_names;
  for (const auto& a : agents_) agent_names.insert(a.text);
  auto check_agent = [&](const Name& n) {
    if (!agent_names.contains(n.text)) error("unknown_agent", "`" + n.text + "` is not a declared agent", n.span);
  };

  // Variables.
  std::map<std::string, const VariableDecl*> vars;
  for (const auto& v : variables_) {
    if (!vars.emplace(v.name.text, &v).second) {
      error("duplicate_variable", "variable `" + v.name.text + "` is already declared", v.name.span);
    }
  }
  auto lookup = [&](const Name& n) -> const VariableDecl* {
    auto it = vars.find(n.text);
    if (it == vars.end()) {
      error("unknown_variable", "`" + n.text + "` is not a declared variable", n.span);
      return nullptr;
    }
    return it->second;
  };
  auto value_index = [&](const VariableDecl& v, const Name& value) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < v.range.size(); ++i) {
      if (v.range[i].text == value.text) return i;
    }
    error("unknown_value", "`" + value.text + "` is not in the range of `" + v.name.text + "`", value.span);
    return std::nullopt;
  };

  // Actions.
  std::map<std::string, AgentId> agent_of;
  std::set<std::string> agents_with_action;
  for (const auto& a : actions_) {
    const auto* v = lookup(a.variable);
    check_agent(a.agent);
    if (v && v->exogenous) {
      error("action_not_endogenous", "action `" + a.variable.text + "` must be an endogenous variable",
            a.variable.span);
    }
    if (agent_of.contains(a.variable.text)) {
      error("duplicate_action", "`" + a.variable.text + "` already belongs to an agent", a.variable.span);
    } else if (!agents_with_action.insert(a.agent.text).second) {
      error("duplicate_agent_action", "agent `" + a.agent.text + "` already has an action variable",
            a.agent.span);
    } else {
      agent_of[a.variable.text] = AgentId{a.agent.text};
    }
  }

  // Distributions.
  std::vector<epistemic::Marginal> marginals;
  std::size_t with_dist = 0;
  std::size_t exogenous_count = 0;
  const VariableDecl* first_without = nullptr;
  for (const auto& v : variables_) {
    if (!v.exogenous) continue;
    ++exogenous_count;
    if (!v.distribution) {
      if (!first_without) first_without = &v;
      continue;
    }
    ++with_dist;
    const auto& d = *v.distribution;
    std::vector<double> probs(v.range.size(), 0.0);
    bool ok = true;
    for (std::size_t i = 0; i < d.entries.size(); ++i) {
      double p = d.entries[i].second;
      if (!(p >= 0 && p <= 1)) {
        error("invalid_probability", "probability must lie in [0, 1]", d.number_spans[i]);
        ok = false;
      }
      auto idx = value_index(v, d.entries[i].first);
      if (!idx) {
        ok = false;
        continue;
      }
      probs[*idx] = p;
    }
    if (!ok) continue;
    if (d.bernoulli) {
      if (v.range.size() != 2) {
        error("invalid_distribution", "bernoulli needs a two-valued range", d.span);
        continue;
      }
      std::size_t idx = v.range[0].text == d.entries[0].first.text ? 0 : 1;
      probs[1 - idx] = 1 - probs[idx];
    }
    double sum = 0;
    for (double p : probs) sum += p;
    if (std::abs(sum - 1) > epistemic::kProbabilityTolerance) {
      error("probabilities_do_not_sum_to_one",
            "probabilities of `" + v.name.text + "` sum to " + causal::format_number(sum), d.span);
      continue;
    }
    marginals.push_back({v.name.text, probs});
  }
  if (contexts_ && with_dist > 0) {
    error("conflicting_state", "a `state` section cannot be combined with exogenous distributions",
          state_span_);
  }
  if (!contexts_ && first_without) {
    error("missing_distribution", "exogenous `" + first_without->name.text + "` has no distribution",
          first_without->name.span);
  }
  if (contexts_ && exogenous_count == 0) {
    error("conflicting_state", "a `state` section needs exogenous variables", state_span_);
  }

  // Outcome.
  {
    std::vector<const OutcomeFormula*> events;
    outcome_->first.collect_events(events);
    for (const auto* e : events) {
      Name var{e->variable(), e->span()};
      auto it = vars.find(var.text);
      if (it == vars.end()) {
        error("unknown_variable", "`" + var.text + "` is not a declared variable", e->span());
      } else if (!it->second->range.empty()) {
        bool in = std::any_of(it->second->range.begin(), it->second->range.end(),
                              [&](const Name& n) { return n.text == e->value(); });
        if (!in) {
          error("unknown_value", "`" + e->value() + "` is not in the range of `" + var.text + "`", e->span());
        }
      }
    }
  }

  // Parameters.
  double balance = 0;
  {
    const auto& [expr, span] = params_.at("N");
    std::vector<const Expr*> free;
    unbound_identifiers(expr, "", free);
    if (!free.empty()) {
      error("unbound_symbol", "`" + free.front()->name() + "` cannot be used in N", free.front()->span());
    } else {
      try {
        balance = expr.evaluate_number(causal::EmptyEnvironment());
      } catch (const Error& e) {
        error("invalid_param", e.what(), span);
      }
    }
  }
  Expr baseline = Expr::number(0);
  if (auto it = params_.find("baseline_cost"); it != params_.end()) {
    baseline = it->second.first;
    std::vector<const Expr*> free;
    unbound_identifiers(baseline, "size", free);
    if (!free.empty()) {
      error("unbound_symbol", "`" + free.front()->name() + "` is not defined; baseline_cost may use `size`",
            free.front()->span());
    }
  }
  std::string focal = "society";
  if (focal_) {
    if (focal_->text != "society") check_agent(*focal_);
    focal = focal_->text;
  }

  // Options.
  std::vector<blame::OptionTemplate> menu;
  std::set<std::string> option_names;
  for (const auto& o : options_) {
    if (!option_names.insert(o.name.text).second) {
      error("duplicate_option", "option `" + o.name.text + "` is already declared", o.name.span);
    }
    blame::OptionTemplate t;
    t.name = o.name.text;
    std::string symbol;
    if (o.symbol) {
      symbol = o.symbol->text;
      bool integral = o.lo == std::floor(o.lo) && o.hi == std::floor(o.hi);
      if (!integral || o.lo < 0 || o.lo > o.hi || o.hi > kMaxOptionSize) {
        error("invalid_size_range",
              "size range must be whole numbers with 0 <= lo <= hi <= " + std::to_string(kMaxOptionSize),
              o.range_span);
      } else {
        t.size = blame::SizeParameter{symbol, static_cast<int>(o.lo), static_cast<int>(o.hi)};
      }
    }
    for (const auto& a : o.required) {
      check_agent(a);
      t.required_agents.push_back({a.text});
    }
    for (const auto& a : o.uncounted) {
      check_agent(a);
      t.uncounted_agents.push_back({a.text});
    }
    auto check_expr = [&](const Expr& e, const std::string& what) {
      std::vector<const Expr*> free;
      unbound_identifiers(e, symbol, free);
      for (const auto* id : free) {
        error("unbound_symbol",
              "`" + id->name() + "` is not defined in " + what + " of option `" + o.name.text + "`" +
                  (symbol.empty() ? " (the option has no size parameter)" : ""),
              id->span());
      }
    };
    if (o.cost) {
      check_expr(*o.cost, "the cost");
      t.cost = *o.cost;
    }
    for (const auto& eff : o.effects) {
      if (const auto* s = std::get_if<ShiftDecl>(&eff)) {
        const auto* v = lookup(s->variable);
        if (v && !v->exogenous) {
          error("not_exogenous", "`shift` needs an exogenous variable", s->variable.span);
        } else if (v) {
          value_index(*v, s->value);
        }
        check_expr(s->delta, "a shift");
        t.effects.push_back(blame::ShiftMarginal{s->variable.text, s->value.text, s->delta});
      } else if (const auto* s = std::get_if<SetDistDecl>(&eff)) {
        const auto* v = lookup(s->variable);
        if (v && !v->exogenous) error("not_exogenous", "`set ~` needs an exogenous variable", s->variable.span);
        blame::SetMarginal m{s->variable.text, {}};
        for (const auto& [value, expr] : s->distribution) {
          if (v && v->exogenous) value_index(*v, value);
          check_expr(expr, "a distribution");
          m.distribution.push_back({value.text, expr});
        }
        t.effects.push_back(std::move(m));
      } else {
        const auto& a = std::get<SetActionDecl>(eff);
        const auto* v = lookup(a.variable);
        if (v) {
          if (!agent_of.contains(a.variable.text)) {
            error("not_an_action", "`set " + a.variable.text + " = ...` needs an action variable",
                  a.variable.span);
          }
          value_index(*v, a.value);
        }
        t.effects.push_back(blame::SetAction{a.variable.text, a.value.text});
      }
    }
    menu.push_back(std::move(t));
  }
  if (has_errors(diags_)) return result;

  // Model.
  causal::Signature sig;
  std::vector<causal::StructuralEquation> equations;
  std::map<std::string, SourceSpan> decl_span;
  std::map<std::string, const Expr*> equation_of;
  for (const auto& v : variables_) {
    causal::Variable var{v.name.text,
                         v.exogenous ? causal::VariableKind::Exogenous : causal::VariableKind::Endogenous,
                         {}};
    for (const auto& r : v.range) var.range.push_back(r.text);
    (v.exogenous ? sig.exogenous : sig.endogenous).push_back(std::move(var));
    decl_span[v.name.text] = v.name.span;
    if (v.equation) {
      equations.push_back({v.name.text, *v.equation});
      equation_of[v.name.text] = &*v.equation;
    }
  }
  sig.agent_of = agent_of;
  causal::CausalModel model(sig, equations);
  for (const auto& f : model.report().findings) {
    SourceSpan span = anchor;
    if (!f.variables.empty()) {
      const std::string& target = f.variables.front();
      if (decl_span.contains(target)) span = decl_span[target];
      if (equation_of.contains(target)) {
        const Expr& body = *equation_of[target];
        span = body.span();
        const std::string wanted = f.category == causal::Finding::Category::UnknownIdentifier && f.variables.size() > 1
                                       ? f.variables[1]
                                       : target;
        if (f.category == causal::Finding::Category::UnknownIdentifier ||
            f.category == causal::Finding::Category::SelfReference) {
          if (const auto* id = find_identifier(body, wanted)) span = id->span();
        }
      }
    }
    error(std::string(causal::category_name(f.category)), f.message, span);
  }
  if (has_errors(diags_)) return result;

  // Epistemic state.
  std::optional<epistemic::EpistemicState> state;
  try {
    if (contexts_) {
      std::vector<epistemic::WeightedSetting> settings;
      for (const auto& c : *contexts_) {
        std::vector<std::size_t> idx(sig.exogenous.size(), SIZE_MAX);
        bool ok = true;
        if (!(c.weight >= 0 && c.weight <= 1)) {
          error("invalid_probability", "context weight must lie in [0, 1]", c.weight_span);
          ok = false;
        }
        for (const auto& [var, value] : c.assignments) {
          const auto* v = lookup(var);
          if (!v) {
            ok = false;
            continue;
          }
          if (!v->exogenous) {
            error("not_exogenous", "contexts assign exogenous variables only", var.span);
            ok = false;
            continue;
          }
          auto vi = value_index(*v, value);
          auto pos = static_cast<std::size_t>(
              std::find_if(sig.exogenous.begin(), sig.exogenous.end(),
                           [&](const causal::Variable& x) { return x.name == var.text; }) -
              sig.exogenous.begin());
          if (!vi) {
            ok = false;
          } else if (idx[pos] != SIZE_MAX) {
            error("duplicate_assignment", "`" + var.text + "` is assigned twice", var.span);
            ok = false;
          } else {
            idx[pos] = *vi;
          }
        }
        for (std::size_t i = 0; ok && i < idx.size(); ++i) {
          if (idx[i] == SIZE_MAX) {
            error("incomplete_context", "context does not assign `" + sig.exogenous[i].name + "`", c.span);
            ok = false;
          }
        }
        if (ok) settings.push_back({causal::CausalSetting(model, causal::Context(idx)), c.weight});
      }
      if (has_errors(diags_)) return result;
      state = epistemic::EpistemicState::from_settings(std::move(settings));
    } else {
      state = epistemic::EpistemicState::factored(model, marginals);
    }
  } catch (const Error& e) {
    error(e.code(), e.what(), contexts_ ? state_span_ : anchor);
    return result;
  }

  std::vector<AgentId> agents;
  for (const auto& a : agents_) agents.push_back({a.text});
  std::sort(agents.begin(), agents.end(),
            [](const AgentId& a, const AgentId& b) { return natural_less(a.name, b.name); });

  blame::Scenario scenario{header_->text, agents,  *state,   outcome_->first,
                           menu,          baseline, balance, focal};
  std::map<std::string, SourceSpan> option_span;
  for (const auto& o : options_) option_span.emplace(o.name.text, o.name.span);
  for (const auto& issue : blame::check_scenario(scenario)) {
    SourceSpan span = issue.span;
    if (!span.known() && issue.option) span = option_span[menu[*issue.option].name];
    if (!span.known()) span = anchor;
    if (issue.code == "invalid_balance" || (issue.code == "balance_too_small" && !issue.option)) {
      span = params_.at("N").second;
    }
    error(issue.code, issue.message, span);
  }
  if (has_errors(diags_)) return result;

  for (const auto& a : agents_) {
    if (!agents_with_action.contains(a.text)) {
      diags_.push_back({Severity::Warning, "agent_without_action",
                        "agent `" + a.text + "` owns no action variable and never affects blame", a.span});
    }
  }
  result.scenario = std::move(scenario);
  return result;
}

}  // namespace

bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    bool da = std::isdigit(static_cast<unsigned char>(a[i]));
    bool db = std::isdigit(static_cast<unsigned char>(b[j]));
    if (da && db) {
      std::size_t ei = i, ej = j;
      while (ei < a.size() && std::isdigit(static_cast<unsigned char>(a[ei]))) ++ei;
      while (ej < b.size() && std::isdigit(static_cast<unsigned char>(b[ej]))) ++ej;
      auto na = a.substr(i, ei - i);
      auto nb = b.substr(j, ej - j);
      na.erase(0, std::min(na.find_first_not_of('0'), na.size()));
      nb.erase(0, std::min(nb.find_first_not_of('0'), nb.size()));
      if (na.size() != nb.size()) return na.size() < nb.size();
      if (na != nb) return na < nb;
      i = ei;
      j = ej;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  if ((a.size() - i) != (b.size() - j)) return (a.size() - i) < (b.size() - j);
  return a < b;
}

bool is_reserved(std::string_view word) { return kSectionWords.contains(word) || kOtherWords.contains(word); }

ParseResult parse(std::string_view source) {
  std::vector<Diagnostic> diags;
  auto tokens = tokenize(source, diags);
  Parser parser(std::move(tokens), diags);
  parser.parse_file();
  ParseResult result;
  if (!has_errors(diags)) {
    try {
      result = parser.assemble();
    } catch (const Error& e) {
      parser.error(e.code(), e.what(), SourceSpan{1, 1, 0, 0});
      result.scenario.reset();
    }
  }
  result.diagnostics = std::move(diags);
  if (has_errors(result.diagnostics)) result.scenario.reset();
  return result;
}

namespace {

template <typename T, typename Fn>
Parsed<T> parse_piece(std::string_view source, Fn&& fn) {
  Parsed<T> out;
  auto tokens = tokenize(source, out.diagnostics);
  if (has_errors(out.diagnostics)) return out;
  Parser parser(std::move(tokens), out.diagnostics);
  try {
    T value = fn(parser);
    if (!parser.at_end()) parser.fail_expected("end of input");
    out.value = std::move(value);
  } catch (const SyntaxError&) {
  }
  return out;
}

}  // namespace

Parsed<causal::Expr> parse_expression(std::string_view source) {
  return parse_piece<causal::Expr>(source, [](Parser& p) { return p.expression(); });
}

Parsed<causal::OutcomeFormula> parse_formula(std::string_view source) {
  return parse_piece<causal::OutcomeFormula>(source, [](Parser& p) { return p.formula(); });
}

}  // namespace groupblame::dsl
