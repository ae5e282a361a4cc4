#include "groupblame/causal/formula.hpp"

namespace groupblame::causal {

struct OutcomeFormula::Node {
  Kind kind = Kind::True;
  std::string variable;
  std::string value;
  std::vector<OutcomeFormula> operands;
  SourceSpan span;
};

OutcomeFormula::OutcomeFormula() : OutcomeFormula(truth()) {}

OutcomeFormula::OutcomeFormula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

OutcomeFormula OutcomeFormula::truth() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::True;
  return OutcomeFormula(std::move(n));
}

OutcomeFormula OutcomeFormula::falsity() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::False;
  return OutcomeFormula(std::move(n));
}

OutcomeFormula OutcomeFormula::event(std::string variable, std::string value, SourceSpan span) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Event;
  n->variable = std::move(variable);
  n->value = std::move(value);
  n->span = span;
  return OutcomeFormula(std::move(n));
}

OutcomeFormula OutcomeFormula::negation(OutcomeFormula f) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Not;
  n->operands.push_back(std::move(f));
  return OutcomeFormula(std::move(n));
}

OutcomeFormula OutcomeFormula::conjunction(OutcomeFormula a, OutcomeFormula b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::And;
  n->operands = {std::move(a), std::move(b)};
  return OutcomeFormula(std::move(n));
}

OutcomeFormula OutcomeFormula::disjunction(OutcomeFormula a, OutcomeFormula b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Or;
  n->operands = {std::move(a), std::move(b)};
  return OutcomeFormula(std::move(n));
}

OutcomeFormula::Kind OutcomeFormula::kind() const { return node_->kind; }
const std::string& OutcomeFormula::variable() const { return node_->variable; }
const std::string& OutcomeFormula::value() const { return node_->value; }
const std::vector<OutcomeFormula>& OutcomeFormula::operands() const { return node_->operands; }
const SourceSpan& OutcomeFormula::span() const { return node_->span; }

bool OutcomeFormula::satisfied(
    const std::function<std::string_view(std::string_view)>& value_of) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Event: return value_of(n.variable) == n.value;
    case Kind::Not: return !n.operands[0].satisfied(value_of);
    case Kind::And: return n.operands[0].satisfied(value_of) && n.operands[1].satisfied(value_of);
    case Kind::Or: return n.operands[0].satisfied(value_of) || n.operands[1].satisfied(value_of);
  }
  return false;
}

void OutcomeFormula::collect_events(std::vector<const OutcomeFormula*>& out) const {
  if (node_->kind == Kind::Event) out.push_back(this);
  for (const auto& f : node_->operands) f.collect_events(out);
}

std::set<std::string> OutcomeFormula::variables() const {
  std::vector<const OutcomeFormula*> events;
  collect_events(events);
  std::set<std::string> out;
  for (const auto* e : events) out.insert(e->variable());
  return out;
}

namespace {

int precedence(OutcomeFormula::Kind k) {
  switch (k) {
    case OutcomeFormula::Kind::Or: return 1;
    case OutcomeFormula::Kind::And: return 2;
    case OutcomeFormula::Kind::Not: return 3;
    default: return 4;
  }
}

void print(const OutcomeFormula& f, std::string& out);

void print_operand(const OutcomeFormula& f, int min_prec, std::string& out) {
  if (precedence(f.kind()) < min_prec) {
    out += '(';
    print(f, out);
    out += ')';
  } else {
    print(f, out);
  }
}

void print(const OutcomeFormula& f, std::string& out) {
  switch (f.kind()) {
    case OutcomeFormula::Kind::True: out += "true"; return;
    case OutcomeFormula::Kind::False: out += "false"; return;
    case OutcomeFormula::Kind::Event:
      out += f.variable();
      out += " = ";
      out += f.value();
      return;
    case OutcomeFormula::Kind::Not:
      out += "not ";
      print_operand(f.operands()[0], 3, out);
      return;
    case OutcomeFormula::Kind::And:
    case OutcomeFormula::Kind::Or: {
      int p = precedence(f.kind());
      print_operand(f.operands()[0], p, out);
      out += f.kind() == OutcomeFormula::Kind::And ? " and " : " or ";
      print_operand(f.operands()[1], p + 1, out);
      return;
    }
  }
}

}  // namespace

std::string OutcomeFormula::to_string() const {
  std::string out;
  print(*this, out);
  return out;
}

bool operator==(const OutcomeFormula& a, const OutcomeFormula& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  return x.kind == y.kind && x.variable == y.variable && x.value == y.value &&
         x.operands == y.operands;
}

}  // namespace groupblame::causal
