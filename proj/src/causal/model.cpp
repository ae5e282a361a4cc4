#include "groupblame/causal/model.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "groupblame/error.hpp"

namespace groupblame::causal {

namespace {

// Joint parent assignments checked exhaustively for range closure.
constexpr double kRangeCheckBound = 1u << 20;

std::optional<std::size_t> value_index(const Variable& var, const Value& v) {
  if (const auto* s = std::get_if<std::string_view>(&v)) return var.index_of(*s);
  return var.index_of(value_to_string(v));
}

}  // namespace

std::optional<std::size_t> Variable::index_of(std::string_view value) const {
  for (std::size_t i = 0; i < range.size(); ++i) {
    if (range[i] == value) return i;
  }
  return std::nullopt;
}

const Variable* Signature::find(std::string_view name) const {
  for (const auto& v : exogenous) {
    if (v.name == name) return &v;
  }
  for (const auto& v : endogenous) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

std::vector<std::string> Signature::actions() const {
  std::vector<std::string> out;
  for (const auto& [var, agent] : agent_of) out.push_back(var);
  return out;
}

std::optional<std::string> Signature::action_of(const AgentId& agent) const {
  for (const auto& [var, a] : agent_of) {
    if (a == agent) return var;
  }
  return std::nullopt;
}

std::string_view category_name(Finding::Category c) {
  using C = Finding::Category;
  switch (c) {
    case C::DuplicateVariable: return "duplicate_variable";
    case C::EmptyRange: return "empty_range";
    case C::DuplicateValue: return "duplicate_value";
    case C::NoEndogenous: return "no_endogenous";
    case C::MissingEquation: return "missing_equation";
    case C::DuplicateEquation: return "duplicate_equation";
    case C::UnknownTarget: return "unknown_target";
    case C::UnknownIdentifier: return "unknown_identifier";
    case C::SelfReference: return "self_reference";
    case C::Cycle: return "cycle";
    case C::RangeViolation: return "range_violation";
    case C::TypeError: return "type_error";
    case C::ActionNotEndogenous: return "action_not_endogenous";
    case C::DuplicateAgentAction: return "duplicate_agent_action";
  }
  return "unknown";
}

bool ValidationReport::has(Finding::Category c) const {
  return std::any_of(findings.begin(), findings.end(),
                     [c](const Finding& f) { return f.category == c; });
}

struct CausalModel::Impl {
  Signature signature;
  std::vector<StructuralEquation> equations;
  std::vector<Variable> variables;  // exogenous then endogenous
  std::map<std::string, std::size_t, std::less<>> index;
  std::vector<int> equation_of;  // per variable, index into equations or -1
  std::vector<std::vector<std::size_t>> parents;
  std::vector<std::size_t> order;
  ValidationReport report;
};

namespace {

class IndexedEnvironment final : public Environment {
 public:
  IndexedEnvironment(const std::map<std::string, std::size_t, std::less<>>& index,
                     const std::vector<Variable>& variables, const std::vector<std::size_t>& values)
      : index_(index), variables_(variables), values_(values) {}

  std::optional<Value> lookup(std::string_view name) const override {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    const Variable& v = variables_[it->second];
    return std::string_view(v.range[values_[it->second]]);
  }

 private:
  const std::map<std::string, std::size_t, std::less<>>& index_;
  const std::vector<Variable>& variables_;
  const std::vector<std::size_t>& values_;
};

void add(ValidationReport& r, Finding::Category c, std::vector<std::string> vars,
         std::string message) {
  r.findings.push_back(Finding{c, std::move(vars), std::move(message)});
}

// Fills the derived tables of `m` and records every well-formedness problem.
void build(CausalModel::Impl& m) {
  ValidationReport& r = m.report;
  std::set<std::string> all_values;

  auto add_variable = [&](const Variable& v) {
    if (m.index.count(v.name)) {
      add(r, Finding::Category::DuplicateVariable, {v.name},
          "variable `" + v.name + "` is declared more than once");
      return;
    }
    if (v.range.empty()) {
      add(r, Finding::Category::EmptyRange, {v.name}, "variable `" + v.name + "` has an empty range");
    }
    std::set<std::string> seen;
    for (const auto& value : v.range) {
      if (!seen.insert(value).second) {
        add(r, Finding::Category::DuplicateValue, {v.name},
            "value `" + value + "` appears twice in the range of `" + v.name + "`");
      }
      all_values.insert(value);
    }
    m.index.emplace(v.name, m.variables.size());
    m.variables.push_back(v);
  };
  for (auto v : m.signature.exogenous) {
    v.kind = VariableKind::Exogenous;
    add_variable(v);
  }
  for (auto v : m.signature.endogenous) {
    v.kind = VariableKind::Endogenous;
    add_variable(v);
  }
  if (m.signature.endogenous.empty()) {
    add(r, Finding::Category::NoEndogenous, {}, "the model declares no endogenous variables");
  }

  std::map<AgentId, std::string> action_by_agent;
  for (const auto& [var, agent] : m.signature.agent_of) {
    auto it = m.index.find(var);
    if (it == m.index.end() || m.variables[it->second].kind != VariableKind::Endogenous) {
      add(r, Finding::Category::ActionNotEndogenous, {var},
          "action variable `" + var + "` is not an endogenous variable");
    }
    auto [pos, fresh] = action_by_agent.emplace(agent, var);
    if (!fresh) {
      add(r, Finding::Category::DuplicateAgentAction, {pos->second, var},
          "agent `" + agent.name + "` performs both `" + pos->second + "` and `" + var + "`");
    }
  }

  const std::size_t n = m.variables.size();
  m.equation_of.assign(n, -1);
  m.parents.assign(n, {});
  bool structural_ok = true;
  for (std::size_t e = 0; e < m.equations.size(); ++e) {
    const auto& eq = m.equations[e];
    auto it = m.index.find(eq.target);
    if (it == m.index.end() || m.variables[it->second].kind != VariableKind::Endogenous) {
      add(r, Finding::Category::UnknownTarget, {eq.target},
          "equation target `" + eq.target + "` is not an endogenous variable");
      structural_ok = false;
      continue;
    }
    if (m.equation_of[it->second] >= 0) {
      add(r, Finding::Category::DuplicateEquation, {eq.target},
          "variable `" + eq.target + "` has more than one equation");
      structural_ok = false;
      continue;
    }
    m.equation_of[it->second] = static_cast<int>(e);
    for (const auto& id : eq.body.identifiers()) {
      auto var = m.index.find(id);
      if (var != m.index.end()) {
        if (var->second == it->second) {
          add(r, Finding::Category::SelfReference, {eq.target},
              "equation for `" + eq.target + "` refers to itself");
          structural_ok = false;
        } else {
          m.parents[it->second].push_back(var->second);
        }
      } else if (!all_values.count(id)) {
        add(r, Finding::Category::UnknownIdentifier, {eq.target, id},
            "equation for `" + eq.target + "` uses `" + id +
                "`, which is neither a variable nor a range value");
        structural_ok = false;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (m.variables[i].kind == VariableKind::Endogenous && m.equation_of[i] < 0) {
      add(r, Finding::Category::MissingEquation, {m.variables[i].name},
          "endogenous variable `" + m.variables[i].name + "` has no equation");
      structural_ok = false;
    }
  }

  // Kahn's algorithm over endogenous variables, declaration order for ties.
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p : m.parents[i]) {
      if (m.variables[p].kind == VariableKind::Endogenous) {
        ++indegree[i];
        children[p].push_back(i);
      }
    }
  }
  std::vector<std::size_t> order;
  std::vector<bool> done(n, false);
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i] || m.variables[i].kind != VariableKind::Endogenous || indegree[i] != 0) continue;
      done[i] = true;
      order.push_back(i);
      for (std::size_t c : children[i]) --indegree[c];
      progress = true;
      break;
    }
  }
  std::size_t endogenous_count = m.signature.endogenous.size();
  if (order.size() < endogenous_count) {
    // Walk parent links from the first unresolved variable until a repeat.
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (m.variables[i].kind == VariableKind::Endogenous && !done[i]) {
        start = i;
        break;
      }
    }
    std::vector<std::size_t> path;
    std::vector<int> pos(n, -1);
    std::size_t cur = start;
    while (pos[cur] < 0) {
      pos[cur] = static_cast<int>(path.size());
      path.push_back(cur);
      std::size_t next = cur;
      for (std::size_t p : m.parents[cur]) {
        if (m.variables[p].kind == VariableKind::Endogenous && !done[p]) {
          next = p;
          break;
        }
      }
      if (next == cur) break;
      cur = next;
    }
    std::vector<std::string> cycle;
    for (std::size_t i = pos[cur] < 0 ? 0 : static_cast<std::size_t>(pos[cur]); i < path.size();
         ++i) {
      cycle.push_back(m.variables[path[i]].name);
    }
    std::reverse(cycle.begin(), cycle.end());
    std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());
    std::string text;
    for (const auto& c : cycle) text += (text.empty() ? "" : " -> ") + c;
    add(r, Finding::Category::Cycle, cycle, "equations are cyclic: " + text);
    structural_ok = false;
  } else {
    m.order = std::move(order);
  }

  if (!structural_ok || !r.ok()) return;

  // Range closure: every parent assignment must map into the target range.
  std::vector<std::size_t> values(n, 0);
  IndexedEnvironment env(m.index, m.variables, values);
  for (std::size_t target : m.order) {
    const auto& eq = m.equations[static_cast<std::size_t>(m.equation_of[target])];
    const auto& ps = m.parents[target];
    double space = 1;
    for (std::size_t p : ps) space *= static_cast<double>(m.variables[p].range.size());
    if (space > kRangeCheckBound) continue;
    for (std::size_t p : ps) values[p] = 0;
    while (true) {
      try {
        Value v = eq.body.evaluate(env);
        if (!value_index(m.variables[target], v)) {
          std::string where;
          for (std::size_t p : ps) {
            where += (where.empty() ? "" : ", ") + m.variables[p].name + "=" +
                     m.variables[p].range[values[p]];
          }
          add(r, Finding::Category::RangeViolation, {eq.target},
              "equation for `" + eq.target + "` yields `" + value_to_string(v) +
                  "`, outside its range" + (where.empty() ? "" : " (at " + where + ")"));
          break;
        }
      } catch (const EvaluationError& e) {
        add(r, Finding::Category::TypeError, {eq.target},
            "equation for `" + eq.target + "`: " + e.what());
        break;
      }
      std::size_t k = 0;
      for (; k < ps.size(); ++k) {
        if (++values[ps[k]] < m.variables[ps[k]].range.size()) break;
        values[ps[k]] = 0;
      }
      if (k == ps.size()) break;
    }
  }
}

}  // namespace

CausalModel::CausalModel(Signature signature, std::vector<StructuralEquation> equations) {
  auto impl = std::make_shared<Impl>();
  impl->signature = std::move(signature);
  impl->equations = std::move(equations);
  build(*impl);
  impl_ = std::move(impl);
}

CausalModel::CausalModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

const Signature& CausalModel::signature() const { return impl_->signature; }
const std::vector<StructuralEquation>& CausalModel::equations() const { return impl_->equations; }
const ValidationReport& CausalModel::report() const { return impl_->report; }
std::size_t CausalModel::variable_count() const { return impl_->variables.size(); }
const Variable& CausalModel::variable(std::size_t index) const { return impl_->variables.at(index); }

std::optional<std::size_t> CausalModel::variable_index(std::string_view name) const {
  auto it = impl_->index.find(name);
  if (it == impl_->index.end()) return std::nullopt;
  return it->second;
}

const StructuralEquation* CausalModel::equation_for(std::string_view target) const {
  auto idx = variable_index(target);
  if (!idx || impl_->equation_of[*idx] < 0) return nullptr;
  return &impl_->equations[static_cast<std::size_t>(impl_->equation_of[*idx])];
}

std::span<const std::size_t> CausalModel::evaluation_order() const { return impl_->order; }

std::span<const std::size_t> CausalModel::parents(std::size_t variable_index) const {
  return impl_->parents.at(variable_index);
}

const StructuralEquation& CausalModel::equation_at(std::size_t variable_index) const {
  int e = impl_->equation_of.at(variable_index);
  if (e < 0) throw InvalidModel("variable has no equation");
  return impl_->equations[static_cast<std::size_t>(e)];
}

CausalModel CausalModel::with_equation(StructuralEquation equation) const {
  std::vector<StructuralEquation> eqs = impl_->equations;
  bool replaced = false;
  for (auto& eq : eqs) {
    if (eq.target == equation.target) {
      eq = equation;
      replaced = true;
      break;
    }
  }
  if (!replaced) eqs.push_back(std::move(equation));
  return CausalModel(impl_->signature, std::move(eqs));
}

CausalModel CausalModel::with_agent_of(std::map<std::string, AgentId> agent_of) const {
  Signature sig = impl_->signature;
  sig.agent_of = std::move(agent_of);
  return CausalModel(std::move(sig), impl_->equations);
}

bool operator==(const CausalModel& a, const CausalModel& b) {
  if (a.impl_ == b.impl_) return true;
  return a.impl_->signature == b.impl_->signature && a.impl_->equations == b.impl_->equations;
}

ValidationReport validate_model(const CausalModel& model) { return model.report(); }

Context Context::from_names(const Signature& signature,
                            const std::map<std::string, std::string>& values) {
  std::vector<std::size_t> idx;
  for (const auto& var : signature.exogenous) {
    auto it = values.find(var.name);
    if (it == values.end()) {
      throw SignatureMismatch("context does not assign exogenous variable `" + var.name + "`");
    }
    auto i = var.index_of(it->second);
    if (!i) {
      throw SignatureMismatch("context value `" + it->second + "` is not in the range of `" +
                              var.name + "`");
    }
    idx.push_back(*i);
  }
  if (values.size() != signature.exogenous.size()) {
    for (const auto& [name, value] : values) {
      const Variable* v = signature.find(name);
      if (!v || v->kind == VariableKind::Endogenous ||
          std::none_of(signature.exogenous.begin(), signature.exogenous.end(),
                       [&](const Variable& x) { return x.name == name; })) {
        throw SignatureMismatch("context assigns `" + name + "`, which is not exogenous");
      }
    }
  }
  return Context(std::move(idx));
}

std::map<std::string, std::string> Context::to_names(const Signature& signature) const {
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < signature.exogenous.size() && i < values_.size(); ++i) {
    out[signature.exogenous[i].name] = signature.exogenous[i].range.at(values_[i]);
  }
  return out;
}

CausalSetting::CausalSetting(CausalModel model, Context context)
    : model_(std::move(model)), context_(std::move(context)) {
  const auto& exo = model_.signature().exogenous;
  if (context_.values().size() != exo.size()) {
    throw SignatureMismatch("context has " + std::to_string(context_.values().size()) +
                            " values but the model has " + std::to_string(exo.size()) +
                            " exogenous variables");
  }
  for (std::size_t i = 0; i < exo.size(); ++i) {
    if (context_.values()[i] >= exo[i].range.size()) {
      throw SignatureMismatch("context value for `" + exo[i].name + "` is out of range");
    }
  }
}

Assignment::Assignment(CausalModel model, std::vector<std::size_t> values)
    : model_(std::move(model)), values_(std::move(values)) {}

std::string_view Assignment::operator[](std::string_view name) const {
  auto idx = model_.variable_index(name);
  if (!idx) throw SignatureMismatch("unknown variable `" + std::string(name) + "`");
  return model_.variable(*idx).range[values_[*idx]];
}

std::map<std::string, std::string> Assignment::to_map() const {
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    out[model_.variable(i).name] = model_.variable(i).range[values_[i]];
  }
  return out;
}

void check_intervention(const CausalModel& model, const Intervention& iv) {
  for (const auto& [name, value] : iv) {
    auto idx = model.variable_index(name);
    if (!idx || model.variable(*idx).kind != VariableKind::Endogenous) {
      throw SignatureMismatch("intervention on `" + name + "`, which is not endogenous");
    }
    if (!model.variable(*idx).index_of(value)) {
      throw SignatureMismatch("intervention value `" + value + "` is not in the range of `" +
                              name + "`");
    }
  }
}

void check_formula(const Signature& signature, const OutcomeFormula& phi) {
  std::vector<const OutcomeFormula*> events;
  phi.collect_events(events);
  for (const auto* e : events) {
    const Variable* v = signature.find(e->variable());
    if (!v) throw SignatureMismatch("formula mentions unknown variable `" + e->variable() + "`");
    if (!v->index_of(e->value())) {
      throw SignatureMismatch("formula value `" + e->value() + "` is not in the range of `" +
                              e->variable() + "`");
    }
  }
}

namespace {

std::vector<std::optional<std::size_t>> resolve(const CausalModel& model, const Intervention& iv) {
  check_intervention(model, iv);
  std::vector<std::optional<std::size_t>> forced(model.variable_count());
  for (const auto& [name, value] : iv) {
    std::size_t idx = *model.variable_index(name);
    forced[idx] = model.variable(idx).index_of(value);
  }
  return forced;
}

class ModelEnvironment final : public Environment {
 public:
  ModelEnvironment(const CausalModel& model, const std::vector<std::size_t>& values)
      : model_(model), values_(values) {}

  std::optional<Value> lookup(std::string_view name) const override {
    auto idx = model_.variable_index(name);
    if (!idx) return std::nullopt;
    return std::string_view(model_.variable(*idx).range[values_[*idx]]);
  }

 private:
  const CausalModel& model_;
  const std::vector<std::size_t>& values_;
};

void solve_into(const CausalModel& model, std::span<const std::size_t> context,
                const std::vector<std::optional<std::size_t>>& forced,
                std::span<const std::size_t> order, std::vector<std::size_t>& values) {
  const std::size_t n_exo = model.signature().exogenous.size();
  if (context.size() != n_exo) {
    throw SignatureMismatch("context size does not match the model's exogenous variables");
  }
  values.assign(model.variable_count(), 0);
  std::copy(context.begin(), context.end(), values.begin());
  ModelEnvironment env(model, values);
  for (std::size_t var : order) {
    if (forced[var]) {
      values[var] = *forced[var];
      continue;
    }
    const auto& eq = model.equation_at(var);
    Value v;
    try {
      v = eq.body.evaluate(env);
    } catch (const EvaluationError& e) {
      throw EquationRangeError("equation for `" + eq.target + "`: " + e.what());
    }
    auto idx = value_index(model.variable(var), v);
    if (!idx) {
      throw EquationRangeError("equation for `" + eq.target + "` yields `" + value_to_string(v) +
                               "`, outside its range");
    }
    values[var] = *idx;
  }
}

void require_valid(const CausalModel& model) {
  if (!model.valid()) {
    const auto& f = model.report().findings.front();
    throw InvalidModel("model is not well-formed: " + f.message);
  }
}

}  // namespace

Assignment evaluate(const CausalSetting& setting, const Intervention& iv) {
  require_valid(setting.model());
  return evaluate_with_order(setting, iv, setting.model().evaluation_order());
}

Assignment evaluate_with_order(const CausalSetting& setting, const Intervention& iv,
                               std::span<const std::size_t> order) {
  const CausalModel& model = setting.model();
  require_valid(model);
  // `order` must list every endogenous variable once, parents first.
  std::vector<bool> seen(model.variable_count(), false);
  for (std::size_t i = 0; i < model.signature().exogenous.size(); ++i) seen[i] = true;
  for (std::size_t var : order) {
    if (var >= seen.size() || seen[var]) throw InvalidModel("evaluation order repeats a variable");
    for (std::size_t p : model.parents(var)) {
      if (!seen[p]) throw InvalidModel("evaluation order is not topological");
    }
    seen[var] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw InvalidModel("evaluation order omits a variable");
  }
  auto forced = resolve(model, iv);
  std::vector<std::size_t> values;
  solve_into(model, setting.context().values(), forced, order, values);
  return Assignment(model, std::move(values));
}

bool holds(const CausalSetting& setting, const Intervention& iv, const OutcomeFormula& phi) {
  Evaluator ev(setting.model(), iv, phi);
  return ev.holds(setting.context().values());
}

Evaluator::Evaluator(CausalModel model, const Intervention& iv, const OutcomeFormula& phi)
    : model_(std::move(model)) {
  require_valid(model_);
  forced_ = resolve(model_, iv);
  check_formula(model_.signature(), phi);
  root_ = compile(phi);
}

std::size_t Evaluator::compile(const OutcomeFormula& f) {
  CompiledFormula node{f.kind(), 0, std::nullopt, {}};
  if (f.kind() == OutcomeFormula::Kind::Event) {
    node.variable = *model_.variable_index(f.variable());
    node.value = model_.variable(node.variable).index_of(f.value());
  }
  for (const auto& op : f.operands()) node.operands.push_back(compile(op));
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

bool Evaluator::check(std::size_t idx) const {
  const CompiledFormula& n = nodes_[idx];
  switch (n.kind) {
    case OutcomeFormula::Kind::True: return true;
    case OutcomeFormula::Kind::False: return false;
    case OutcomeFormula::Kind::Event: return n.value && values_[n.variable] == *n.value;
    case OutcomeFormula::Kind::Not: return !check(n.operands[0]);
    case OutcomeFormula::Kind::And: return check(n.operands[0]) && check(n.operands[1]);
    case OutcomeFormula::Kind::Or: return check(n.operands[0]) || check(n.operands[1]);
  }
  return false;
}

const std::vector<std::size_t>& Evaluator::solve(std::span<const std::size_t> context) {
  solve_into(model_, context, forced_, model_.evaluation_order(), values_);
  return values_;
}

bool Evaluator::holds(std::span<const std::size_t> context) {
  solve(context);
  return check(root_);
}

}  // namespace groupblame::causal
