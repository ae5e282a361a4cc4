#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "groupblame/causal/expr.hpp"
#include "groupblame/causal/formula.hpp"

namespace groupblame {

// Agent identity; the name is both the key and the display label.
struct AgentId {
  std::string name;

  auto operator<=>(const AgentId&) const = default;
  bool operator==(const AgentId&) const = default;
};

}  // namespace groupblame

namespace groupblame::causal {

enum class VariableKind { Exogenous, Endogenous };

struct Variable {
  std::string name;
  VariableKind kind = VariableKind::Endogenous;
  std::vector<std::string> range;

  std::optional<std::size_t> index_of(std::string_view value) const;
  bool operator==(const Variable&) const = default;
};

struct Signature {
  std::vector<Variable> exogenous;
  std::vector<Variable> endogenous;
  // Action variable name -> the agent performing it.
  std::map<std::string, AgentId> agent_of;

  const Variable* find(std::string_view name) const;
  std::vector<std::string> actions() const;
  // Action variable of `agent`, if any.
  std::optional<std::string> action_of(const AgentId& agent) const;

  bool operator==(const Signature&) const = default;
};

struct StructuralEquation {
  std::string target;
  Expr body;

  bool operator==(const StructuralEquation&) const = default;
};

struct Finding {
  enum class Category {
    DuplicateVariable,
    EmptyRange,
    DuplicateValue,
    NoEndogenous,
    MissingEquation,
    DuplicateEquation,
    UnknownTarget,
    UnknownIdentifier,
    SelfReference,
    Cycle,
    RangeViolation,
    TypeError,
    ActionNotEndogenous,
    DuplicateAgentAction,
  };

  Category category;
  std::vector<std::string> variables;
  std::string message;
};

std::string_view category_name(Finding::Category c);

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const { return findings.empty(); }
  bool has(Finding::Category c) const;
};

// Partial assignment of endogenous variables, by name.
using Intervention = std::map<std::string, std::string>;

class Assignment;

// Signature plus one structural equation per endogenous variable. Copies are
// cheap and share the validated, topologically sorted representation.
// Construction never throws; problems are recorded in `report()`.
class CausalModel {
 public:
  CausalModel(Signature signature, std::vector<StructuralEquation> equations);

  const Signature& signature() const;
  const std::vector<StructuralEquation>& equations() const;
  const ValidationReport& report() const;
  bool valid() const { return report().ok(); }

  std::size_t variable_count() const;
  const Variable& variable(std::size_t index) const;
  std::optional<std::size_t> variable_index(std::string_view name) const;
  const StructuralEquation* equation_for(std::string_view target) const;

  // Indices of endogenous variables in evaluation order (empty when cyclic).
  std::span<const std::size_t> evaluation_order() const;
  // Variable indices an endogenous variable's equation reads.
  std::span<const std::size_t> parents(std::size_t variable_index) const;
  // Equation of the endogenous variable at `variable_index`.
  const StructuralEquation& equation_at(std::size_t variable_index) const;

  // Copy with `equation` replacing the equation of the same target.
  CausalModel with_equation(StructuralEquation equation) const;
  CausalModel with_agent_of(std::map<std::string, AgentId> agent_of) const;

  friend bool operator==(const CausalModel& a, const CausalModel& b);

  struct Impl;

 private:
  explicit CausalModel(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

ValidationReport validate_model(const CausalModel& model);

// Assignment of every exogenous variable, stored as range indices in the
// order of `Signature::exogenous`.
class Context {
 public:
  Context() = default;
  explicit Context(std::vector<std::size_t> value_indices) : values_(std::move(value_indices)) {}

  // Throws SignatureMismatch when not total or a value is out of range.
  static Context from_names(const Signature& signature,
                            const std::map<std::string, std::string>& values);

  const std::vector<std::size_t>& values() const { return values_; }
  std::map<std::string, std::string> to_names(const Signature& signature) const;

  bool operator==(const Context&) const = default;

 private:
  std::vector<std::size_t> values_;
};

class CausalSetting {
 public:
  // Throws SignatureMismatch when the context does not fit the model.
  CausalSetting(CausalModel model, Context context);

  const CausalModel& model() const { return model_; }
  const Context& context() const { return context_; }

  bool operator==(const CausalSetting&) const = default;

 private:
  CausalModel model_;
  Context context_;
};

// Values of all variables (exogenous first, then endogenous) of one model.
class Assignment {
 public:
  Assignment(CausalModel model, std::vector<std::size_t> values);

  std::string_view operator[](std::string_view name) const;
  std::size_t index_at(std::size_t variable) const { return values_[variable]; }
  const std::vector<std::size_t>& indices() const { return values_; }
  std::map<std::string, std::string> to_map() const;

  bool operator==(const Assignment& other) const { return values_ == other.values_; }

 private:
  CausalModel model_;
  std::vector<std::size_t> values_;
};

// Solution of the model under `iv`. Throws InvalidModel, SignatureMismatch
// or EquationRangeError.
Assignment evaluate(const CausalSetting& setting, const Intervention& iv = {});

// Same as `evaluate` but with a caller-chosen topological order of the
// endogenous variable indices; throws InvalidModel if `order` is not one.
Assignment evaluate_with_order(const CausalSetting& setting, const Intervention& iv,
                               std::span<const std::size_t> order);

bool holds(const CausalSetting& setting, const Intervention& iv, const OutcomeFormula& phi);

// Repeated `holds` queries against one model, intervention and formula with
// names resolved once. Not thread-safe; use one per thread.
class Evaluator {
 public:
  // Throws InvalidModel or SignatureMismatch.
  Evaluator(CausalModel model, const Intervention& iv, const OutcomeFormula& phi);

  // Exogenous value indices in `Signature::exogenous` order.
  bool holds(std::span<const std::size_t> context);
  const std::vector<std::size_t>& solve(std::span<const std::size_t> context);

 private:
  struct CompiledFormula {
    OutcomeFormula::Kind kind;
    std::size_t variable = 0;
    std::optional<std::size_t> value;  // nullopt: value outside the range
    std::vector<std::size_t> operands;  // indices into nodes_
  };
  std::size_t compile(const OutcomeFormula& f);
  bool check(std::size_t node) const;

  CausalModel model_;
  std::vector<std::optional<std::size_t>> forced_;
  std::vector<CompiledFormula> nodes_;
  std::size_t root_ = 0;
  std::vector<std::size_t> values_;
};

// Throws SignatureMismatch when `iv` names non-endogenous variables or
// values outside their ranges.
void check_intervention(const CausalModel& model, const Intervention& iv);

// Throws SignatureMismatch unless `phi` only mentions declared variables and
// values in their ranges.
void check_formula(const Signature& signature, const OutcomeFormula& phi);

}  // namespace groupblame::causal
