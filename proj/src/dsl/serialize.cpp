#include "groupblame/dsl/serialize.hpp"

#include <algorithm>
#include <cctype>

#include "groupblame/dsl/parser.hpp"
#include "groupblame/error.hpp"

namespace groupblame::dsl {

namespace {

using causal::format_number;

const std::string& checked(const std::string& name) {
  bool ok = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_');
  for (char c : name) ok = ok && (std::isalnum(static_cast<unsigned char>(c)) || c == '_');
  if (!ok || is_reserved(name)) throw SerializationError("`" + name + "` cannot be written as a name");
  return name;
}

std::string range_text(const causal::Variable& v) {
  std::string out = "{";
  for (std::size_t i = 0; i < v.range.size(); ++i) {
    if (i) out += ", ";
    out += checked(v.range[i]);
  }
  return out + "}";
}

// Bernoulli form only when the parser's complement reproduces the other
// entry bit for bit.
std::string marginal_text(const causal::Variable& v, const std::vector<double>& p) {
  if (p.size() == 2 && p[1] == 1 - p[0]) return "bernoulli(" + v.range[0] + ": " + format_number(p[0]) + ")";
  if (p.size() == 2 && p[0] == 1 - p[1]) return "bernoulli(" + v.range[1] + ": " + format_number(p[1]) + ")";
  std::string out = "{";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ", ";
    out += v.range[i] + ": " + format_number(p[i]);
  }
  return out + "}";
}

std::string names(const std::vector<AgentId>& agents) {
  std::string out;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (i) out += ", ";
    out += checked(agents[i].name);
  }
  return out;
}

void write_option(const blame::OptionTemplate& o, std::string& out) {
  out += "option " + checked(o.name);
  if (o.size) {
    out += "(" + checked(o.size->symbol) + " in " + std::to_string(o.size->lo) + ".." +
           std::to_string(o.size->hi) + ")";
  }
  out += " {\n";
  if (!o.required_agents.empty()) out += "  requires " + names(o.required_agents) + ";\n";
  if (!o.uncounted_agents.empty()) out += "  uncounted " + names(o.uncounted_agents) + ";\n";
  out += "  cost = " + o.cost.to_string() + ";\n";
  for (const auto& effect : o.effects) {
    if (const auto* s = std::get_if<blame::ShiftMarginal>(&effect)) {
      out += "  shift " + checked(s->variable) + "." + checked(s->value) + " += " + s->delta.to_string() + ";\n";
    } else if (const auto* s = std::get_if<blame::SetMarginal>(&effect)) {
      out += "  set " + checked(s->variable) + " ~ {";
      for (std::size_t i = 0; i < s->distribution.size(); ++i) {
        if (i) out += ", ";
        out += checked(s->distribution[i].first) + ": " + s->distribution[i].second.to_string();
      }
      out += "};\n";
    } else {
      const auto& a = std::get<blame::SetAction>(effect);
      out += "  set " + checked(a.variable) + " = " + checked(a.value) + ";\n";
    }
  }
  out += "}\n";
}

}  // namespace

std::string serialize(const blame::Scenario& s) {
  const auto* factored = s.base_state.as_factored();
  const auto* explicit_state = s.base_state.as_explicit();
  const causal::CausalModel* model = nullptr;
  if (factored) {
    model = &factored->model;
  } else {
    if (explicit_state->settings.empty()) throw SerializationError("the explicit state has no settings");
    model = &explicit_state->settings.front().setting.model();
    for (const auto& ws : explicit_state->settings) {
      if (!(ws.setting.model() == *model)) {
        throw SerializationError("explicit state settings use different models; only one can be written");
      }
    }
  }
  const causal::Signature& sig = model->signature();

  std::string out = "scenario " + checked(s.name) + "\n";

  std::vector<AgentId> agents = s.agents;
  std::sort(agents.begin(), agents.end(),
            [](const AgentId& a, const AgentId& b) { return natural_less(a.name, b.name); });
  out += "\n# [agents]\nagents " + names(agents) + "\n";

  out += "\n# [params]\n";
  out += "param N = " + format_number(s.balance) + "\n";
  out += "param baseline_cost = " + s.baseline_cost.to_string() + "\n";
  out += "param focal = " + checked(s.focal_epistemics) + "\n";

  out += "\n# [variables]\n";
  for (std::size_t i = 0; i < sig.exogenous.size(); ++i) {
    const auto& v = sig.exogenous[i];
    out += "exogenous " + checked(v.name) + " : " + range_text(v);
    if (factored) out += " ~ " + marginal_text(v, factored->marginals[i].probabilities);
    out += "\n";
  }
  for (const auto& v : sig.endogenous) {
    const auto* eq = model->equation_for(v.name);
    if (!eq) throw SerializationError("`" + v.name + "` has no equation");
    out += "endogenous " + checked(v.name) + " : " + range_text(v) + " = " + eq->body.to_string() + "\n";
  }
  if (explicit_state) {
    out += "state {\n";
    for (const auto& ws : explicit_state->settings) {
      out += "  context " + format_number(ws.weight) + " {";
      const auto& idx = ws.setting.context().values();
      for (std::size_t i = 0; i < idx.size(); ++i) {
        out += i ? ", " : " ";
        out += sig.exogenous[i].name + " = " + sig.exogenous[i].range[idx[i]];
      }
      out += idx.empty() ? "}\n" : " }\n";
    }
    out += "}\n";
  }

  out += "\n# [actions]\n";
  for (const auto& [variable, agent] : sig.agent_of) {
    out += "action " + checked(variable) + " -> " + checked(agent.name) + "\n";
  }

  out += "\n# [outcome]\noutcome " + s.outcome.to_string() + "\n";

  out += "\n# [options]\n";
  for (std::size_t i = 0; i < s.menu.size(); ++i) {
    if (i) out += "\n";
    write_option(s.menu[i], out);
  }
  return out;
}

}  // namespace groupblame::dsl
