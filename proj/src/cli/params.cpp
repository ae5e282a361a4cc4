#include "groupblame/cli/params.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

#include "groupblame/error.hpp"

namespace groupblame::cli {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) out.push_back(part);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

std::optional<std::size_t> leaf_index(const std::vector<std::string>& parts, std::size_t at,
                                      const causal::Expr& expr, const std::string& path) {
  const std::size_t leaves = expr.number_leaves().size();
  if (at == parts.size()) {
    if (leaves != 1) {
      throw UsageError("`" + path + "` has " + std::to_string(leaves) +
                       " number literals; append .k to pick one (k from 0)");
    }
    return 0;
  }
  if (at + 1 != parts.size()) throw UsageError("`" + path + "` has trailing components");
  std::size_t k = 0;
  try {
    std::size_t used = 0;
    k = std::stoul(parts[at], &used);
    if (used != parts[at].size()) throw std::invalid_argument("k");
  } catch (const std::exception&) {
    throw UsageError("`" + parts[at] + "` in `" + path + "` is not a literal index");
  }
  if (k >= leaves) throw UsageError("`" + path + "`: expression has only " + std::to_string(leaves) + " literals");
  return k;
}

// Visits every leaf the path names; `fn(current) -> replacement`.
template <typename Fn>
blame::Scenario visit(const blame::Scenario& s, const std::string& path, Fn&& fn) {
  auto parts = split(path, '.');
  if (parts.empty()) throw UsageError("empty parameter path");
  blame::Scenario out = s;
  std::size_t hits = 0;
  auto on_expr = [&](causal::Expr& e, std::size_t at) {
    std::size_t k = *leaf_index(parts, at, e, path);
    e = e.with_number_leaf(k, fn(e.number_leaves()[k]));
    ++hits;
  };

  const std::string& head = parts[0];
  if ((head == "N" || head == "balance") && parts.size() == 1) {
    out.balance = fn(s.balance);
    return out;
  }
  if (head == "baseline_cost") {
    on_expr(out.baseline_cost, 1);
    return out;
  }
  if (head == "exogenous") {
    if (parts.size() != 3) throw UsageError("expected exogenous.<variable>.<value>");
    const auto* f = s.base_state.as_factored();
    if (!f) throw UsageError("`" + path + "`: the scenario has an explicit state, not marginals");
    auto state = out.base_state;
    const auto& exo = f->model.signature().exogenous;
    for (std::size_t i = 0; i < exo.size(); ++i) {
      if (parts[1] != "*" && parts[1] != exo[i].name) continue;
      auto idx = exo[i].index_of(parts[2]);
      if (!idx) throw UsageError("`" + parts[2] + "` is not a value of `" + exo[i].name + "`");
      std::vector<double> p = f->marginals[i].probabilities;
      double old = p[*idx];
      double next = fn(old);
      if (!(next >= 0 && next <= 1)) {
        throw InvalidScenario("probability " + causal::format_number(next) + " for `" + exo[i].name + "." +
                              parts[2] + "` is outside [0, 1]");
      }
      // Other values keep their proportions; two-valued ranges take 1 - p.
      double rest = 1 - old;
      for (std::size_t v = 0; v < p.size(); ++v) {
        if (v == *idx) continue;
        if (p.size() == 2) {
          p[v] = 1 - next;
        } else {
          p[v] = rest > 0 ? p[v] * (1 - next) / rest : (1 - next) / static_cast<double>(p.size() - 1);
        }
      }
      p[*idx] = next;
      state = state.with_marginal(exo[i].name, p);
      ++hits;
    }
    if (hits == 0) throw UsageError("no exogenous variable matches `" + parts[1] + "`");
    out.base_state = state;
    return out;
  }
  if (head == "option") {
    if (parts.size() < 3) throw UsageError("expected option.<name>.cost or option.<name>.shift...");
    blame::OptionTemplate* opt = nullptr;
    for (auto& o : out.menu) {
      if (o.name == parts[1]) opt = &o;
    }
    if (!opt) throw UsageError("no option named `" + parts[1] + "`");
    if (parts[2] == "cost") {
      on_expr(opt->cost, 3);
      return out;
    }
    if ((parts[2] == "shift" || parts[2] == "set") && parts.size() >= 5) {
      for (auto& effect : opt->effects) {
        if (auto* sh = std::get_if<blame::ShiftMarginal>(&effect); sh && parts[2] == "shift") {
          if ((parts[3] == "*" || parts[3] == sh->variable) && parts[4] == sh->value) on_expr(sh->delta, 5);
        } else if (auto* sm = std::get_if<blame::SetMarginal>(&effect); sm && parts[2] == "set") {
          if (parts[3] != "*" && parts[3] != sm->variable) continue;
          for (auto& [value, expr] : sm->distribution) {
            if (value == parts[4]) on_expr(expr, 5);
          }
        }
      }
      if (hits == 0) throw UsageError("no " + parts[2] + " effect in `" + parts[1] + "` matches `" + path + "`");
      return out;
    }
  }
  throw UsageError("unknown parameter path `" + path + "`");
}

}  // namespace

blame::Scenario with_parameter(const blame::Scenario& scenario, const std::string& path, double value) {
  return visit(scenario, path, [value](double) { return value; });
}

double parameter_value(const blame::Scenario& scenario, const std::string& path) {
  std::optional<double> first;
  visit(scenario, path, [&](double current) {
    if (!first) first = current;
    return current;
  });
  return *first;
}

std::vector<double> sweep_values(const std::string& range) {
  auto parts = split(range, ':');
  if (parts.size() != 3) throw UsageError("range must be lo:hi:step, got `" + range + "`");
  double v[3];
  for (int i = 0; i < 3; ++i) {
    try {
      std::size_t used = 0;
      v[i] = std::stod(parts[static_cast<std::size_t>(i)], &used);
      if (used != parts[static_cast<std::size_t>(i)].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw UsageError("`" + parts[static_cast<std::size_t>(i)] + "` in range is not a number");
    }
  }
  const double lo = v[0], hi = v[1], step = v[2];
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(step > 0) || hi < lo) {
    throw UsageError("range needs finite lo <= hi and step > 0");
  }
  const double count = std::floor((hi - lo) / step + 1e-9) + 1;
  if (count > 100000) throw UsageError("range has more than 100000 points");
  std::vector<double> out;
  for (int i = 0; i < static_cast<int>(count); ++i) {
    // Trim accumulation noise such as 0.30000000000000004.
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", lo + i * step);
    out.push_back(std::stod(buf));
  }
  return out;
}

}  // namespace groupblame::cli
