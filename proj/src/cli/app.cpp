#include "groupblame/cli/app.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "groupblame/attribution/shapley.hpp"
#include "groupblame/cli/params.hpp"
#include "groupblame/cli/report.hpp"
#include "groupblame/dsl/builtins.hpp"
#include "groupblame/dsl/parser.hpp"
#include "groupblame/dsl/serialize.hpp"
#include "groupblame/error.hpp"

namespace groupblame::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

// Loading failed; diagnostics were already written.
struct LoadFailed {};

struct Globals {
  std::string format = "table";
  bool format_given = false;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::optional<double> tolerance;
  bool timing = false;
};

Format parse_format(const std::string& name) {
  if (name == "json") return Format::Json;
  if (name == "csv") return Format::Csv;
  return Format::Table;
}

bool is_builtin(const std::string& name) {
  for (const auto& b : dsl::builtins()) {
    if (b.name == name) return true;
  }
  return false;
}

// `arg` is a file path, `-` for standard input, `builtin:NAME`, or a bare
// built-in name that does not collide with an existing file.
blame::Scenario load(const std::string& arg, std::ostream& err) {
  std::string label = arg;
  std::string source;
  if (arg.rfind("builtin:", 0) == 0 || (!std::filesystem::exists(arg) && is_builtin(arg))) {
    const std::string name = arg.rfind("builtin:", 0) == 0 ? arg.substr(8) : arg;
    try {
      source = dsl::find_builtin(name).source;
    } catch (const UnknownScenario& e) {
      throw UsageError(e.what());
    }
    label = name + ".blame";
  } else if (arg == "-") {
    std::stringstream ss;
    ss << std::cin.rdbuf();
    source = ss.str();
    label = "<stdin>";
  } else {
    std::ifstream in(arg, std::ios::binary);
    if (!in) {
      err << "error: cannot read `" << arg << "`\n";
      throw LoadFailed{};
    }
    std::stringstream ss;
    ss << in.rdbuf();
    source = ss.str();
  }
  auto parsed = dsl::parse(source);
  for (const auto& d : parsed.diagnostics) err << dsl::format_diagnostic(d, label) << "\n";
  if (!parsed.ok()) throw LoadFailed{};
  return std::move(*parsed.scenario);
}

ScenarioRef reference(const blame::Scenario& s) {
  ScenarioRef ref{s.name, std::nullopt};
  try {
    ref.fingerprint = sha256_hex(dsl::serialize(s));
  } catch (const SerializationError&) {
  }
  return ref;
}

std::string coalition_text(const blame::BlameEngine& engine, blame::Coalition s) {
  std::string out = "{";
  for (const auto& a : engine.members(s)) out += (out.size() > 1 ? "," : "") + a.name;
  return out + "}";
}

blame::Coalition parse_coalition(const blame::Scenario& s, const std::string& text) {
  blame::Coalition c;
  std::stringstream in(text);
  std::string name;
  while (std::getline(in, name, ',')) {
    auto b = name.find_first_not_of(" \t");
    auto e = name.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    name = name.substr(b, e - b + 1);
    auto idx = s.agent_index(name);
    if (!idx) throw UsageError("unknown agent `" + name + "` in --coalition");
    c = c.with(*idx);
  }
  return c;
}

Json base_metadata() { return Json{{"tool", "groupblame"}, {"version", kVersion}}; }

// --- commands -------------------------------------------------------------

int cmd_validate(const std::string& file, Report& r, std::ostream& err) {
  r.columns = {{"check", "string"}, {"ok", "boolean"}, {"detail", "string"}};
  std::optional<blame::Scenario> loaded;
  try {
    loaded = load(file, err);
  } catch (const LoadFailed&) {
    r.add_row({std::string("parse"), false, std::string("see diagnostics")});
    return kExitFailure;
  }
  const blame::Scenario& s = *loaded;
  r.scenario = reference(s);
  r.add_row({std::string("parse"), true, std::string("no errors")});
  const auto& sig = s.base_state.signature();
  r.add_row({std::string("model"), true,
             std::to_string(sig.exogenous.size()) + " exogenous, " + std::to_string(sig.endogenous.size()) +
                 " endogenous, " + std::to_string(sig.agent_of.size()) + " actions"});
  blame::BlameEngine engine(s);
  std::size_t instances = engine.instantiate_menu(blame::Coalition::full(s.agents.size())).size() - 1;
  r.add_row({std::string("scenario"), true,
             std::to_string(s.agents.size()) + " agents, " + std::to_string(instances) +
                 " option instances for the full group"});
  auto mono = blame::validate_monotonicity(engine);
  std::string detail = std::to_string(mono.pairs_checked) + (mono.exhaustive ? " pairs (all)" : " sampled pairs") +
                       ", " + std::to_string(mono.violation_count) + " violations";
  r.add_row({std::string("monotonicity"), mono.ok(), detail});
  if (!mono.ok()) {
    Json v = Json::array();
    for (std::size_t i = 0; i < mono.violations.size() && i < 20; ++i) {
      const auto& x = mono.violations[i];
      v.push_back({{"smaller", coalition_text(engine, x.smaller)},
                   {"larger", coalition_text(engine, x.larger)},
                   {"gb_smaller", x.gb_smaller},
                   {"gb_larger", x.gb_larger}});
    }
    r.summary = {{"violations", v}};
    err << "error: gb is not monotone (" << mono.violation_count << " violating pairs)\n";
    return kExitFailure;
  }
  return kExitOk;
}

causal::Intervention parse_interventions(const std::vector<std::string>& items) {
  causal::Intervention iv;
  for (const auto& item : items) {
    std::stringstream in(item);
    std::string one;
    while (std::getline(in, one, ',')) {
      auto eq = one.find('=');
      if (eq == std::string::npos) throw UsageError("--intervene expects VAR=value, got `" + one + "`");
      auto trim = [](std::string t) {
        auto b = t.find_first_not_of(" \t");
        auto e = t.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
      };
      iv[trim(one.substr(0, eq))] = trim(one.substr(eq + 1));
    }
  }
  return iv;
}

int cmd_query(const blame::Scenario& s, const std::vector<std::string>& intervene,
              const std::optional<std::string>& outcome, std::optional<std::uint64_t> samples,
              const Globals& g, Report& r) {
  causal::OutcomeFormula phi = s.outcome;
  if (outcome) {
    auto parsed = dsl::parse_formula(*outcome);
    if (!parsed.value) {
      std::string msg = "--outcome is not a formula";
      for (const auto& d : parsed.diagnostics) msg += "\n  " + dsl::format_diagnostic(d, "--outcome");
      throw UsageError(msg);
    }
    phi = *parsed.value;
  }
  const auto iv = parse_interventions(intervene);
  const causal::CausalModel* model = nullptr;
  if (const auto* f = s.base_state.as_factored()) {
    model = &f->model;
  } else {
    model = &s.base_state.as_explicit()->settings.front().setting.model();
  }
  try {
    causal::check_intervention(*model, iv);
    causal::check_formula(model->signature(), phi);
  } catch (const SignatureMismatch& e) {
    throw UsageError(e.what());
  }
  auto evaluate = [&](const causal::OutcomeFormula& f) {
    return samples ? epistemic::sample_prob(s.base_state, iv, f, *samples, g.seed)
                   : epistemic::prob(s.base_state, iv, f);
  };
  r.columns = {{"role", "string"}, {"event", "string"}, {"probability", "number"}, {"std_error", "number"}};
  auto main = evaluate(phi);
  r.add_row({std::string("outcome"), phi.to_string(), main.value, main.std_error});
  for (const auto& var : phi.variables()) {
    const auto* v = model->signature().find(var);
    for (const auto& value : v->range) {
      auto e = causal::OutcomeFormula::event(var, value);
      auto p = evaluate(e);
      r.add_row({std::string("marginal"), e.to_string(), p.value, p.std_error});
    }
  }
  std::string iv_text;
  for (const auto& [k, v] : iv) iv_text += (iv_text.empty() ? "" : ",") + k + "=" + v;
  r.metadata["intervention"] = iv_text;
  r.metadata["method"] = samples ? "sampled" : "exact";
  if (samples) {
    r.metadata["samples"] = *samples;
    r.metadata["seed"] = g.seed;
  }
  return kExitOk;
}

int cmd_blame_group(const blame::Scenario& s, const std::optional<std::string>& coalition, bool all, Report& r) {
  blame::BlameEngine engine(s);
  const std::size_t m = s.agents.size();
  std::vector<blame::Coalition> list;
  if (all) {
    if (m > 20) throw UsageError("--all is limited to 20 agents");
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) list.emplace_back(mask);
  } else if (coalition) {
    list.push_back(parse_coalition(s, *coalition));
  } else {
    list.push_back(blame::Coalition::full(m));
  }
  r.columns = {{"coalition", "string"}, {"size", "integer"}, {"gb", "number"}, {"argmax", "string"},
               {"argmax_cost", "number"}};
  for (auto c : list) {
    auto g = engine.gb(c);
    r.add_row({coalition_text(engine, c), static_cast<std::int64_t>(c.size()), g.value, g.argmax, g.argmax_cost});
  }
  return kExitOk;
}

int cmd_blame_agent(const blame::Scenario& s, bool exact, std::optional<std::uint64_t> samples, bool repair,
                    const Globals& g, Report& r) {
  if (exact && samples) throw UsageError("--exact and --sample exclude each other");
  if (repair && samples) throw UsageError("--repair applies to exact attribution only");
  if (samples && *samples == 0) throw UsageError("--sample needs at least one permutation");
  blame::BlameEngine engine(s);
  attribution::AttributionResult result;
  if (samples) {
    result = attribution::shapley_sampled(engine, *samples, g.seed, g.threads);
  } else {
    auto game = attribution::coalition_values(engine, {g.threads, repair});
    result = attribution::shapley_exact(game);
  }
  r.columns = {{"agent", "string"}, {"db", "number"}, {"std_error", "number"}};
  Json shapley = Json::object();
  for (std::size_t i = 0; i < result.agents.size(); ++i) {
    r.add_row({result.agents[i].name, result.values[i], result.std_errors[i]});
    shapley[result.agents[i].name] = result.values[i];
  }
  r.summary = {{"group_gb", result.group_value},
               {"efficiency_residual", result.efficiency_residual},
               {"shapley", shapley}};
  r.metadata["method"] = samples ? "sampled" : "exact";
  if (samples) {
    r.metadata["n_permutations"] = *samples;
    r.metadata["seed"] = g.seed;
  }
  r.metadata["monotone_repair"] = repair;
  return kExitOk;
}

int cmd_axioms(const blame::Scenario& s, const Globals& g, Report& r, std::ostream& err) {
  const double tol = g.tolerance.value_or(1e-9);
  auto a = attribution::check_axioms(s, {g.threads, false});
  r.columns = {{"property", "string"}, {"ok", "boolean"}, {"value", "number"}, {"detail", "string"}};
  r.add_row({std::string("efficiency"), a.efficiency_residual <= tol, a.efficiency_residual,
             std::string("|sum db - gb(Ag)|")});
  r.add_row({std::string("symmetry"), a.symmetry_deviation <= tol, a.symmetry_deviation,
             std::to_string(a.probes) + " permutation probes"});
  std::string dummies;
  for (const auto& d : a.dummy_agents) dummies += (dummies.empty() ? "" : ",") + d.name;
  r.add_row({std::string("dummy"), a.dummy_max_abs <= tol, a.dummy_max_abs,
             dummies.empty() ? std::string("no dummy agents") : "dummies: " + dummies});
  r.add_row({std::string("monotone"), a.monotone, Cell{}, std::string("gb(S) <= gb(T) for S within T")});
  r.add_row({std::string("nonnegative"), a.nonnegative, Cell{}, std::string("every db >= -1e-12")});
  r.summary = {{"group_gb", a.group_value}};
  r.metadata["tolerance"] = tol;
  if (!a.ok(tol)) {
    err << "error: attribution axioms do not all hold\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_sweep(const blame::Scenario& s, const std::string& path, const std::string& range,
              const std::optional<std::string>& coalition, bool attribution, const Globals& g, Report& r,
              std::ostream& err) {
  auto values = sweep_values(range);
  parameter_value(s, path);  // rejects a bad path before any work
  const blame::Coalition c = coalition ? parse_coalition(s, *coalition) : blame::Coalition::full(s.agents.size());
  r.columns = {{"value", "number"}, {"gb", "number"}, {"argmax", "string"}};
  if (attribution) {
    for (const auto& a : s.agents) r.columns.push_back({"db_" + a.name, "number"});
  }
  for (double v : values) {
    std::optional<blame::BlameEngine> engine;
    try {
      engine.emplace(with_parameter(s, path, v));
    } catch (const Error& e) {
      err << "error: at " << path << " = " << causal::format_number(v) << ": " << e.what() << "\n";
      return kExitFailure;
    }
    auto gb = engine->gb(c);
    std::vector<Cell> row{v, gb.value, gb.argmax};
    if (attribution) {
      auto result = attribution::shapley_exact(attribution::coalition_values(*engine, {g.threads, false}));
      for (double d : result.values) row.emplace_back(d);
    }
    r.add_row(std::move(row));
  }
  r.metadata["param"] = path;
  r.metadata["range"] = range;
  r.metadata["coalition"] = coalition.value_or("all agents");
  return kExitOk;
}

struct DemoValues {
  double group_gb = 0;
  std::string argmax;
  double delta_full = 0;
  attribution::AttributionResult shapley;
};

DemoValues demo_values(const blame::Scenario& s, unsigned threads) {
  blame::BlameEngine engine(s);
  const auto full = blame::Coalition::full(s.agents.size());
  DemoValues out;
  auto g = engine.gb(full);
  out.group_gb = g.value;
  out.argmax = g.argmax;
  for (const auto& cand : engine.instantiate_menu(full)) {
    if (cand.id == g.argmax && cand.option) {
      out.delta_full = blame::delta_group(s.base_state, cand.state, s.outcome);
    }
  }
  out.shapley = attribution::shapley_exact(attribution::coalition_values(engine, {threads, false}));
  return out;
}

int cmd_demo(const std::optional<std::string>& name, const Globals& g, Report& r) {
  std::vector<const dsl::Builtin*> selected;
  if (name) {
    try {
      selected.push_back(&dsl::find_builtin(*name));
    } catch (const UnknownScenario& e) {
      throw UsageError(e.what());
    }
  } else {
    for (const auto& b : dsl::builtins()) selected.push_back(&b);
  }
  r.columns = {{"scenario", "string"}, {"quantity", "string"}, {"check", "string"}, {"expected", "string"},
               {"actual", "string"}, {"tolerance", "number"}, {"ok", "boolean"}};
  bool all_ok = true;
  Json summaries = Json::array();
  for (const auto* b : selected) {
    auto s = dsl::builtin(b->name);
    auto v = demo_values(s, g.threads);
    Json shapley = Json::object();
    for (std::size_t i = 0; i < v.shapley.agents.size(); ++i) shapley[v.shapley.agents[i].name] = v.shapley.values[i];
    summaries.push_back({{"scenario", b->name},
                         {"group_gb", v.group_gb},
                         {"argmax", v.argmax},
                         {"delta_full", v.delta_full},
                         {"shapley", shapley},
                         {"efficiency_residual", v.shapley.efficiency_residual}});
    if (selected.size() == 1) r.scenario = reference(s);
    for (auto e : b->expected) {
      if (g.tolerance && e.check == dsl::Expectation::Check::Near) e.tolerance = *g.tolerance;
      std::string check = e.check == dsl::Expectation::Check::Near      ? "near"
                          : e.check == dsl::Expectation::Check::AtLeast ? "at_least"
                                                                        : "equals";
      bool ok = false;
      std::string actual;
      if (e.quantity == "argmax") {
        actual = v.argmax;
        ok = e.accepts(actual);
      } else {
        double x = 0;
        if (e.quantity == "group_gb") {
          x = v.group_gb;
        } else if (e.quantity == "delta_full") {
          x = v.delta_full;
        } else if (e.quantity.rfind("shapley.", 0) == 0) {
          x = v.shapley.value_of(e.quantity.substr(8));
        }
        actual = causal::format_number(x);
        ok = e.accepts(x);
      }
      all_ok = all_ok && ok;
      std::string expected = e.check == dsl::Expectation::Check::Equals ? e.text : causal::format_number(e.value);
      r.add_row({b->name, e.quantity, check, expected, actual,
                 e.check == dsl::Expectation::Check::Near ? Cell{e.tolerance} : Cell{}, ok});
    }
  }
  r.summary = selected.size() == 1 ? summaries[0] : Json{{"scenarios", summaries}};
  r.metadata["method"] = "exact";
  if (g.tolerance) r.metadata["tolerance_override"] = *g.tolerance;
  return all_ok ? kExitOk : kExitToleranceBreach;
}

int cmd_export(const std::optional<std::string>& what, bool all, const std::string& dir, std::ostream& out,
               std::ostream& err) {
  if (all) {
    if (dir.empty()) throw UsageError("export --all needs --dir");
    std::filesystem::create_directories(dir);
    for (const auto& b : dsl::builtins()) {
      std::ofstream f(std::filesystem::path(dir) / (b.name + ".blame"), std::ios::binary);
      f << dsl::serialize(dsl::builtin(b.name));
      if (!f) {
        err << "error: cannot write into `" << dir << "`\n";
        return kExitFailure;
      }
    }
    return kExitOk;
  }
  if (!what) throw UsageError("export needs a scenario or --all");
  out << dsl::serialize(load(*what, err));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Group blameworthiness for structural causal scenarios", "groupblame"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  Globals g;
  app.add_option("--format", g.format, "Report format")
      ->check(CLI::IsMember({"json", "csv", "table"}))
      ->each([&](const std::string&) { g.format_given = true; });
  app.add_option("--seed", g.seed, "Seed for sampled methods");
  app.add_option("--threads", g.threads, "Worker threads (0: one per core)");
  app.add_option("--tolerance", g.tolerance, "Tolerance for axiom checks and demo comparisons")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--timing", g.timing, "Add runtime to the report metadata (breaks byte-identical output)");

  std::string file;
  auto* validate = app.add_subcommand("validate", "Parse a scenario, check it and check gb monotonicity");
  validate->add_option("scenario", file, "Scenario file, `-`, or built-in name")->required();

  std::vector<std::string> intervene;
  std::optional<std::string> outcome;
  std::optional<std::uint64_t> query_samples;
  auto* query = app.add_subcommand("query", "Outcome probability under the base epistemic state");
  query->add_option("scenario", file)->required();
  query->add_option("--intervene", intervene, "VAR=value, repeatable");
  query->add_option("--outcome", outcome, "Formula to evaluate instead of the scenario outcome");
  query->add_option("--sample", query_samples, "Monte-Carlo estimate with this many samples");

  auto* blame_cmd = app.add_subcommand("blame", "Group and per-agent blame");
  blame_cmd->require_subcommand(1);
  std::optional<std::string> coalition;
  bool all = false;
  auto* group = blame_cmd->add_subcommand("group", "gb and its argmax option");
  group->add_option("scenario", file)->required();
  auto* coalition_opt = group->add_option("--coalition", coalition, "Comma-separated agents; \"\" is empty");
  group->add_flag("--all", all, "Every coalition")->excludes(coalition_opt);

  bool exact = false;
  bool repair = false;
  std::optional<std::uint64_t> agent_samples;
  auto* agent = blame_cmd->add_subcommand("agent", "Shapley attribution of the group's gb");
  agent->add_option("scenario", file)->required();
  agent->add_flag("--exact", exact, "Exact attribution (default)");
  agent->add_option("--sample", agent_samples, "Permutation sampling with this many permutations");
  agent->add_flag("--repair", repair, "Use the monotone repair max over subsets");

  auto* axioms = app.add_subcommand("axioms", "Efficiency, symmetry, dummy, monotonicity, non-negativity");
  axioms->add_option("scenario", file)->required();

  std::string path;
  std::string range;
  bool no_attribution = false;
  auto* sweep = app.add_subcommand("sweep", "gb and attribution across values of one parameter");
  sweep->add_option("scenario", file)->required();
  sweep->add_option("--param", path, "Dotted path such as exogenous.U2.yes")->required();
  sweep->add_option("--range", range, "lo:hi:step")->required();
  sweep->add_option("--coalition", coalition, "Coalition for the gb column (default all agents)");
  sweep->add_flag("--no-attribution", no_attribution, "Skip the per-agent db columns");

  std::optional<std::string> demo_name;
  auto* demo = app.add_subcommand("demo", "Run built-ins against their stored expected values");
  demo->add_option("name", demo_name, "Built-in name (default: all)");

  std::optional<std::string> export_what;
  std::string export_dir;
  bool export_all = false;
  auto* exp = app.add_subcommand("export", "Print a scenario in canonical form");
  exp->add_option("scenario", export_what, "Built-in name or scenario file");
  exp->add_flag("--all", export_all, "Write every built-in to --dir");
  exp->add_option("--dir", export_dir, "Output directory for --all");

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  const auto started = std::chrono::steady_clock::now();
  Report r;
  r.command = args;
  r.metadata = base_metadata();
  Format format = parse_format(g.format);
  if (sweep->parsed() && !g.format_given) format = Format::Csv;

  int status = kExitOk;
  try {
    if (exp->parsed()) return cmd_export(export_what, export_all, export_dir, out, err);
    if (validate->parsed()) {
      status = cmd_validate(file, r, err);
    } else if (demo->parsed()) {
      status = cmd_demo(demo_name, g, r);
    } else {
      auto s = load(file, err);
      r.scenario = reference(s);
      if (query->parsed()) {
        status = cmd_query(s, intervene, outcome, query_samples, g, r);
      } else if (group->parsed()) {
        status = cmd_blame_group(s, coalition, all, r);
      } else if (agent->parsed()) {
        status = cmd_blame_agent(s, exact, agent_samples, repair, g, r);
      } else if (axioms->parsed()) {
        status = cmd_axioms(s, g, r, err);
      } else if (sweep->parsed()) {
        status = cmd_sweep(s, path, range, coalition, !no_attribution, g, r, err);
      }
    }
  } catch (const LoadFailed&) {
    return kExitFailure;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error[" << e.code() << "]: " << e.what() << "\n";
    return kExitFailure;
  }
  if (g.timing) {
    r.metadata["runtime_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  }
  out << render(r, format);
  return status;
}

}  // namespace groupblame::cli
