#include "crmopo/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crmopo/dp.hpp"
#include "crmopo/frontier.hpp"
#include "crmopo/io.hpp"
#include "crmopo/policy.hpp"
#include "crmopo/rng.hpp"

namespace crmopo {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename T>
T get_or(const json& j, const char* name, T fallback) {
    auto it = j.find(name);
    return it == j.end() ? fallback : it->get<T>();
}

EvalMode parse_eval_mode(const std::string& s) {
    if (s == "exact") return EvalMode::exact;
    if (s == "td") return EvalMode::td;
    if (s == "monte-carlo") return EvalMode::monte_carlo;
    throw ParseError("unknown eval_mode '" + s + "'");
}

std::string eval_mode_name(EvalMode m) {
    switch (m) {
        case EvalMode::exact: return "exact";
        case EvalMode::td: return "td";
        case EvalMode::monte_carlo: return "monte-carlo";
    }
    return "exact";
}

MomentumSchedule parse_momentum(const std::string& s) {
    if (s == "zero") return MomentumSchedule::zero;
    if (s == "constant") return MomentumSchedule::constant;
    if (s == "theorem-rate") return MomentumSchedule::theorem_rate;
    throw ParseError("unknown momentum schedule '" + s + "'");
}

std::string momentum_name(MomentumSchedule m) {
    switch (m) {
        case MomentumSchedule::zero: return "zero";
        case MomentumSchedule::constant: return "constant";
        case MomentumSchedule::theorem_rate: return "theorem-rate";
    }
    return "zero";
}

RectifyRule parse_rectify(const std::string& s) {
    if (s == "lowest-index") return RectifyRule::lowest_index;
    if (s == "largest-violation") return RectifyRule::largest_violation;
    throw ParseError("unknown rectify_rule '" + s + "'");
}

UpdateForm parse_update_form(const std::string& s) {
    if (s == "closed-form") return UpdateForm::closed_form;
    if (s == "parameter-space") return UpdateForm::parameter_space;
    throw ParseError("unknown update_form '" + s + "'");
}

SimplexSolver parse_solver(const std::string& s) {
    if (s == "grid") return SimplexSolver::grid;
    if (s == "projected-gradient") return SimplexSolver::projected_gradient;
    throw ParseError("unknown simplex solver '" + s + "'");
}

OutputRule parse_output_rule(const std::string& s) {
    if (s == "uniform") return OutputRule::uniform;
    if (s == "last") return OutputRule::last;
    if (s == "best-scalarized") return OutputRule::best_scalarized;
    throw ParseError("unknown output_rule '" + s + "'");
}

std::string output_rule_name(OutputRule r) {
    switch (r) {
        case OutputRule::uniform: return "uniform";
        case OutputRule::last: return "last";
        case OutputRule::best_scalarized: return "best-scalarized";
    }
    return "uniform";
}

GeneratorSpec parse_generator(const json& j) {
    GeneratorSpec g;
    g.kind = get_or<std::string>(j, "kind", g.kind);
    g.seed = get_or<std::uint64_t>(j, "seed", g.seed);
    g.discount = get_or<double>(j, "discount", g.discount);
    g.r_max = get_or<double>(j, "r_max", g.r_max);
    g.n_states = get_or<int>(j, "n_states", g.n_states);
    g.n_actions = get_or<int>(j, "n_actions", g.n_actions);
    g.n_objectives = get_or<int>(j, "n_objectives", g.n_objectives);
    g.n_constraints = get_or<int>(j, "n_constraints", g.n_constraints);
    g.concentration = get_or<double>(j, "concentration", g.concentration);
    g.sparsity = get_or<double>(j, "sparsity", g.sparsity);
    g.limit_rule = get_or<std::string>(j, "limit_rule", g.limit_rule);
    g.limit_value = get_or<double>(j, "limit_value", g.limit_value);
    g.width = get_or<int>(j, "width", g.width);
    g.height = get_or<int>(j, "height", g.height);
    g.goals_per_objective = get_or<int>(j, "goals_per_objective", g.goals_per_objective);
    return g;
}

json generator_to_json(const GeneratorSpec& g) {
    json j;
    j["kind"] = g.kind;
    j["seed"] = g.seed;
    j["discount"] = g.discount;
    j["r_max"] = g.r_max;
    if (g.kind == "gridworld") {
        j["width"] = g.width;
        j["height"] = g.height;
        j["goals_per_objective"] = g.goals_per_objective;
        j["n_objectives"] = g.n_objectives;
        j["limit_value"] = g.limit_value;
    } else {
        j["n_states"] = g.n_states;
        j["n_actions"] = g.n_actions;
        j["n_objectives"] = g.n_objectives;
        j["n_constraints"] = g.n_constraints;
        j["concentration"] = g.concentration;
        j["sparsity"] = g.sparsity;
        j["limit_rule"] = g.limit_rule;
        j["limit_value"] = g.limit_value;
    }
    return j;
}

RunConfig parse_run(const json& j, const TabularCmdp& model) {
    RunConfig run;
    run.horizon = get_or<int>(j, "horizon", run.horizon);
    run.step_size = get_or<double>(j, "step_size", run.step_size);
    run.tolerance = get_or<double>(j, "tolerance", run.tolerance);
    run.eval_mode = parse_eval_mode(get_or<std::string>(j, "eval_mode", "exact"));
    if (auto it = j.find("td"); it != j.end()) {
        run.td.n_steps = get_or<int>(*it, "n_steps", run.td.n_steps);
        run.td.scale = get_or<double>(*it, "scale", run.td.scale);
        run.td.exponent = get_or<double>(*it, "exponent", run.td.exponent);
        if (run.td.n_steps < 1) throw ParseError("td.n_steps must be at least 1");
        if (!(run.td.exponent > 0.0 && run.td.exponent < 1.0))
            throw ParseError("td.exponent must lie strictly inside (0,1)");
    }
    if (auto it = j.find("mc"); it != j.end())
        run.mc.n_rollouts = get_or<int>(*it, "n_rollouts", run.mc.n_rollouts);
    run.batch_size = get_or<int>(j, "batch_size", run.batch_size);
    if (auto it = j.find("ca_npg"); it != j.end()) {
        const json& c = *it;
        if (auto pit = c.find("preferences"); pit != c.end()) {
            auto prefs = pit->get<std::vector<double>>();
            run.ca_npg.preferences = Eigen::Map<const Vector>(prefs.data(), prefs.size());
        }
        run.ca_npg.trust_weight = get_or<double>(c, "trust_weight", run.ca_npg.trust_weight);
        run.ca_npg.anchor_weight = get_or<double>(c, "anchor_weight", run.ca_npg.anchor_weight);
        run.ca_npg.ridge = get_or<double>(c, "ridge", run.ca_npg.ridge);
        run.ca_npg.solver = parse_solver(get_or<std::string>(c, "solver", "grid"));
        run.ca_npg.solver_tolerance =
            get_or<double>(c, "solver_tolerance", run.ca_npg.solver_tolerance);
        run.ca_npg.b1 = get_or<double>(c, "b1", run.ca_npg.b1);
        run.ca_npg.b2 = get_or<double>(c, "b2", run.ca_npg.b2);
    }
    if (auto it = j.find("momentum"); it != j.end()) {
        run.momentum = parse_momentum(get_or<std::string>(*it, "schedule", "zero"));
        run.momentum_alpha = get_or<double>(*it, "alpha", run.momentum_alpha);
    }
    run.rectify_rule = parse_rectify(get_or<std::string>(j, "rectify_rule", "lowest-index"));
    run.update_form = parse_update_form(get_or<std::string>(j, "update_form", "closed-form"));
    run.soft_mode = get_or<bool>(j, "soft_mode", run.soft_mode);
    run.log_exact = get_or<bool>(j, "log_exact", run.log_exact);

    if (auto it = j.find("schedule"); it != j.end()) {
        double kl = get_or<double>(*it, "kl_budget", std::log(model.n_actions));
        double b1 = get_or<double>(*it, "b1", run.ca_npg.b1);
        int m = run.soft_mode ? model.n_channels() : model.n_objectives;
        Schedule s = schedule_hyperparams(model, m, b1, kl, run.horizon);
        run.step_size = s.eta;
        run.tolerance = s.beta;
    }
    return run;
}

json run_to_json(const RunConfig& run) {
    json j;
    j["horizon"] = run.horizon;
    j["step_size"] = run.step_size;
    j["tolerance"] = run.tolerance;
    j["eval_mode"] = eval_mode_name(run.eval_mode);
    j["td"] = {{"n_steps", run.td.n_steps}, {"scale", run.td.scale}, {"exponent", run.td.exponent}};
    j["mc"] = {{"n_rollouts", run.mc.n_rollouts}};
    j["batch_size"] = run.batch_size;
    json c;
    if (run.ca_npg.preferences.size() > 0)
        c["preferences"] = std::vector<double>(
            run.ca_npg.preferences.data(),
            run.ca_npg.preferences.data() + run.ca_npg.preferences.size());
    c["trust_weight"] = run.ca_npg.trust_weight;
    c["anchor_weight"] = run.ca_npg.anchor_weight;
    c["ridge"] = run.ca_npg.ridge;
    c["solver"] = run.ca_npg.solver == SimplexSolver::grid ? "grid" : "projected-gradient";
    c["solver_tolerance"] = run.ca_npg.solver_tolerance;
    c["b1"] = run.ca_npg.b1;
    c["b2"] = run.ca_npg.b2;
    j["ca_npg"] = std::move(c);
    j["momentum"] = {{"schedule", momentum_name(run.momentum)}, {"alpha", run.momentum_alpha}};
    j["rectify_rule"] =
        run.rectify_rule == RectifyRule::lowest_index ? "lowest-index" : "largest-violation";
    j["update_form"] =
        run.update_form == UpdateForm::closed_form ? "closed-form" : "parameter-space";
    j["soft_mode"] = run.soft_mode;
    j["log_exact"] = run.log_exact;
    return j;
}

std::string resolve_output_dir(const std::string& from_spec) {
    if (!from_spec.empty()) return from_spec;
    if (const char* env = std::getenv("CRMOPO_OUTPUT_DIR"); env && *env) return env;
    return "runs";
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace

ExperimentSpec experiment_from_json(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw CmdpLoadError(origin + ": parse error at byte " + std::to_string(e.byte) + ": " +
                            e.what());
    }
    try {
        std::string format = get_or<std::string>(j, "format", "experiment/1");
        if (format != "experiment/1")
            throw ParseError("unsupported experiment format '" + format + "'");

        ExperimentSpec spec;
        auto model_it = j.find("model");
        if (model_it == j.end()) throw ParseError("missing 'model'");
        if (auto it = model_it->find("path"); it != model_it->end()) {
            spec.model = load_cmdp(it->get<std::string>());
        } else if (auto git = model_it->find("generator"); git != model_it->end()) {
            spec.generator = parse_generator(*git);
            spec.model_from_generator = true;
            spec.model = generate(spec.generator);
        } else if (auto iit = model_it->find("inline"); iit != model_it->end()) {
            spec.model = cmdp_from_json(iit->dump(), origin + "#model.inline");
        } else {
            throw ParseError("model must provide 'path', 'generator' or 'inline'");
        }

        spec.run = parse_run(j.value("run", json::object()), spec.model);
        if (auto it = j.find("oracle"); it != j.end()) {
            spec.oracle.enabled = get_or<bool>(*it, "enabled", false);
            spec.oracle.resolution = get_or<int>(*it, "resolution", spec.oracle.resolution);
            spec.oracle.gap_budget = get_or<double>(*it, "gap_budget", spec.oracle.gap_budget);
        }
        spec.output_rule = parse_output_rule(get_or<std::string>(j, "output_rule", "uniform"));
        spec.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", {0});
        if (spec.seeds.empty()) throw ParseError("seeds must be nonempty");
        spec.output_dir = get_or<std::string>(j, "output_dir", "");
        return spec;
    } catch (const json::exception& e) {
        throw CmdpLoadError(origin + ": schema error: " + e.what());
    } catch (const ParseError& e) {
        throw CmdpLoadError(origin + ": " + e.what());
    }
}

ExperimentSpec load_experiment(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CmdpLoadError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return experiment_from_json(buf.str(), path);
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec) {
    ExperimentOutcome outcome;
    outcome.output_dir = resolve_output_dir(spec.output_dir);

    std::error_code ec;
    fs::create_directories(outcome.output_dir, ec);

    // Manifest first: embeds the resolved model and configuration, and
    // doubles as the writability probe so a bad directory fails before any
    // seed runs.
    json manifest;
    manifest["format"] = "experiment/1";
    manifest["model"] = {{"inline", json::parse(cmdp_to_json(spec.model))}};
    if (spec.model_from_generator)
        manifest["model_origin"] = {{"generator", generator_to_json(spec.generator)}};
    manifest["run"] = run_to_json(spec.run);
    manifest["oracle"] = {{"enabled", spec.oracle.enabled},
                          {"resolution", spec.oracle.resolution},
                          {"gap_budget", spec.oracle.gap_budget}};
    manifest["output_rule"] = output_rule_name(spec.output_rule);
    manifest["seeds"] = spec.seeds;
    manifest["output_dir"] = outcome.output_dir;
    outcome.manifest_path = (fs::path(outcome.output_dir) / "manifest.json").string();
    write_text(outcome.manifest_path, manifest.dump(2) + "\n");

    std::vector<FrontierPoint> frontier;
    if (spec.oracle.enabled) {
        PolicyGrid grid;
        grid.resolution = spec.oracle.resolution;
        frontier = safe_pareto_front(spec.model, grid);
    }

    const int n_seeds = static_cast<int>(spec.seeds.size());
    outcome.seeds.assign(n_seeds, SeedResult{});

#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k < n_seeds; ++k) {
        SeedResult& result = outcome.seeds[k];
        result.seed = spec.seeds[k];
        try {
            RunConfig config = spec.run;
            config.seed = spec.seeds[k];
            RunTrace trace = run(spec.model, config);

            result.trace_path =
                (fs::path(outcome.output_dir) / ("trace_seed" + std::to_string(result.seed) + ".csv"))
                    .string();
            write_trace_csv(trace, spec.model.n_objectives, spec.model.n_constraints,
                            result.trace_path);

            result.n0_size = static_cast<int>(trace.n0.size());
            result.rectify_count = static_cast<int>(trace.iterations.size()) - result.n0_size;
            result.final_returns =
                exact_values(spec.model, policy_from_params(trace.final_params)).objective;

            if (!trace.n0.empty()) {
                Matrix selected = select_output(trace, spec.output_rule,
                                                derive_seed(result.seed, 0x5e1ec7ULL));
                result.selected_returns =
                    exact_values(spec.model, policy_from_params(selected)).objective;
                result.constraints_satisfied = true;
                for (int c = 0; c < spec.model.n_constraints; ++c)
                    if (result.selected_returns(spec.model.n_objectives + c) >
                        spec.model.limits(c) + spec.run.tolerance)
                        result.constraints_satisfied = false;
                if (spec.oracle.enabled)
                    result.gap = optimality_gap(
                        frontier, result.selected_returns.head(spec.model.n_objectives));
            }
            result.ok = true;
        } catch (const std::exception& e) {
            result.ok = false;
            result.error = e.what();
        }
    }

    json summary;
    summary["format"] = "summary/1";
    summary["output_dir"] = outcome.output_dir;
    summary["output_rule"] = output_rule_name(spec.output_rule);
    json per_seed = json::array();
    outcome.ok = true;
    for (const SeedResult& r : outcome.seeds) {
        json row;
        row["seed"] = r.seed;
        row["ok"] = r.ok;
        if (!r.ok) {
            row["error"] = r.error;
            outcome.ok = false;
        } else {
            row["trace"] = fs::path(r.trace_path).filename().string();
            row["n0_size"] = r.n0_size;
            row["rectify_count"] = r.rectify_count;
            row["final_returns"] = std::vector<double>(
                r.final_returns.data(), r.final_returns.data() + r.final_returns.size());
            if (r.selected_returns.size() > 0) {
                row["selected_returns"] = std::vector<double>(
                    r.selected_returns.data(),
                    r.selected_returns.data() + r.selected_returns.size());
                row["constraints_satisfied"] = r.constraints_satisfied;
            } else {
                row["n0_empty"] = true;
            }
            if (r.gap) {
                row["gap"] = *r.gap;
                row["gap_within_budget"] = *r.gap <= spec.oracle.gap_budget;
            }
        }
        per_seed.push_back(std::move(row));
    }
    summary["seeds"] = std::move(per_seed);
    outcome.summary_path = (fs::path(outcome.output_dir) / "summary.json").string();
    write_text(outcome.summary_path, summary.dump(2) + "\n");
    return outcome;
}

}  // namespace crmopo
