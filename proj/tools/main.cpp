#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crmopo/experiment.hpp"
#include "crmopo/frontier.hpp"
#include "crmopo/generators.hpp"
#include "crmopo/io.hpp"

#include <nlohmann/json.hpp>

namespace {

using namespace crmopo;

int cmd_validate(const std::string& path) {
    TabularCmdp model;
    try {
        model = load_cmdp(path);
    } catch (const CmdpLoadError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    }
    std::printf("%s: valid (%d states, %d actions, %d objectives, %d constraints)\n",
                path.c_str(), model.n_states, model.n_actions, model.n_objectives,
                model.n_constraints);
    return 0;
}

GeneratorSpec load_generator_spec(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    std::string text;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) text.append(buf, n);
    std::fclose(f);

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ": parse error at byte " + std::to_string(e.byte) + ": " +
                                 e.what());
    }
    GeneratorSpec spec;
    auto set_str = [&](const char* k, std::string& v) { if (j.contains(k)) v = j[k].get<std::string>(); };
    auto set_int = [&](const char* k, int& v) { if (j.contains(k)) v = j[k].get<int>(); };
    auto set_dbl = [&](const char* k, double& v) { if (j.contains(k)) v = j[k].get<double>(); };
    set_str("kind", spec.kind);
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    set_dbl("discount", spec.discount);
    set_dbl("r_max", spec.r_max);
    set_int("n_states", spec.n_states);
    set_int("n_actions", spec.n_actions);
    set_int("n_objectives", spec.n_objectives);
    set_int("n_constraints", spec.n_constraints);
    set_dbl("concentration", spec.concentration);
    set_dbl("sparsity", spec.sparsity);
    set_str("limit_rule", spec.limit_rule);
    set_dbl("limit_value", spec.limit_value);
    set_int("width", spec.width);
    set_int("height", spec.height);
    set_int("goals_per_objective", spec.goals_per_objective);
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular constrained multi-objective policy optimization toolkit"};
    app.require_subcommand(1);

    // validate
    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "Check a model file");
    validate->add_option("file", validate_path, "Model file (cmdp/1 JSON)")->required();

    // generate
    std::string gen_spec_path, gen_out;
    std::uint64_t gen_seed = 0;
    bool gen_seed_set = false;
    CLI::App* gen = app.add_subcommand("generate", "Generate a model from a generator spec");
    gen->add_option("spec", gen_spec_path, "Generator spec (JSON)")->required();
    gen->add_option("-o,--output", gen_out, "Output model file")->required();
    gen->add_option("--seed", gen_seed, "Override the spec's seed")
        ->each([&](const std::string&) { gen_seed_set = true; });

    // run
    std::string run_spec_path, run_outdir;
    std::vector<std::uint64_t> run_seeds;
    int run_horizon = -1;
    std::string run_eval_mode;
    int oracle_flag = -1;
    CLI::App* runc = app.add_subcommand("run", "Run an experiment spec");
    runc->add_option("spec", run_spec_path, "Experiment spec (JSON)")->required();
    runc->add_option("--output-dir", run_outdir, "Override the output directory");
    runc->add_option("--seeds", run_seeds, "Override the seed list")->delimiter(',');
    runc->add_option("--horizon", run_horizon, "Override the iteration count");
    runc->add_option("--eval-mode", run_eval_mode, "Override eval mode (exact|td|monte-carlo)");
    runc->add_flag("--oracle,!--no-oracle",
                   [&](std::int64_t count) { oracle_flag = count > 0 ? 1 : 0; },
                   "Force the oracle comparison on or off");

    // frontier
    std::string frontier_path, frontier_out;
    int frontier_resolution = 11;
    CLI::App* front = app.add_subcommand("frontier", "Enumerate the safe Pareto frontier");
    front->add_option("file", frontier_path, "Model file (cmdp/1 JSON)")->required();
    front->add_option("--resolution", frontier_resolution, "Grid points per probability axis");
    front->add_option("-o,--output", frontier_out, "Output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) return cmd_validate(validate_path);

        if (*gen) {
            GeneratorSpec spec = load_generator_spec(gen_spec_path);
            if (gen_seed_set) spec.seed = gen_seed;
            TabularCmdp model = generate(spec);
            save_cmdp(model, gen_out);
            std::printf("wrote %s (%d states, %d actions, %d channels)\n", gen_out.c_str(),
                        model.n_states, model.n_actions, model.n_channels());
            return 0;
        }

        if (*runc) {
            ExperimentSpec spec = load_experiment(run_spec_path);
            if (!run_outdir.empty()) spec.output_dir = run_outdir;
            if (!run_seeds.empty()) spec.seeds = run_seeds;
            if (run_horizon > 0) spec.run.horizon = run_horizon;
            if (!run_eval_mode.empty()) {
                if (run_eval_mode == "exact") spec.run.eval_mode = EvalMode::exact;
                else if (run_eval_mode == "td") spec.run.eval_mode = EvalMode::td;
                else if (run_eval_mode == "monte-carlo") spec.run.eval_mode = EvalMode::monte_carlo;
                else throw std::runtime_error("unknown eval mode '" + run_eval_mode + "'");
            }
            if (oracle_flag >= 0) spec.oracle.enabled = oracle_flag == 1;

            ExperimentOutcome outcome = run_experiment(spec);
            for (const SeedResult& r : outcome.seeds) {
                if (!r.ok) {
                    std::fprintf(stderr, "seed %llu failed: %s\n",
                                 static_cast<unsigned long long>(r.seed), r.error.c_str());
                    continue;
                }
                std::printf("seed %llu: N0=%d rectified=%d trace=%s\n",
                            static_cast<unsigned long long>(r.seed), r.n0_size, r.rectify_count,
                            r.trace_path.c_str());
            }
            std::printf("summary: %s\n", outcome.summary_path.c_str());
            return outcome.ok ? 0 : 1;
        }

        if (*front) {
            TabularCmdp model = load_cmdp(frontier_path);
            PolicyGrid grid;
            grid.resolution = frontier_resolution;
            std::vector<FrontierPoint> frontier = safe_pareto_front(model, grid);
            write_frontier_csv(frontier, frontier_out);
            std::printf("wrote %s (%zu frontier points)\n", frontier_out.c_str(), frontier.size());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
