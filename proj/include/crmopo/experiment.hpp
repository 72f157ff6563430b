#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crmopo/cmdp.hpp"
#include "crmopo/generators.hpp"
#include "crmopo/optimizer.hpp"

namespace crmopo {

// Oracle comparison settings for an experiment: when enabled, the safe Pareto
// frontier is enumerated at `resolution` and each seed's selected output is
// scored by its optimality gap.
struct OracleConfig {
    bool enabled = false;
    int resolution = 21;
    double gap_budget = 0.5;
};

// A full experiment: model source, run configuration, seeds to sweep,
// output-selection rule and artifact directory. Parsed from the versioned
// "experiment/1" JSON format (docs/experiment-format.md). The `schedule`
// block, when present, overwrites step_size/tolerance with the prescribed
// values before anything runs; manifests always carry the resolved numbers.
struct ExperimentSpec {
    TabularCmdp model;
    GeneratorSpec generator;   // valid when model_from_generator
    bool model_from_generator = false;
    RunConfig run;
    OracleConfig oracle;
    OutputRule output_rule = OutputRule::uniform;
    std::vector<std::uint64_t> seeds;
    std::string output_dir;  // empty -> $CRMOPO_OUTPUT_DIR, then ./runs
};

ExperimentSpec load_experiment(const std::string& path);
ExperimentSpec experiment_from_json(const std::string& text,
                                    const std::string& origin = "<string>");

struct SeedResult {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    int n0_size = 0;
    int rectify_count = 0;
    Vector final_returns;
    Vector selected_returns;
    bool constraints_satisfied = false;
    std::optional<double> gap;
    std::string trace_path;
};

struct ExperimentOutcome {
    bool ok = false;
    std::string output_dir;
    std::string manifest_path;
    std::string summary_path;
    std::vector<SeedResult> seeds;
};

// Runs the sweep. Writes manifest.json first (so an unwritable directory
// fails before any run), one trace CSV per seed (seeds run concurrently),
// then summary.json. A failed seed is recorded in the summary and flips the
// outcome to not-ok; artifacts of other seeds are kept. The manifest embeds
// the resolved model and run configuration verbatim: re-running the manifest
// file reproduces every trace byte-for-byte.
ExperimentOutcome run_experiment(const ExperimentSpec& spec);

}  // namespace crmopo
