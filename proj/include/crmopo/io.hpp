#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "crmopo/cmdp.hpp"
#include "crmopo/frontier.hpp"
#include "crmopo/optimizer.hpp"

namespace crmopo {

// Raised by load_cmdp on parse failures (message carries the byte offset),
// schema violations (message names the field) and validation failures
// (message lists the violations from validate_cmdp).
struct CmdpLoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Versioned structured-text model format ("cmdp/1"); schema documented in
// docs/cmdp-format.md. Doubles are serialized shortest-round-trip, so
// save/load round trips are bit-exact.
TabularCmdp load_cmdp(const std::string& path);
void save_cmdp(const TabularCmdp& model, const std::string& path);

std::string cmdp_to_json(const TabularCmdp& model);
TabularCmdp cmdp_from_json(const std::string& text, const std::string& origin = "<string>");

// One CSV row per iteration; columns documented in docs/trace-format.md.
// Channel indices in headers are 1-based (J_3 is the first constraint of a
// 2-objective model).
void write_trace_csv(const RunTrace& trace, int n_objectives, int n_constraints,
                     const std::string& path);

// One row per frontier point: objectives, constraints, then the policy rows
// flattened state-major.
void write_frontier_csv(const std::vector<FrontierPoint>& frontier, const std::string& path);

}  // namespace crmopo
