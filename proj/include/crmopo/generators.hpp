#pragma once

#include <cstdint>
#include <string>

#include "crmopo/cmdp.hpp"

namespace crmopo {

// Deterministic model generators: identical specs (seed included) produce
// bit-identical models.
//
// random: transition rows ~ Dirichlet(concentration); rewards uniform on
// [0, r_max] and zeroed with probability `sparsity`; the start distribution
// mixes a Dirichlet draw with uniform mass so every state keeps probability
// at least 0.2 / n_states. Limits follow `limit_rule`:
//   "fixed"            every limit = limit_value
//   "uniform-fraction" limit_k = limit_value * (cost of the uniform policy)
//
// gridworld: width x height cells, actions {stay, up, down, left, right},
// deterministic moves clamped at walls. Each objective channel pays 1 in
// `goals_per_objective` seeded goal cells; one constraint channel pays 1 for
// every non-stay action ("move cost") with limit `limit_value`. Start
// distribution uniform.
struct GeneratorSpec {
    std::string kind = "random";  // "random" | "gridworld"
    std::uint64_t seed = 0;
    double discount = 0.9;
    double r_max = 1.0;

    // random
    int n_states = 4;
    int n_actions = 2;
    int n_objectives = 2;
    int n_constraints = 1;
    double concentration = 1.0;
    double sparsity = 0.0;
    std::string limit_rule = "uniform-fraction";
    double limit_value = 0.75;

    // gridworld
    int width = 3;
    int height = 3;
    int goals_per_objective = 1;
};

TabularCmdp generate(const GeneratorSpec& spec);

}  // namespace crmopo
