#pragma once

#include <string>
#include <vector>

#include "crmopo/types.hpp"

namespace crmopo {

/**
 * Finite constrained multi-objective MDP.
 *
 * Channels are reward functions r_i : S x A -> [0, r_max]. The first
 * n_objectives channels are maximized; the remaining n_constraints channels
 * are costs whose discounted returns must stay below the matching entry of
 * `limits`. Discounted returns use start distribution `initial` (rho).
 *
 * Layout:
 *   transition[a] is an S x S row-stochastic matrix, row s = P(. | s, a)
 *   rewards[i]    is an S x A table for channel i
 *   limits(k)     bounds channel n_objectives + k
 */
struct TabularCmdp {
    int n_states = 0;
    int n_actions = 0;
    int n_objectives = 0;   // m
    int n_constraints = 0;  // p
    double discount = 0.0;
    double r_max = 1.0;
    std::vector<Matrix> transition;
    std::vector<Matrix> rewards;
    Vector limits;
    Vector initial;

    int n_channels() const { return n_objectives + n_constraints; }
    // Upper bound on any discounted return: r_max / (1 - discount).
    double value_bound() const { return r_max / (1.0 - discount); }
};

// Structural validation. Returns one human-readable line per violation; an
// empty list means the model is well formed. Checks row-stochasticity of every
// transition row (tolerance 1e-9), channel range [0, r_max], initial
// distribution, limits length, discount in [0,1) and dimension consistency.
std::vector<std::string> validate_cmdp(const TabularCmdp& model);

}  // namespace crmopo
