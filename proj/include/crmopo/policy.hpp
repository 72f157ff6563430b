#pragma once

#include "crmopo/types.hpp"

namespace crmopo {

// Row-wise softmax over an S x A parameter table. Each row is shifted by its
// max before exponentiation, so arbitrarily large parameters stay finite and
// per-state constant shifts leave the distribution unchanged.
// Throws std::invalid_argument on non-finite parameters.
Matrix policy_from_params(const Matrix& params);

// Log-policy gradient of the softmax parameterization at pair (s, a): an
// S x A table that is zero outside row s and e_a - pi(.|s) inside it.
// Rows sum to zero. Throws std::out_of_range on a bad index.
Matrix score_function(const Matrix& policy, int s, int a);

}  // namespace crmopo
