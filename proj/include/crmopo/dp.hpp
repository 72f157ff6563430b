#pragma once

#include <vector>

#include "crmopo/cmdp.hpp"

namespace crmopo {

// Exact discounted quantities for one stochastic policy, all channels at once.
// q[i], adv[i] are S x A; v[i] is length S; objective(i) = rho^T v[i].
struct ValueProfile {
    std::vector<Matrix> q;
    std::vector<Vector> v;
    std::vector<Matrix> adv;
    Vector objective;
};

// Discounted state-action occupancy, normalized to total mass 1:
//   nu(s,a) = (1-gamma) sum_t gamma^t Pr(s_t = s, a_t = a).
struct Visitation {
    Matrix nu;        // S x A
    Vector mu_state;  // marginal, nu.rowwise().sum()
};

// Solves the per-channel Bellman systems by dense LU on (I - gamma P_pi).
// Exact up to factorization round-off; the system is nonsingular for any
// discount < 1. Throws std::runtime_error if the solve residual degrades.
ValueProfile exact_values(const TabularCmdp& model, const Matrix& policy);

Visitation visitation_measure(const TabularCmdp& model, const Matrix& policy);

// Exact policy gradient of channel i under the softmax parameterization,
// returned as an S x A table in the parameter layout:
//   grad(s,a) = (1/(1-gamma)) [ nu(s,a) q(s,a) - pi(a|s) sum_b nu(s,b) q(s,b) ].
// The q-table is pluggable so estimated tables reuse the same assembly.
Matrix policy_gradient_from_q(const TabularCmdp& model, const Matrix& policy,
                              const Matrix& q_table);

Matrix policy_gradient(const TabularCmdp& model, const Matrix& policy, int channel);

}  // namespace crmopo
