#pragma once

// Shared test models and independent oracles. The oracles deliberately avoid
// the library's solver routes: value iteration instead of the LU solve, a
// truncated geometric series instead of the occupancy linear system, central
// finite differences instead of the analytic gradient.

#include "crmopo/cmdp.hpp"
#include "crmopo/dp.hpp"
#include "crmopo/generators.hpp"
#include "crmopo/policy.hpp"

namespace testfx {

using crmopo::Matrix;
using crmopo::TabularCmdp;
using crmopo::Vector;

// Two-state chain: action 0 stays, action 1 flips. Channel 1 pays in state 0,
// channel 2 pays in state 1, channel 3 (cost) pays for flipping. Start in
// state 0, discount 0.9, cost limit 0.5. Always-stay earns (10, 0, 0).
inline TabularCmdp c2() {
    TabularCmdp model;
    model.n_states = 2;
    model.n_actions = 2;
    model.n_objectives = 2;
    model.n_constraints = 1;
    model.discount = 0.9;
    model.r_max = 1.0;
    model.transition = {Matrix{{1.0, 0.0}, {0.0, 1.0}}, Matrix{{0.0, 1.0}, {1.0, 0.0}}};
    model.rewards = {Matrix{{1.0, 1.0}, {0.0, 0.0}}, Matrix{{0.0, 0.0}, {1.0, 1.0}},
                     Matrix{{0.0, 1.0}, {0.0, 1.0}}};
    model.limits = Vector::Constant(1, 0.5);
    model.initial = Vector{{1.0, 0.0}};
    return model;
}

// Unconstrained single-objective variant of the chain.
inline TabularCmdp c2_single() {
    TabularCmdp model = c2();
    model.n_objectives = 1;
    model.n_constraints = 0;
    model.rewards.resize(1);
    model.limits = Vector(0);
    return model;
}

inline TabularCmdp random_model(std::uint64_t seed, int n_states, int n_actions,
                                int n_objectives, int n_constraints, double discount) {
    crmopo::GeneratorSpec spec;
    spec.kind = "random";
    spec.seed = seed;
    spec.n_states = n_states;
    spec.n_actions = n_actions;
    spec.n_objectives = n_objectives;
    spec.n_constraints = n_constraints;
    spec.discount = discount;
    spec.limit_rule = "uniform-fraction";
    spec.limit_value = 0.9;
    return crmopo::generate(spec);
}

inline Matrix uniform_policy(const TabularCmdp& model) {
    return Matrix::Constant(model.n_states, model.n_actions, 1.0 / model.n_actions);
}

// Fixed-point iteration Q <- r + gamma P Pi Q from zero.
inline Matrix value_iteration_q(const TabularCmdp& model, const Matrix& policy, int channel,
                                int sweeps = 5000) {
    Matrix q = Matrix::Zero(model.n_states, model.n_actions);
    for (int k = 0; k < sweeps; ++k) {
        Vector v = (q.array() * policy.array()).rowwise().sum();
        Matrix next(model.n_states, model.n_actions);
        for (int a = 0; a < model.n_actions; ++a)
            next.col(a) = model.rewards[channel].col(a) + model.discount * (model.transition[a] * v);
        q = next;
    }
    return q;
}

// Truncated series nu ~ (1-gamma) sum_{t<=T} gamma^t Pr(s_t, a_t).
inline Matrix visitation_series(const TabularCmdp& model, const Matrix& policy, int horizon = 500) {
    Vector state_dist = model.initial;
    Matrix nu = Matrix::Zero(model.n_states, model.n_actions);
    double weight = 1.0 - model.discount;
    for (int t = 0; t <= horizon; ++t) {
        nu += weight * Matrix(state_dist.asDiagonal() * policy);
        Vector next = Vector::Zero(model.n_states);
        for (int a = 0; a < model.n_actions; ++a)
            next += model.transition[a].transpose() * (state_dist.cwiseProduct(policy.col(a)));
        state_dist = next;
        weight *= model.discount;
    }
    return nu;
}

// Central finite difference of the channel return with respect to each
// softmax parameter.
inline Matrix fd_gradient(const TabularCmdp& model, const Matrix& params, int channel,
                          double step = 1e-5) {
    Matrix grad(params.rows(), params.cols());
    for (Eigen::Index s = 0; s < params.rows(); ++s)
        for (Eigen::Index a = 0; a < params.cols(); ++a) {
            Matrix hi = params, lo = params;
            hi(s, a) += step;
            lo(s, a) -= step;
            double f_hi =
                crmopo::exact_values(model, crmopo::policy_from_params(hi)).objective(channel);
            double f_lo =
                crmopo::exact_values(model, crmopo::policy_from_params(lo)).objective(channel);
            grad(s, a) = (f_hi - f_lo) / (2.0 * step);
        }
    return grad;
}

}  // namespace testfx
