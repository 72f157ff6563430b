#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "crmopo/cmdp.hpp"

namespace crmopo {

// Temporal-difference evaluation config. The step size for the k-th update of
// a given (s,a) pair is scale / k^exponent; counts are tracked per pair so the
// decay matches each entry's own visit schedule.
struct TdConfig {
    int n_steps = 100000;       // K_TD
    double scale = 0.5;         // step-size numerator
    double exponent = 0.66;     // sigma, must lie strictly inside (0,1)
    std::uint64_t seed = 0;
};

// Monte-Carlo Q-estimation config. Each rollout draws a horizon
// H ~ Geometric(1 - sqrt(gamma)) and returns
//   r(s0,a0) + sum_{h=1..H} gamma^{h/2} r(s_h,a_h),
// an unbiased estimate of Q(s0,a0); n_rollouts estimates are averaged.
struct McConfig {
    int n_rollouts = 1000;
    std::uint64_t seed = 0;
};

// Weighted batch used for constraint checks: pairs drawn from rho x pi with
// weights summing to one, plus the resulting per-channel estimates.
struct BatchEstimate {
    std::vector<std::pair<int, int>> pairs;
    Vector weights;
    Vector values;  // one entry per channel
};

// On-policy TD(0) along a single restarted trajectory: with probability
// 1-gamma each step resets the state from the initial distribution; the TD
// target always bootstraps through the true transition sample. Q starts at
// zero. n_steps = 0 returns the zero table unchanged.
Matrix td_evaluate(const TabularCmdp& model, const Matrix& policy, int channel,
                   const TdConfig& config);

// Unbiased Q estimate at one pair. Rollout j uses an RNG derived from
// (config.seed, j), so the estimate is bit-identical for any thread count;
// the OpenMP variant and the serial reference fill the same per-rollout slots
// and reduce in index order.
double mc_q_estimate(const TabularCmdp& model, const Matrix& policy, int s, int a,
                     int channel, const McConfig& config);
double mc_q_estimate_serial(const TabularCmdp& model, const Matrix& policy, int s, int a,
                            int channel, const McConfig& config);

// Full S x A estimated table for one channel; pair (s,a) uses seed stream
// derive_seed(config.seed, s * n_actions + a).
Matrix mc_q_table(const TabularCmdp& model, const Matrix& policy, int channel,
                  const McConfig& config);

// Batch constraint estimation: draws batch_size pairs from rho x pi and
// averages the supplied q-tables over them. values(i) estimates the channel-i
// return. An optional hook reweights pairs (weights are normalized); by
// default all weights are 1/batch_size. Throws on an empty batch.
BatchEstimate estimate_constraints(const TabularCmdp& model, const Matrix& policy,
                                   const std::vector<Matrix>& q_tables, int batch_size,
                                   std::uint64_t seed,
                                   const std::function<double(int, int)>& weight_hook = {});

// Deterministic full-support batch: every pair with weight rho(s) pi(a|s).
// Fed exact q-tables this reproduces the exact returns (up to linear-solve
// round-off), which is how the exact evaluation mode computes its constraint
// estimates.
BatchEstimate exact_batch_estimate(const TabularCmdp& model, const Matrix& policy,
                                   const std::vector<Matrix>& q_tables);

}  // namespace crmopo
