#include "crmopo/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "crmopo/rng.hpp"

namespace crmopo {

namespace {

int sample_next_state(const TabularCmdp& model, Rng& rng, int s, int a) {
    return rng.categorical(model.transition[a].row(s));
}

int sample_action(const Matrix& policy, Rng& rng, int s) {
    return rng.categorical(policy.row(s));
}

int sample_initial(const TabularCmdp& model, Rng& rng) {
    return rng.categorical(model.initial.transpose());
}

double single_rollout(const TabularCmdp& model, const Matrix& policy, int s, int a,
                      int channel, Rng& rng) {
    const Matrix& r = model.rewards[channel];
    const double half_step = std::sqrt(model.discount);
    std::uint64_t horizon = rng.geometric(half_step);

    double value = r(s, a);
    double weight = 1.0;
    for (std::uint64_t h = 0; h < horizon; ++h) {
        s = sample_next_state(model, rng, s, a);
        a = sample_action(policy, rng, s);
        weight *= half_step;
        value += weight * r(s, a);
    }
    return value;
}

double reduce_in_order(const std::vector<double>& slots) {
    double sum = 0.0;
    for (double v : slots) sum += v;
    return sum / static_cast<double>(slots.size());
}

}  // namespace

Matrix td_evaluate(const TabularCmdp& model, const Matrix& policy, int channel,
                   const TdConfig& config) {
    const int A = model.n_actions;
    Matrix q = Matrix::Zero(model.n_states, A);
    if (config.n_steps <= 0) return q;
    if (!(config.exponent > 0.0 && config.exponent < 1.0))
        throw std::invalid_argument("td_evaluate: exponent must lie in (0,1)");

    Rng rng(config.seed);
    std::vector<std::uint64_t> visits(static_cast<std::size_t>(model.n_states) * A, 0);

    int s = sample_initial(model, rng);
    int a = sample_action(policy, rng, s);
    for (int k = 0; k < config.n_steps; ++k) {
        int s_next = sample_next_state(model, rng, s, a);
        int a_next = sample_action(policy, rng, s_next);

        std::uint64_t count = ++visits[static_cast<std::size_t>(s) * A + a];
        double step = config.scale / std::pow(static_cast<double>(count), config.exponent);
        double target = model.rewards[channel](s, a) + model.discount * q(s_next, a_next);
        q(s, a) += step * (target - q(s, a));

        // Restarts keep the visited pairs distributed as the discounted
        // occupancy; the TD target above always uses the true sampled
        // successor, never the restarted state.
        if (rng.uniform() < 1.0 - model.discount) {
            s = sample_initial(model, rng);
            a = sample_action(policy, rng, s);
        } else {
            s = s_next;
            a = a_next;
        }
    }
    return q;
}

double mc_q_estimate(const TabularCmdp& model, const Matrix& policy, int s, int a,
                     int channel, const McConfig& config) {
    if (config.n_rollouts < 1) throw std::invalid_argument("mc_q_estimate: n_rollouts must be positive");
    std::vector<double> slots(config.n_rollouts);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < config.n_rollouts; ++j) {
        Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(j)));
        slots[j] = single_rollout(model, policy, s, a, channel, rng);
    }
    return reduce_in_order(slots);
}

double mc_q_estimate_serial(const TabularCmdp& model, const Matrix& policy, int s, int a,
                            int channel, const McConfig& config) {
    if (config.n_rollouts < 1) throw std::invalid_argument("mc_q_estimate: n_rollouts must be positive");
    std::vector<double> slots(config.n_rollouts);
    for (int j = 0; j < config.n_rollouts; ++j) {
        Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(j)));
        slots[j] = single_rollout(model, policy, s, a, channel, rng);
    }
    return reduce_in_order(slots);
}

Matrix mc_q_table(const TabularCmdp& model, const Matrix& policy, int channel,
                  const McConfig& config) {
    Matrix q(model.n_states, model.n_actions);
    for (int s = 0; s < model.n_states; ++s)
        for (int a = 0; a < model.n_actions; ++a) {
            McConfig pair_config = config;
            pair_config.seed = derive_seed(config.seed,
                                           static_cast<std::uint64_t>(s) * model.n_actions + a);
            q(s, a) = mc_q_estimate(model, policy, s, a, channel, pair_config);
        }
    return q;
}

BatchEstimate estimate_constraints(const TabularCmdp& model, const Matrix& policy,
                                   const std::vector<Matrix>& q_tables, int batch_size,
                                   std::uint64_t seed,
                                   const std::function<double(int, int)>& weight_hook) {
    if (batch_size < 1) throw std::invalid_argument("estimate_constraints: empty batch");
    if (static_cast<int>(q_tables.size()) != model.n_channels())
        throw std::invalid_argument("estimate_constraints: need one q-table per channel");

    BatchEstimate batch;
    batch.pairs.reserve(batch_size);
    batch.weights.resize(batch_size);

    Rng rng(seed);
    for (int j = 0; j < batch_size; ++j) {
        int s = sample_initial(model, rng);
        int a = sample_action(policy, rng, s);
        batch.pairs.emplace_back(s, a);
        batch.weights(j) = weight_hook ? weight_hook(s, a) : 1.0;
    }
    double total = batch.weights.sum();
    if (!(total > 0.0)) throw std::invalid_argument("estimate_constraints: weights sum to zero");
    batch.weights /= total;

    batch.values = Vector::Zero(model.n_channels());
    for (int i = 0; i < model.n_channels(); ++i)
        for (int j = 0; j < batch_size; ++j)
            batch.values(i) += batch.weights(j) * q_tables[i](batch.pairs[j].first,
                                                              batch.pairs[j].second);
    return batch;
}

BatchEstimate exact_batch_estimate(const TabularCmdp& model, const Matrix& policy,
                                   const std::vector<Matrix>& q_tables) {
    if (static_cast<int>(q_tables.size()) != model.n_channels())
        throw std::invalid_argument("exact_batch_estimate: need one q-table per channel");

    BatchEstimate batch;
    batch.weights.resize(model.n_states * model.n_actions);
    int j = 0;
    for (int s = 0; s < model.n_states; ++s)
        for (int a = 0; a < model.n_actions; ++a) {
            batch.pairs.emplace_back(s, a);
            batch.weights(j++) = model.initial(s) * policy(s, a);
        }

    batch.values = Vector::Zero(model.n_channels());
    for (int i = 0; i < model.n_channels(); ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < batch.pairs.size(); ++k)
            acc += batch.weights(k) * q_tables[i](batch.pairs[k].first, batch.pairs[k].second);
        batch.values(i) = acc;
    }
    return batch;
}

}  // namespace crmopo
