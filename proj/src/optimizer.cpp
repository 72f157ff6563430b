#include "crmopo/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "crmopo/dp.hpp"
#include "crmopo/policy.hpp"
#include "crmopo/rng.hpp"
#include "crmopo/types.hpp"

namespace crmopo {

Schedule schedule_hyperparams(const TabularCmdp& model, int n_objectives, double b1,
                              double kl_budget, int horizon) {
    if (n_objectives <= 0 || b1 <= 0.0 || kl_budget <= 0.0 || horizon <= 0)
        throw std::invalid_argument("schedule_hyperparams: inputs must be positive");
    const double gap = 1.0 - model.discount;
    const double dim = static_cast<double>(model.n_states) * model.n_actions;
    const double m = static_cast<double>(n_objectives);

    Schedule s;
    s.eta = gap * gap / (model.r_max * m * b1) *
            std::sqrt(kl_budget / (dim * static_cast<double>(horizon)));
    s.beta = 4.0 * m * b1 * std::sqrt(dim) / (gap * gap * std::sqrt(static_cast<double>(horizon))) *
             (model.r_max * std::sqrt(kl_budget) + 1.0);
    return s;
}

std::vector<int> check_constraints(const Vector& constraint_estimates, const Vector& limits,
                                   double tolerance) {
    if (constraint_estimates.size() != limits.size())
        throw std::invalid_argument("check_constraints: estimate/limit length mismatch");
    std::vector<int> violated;
    for (Eigen::Index k = 0; k < limits.size(); ++k)
        if (constraint_estimates(k) > limits(k) + tolerance) violated.push_back(static_cast<int>(k));
    return violated;
}

Matrix rectify_step(const TabularCmdp& model, const Matrix& params, int channel, double eta,
                    const std::optional<Matrix>& q_table) {
    if (channel < 0 || channel >= model.n_constraints)
        throw std::out_of_range("rectify_step: constraint channel out of range");
    Matrix q;
    if (q_table) {
        q = *q_table;
    } else {
        Matrix policy = policy_from_params(params);
        q = exact_values(model, policy).q[model.n_objectives + channel];
    }
    return params - (eta / (1.0 - model.discount)) * q;
}

Loop::Loop(const TabularCmdp& model, RunConfig config) : model_(model), config_(std::move(config)) {
    n_improve_channels_ =
        config_.soft_mode ? model.n_channels() : model.n_objectives;

    Vector& prefs = config_.ca_npg.preferences;
    if (prefs.size() == 0) {
        prefs = Vector::Ones(n_improve_channels_);
    } else if (config_.soft_mode && prefs.size() == model.n_objectives) {
        // Folded channels enter with unit preference weight.
        Vector extended = Vector::Ones(n_improve_channels_);
        extended.head(model.n_objectives) = prefs;
        prefs = extended;
    } else if (prefs.size() != n_improve_channels_) {
        throw std::invalid_argument("run: preferences length must match improve channels");
    }

    if (config_.initial_params.size() == 0)
        params_ = Matrix::Zero(model.n_states, model.n_actions);
    else if (config_.initial_params.rows() == model.n_states &&
             config_.initial_params.cols() == model.n_actions)
        params_ = config_.initial_params;
    else
        throw std::invalid_argument("run: initial_params shape mismatch");

    trace_.config = config_;
    trace_.n_objectives = model.n_objectives;
}

double Loop::momentum_alpha_at(int tau) const {
    switch (config_.momentum) {
        case MomentumSchedule::zero:
            return 0.0;
        case MomentumSchedule::constant:
            return config_.momentum_alpha;
        case MomentumSchedule::theorem_rate: {
            double dim = std::sqrt(static_cast<double>(model_.n_states) * model_.n_actions);
            double alpha = 1.0 - (1.0 - model_.discount) /
                                     (static_cast<double>(n_improve_channels_) * tau * dim);
            return std::max(0.0, alpha);
        }
    }
    return 0.0;
}

Loop::Evaluation Loop::evaluate(std::uint64_t seed) {
    Matrix policy = policy_from_params(params_);
    Evaluation out;
    out.q.resize(model_.n_channels());

    switch (config_.eval_mode) {
        case EvalMode::exact: {
            ValueProfile profile = exact_values(model_, policy);
            out.q = profile.q;
            out.estimates = exact_batch_estimate(model_, policy, out.q).values;
            out.exact_returns = profile.objective;
            return out;
        }
        case EvalMode::td:
            for (int i = 0; i < model_.n_channels(); ++i) {
                TdConfig cfg = config_.td;
                cfg.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
                out.q[i] = td_evaluate(model_, policy, i, cfg);
            }
            break;
        case EvalMode::monte_carlo:
            for (int i = 0; i < model_.n_channels(); ++i) {
                McConfig cfg = config_.mc;
                cfg.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
                out.q[i] = mc_q_table(model_, policy, i, cfg);
            }
            break;
    }

    out.estimates = estimate_constraints(model_, policy, out.q, config_.batch_size,
                                         derive_seed(seed, 0x9a7cb1ULL))
                        .values;
    if (config_.log_exact) out.exact_returns = exact_values(model_, policy).objective;
    return out;
}

void Loop::step(std::optional<std::uint64_t> seed_override) {
    if (done()) throw std::logic_error("Loop::step: past horizon");
    const int m = model_.n_objectives;
    const double eta = config_.step_size;

    std::uint64_t seed =
        seed_override ? *seed_override : derive_seed(config_.seed, static_cast<std::uint64_t>(t_));
    Evaluation eval = evaluate(seed);

    std::vector<int> violated = check_constraints(
        eval.estimates.tail(model_.n_constraints), model_.limits, config_.tolerance);
    bool improve = config_.soft_mode || violated.empty();

    IterationRecord rec;
    rec.t = t_;
    rec.estimates = eval.estimates;
    rec.exact_returns = eval.exact_returns;

    Matrix params_before = params_;
    if (improve) {
        ++tau_;
        trace_.n0.push_back(t_);
        trace_.n0_params.push_back(params_);
        rec.in_n0 = true;

        // Folded constraint channels contribute through their reflection:
        // gradients and q-tables are negated (the constant part of
        // r_max - cost has zero gradient and is absorbed by the softmax
        // normalizer, so the negation is the whole effect).
        Matrix policy = policy_from_params(params_);
        std::vector<Matrix> improve_q(n_improve_channels_);
        std::vector<Vector> gradients(n_improve_channels_);
        for (int i = 0; i < n_improve_channels_; ++i) {
            improve_q[i] = i < m ? eval.q[i] : Matrix(-eval.q[i]);
            gradients[i] = flatten(policy_gradient_from_q(model_, policy, improve_q[i]));
        }
        Matrix fisher = fisher_matrix(model_, policy);
        ManipulationResult manip = ca_npg_direction(gradients, fisher, config_.ca_npg);

        double alpha = momentum_alpha_at(tau_);
        lambda_hat_ = tau_ == 1 ? manip.lambda : momentum_blend(lambda_hat_, manip.lambda, alpha);
        rec.theta = manip.theta;

        if (config_.update_form == UpdateForm::closed_form) {
            params_ = closed_form_npg_update(params_, improve_q, lambda_hat_, eta,
                                             model_.discount)
                          .params;
        } else {
            Vector d = Vector::Zero(params_.size());
            for (int i = 0; i < n_improve_channels_; ++i)
                d += lambda_hat_(i) * manip.metric_gradients[i];
            params_ += eta * unflatten(d, model_.n_states, model_.n_actions);
        }
    } else {
        int target = violated.front();
        if (config_.rectify_rule == RectifyRule::largest_violation) {
            double worst = -1.0;
            for (int k : violated) {
                double margin = eval.estimates(m + k) - model_.limits(k);
                if (margin > worst) {
                    worst = margin;
                    target = k;
                }
            }
        }
        rec.rectified_channel = m + target;
        params_ = rectify_step(model_, params_, target, eta, eval.q[m + target]);
    }

    if (lambda_hat_.size() > 0) {
        rec.lambda_hat = lambda_hat_;
        if (config_.log_exact) {
            for (int i = 0; i < n_improve_channels_; ++i) {
                double value = i < m ? eval.exact_returns(i)
                                     : model_.value_bound() - eval.exact_returns(i);
                rec.weighted_return += lambda_hat_(i) * value;
            }
        }
    }
    rec.direction_norm = eta > 0.0 ? (params_ - params_before).norm() / eta : 0.0;

    trace_.iterations.push_back(std::move(rec));
    ++t_;
}

RunTrace Loop::take_trace() {
    trace_.final_params = params_;
    if (trace_.n0.empty())
        trace_.notes.push_back(
            "N0 empty: every iteration rectified; no improve-branch policy to output");
    return std::move(trace_);
}

RunTrace run(const TabularCmdp& model, const RunConfig& config) {
    Loop loop(model, config);
    while (!loop.done()) loop.step();
    return loop.take_trace();
}

Matrix select_output(const RunTrace& trace, OutputRule rule, std::uint64_t seed) {
    if (trace.n0.empty()) throw std::runtime_error("select_output: N0 is empty");

    switch (rule) {
        case OutputRule::uniform: {
            Rng rng(seed);
            return trace.n0_params[rng.bounded(trace.n0_params.size())];
        }
        case OutputRule::last:
            return trace.n0_params.back();
        case OutputRule::best_scalarized: {
            const Vector& prefs = trace.config.ca_npg.preferences;
            double best = -std::numeric_limits<double>::infinity();
            std::size_t best_k = 0;
            for (std::size_t k = 0; k < trace.n0.size(); ++k) {
                const IterationRecord& rec = trace.iterations[trace.n0[k]];
                if (rec.exact_returns.size() == 0)
                    throw std::runtime_error(
                        "select_output: best_scalarized needs exact logging enabled");
                // Folded channels score through their reflection, so a lower
                // raw cost improves the blend (the reflection constant shifts
                // every iteration equally and cannot change the argmax).
                double score = 0.0;
                for (Eigen::Index i = 0; i < prefs.size(); ++i) {
                    double sign = i < trace.n_objectives ? 1.0 : -1.0;
                    score += sign * prefs(i) * rec.exact_returns(i);
                }
                if (score > best) {
                    best = score;
                    best_k = k;
                }
            }
            return trace.n0_params[best_k];
        }
    }
    throw std::logic_error("select_output: unknown rule");
}

}  // namespace crmopo
