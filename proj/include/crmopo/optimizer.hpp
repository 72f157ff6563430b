#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crmopo/cmdp.hpp"
#include "crmopo/estimators.hpp"
#include "crmopo/npg.hpp"

namespace crmopo {

enum class EvalMode { exact, td, monte_carlo };
enum class MomentumSchedule { zero, constant, theorem_rate };
enum class RectifyRule { lowest_index, largest_violation };
enum class UpdateForm { closed_form, parameter_space };
enum class OutputRule { uniform, last, best_scalarized };

struct RunConfig {
    int horizon = 100;       // iteration count T
    double step_size = 0.1;  // eta
    double tolerance = 0.0;  // beta, slack added to every limit in the branch test
    EvalMode eval_mode = EvalMode::exact;
    TdConfig td;       // per-channel settings for EvalMode::td (seed is derived per iteration)
    McConfig mc;       // per-channel settings for EvalMode::monte_carlo
    int batch_size = 1024;  // constraint-estimation batch in sampled modes
    CaNpgConfig ca_npg;     // preferences empty -> all ones
    MomentumSchedule momentum = MomentumSchedule::zero;
    double momentum_alpha = 0.0;  // used by MomentumSchedule::constant
    RectifyRule rectify_rule = RectifyRule::lowest_index;
    UpdateForm update_form = UpdateForm::closed_form;
    // Soft variant: constraint channels join the objective list with unit
    // preference weight through their reflected channel (r_max - cost), so
    // improving the folded objective lowers the raw cost; the rectify branch
    // is disabled.
    bool soft_mode = false;
    bool log_exact = true;  // record exact per-channel returns each iteration
    std::uint64_t seed = 0;
    Matrix initial_params;  // empty -> zeros
};

struct IterationRecord {
    int t = 0;
    int rectified_channel = -1;  // -1 = improve branch
    bool in_n0 = false;
    Vector estimates;          // J-bar, one entry per channel
    Vector exact_returns;      // empty unless log_exact
    double weighted_return = 0.0;  // preference-weighted blend of exact objective returns
    Vector theta;              // empty on rectify iterations
    Vector lambda_hat;         // blended weights held at this iteration (empty before first improve)
    double direction_norm = 0.0;  // parameter change norm divided by step size
};

struct RunTrace {
    RunConfig config;  // as resolved by the loop (preferences filled in)
    int n_objectives = 0;
    std::vector<IterationRecord> iterations;
    std::vector<int> n0;             // iterations that took the improve branch
    std::vector<Matrix> n0_params;   // parameter snapshot entering each of them
    Matrix final_params;
    std::vector<std::string> notes;  // e.g. empty-N0 report for infeasible models
};

// Step sizes prescribed by the convergence analysis:
//   eta  = (1-gamma)^2 / (r_max m b1) * sqrt(kl_budget / (S A T))
//   beta = 4 m b1 sqrt(S A) / ((1-gamma)^2 sqrt(T)) * (r_max sqrt(kl_budget) + 1)
// Throws std::invalid_argument on nonpositive m, b1, kl_budget or T.
struct Schedule {
    double eta;
    double beta;
};
Schedule schedule_hyperparams(const TabularCmdp& model, int n_objectives, double b1,
                              double kl_budget, int horizon);

// Indices (0-based, into the constraint block) of channels with
// estimate > limit + tolerance. Boundary equality counts as satisfied.
std::vector<int> check_constraints(const Vector& constraint_estimates, const Vector& limits,
                                   double tolerance);

// One rectification step on constraint channel `channel` (0-based among
// constraints): the closed-form natural-gradient step with the weight vector
// concentrated on that channel and a negated step size. Uses the supplied
// q-table, or the exact one if omitted.
Matrix rectify_step(const TabularCmdp& model, const Matrix& params, int channel, double eta,
                    const std::optional<Matrix>& q_table = std::nullopt);

// Stepwise driver. Exposes single iterations so callers can snapshot state
// and replay one iteration under different seeds (the momentum-variance
// probe); run() below is the plain loop.
class Loop {
public:
    Loop(const TabularCmdp& model, RunConfig config);

    // Executes iteration t (0-based). seed_override replaces the iteration's
    // derived evaluation seed. Appends to the trace.
    void step(std::optional<std::uint64_t> seed_override = std::nullopt);
    bool done() const { return t_ >= config_.horizon; }
    int iteration() const { return t_; }

    const RunTrace& trace() const { return trace_; }
    RunTrace take_trace();
    const Matrix& params() const { return params_; }
    const Vector& lambda_hat() const { return lambda_hat_; }
    int improve_count() const { return tau_; }

private:
    struct Evaluation {
        std::vector<Matrix> q;  // per channel
        Vector estimates;       // J-bar per channel
        Vector exact_returns;
    };
    Evaluation evaluate(std::uint64_t seed);
    double momentum_alpha_at(int tau) const;

    const TabularCmdp& model_;
    RunConfig config_;
    int n_improve_channels_;  // m, or m+p in soft mode
    Matrix params_;
    Vector lambda_hat_;  // empty until the first improve iteration
    int t_ = 0;
    int tau_ = 0;  // improve-branch counter
    RunTrace trace_;
};

RunTrace run(const TabularCmdp& model, const RunConfig& config);

// Picks the output policy parameters from the visited improve-branch set:
// uniform draws one (seeded), last takes the most recent, best_scalarized
// maximizes the preference-weighted exact objective blend (requires
// log_exact). Throws std::runtime_error when N0 is empty.
Matrix select_output(const RunTrace& trace, OutputRule rule, std::uint64_t seed);

}  // namespace crmopo
