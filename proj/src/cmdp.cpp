#include "crmopo/cmdp.hpp"

#include <cmath>
#include <cstdio>

namespace crmopo {

namespace {

std::string fmt(const char* pattern, double v) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

}  // namespace

std::vector<std::string> validate_cmdp(const TabularCmdp& model) {
    std::vector<std::string> report;
    auto add = [&](std::string msg) { report.push_back(std::move(msg)); };

    if (model.n_states < 1) add("n_states must be positive");
    if (model.n_actions < 1) add("n_actions must be positive");
    if (model.n_objectives < 1) add("m must be positive");
    if (model.n_constraints < 0) add("p must be nonnegative");
    if (!(model.discount >= 0.0 && model.discount < 1.0))
        add("discount out of [0,1): " + fmt("%.17g", model.discount));
    if (!(model.r_max > 0.0) || !std::isfinite(model.r_max))
        add("r_max must be positive and finite");
    if (!report.empty()) return report;  // dimension checks below assume sane sizes

    const int S = model.n_states, A = model.n_actions;

    if (static_cast<int>(model.transition.size()) != A) {
        add("transition must have one matrix per action");
    } else {
        for (int a = 0; a < A; ++a) {
            const Matrix& P = model.transition[a];
            if (P.rows() != S || P.cols() != S) {
                add("transition matrix for action " + std::to_string(a) + " has wrong shape");
                continue;
            }
            for (int s = 0; s < S; ++s) {
                double sum = P.row(s).sum();
                if (std::abs(sum - 1.0) > 1e-9)
                    add("transition row (" + std::to_string(s) + "," + std::to_string(a) +
                        ") sums to " + fmt("%.17g", sum));
                for (int t = 0; t < S; ++t)
                    if (P(s, t) < 0.0 || !std::isfinite(P(s, t)))
                        add("transition probability (" + std::to_string(s) + "," +
                            std::to_string(a) + "->" + std::to_string(t) + ") is invalid");
            }
        }
    }

    if (static_cast<int>(model.rewards.size()) != model.n_channels()) {
        add("rewards must have m+p channels");
    } else {
        for (int i = 0; i < model.n_channels(); ++i) {
            const Matrix& R = model.rewards[i];
            if (R.rows() != S || R.cols() != A) {
                add("reward channel " + std::to_string(i + 1) + " has wrong shape");
                continue;
            }
            if (!R.allFinite()) {
                add("reward channel " + std::to_string(i + 1) + " has non-finite entries");
                continue;
            }
            if (R.minCoeff() < 0.0)
                add("reward channel " + std::to_string(i + 1) + " has a value below 0");
            if (R.maxCoeff() > model.r_max)
                add("reward channel " + std::to_string(i + 1) + " exceeds r_max");
        }
    }

    if (model.initial.size() != S) {
        add("initial distribution has wrong length");
    } else {
        if (model.initial.minCoeff() < 0.0) add("initial distribution has a negative entry");
        if (std::abs(model.initial.sum() - 1.0) > 1e-9)
            add("initial distribution sums to " + fmt("%.17g", model.initial.sum()));
    }

    if (model.limits.size() != model.n_constraints)
        add("limits must have one entry per constraint channel");

    return report;
}

}  // namespace crmopo
