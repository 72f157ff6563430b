#include "crmopo/generators.hpp"

#include <stdexcept>

#include "crmopo/dp.hpp"
#include "crmopo/rng.hpp"

namespace crmopo {

namespace {

void check_common(const GeneratorSpec& spec) {
    if (!(spec.discount >= 0.0 && spec.discount < 1.0))
        throw std::invalid_argument("generate: discount out of [0,1)");
    if (!(spec.r_max > 0.0)) throw std::invalid_argument("generate: r_max must be positive");
    if (spec.n_objectives < 1) throw std::invalid_argument("generate: need at least one objective");
    if (spec.n_constraints < 0) throw std::invalid_argument("generate: negative constraint count");
}

void apply_limit_rule(TabularCmdp& model, const GeneratorSpec& spec) {
    model.limits.resize(model.n_constraints);
    if (model.n_constraints == 0) return;
    if (spec.limit_rule == "fixed") {
        model.limits.setConstant(spec.limit_value);
    } else if (spec.limit_rule == "uniform-fraction") {
        Matrix uniform = Matrix::Constant(model.n_states, model.n_actions,
                                          1.0 / model.n_actions);
        Vector returns = exact_values(model, uniform).objective;
        for (int k = 0; k < model.n_constraints; ++k)
            model.limits(k) = spec.limit_value * returns(model.n_objectives + k);
    } else {
        throw std::invalid_argument("generate: unknown limit_rule '" + spec.limit_rule + "'");
    }
}

TabularCmdp generate_random(const GeneratorSpec& spec) {
    if (spec.n_states < 1) throw std::invalid_argument("generate: n_states must be positive");
    if (spec.n_actions < 1) throw std::invalid_argument("generate: n_actions must be positive");
    if (!(spec.concentration > 0.0))
        throw std::invalid_argument("generate: concentration must be positive");
    if (spec.sparsity < 0.0 || spec.sparsity > 1.0)
        throw std::invalid_argument("generate: sparsity must lie in [0,1]");

    TabularCmdp model;
    model.n_states = spec.n_states;
    model.n_actions = spec.n_actions;
    model.n_objectives = spec.n_objectives;
    model.n_constraints = spec.n_constraints;
    model.discount = spec.discount;
    model.r_max = spec.r_max;

    Rng rng(derive_seed(spec.seed, 0xd1ce));
    model.transition.resize(spec.n_actions);
    for (int a = 0; a < spec.n_actions; ++a) {
        model.transition[a].resize(spec.n_states, spec.n_states);
        for (int s = 0; s < spec.n_states; ++s)
            model.transition[a].row(s) =
                rng.dirichlet(spec.n_states, spec.concentration).transpose();
    }

    model.rewards.resize(model.n_channels());
    for (int i = 0; i < model.n_channels(); ++i) {
        model.rewards[i].resize(spec.n_states, spec.n_actions);
        for (int s = 0; s < spec.n_states; ++s)
            for (int a = 0; a < spec.n_actions; ++a) {
                double value = rng.uniform() * spec.r_max;
                if (spec.sparsity > 0.0 && rng.uniform() < spec.sparsity) value = 0.0;
                model.rewards[i](s, a) = value;
            }
    }

    // Keep every state reachable from the start: floor of 0.2/n_states each.
    Vector raw = rng.dirichlet(spec.n_states, 1.0);
    model.initial = 0.8 * raw + Vector::Constant(spec.n_states, 0.2 / spec.n_states);

    apply_limit_rule(model, spec);
    return model;
}

TabularCmdp generate_gridworld(const GeneratorSpec& spec) {
    if (spec.width < 1 || spec.height < 1)
        throw std::invalid_argument("generate: gridworld dimensions must be positive");
    if (spec.goals_per_objective < 1)
        throw std::invalid_argument("generate: goals_per_objective must be positive");

    const int S = spec.width * spec.height;
    const int A = 5;  // stay, up, down, left, right
    auto cell = [&](int x, int y) { return y * spec.width + x; };

    TabularCmdp model;
    model.n_states = S;
    model.n_actions = A;
    model.n_objectives = spec.n_objectives;
    model.n_constraints = 1;
    model.discount = spec.discount;
    model.r_max = spec.r_max;

    model.transition.assign(A, Matrix::Zero(S, S));
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x) {
            int s = cell(x, y);
            model.transition[0](s, s) = 1.0;
            model.transition[1](s, cell(x, std::max(0, y - 1))) = 1.0;
            model.transition[2](s, cell(x, std::min(spec.height - 1, y + 1))) = 1.0;
            model.transition[3](s, cell(std::max(0, x - 1), y)) = 1.0;
            model.transition[4](s, cell(std::min(spec.width - 1, x + 1), y)) = 1.0;
        }

    Rng rng(derive_seed(spec.seed, 0x971d));
    model.rewards.assign(model.n_channels(), Matrix::Zero(S, A));
    for (int i = 0; i < spec.n_objectives; ++i) {
        std::vector<int> cells(S);
        for (int s = 0; s < S; ++s) cells[s] = s;
        // Seeded draw without replacement.
        for (int g = 0; g < std::min(spec.goals_per_objective, S); ++g) {
            std::size_t pick = g + rng.bounded(cells.size() - g);
            std::swap(cells[g], cells[pick]);
            model.rewards[i].row(cells[g]).setConstant(spec.r_max);
        }
    }
    // Move-cost channel: every non-stay action pays.
    for (int a = 1; a < A; ++a)
        model.rewards[spec.n_objectives].col(a).setConstant(spec.r_max);

    model.initial = Vector::Constant(S, 1.0 / S);
    model.limits = Vector::Constant(1, spec.limit_value);
    return model;
}

}  // namespace

TabularCmdp generate(const GeneratorSpec& spec) {
    check_common(spec);
    if (spec.kind == "random") return generate_random(spec);
    if (spec.kind == "gridworld") return generate_gridworld(spec);
    throw std::invalid_argument("generate: unknown generator kind '" + spec.kind + "'");
}

}  // namespace crmopo
