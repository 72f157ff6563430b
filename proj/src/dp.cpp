#include "crmopo/dp.hpp"

#include <stdexcept>

namespace crmopo {

namespace {

Matrix policy_transition(const TabularCmdp& model, const Matrix& policy) {
    Matrix P = Matrix::Zero(model.n_states, model.n_states);
    for (int a = 0; a < model.n_actions; ++a)
        P += policy.col(a).asDiagonal() * model.transition[a];
    return P;
}

void check_residual(double residual, const char* what) {
    if (!(residual < 1e-8))
        throw std::runtime_error(std::string("linear solve failed in ") + what);
}

}  // namespace

ValueProfile exact_values(const TabularCmdp& model, const Matrix& policy) {
    const int S = model.n_states, A = model.n_actions, C = model.n_channels();
    const double g = model.discount;

    Matrix P_pi = policy_transition(model, policy);
    Matrix system = Matrix::Identity(S, S) - g * P_pi;
    Eigen::PartialPivLU<Matrix> lu(system);

    ValueProfile out;
    out.q.resize(C);
    out.v.resize(C);
    out.adv.resize(C);
    out.objective.resize(C);

    for (int i = 0; i < C; ++i) {
        Vector r_pi = (model.rewards[i].array() * policy.array()).rowwise().sum();
        Vector v = lu.solve(r_pi);
        check_residual((system * v - r_pi).cwiseAbs().maxCoeff(), "exact_values");

        Matrix q(S, A);
        for (int a = 0; a < A; ++a)
            q.col(a) = model.rewards[i].col(a) + g * (model.transition[a] * v);

        out.v[i] = v;
        out.q[i] = q;
        out.adv[i] = q.colwise() - v;
        out.objective(i) = model.initial.dot(v);
    }
    return out;
}

Visitation visitation_measure(const TabularCmdp& model, const Matrix& policy) {
    const int S = model.n_states;
    const double g = model.discount;

    Matrix P_pi = policy_transition(model, policy);
    // mu = (1-gamma) rho + gamma P_pi^T mu
    Matrix system = Matrix::Identity(S, S) - g * P_pi.transpose();
    Vector rhs = (1.0 - g) * model.initial;
    Vector mu = Eigen::PartialPivLU<Matrix>(system).solve(rhs);
    check_residual((system * mu - rhs).cwiseAbs().maxCoeff(), "visitation_measure");

    Visitation out;
    out.mu_state = mu;
    out.nu = mu.asDiagonal() * policy;
    return out;
}

Matrix policy_gradient_from_q(const TabularCmdp& model, const Matrix& policy,
                              const Matrix& q_table) {
    Visitation vis = visitation_measure(model, policy);
    const double scale = 1.0 / (1.0 - model.discount);

    Matrix grad(model.n_states, model.n_actions);
    for (int s = 0; s < model.n_states; ++s) {
        double weighted = vis.nu.row(s).dot(q_table.row(s));
        grad.row(s) =
            scale * (vis.nu.row(s).cwiseProduct(q_table.row(s)) - weighted * policy.row(s));
    }
    return grad;
}

Matrix policy_gradient(const TabularCmdp& model, const Matrix& policy, int channel) {
    if (channel < 0 || channel >= model.n_channels())
        throw std::out_of_range("policy_gradient: channel index out of range");
    ValueProfile profile = exact_values(model, policy);
    return policy_gradient_from_q(model, policy, profile.q[channel]);
}

}  // namespace crmopo
