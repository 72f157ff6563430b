#include "crmopo/npg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crmopo/dp.hpp"
#include "crmopo/policy.hpp"

namespace crmopo {

namespace {

void check_gradients(const std::vector<Vector>& gradients, const CaNpgConfig& config) {
    if (gradients.empty()) throw std::invalid_argument("ca_npg: no gradients");
    if (config.preferences.size() != static_cast<Eigen::Index>(gradients.size()))
        throw std::invalid_argument("ca_npg: preferences length must match gradient count");
    if (config.preferences.minCoeff() <= 0.0)
        throw std::invalid_argument("ca_npg: preferences must be positive");
    if (!(config.anchor_weight > 0.0))
        throw std::invalid_argument("ca_npg: anchor_weight must be positive");
    if (config.trust_weight < 0.0 || config.ridge < 0.0)
        throw std::invalid_argument("ca_npg: trust_weight and ridge must be nonnegative");
    for (const Vector& g : gradients)
        if (!g.allFinite()) throw std::invalid_argument("ca_npg: non-finite gradient");
}

// Euclidean projection onto the probability simplex.
Vector project_simplex(Vector v) {
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<double>());
    double running = 0.0, tau = 0.0;
    int support = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        running += u[j];
        double candidate = (running - 1.0) / static_cast<double>(j + 1);
        if (u[j] - candidate > 0.0) {
            support = static_cast<int>(j + 1);
            tau = candidate;
        }
    }
    if (support == 0) return Vector::Constant(v.size(), 1.0 / v.size());
    return (v.array() - tau).max(0.0);
}

constexpr int kGridResolution = 200;
constexpr int kRefineSteps = 100;  // subdivisions of one grid cell per axis

Vector grid_minimum(const CaNpgProblem& problem, int m) {
    Vector best;
    double best_value = std::numeric_limits<double>::infinity();
    auto consider = [&](const Vector& theta) {
        double value = problem.dual_no_constant(theta);
        if (value < best_value) {
            best_value = value;
            best = theta;
        }
    };

    const double h = 1.0 / kGridResolution;
    if (m == 1) return Vector::Ones(1);
    if (m == 2) {
        Vector theta(2);
        for (int i = 0; i <= kGridResolution; ++i) {
            theta << i * h, 1.0 - i * h;
            consider(theta);
        }
    } else {
        Vector theta(3);
        for (int i = 0; i <= kGridResolution; ++i)
            for (int j = 0; j <= kGridResolution - i; ++j) {
                theta << i * h, j * h, 1.0 - (i + j) * h;
                consider(theta);
            }
    }

    // One refinement pass over the cell neighborhood of the coarse minimum.
    Vector center = best;
    const double step = h / kRefineSteps;
    if (m == 2) {
        Vector theta(2);
        for (int di = -kRefineSteps; di <= kRefineSteps; ++di) {
            double t0 = center(0) + di * step;
            if (t0 < 0.0 || t0 > 1.0) continue;
            theta << t0, 1.0 - t0;
            consider(theta);
        }
    } else {
        Vector theta(3);
        for (int di = -kRefineSteps; di <= kRefineSteps; ++di)
            for (int dj = -kRefineSteps; dj <= kRefineSteps; ++dj) {
                double t0 = center(0) + di * step;
                double t1 = center(1) + dj * step;
                if (t0 < 0.0 || t1 < 0.0 || t0 + t1 > 1.0) continue;
                theta << t0, t1, 1.0 - t0 - t1;
                consider(theta);
            }
    }
    return best;
}

Vector projected_gradient_minimum(const CaNpgProblem& problem, int m, double tolerance) {
    Vector theta = Vector::Constant(m, 1.0 / m);
    // Step size from the curvature of the collapsed quadratic.
    Matrix hessian = Matrix::Zero(m, m);
    {
        // Recover the symmetric Hessian by probing the gradient (cheap, m small).
        Vector zero = Vector::Zero(m);
        Vector g0 = problem.dual_gradient(zero);
        for (int i = 0; i < m; ++i) {
            Vector e = Vector::Zero(m);
            e(i) = 1.0;
            hessian.col(i) = problem.dual_gradient(e) - g0;
        }
    }
    double lipschitz = hessian.cwiseAbs().rowwise().sum().maxCoeff();
    double lr = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

    for (int it = 0; it < 500; ++it) {
        Vector next = project_simplex(theta - lr * problem.dual_gradient(theta));
        double change = (next - theta).norm();
        theta = next;
        if (change < tolerance) break;
    }
    return theta;
}

Vector solve_theta_impl(const CaNpgProblem& problem, const CaNpgConfig& config) {
    const int m = problem.n_objectives();
    if (m == 1) return Vector::Ones(1);
    if (config.solver == SimplexSolver::grid && m <= 3) return grid_minimum(problem, m);
    return projected_gradient_minimum(problem, m, config.solver_tolerance);
}

}  // namespace

CaNpgProblem::CaNpgProblem(const std::vector<Vector>& gradients, const Matrix& fisher,
                           const CaNpgConfig& config)
    : m_(static_cast<int>(gradients.size())), psi2_(config.anchor_weight) {
    check_gradients(gradients, config);
    const Eigen::Index dim = gradients[0].size();
    if (fisher.rows() != dim || fisher.cols() != dim)
        throw std::invalid_argument("ca_npg: fisher dimension mismatch");

    scaled_gradients_.resize(dim, m_);
    for (int i = 0; i < m_; ++i) {
        if (gradients[i].size() != dim)
            throw std::invalid_argument("ca_npg: gradient dimension mismatch");
        scaled_gradients_.col(i) = config.preferences(i) * gradients[i];
    }
    v0_ = scaled_gradients_.rowwise().sum();

    Matrix metric = config.trust_weight * fisher;
    metric.diagonal().array() += config.anchor_weight + config.ridge;
    metric_.compute(metric);
    if (metric_.info() != Eigen::Success)
        throw std::runtime_error("ca_npg: metric factorization failed");

    // The three saddle terms collapse to theta^T quad theta + linear^T theta
    // + constant; assembled literally from the terms so the evaluator is the
    // same expression the derivation writes down.
    Matrix MG = metric_.solve(scaled_gradients_);
    Vector Mv0 = metric_.solve(v0_);
    Matrix FMG = fisher * MG;
    Vector FMv0 = fisher * Mv0;
    const double p1 = config.trust_weight, p2 = config.anchor_weight;

    quad_ = scaled_gradients_.transpose() * MG - 0.5 * p1 * MG.transpose() * FMG -
            0.5 * p2 * MG.transpose() * MG;
    linear_ = p2 * (scaled_gradients_.transpose() * Mv0 - p1 * MG.transpose() * FMv0 -
                    p2 * MG.transpose() * Mv0);
    constant_ = -0.5 * p1 * p2 * p2 * Mv0.dot(FMv0) - 0.5 * p2 * p2 * p2 * Mv0.squaredNorm();
}

double CaNpgProblem::dual(const Vector& theta) const {
    return dual_no_constant(theta) + constant_;
}

double CaNpgProblem::dual_no_constant(const Vector& theta) const {
    return theta.dot(quad_ * theta) + linear_.dot(theta);
}

Vector CaNpgProblem::dual_gradient(const Vector& theta) const {
    return (quad_ + quad_.transpose()) * theta + linear_;
}

Vector CaNpgProblem::direction(const Vector& theta) const {
    return metric_.solve(scaled_gradients_ * theta + psi2_ * v0_);
}

Vector CaNpgProblem::solve_metric(const Vector& rhs) const { return metric_.solve(rhs); }

Vector solve_theta(const std::vector<Vector>& gradients, const Matrix& fisher,
                   const CaNpgConfig& config) {
    CaNpgProblem problem(gradients, fisher, config);
    return solve_theta_impl(problem, config);
}

ManipulationResult ca_npg_direction(const std::vector<Vector>& gradients,
                                    const Matrix& fisher, const CaNpgConfig& config) {
    CaNpgProblem problem(gradients, fisher, config);
    const int m = problem.n_objectives();
    const double psi2 = config.anchor_weight;

    ManipulationResult out;
    out.theta = solve_theta_impl(problem, config);
    out.direction = problem.direction(out.theta);
    out.dual_value = problem.dual(out.theta);

    out.metric_gradients.resize(m);
    for (int i = 0; i < m; ++i)
        out.metric_gradients[i] = (1.0 + psi2) * problem.solve_metric(gradients[i]);

    out.lambda.resize(m);
    for (int i = 0; i < m; ++i)
        out.lambda(i) = config.preferences(i) * (out.theta(i) + psi2) / (1.0 + psi2);
    out.lambda = out.lambda.cwiseMin(config.b1).cwiseMax(0.0);
    double sum = out.lambda.sum();
    if (sum < config.b2) {
        if (sum <= 0.0)
            out.lambda.setConstant(config.b2 / m);
        else
            out.lambda *= config.b2 / sum;
        out.lambda = out.lambda.cwiseMin(config.b1);
    }
    return out;
}

Matrix fisher_matrix(const TabularCmdp& model, const Matrix& policy) {
    const int S = model.n_states, A = model.n_actions;
    Visitation vis = visitation_measure(model, policy);

    Matrix fisher = Matrix::Zero(S * A, S * A);
    for (int s = 0; s < S; ++s) {
        auto block = fisher.block(s * A, s * A, A, A);
        Vector pi_s = policy.row(s).transpose();
        block = vis.mu_state(s) * (Matrix(pi_s.asDiagonal()) - pi_s * pi_s.transpose());
    }
    return fisher;
}

Vector npg_direction(const Matrix& fisher, const Vector& gradient) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(fisher);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("npg_direction: eigendecomposition failed");
    const Vector& values = eig.eigenvalues();
    double top = values.cwiseAbs().maxCoeff();
    if (top <= 0.0) return Vector::Zero(gradient.size());

    double cutoff = 1e-9 * top;
    Vector inverted = Vector::Zero(values.size());
    for (Eigen::Index k = 0; k < values.size(); ++k)
        if (values(k) > cutoff) inverted(k) = 1.0 / values(k);
    return eig.eigenvectors() *
           (inverted.asDiagonal() * (eig.eigenvectors().transpose() * gradient));
}

ClosedFormUpdate closed_form_npg_update(const Matrix& params,
                                        const std::vector<Matrix>& q_tables,
                                        const Vector& lambda, double eta, double discount) {
    if (q_tables.empty() || lambda.size() != static_cast<Eigen::Index>(q_tables.size()))
        throw std::invalid_argument("closed_form_npg_update: lambda/q-table length mismatch");

    Matrix combined = Matrix::Zero(params.rows(), params.cols());
    for (std::size_t i = 0; i < q_tables.size(); ++i) combined += lambda(i) * q_tables[i];
    Matrix delta = (eta / (1.0 - discount)) * combined;

    ClosedFormUpdate out;
    out.params = params + delta;

    Matrix pi = policy_from_params(params);
    out.probs.resize(params.rows(), params.cols());
    for (Eigen::Index s = 0; s < params.rows(); ++s) {
        double shift = delta.row(s).maxCoeff();
        Eigen::RowVectorXd row = pi.row(s).cwiseProduct((delta.row(s).array() - shift).exp().matrix());
        out.probs.row(s) = row / row.sum();
    }
    return out;
}

Vector momentum_blend(const Vector& previous, const Vector& current, double alpha) {
    if (previous.size() != current.size())
        throw std::invalid_argument("momentum_blend: length mismatch");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("momentum_blend: alpha must lie in [0,1]");
    return alpha * previous + (1.0 - alpha) * current;
}

}  // namespace crmopo
