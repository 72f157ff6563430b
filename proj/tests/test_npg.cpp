#include <doctest.h>

#include <cmath>
#include <vector>

#include "crmopo/dp.hpp"
#include "crmopo/npg.hpp"
#include "crmopo/policy.hpp"
#include "crmopo/rng.hpp"
#include "fixtures.hpp"

using namespace crmopo;

namespace {

Matrix random_psd(int n, std::uint64_t seed, double floor_eig = 0.0) {
    Rng rng(seed);
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
    Matrix f = a * a.transpose() / n;
    f.diagonal().array() += floor_eig;
    return f;
}

std::vector<Vector> random_gradients(int m, int dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vector> g(m, Vector(dim));
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < dim; ++k) g[i](k) = rng.normal();
    return g;
}

CaNpgConfig default_config(int m) {
    CaNpgConfig config;
    config.preferences = Vector::Ones(m);
    return config;
}

double tv_distance(const Matrix& p, const Matrix& q) {
    return 0.5 * (p - q).cwiseAbs().rowwise().sum().maxCoeff();
}

// Literal saddle value, assembled from scratch to cross-check the collapsed
// quadratic inside CaNpgProblem.
double literal_dual(const CaNpgProblem& problem, const std::vector<Vector>& gradients,
                    const Matrix& fisher, const CaNpgConfig& config, const Vector& theta) {
    Vector g_theta = Vector::Zero(gradients[0].size());
    for (int i = 0; i < static_cast<int>(gradients.size()); ++i)
        g_theta += theta(i) * config.preferences(i) * gradients[i];
    Vector d = problem.direction(theta);
    return g_theta.dot(d) - 0.5 * config.trust_weight * d.dot(fisher * d) -
           0.5 * config.anchor_weight * d.squaredNorm();
}

}  // namespace

TEST_CASE("fisher_matrix: uniform two-action blocks carry the textbook entries") {
    TabularCmdp model = testfx::c2();
    Matrix policy = testfx::uniform_policy(model);
    Matrix fisher = fisher_matrix(model, policy);
    Vector mu = visitation_measure(model, policy).mu_state;

    REQUIRE(fisher.rows() == 4);
    for (int s = 0; s < 2; ++s) {
        CHECK(fisher(2 * s, 2 * s) == doctest::Approx(0.25 * mu(s)).epsilon(1e-12));
        CHECK(fisher(2 * s, 2 * s + 1) == doctest::Approx(-0.25 * mu(s)).epsilon(1e-12));
        CHECK(fisher(2 * s + 1, 2 * s + 1) == doctest::Approx(0.25 * mu(s)).epsilon(1e-12));
    }
    // Cross-state blocks vanish.
    CHECK(fisher.block(0, 2, 2, 2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(fisher.block(2, 0, 2, 2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fisher_matrix is symmetric positive semidefinite on random models") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        TabularCmdp model = testfx::random_model(seed, 5, 3, 2, 1, 0.85);
        Matrix policy = policy_from_params(Matrix::Random(5, 3));
        Matrix fisher = fisher_matrix(model, policy);
        CHECK((fisher - fisher.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(fisher);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
    }
}

TEST_CASE("fisher_matrix matches a score-function monte carlo oracle") {
    // F = E[score score^T] with the state drawn from the discounted visitation
    // (simulated by geometric termination) and the action fresh from the
    // policy. One million draws pin each entry to about three standard errors.
    TabularCmdp model = testfx::c2();
    Matrix policy = testfx::uniform_policy(model);
    Matrix fisher = fisher_matrix(model, policy);

    const int n_draws = 1000000;
    Matrix accum = Matrix::Zero(4, 4);
    Rng rng(2024);
    for (int it = 0; it < n_draws; ++it) {
        int s = rng.categorical(model.initial.transpose());
        while (rng.uniform() >= 1.0 - model.discount) {
            int a = rng.categorical(policy.row(s));
            s = rng.categorical(model.transition[a].row(s));
        }
        int a = rng.categorical(policy.row(s));
        Vector score = flatten(score_function(policy, s, a));
        accum.noalias() += score * score.transpose();
    }
    Matrix sampled = accum / n_draws;
    CHECK((sampled - fisher).cwiseAbs().maxCoeff() <= 1.5e-3);
}

TEST_CASE("npg_direction: gradients manufactured as F x are solved exactly") {
    TabularCmdp model = testfx::random_model(5, 4, 3, 2, 1, 0.9);
    Matrix policy = policy_from_params(0.5 * Matrix::Random(4, 3));
    Matrix fisher = fisher_matrix(model, policy);

    Rng rng(11);
    Vector x(12);
    for (int k = 0; k < 12; ++k) x(k) = rng.normal();
    Vector g = fisher * x;
    Vector d = npg_direction(fisher, g);
    CHECK((fisher * d - g).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("npg_direction annihilates the per-state constant null space") {
    TabularCmdp model = testfx::c2();
    Matrix policy = testfx::uniform_policy(model);
    Matrix fisher = fisher_matrix(model, policy);

    Matrix constant_rows(2, 2);
    constant_rows << 3.0, 3.0, -1.5, -1.5;
    Vector d = npg_direction(fisher, flatten(constant_rows));
    CHECK(d.cwiseAbs().maxCoeff() <= 1e-12);

    Vector zero = npg_direction(Matrix::Zero(4, 4), flatten(constant_rows));
    CHECK(zero.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pseudo-inverse update and closed-form update induce the same policy") {
    // With exact visitation the natural-gradient parameter step differs from
    // eta/(1-gamma) times the blended q-table only by per-state constants, so
    // both routes land on the same distribution.
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        int m = 1 + static_cast<int>(seed % 3);
        TabularCmdp model = testfx::random_model(seed + 40, 4, 3, m, 0, 0.9);
        Rng rng(derive_seed(seed, 0xabc));
        Matrix params(4, 3);
        for (int s = 0; s < 4; ++s)
            for (int a = 0; a < 3; ++a) params(s, a) = rng.normal();
        Matrix policy = policy_from_params(params);
        ValueProfile profile = exact_values(model, policy);
        Vector lambda = rng.dirichlet(m, 1.0);

        Vector blended_gradient = Vector::Zero(12);
        for (int i = 0; i < m; ++i)
            blended_gradient += lambda(i) * flatten(policy_gradient_from_q(model, policy, profile.q[i]));
        Matrix fisher = fisher_matrix(model, policy);

        double eta = 0.1;
        Matrix via_pinv = policy_from_params(
            params + eta * unflatten(npg_direction(fisher, blended_gradient), 4, 3));
        ClosedFormUpdate closed = closed_form_npg_update(params, profile.q, lambda, eta,
                                                         model.discount);
        CHECK(tv_distance(via_pinv, closed.probs) <= 1e-8);
    }
}

TEST_CASE("closed_form_npg_update: additive and multiplicative routes agree") {
    TabularCmdp model = testfx::c2();
    Matrix params = Matrix::Random(2, 2);
    Matrix policy = policy_from_params(params);
    ValueProfile profile = exact_values(model, policy);
    Vector lambda(3);
    lambda << 0.2, 0.3, 0.5;
    ClosedFormUpdate update = closed_form_npg_update(params, profile.q, lambda, 0.25,
                                                     model.discount);
    CHECK(tv_distance(policy_from_params(update.params), update.probs) <= 1e-12);
    for (int s = 0; s < 2; ++s)
        CHECK(update.probs.row(s).sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("ca_npg_direction: single objective reduces to the anchored metric solve") {
    Matrix fisher = random_psd(6, 3, 0.1);
    auto gradients = random_gradients(1, 6, 4);
    CaNpgConfig config = default_config(1);
    ManipulationResult result = ca_npg_direction(gradients, fisher, config);

    REQUIRE(result.theta.size() == 1);
    CHECK(result.theta(0) == doctest::Approx(1.0));
    CHECK(result.lambda(0) == doctest::Approx(1.0).epsilon(1e-12));
    // d solves (psi1 F + psi2 I) d = (1 + psi2) g.
    Vector residual = (config.trust_weight * fisher +
                       config.anchor_weight * Matrix::Identity(6, 6)) *
                          result.direction -
                      (1.0 + config.anchor_weight) * gradients[0];
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("ca_npg_direction: antipodal gradients under the identity metric cancel") {
    // F = I/2, psi1 = 1, psi2 = 1/2 makes the metric exactly the identity, so
    // the dual is 0.5 (theta_1 - theta_2)^2 ||u||^2 with minimum at the
    // midpoint, which the grid contains exactly.
    Vector u(5);
    u << 1.0, -2.0, 0.5, 3.0, -1.0;
    std::vector<Vector> gradients = {u, -u};
    Matrix fisher = 0.5 * Matrix::Identity(5, 5);
    CaNpgConfig config = default_config(2);
    config.trust_weight = 1.0;
    config.anchor_weight = 0.5;

    ManipulationResult result = ca_npg_direction(gradients, fisher, config);
    CHECK(std::abs(result.theta(0) - 0.5) <= 1e-9);
    CHECK(result.direction.cwiseAbs().maxCoeff() <= 1e-9);

    // Independent dense scan over the one-dimensional simplex.
    CaNpgProblem problem(gradients, fisher, config);
    double best = std::numeric_limits<double>::infinity();
    double best_t = 0.0;
    for (int k = 0; k <= 2000; ++k) {
        Vector theta(2);
        theta << k / 2000.0, 1.0 - k / 2000.0;
        double value = problem.dual_no_constant(theta);
        if (value < best) {
            best = value;
            best_t = theta(0);
        }
    }
    CHECK(std::abs(result.theta(0) - best_t) <= 1e-6);
}

TEST_CASE("ca_npg_direction beats a dense dual scan on random two-objective problems") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Matrix fisher = random_psd(5, derive_seed(seed, 1), 0.05);
        auto gradients = random_gradients(2, 5, derive_seed(seed, 2));
        CaNpgConfig config = default_config(2);
        CaNpgProblem problem(gradients, fisher, config);
        ManipulationResult result = ca_npg_direction(gradients, fisher, config);

        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= 2000; ++k) {
            Vector theta(2);
            theta << k / 2000.0, 1.0 - k / 2000.0;
            best = std::min(best, problem.dual_no_constant(theta));
        }
        double scale = 1.0 + std::abs(best);
        CHECK(problem.dual_no_constant(result.theta) <= best + 1e-6 * scale);

        // The reported direction satisfies the inner first-order condition.
        Vector g_theta = result.theta(0) * gradients[0] + result.theta(1) * gradients[1];
        Vector rhs = g_theta + config.anchor_weight * problem.anchor();
        Vector residual = (config.trust_weight * fisher +
                           config.anchor_weight * Matrix::Identity(5, 5)) *
                              result.direction -
                          rhs;
        CHECK(residual.cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("ca_npg_direction: identical gradients leave the direction preference-free") {
    Vector g(4);
    g << 0.3, -0.7, 1.1, 0.2;
    std::vector<Vector> gradients = {g, g, g};
    Matrix fisher = random_psd(4, 21, 0.2);
    CaNpgConfig config = default_config(3);
    CaNpgProblem problem(gradients, fisher, config);

    Vector corner = Vector::Zero(3);
    corner(0) = 1.0;
    Vector mid = Vector::Constant(3, 1.0 / 3.0);
    CHECK((problem.direction(corner) - problem.direction(mid)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::abs(problem.dual(corner) - problem.dual(mid)) <= 1e-9);

    ManipulationResult result = ca_npg_direction(gradients, fisher, config);
    CHECK((result.direction - problem.direction(mid)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("CaNpgProblem::dual matches the literal saddle expression") {
    Matrix fisher = random_psd(6, 31, 0.05);
    auto gradients = random_gradients(3, 6, 32);
    CaNpgConfig config = default_config(3);
    config.trust_weight = 1.7;
    config.anchor_weight = 0.9;
    CaNpgProblem problem(gradients, fisher, config);

    Rng rng(33);
    for (int it = 0; it < 100; ++it) {
        Vector theta = rng.dirichlet(3, 1.0);
        double literal = literal_dual(problem, gradients, fisher, config, theta);
        CHECK(problem.dual(theta) == doctest::Approx(literal).epsilon(1e-10));
        // Without the constant the values differ by exactly that constant.
        double shift = problem.dual(theta) - problem.dual_no_constant(theta);
        Vector other = rng.dirichlet(3, 1.0);
        double shift2 = problem.dual(other) - problem.dual_no_constant(other);
        CHECK(shift == doctest::Approx(shift2).epsilon(1e-9));
    }
}

TEST_CASE("CaNpgProblem::dual_gradient matches finite differences") {
    Matrix fisher = random_psd(5, 41, 0.1);
    auto gradients = random_gradients(2, 5, 42);
    CaNpgConfig config = default_config(2);
    CaNpgProblem problem(gradients, fisher, config);

    Rng rng(43);
    for (int it = 0; it < 5; ++it) {
        Vector theta = rng.dirichlet(2, 2.0);
        Vector grad = problem.dual_gradient(theta);
        const double h = 1e-6;
        for (int i = 0; i < 2; ++i) {
            Vector hi = theta, lo = theta;
            hi(i) += h;
            lo(i) -= h;
            double fd = (problem.dual(hi) - problem.dual(lo)) / (2 * h);
            CHECK(grad(i) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("huge anchor weight pins the direction to the preference-weighted sum") {
    Matrix fisher = random_psd(6, 51, 0.1);
    auto gradients = random_gradients(2, 6, 52);
    CaNpgConfig config = default_config(2);
    config.anchor_weight = 1e6;
    ManipulationResult result = ca_npg_direction(gradients, fisher, config);

    Vector v0 = gradients[0] + gradients[1];
    CHECK((result.direction - v0).norm() / v0.norm() <= 1e-3);
}

TEST_CASE("lambda decomposition reconstructs the direction before clipping") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        int m = 2 + static_cast<int>(seed % 2);
        Matrix fisher = random_psd(6, derive_seed(seed, 61), 0.05);
        auto gradients = random_gradients(m, 6, derive_seed(seed, 62));
        CaNpgConfig config = default_config(m);
        ManipulationResult result = ca_npg_direction(gradients, fisher, config);

        REQUIRE(static_cast<int>(result.metric_gradients.size()) == m);
        Vector rebuilt = Vector::Zero(6);
        for (int i = 0; i < m; ++i) rebuilt += result.lambda(i) * result.metric_gradients[i];
        CHECK((rebuilt - result.direction).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("lambda clipping and floor rescaling follow the configured bounds") {
    Matrix fisher = random_psd(4, 71, 0.1);
    auto gradients = random_gradients(2, 4, 72);

    CaNpgConfig clip_config = default_config(2);
    clip_config.b1 = 0.1;
    ManipulationResult clipped = ca_npg_direction(gradients, fisher, clip_config);
    // Raw weights are (theta_i + psi2)/(1 + psi2) >= 1/3 here, so both clip.
    CHECK(clipped.lambda.maxCoeff() <= 0.1 + 1e-15);
    CHECK(clipped.lambda.minCoeff() >= 0.0);

    // Tiny preferences push the raw sum below b2; the weights are rescaled up
    // to the floor without re-hitting the cap.
    CaNpgConfig floor_config = default_config(2);
    floor_config.preferences = Vector::Constant(2, 0.01);
    ManipulationResult floored = ca_npg_direction(gradients, fisher, floor_config);
    CHECK(floored.lambda.sum() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(floored.lambda.maxCoeff() <= floor_config.b1);
}

TEST_CASE("stronger trust weight shrinks the single-objective step") {
    Matrix fisher = random_psd(5, 81, 0.5);
    auto gradients = random_gradients(1, 5, 82);
    double previous = std::numeric_limits<double>::infinity();
    for (double psi1 : {0.5, 1.0, 2.0, 4.0}) {
        CaNpgConfig config = default_config(1);
        config.trust_weight = psi1;
        double norm = ca_npg_direction(gradients, fisher, config).direction.norm();
        CHECK(norm < previous);
        previous = norm;
    }
}

TEST_CASE("projected-gradient solver agrees with the grid on small problems") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        Matrix fisher = random_psd(5, derive_seed(seed, 91), 0.05);
        auto gradients = random_gradients(3, 5, derive_seed(seed, 92));
        CaNpgConfig grid_config = default_config(3);
        CaNpgConfig pg_config = default_config(3);
        pg_config.solver = SimplexSolver::projected_gradient;

        CaNpgProblem problem(gradients, fisher, grid_config);
        Vector grid_theta = solve_theta(gradients, fisher, grid_config);
        Vector pg_theta = solve_theta(gradients, fisher, pg_config);
        double scale = 1.0 + std::abs(problem.dual_no_constant(grid_theta));
        CHECK(problem.dual_no_constant(pg_theta) <=
              problem.dual_no_constant(grid_theta) + 1e-5 * scale);
    }
}

TEST_CASE("momentum_blend interpolates and validates its inputs") {
    Vector prev(2), cur(2);
    prev << 1.0, 0.0;
    cur << 0.0, 2.0;
    CHECK((momentum_blend(prev, cur, 0.0) - cur).cwiseAbs().maxCoeff() == 0.0);
    CHECK((momentum_blend(prev, cur, 1.0) - prev).cwiseAbs().maxCoeff() == 0.0);
    Vector mid = momentum_blend(prev, cur, 0.25);
    CHECK(mid(0) == doctest::Approx(0.25));
    CHECK(mid(1) == doctest::Approx(1.5));
    CHECK_THROWS_AS(momentum_blend(prev, Vector::Ones(3), 0.5), std::invalid_argument);
    CHECK_THROWS_AS(momentum_blend(prev, cur, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(momentum_blend(prev, cur, -0.1), std::invalid_argument);
}

TEST_CASE("CaNpgProblem rejects malformed inputs") {
    Matrix fisher = Matrix::Identity(4, 4);
    auto gradients = random_gradients(2, 4, 7);
    CaNpgConfig config = default_config(2);

    CaNpgConfig bad_pref = config;
    bad_pref.preferences = Vector::Ones(3);
    CHECK_THROWS_AS(CaNpgProblem(gradients, fisher, bad_pref), std::invalid_argument);

    CaNpgConfig bad_anchor = config;
    bad_anchor.anchor_weight = 0.0;
    CHECK_THROWS_AS(CaNpgProblem(gradients, fisher, bad_anchor), std::invalid_argument);

    CHECK_THROWS_AS(CaNpgProblem({}, fisher, config), std::invalid_argument);
    CHECK_THROWS_AS(CaNpgProblem({Vector::Ones(3), Vector::Ones(4)}, fisher, config),
                    std::invalid_argument);
}
