#pragma once

#include <vector>

#include "crmopo/cmdp.hpp"

namespace crmopo {

enum class SimplexSolver { grid, projected_gradient };

// Conflict-averse direction problem
//   max_d min_i { xi_i g_i^T d - (psi1/2) d^T F d - (psi2/2) ||d - v0||^2 },
//   v0 = sum_i xi_i g_i,
// solved through its dual over the preference simplex. trust_weight is psi1,
// anchor_weight is psi2 (> 0 keeps the metric positive definite); ridge adds
// eps * I on top for conditioning. b1/b2 are the clipping bounds applied to
// the reported combination weights: each lambda_i is clipped into [0, b1] and
// the vector is rescaled up if its sum falls below b2.
struct CaNpgConfig {
    Vector preferences;          // xi, one positive entry per objective
    double trust_weight = 1.0;   // psi1
    double anchor_weight = 0.5;  // psi2
    double ridge = 0.0;
    SimplexSolver solver = SimplexSolver::grid;
    double solver_tolerance = 1e-10;
    double b1 = 2.0;
    double b2 = 0.1;
};

// Dual of the conflict-averse problem, precomputed for cheap evaluation at
// any simplex point. dual(theta) evaluates the literal saddle expression
//   g_theta^T d - (psi1/2) d^T F d - (psi2/2) ||d||^2,
//   d = (psi1 F + psi2 I)^{-1} (g_theta + psi2 v0), g_theta = sum theta_i xi_i g_i,
// which collapses to a convex quadratic in theta; the solver minimizes that
// quadratic without its theta-independent constant so huge anchor weights do
// not drown the comparisons in cancellation.
class CaNpgProblem {
public:
    CaNpgProblem(const std::vector<Vector>& gradients, const Matrix& fisher,
                 const CaNpgConfig& config);

    double dual(const Vector& theta) const;
    Vector direction(const Vector& theta) const;       // d(theta) above
    Vector solve_metric(const Vector& rhs) const;      // (psi1 F + psi2 I)^{-1} rhs
    Vector dual_gradient(const Vector& theta) const;
    double dual_no_constant(const Vector& theta) const;
    const Vector& anchor() const { return v0_; }
    int n_objectives() const { return m_; }

private:
    int m_;
    double psi2_;
    Matrix scaled_gradients_;  // dim x m, column i = xi_i g_i
    Vector v0_;
    Eigen::LDLT<Matrix> metric_;
    Matrix quad_;    // m x m coefficient of the collapsed dual quadratic
    Vector linear_;  // m
    double constant_;
};

// Minimizes the dual over the simplex. Grid mode (m <= 3): lexicographically
// ascending simplex grid at resolution 1/200 with one local refinement pass,
// ties keeping the first (lexicographically smallest) point. Otherwise 500
// projected-gradient iterations with Euclidean simplex projection, stopping
// early once the step change drops below solver_tolerance.
Vector solve_theta(const std::vector<Vector>& gradients, const Matrix& fisher,
                   const CaNpgConfig& config);

struct ManipulationResult {
    Vector direction;        // d*
    Vector theta;            // dual argmin
    Vector lambda;           // reported combination weights, clipped per config
    std::vector<Vector> metric_gradients;  // (1+psi2)(psi1 F + psi2 I)^{-1} g_i per objective
    double dual_value;
};

// Full conflict-averse step: solves the dual, assembles
//   d* = (psi1 F + psi2 I)^{-1} (g_theta* + psi2 v0),
// and reports lambda_i = xi_i (theta*_i + psi2) / (1 + psi2) (clipped), chosen
// so that d* = sum_i lambda_i * metric_gradients[i] holds before clipping.
ManipulationResult ca_npg_direction(const std::vector<Vector>& gradients,
                                    const Matrix& fisher, const CaNpgConfig& config);

// Fisher information of the softmax policy in the visitation metric:
// block-diagonal, block s = mu(s) (diag(pi_s) - pi_s pi_s^T), layout matching
// flatten().
Matrix fisher_matrix(const TabularCmdp& model, const Matrix& policy);

// Moore-Penrose solve F^+ grad via symmetric eigendecomposition; eigenvalues
// below 1e-9 * max are treated as zero, so per-state constant directions (the
// softmax null space) are dropped.
Vector npg_direction(const Matrix& fisher, const Vector& gradient);

// One step of the multi-objective natural gradient in both equivalent forms.
struct ClosedFormUpdate {
    Matrix params;  // w + (eta/(1-gamma)) sum_i lambda_i q_i
    Matrix probs;   // pi(a|s) exp(eta/(1-gamma) sum_i lambda_i q_i(s,a)) / Z(s)
};

// The two members are computed through independent routes (additive in
// parameter space, multiplicative in distribution space) and agree up to
// round-off; tests pin the total-variation gap.
ClosedFormUpdate closed_form_npg_update(const Matrix& params,
                                        const std::vector<Matrix>& q_tables,
                                        const Vector& lambda, double eta, double discount);

// Momentum smoothing of combination weights:
//   blended = alpha * previous + (1 - alpha) * current, alpha in [0,1].
Vector momentum_blend(const Vector& previous, const Vector& current, double alpha);

}  // namespace crmopo
