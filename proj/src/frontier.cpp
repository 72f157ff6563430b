#include "crmopo/frontier.hpp"

#include <cmath>
#include <stdexcept>

#include "crmopo/dp.hpp"

namespace crmopo {

namespace {

constexpr std::uint64_t kEnumerationBudget = 10'000'000;

// All points of the (n_actions-1)-simplex with coordinates k/(resolution-1),
// lexicographically ascending.
void build_rows(int n_actions, int ticks, int slot, int remaining,
                Eigen::RowVectorXd& work, std::vector<Eigen::RowVectorXd>& out) {
    if (slot == n_actions - 1) {
        work(slot) = static_cast<double>(remaining) / ticks;
        out.push_back(work);
        return;
    }
    for (int k = 0; k <= remaining; ++k) {
        work(slot) = static_cast<double>(k) / ticks;
        build_rows(n_actions, ticks, slot + 1, remaining - k, work, out);
    }
}

std::vector<Eigen::RowVectorXd> simplex_rows(int n_actions, int resolution) {
    if (resolution < 2) throw std::invalid_argument("PolicyGrid: resolution must be at least 2");
    std::vector<Eigen::RowVectorXd> rows;
    Eigen::RowVectorXd work(n_actions);
    build_rows(n_actions, resolution - 1, 0, resolution - 1, work, rows);
    return rows;
}

bool fully_deterministic(const Matrix& policy) {
    for (Eigen::Index s = 0; s < policy.rows(); ++s)
        if (policy.row(s).maxCoeff() < 1.0) return false;
    return true;
}

struct Enumeration {
    std::vector<Eigen::RowVectorXd> rows;
    std::uint64_t count = 0;

    Matrix policy_at(std::uint64_t index, int n_states, int n_actions) const {
        Matrix policy(n_states, n_actions);
        for (int s = 0; s < n_states; ++s) {
            policy.row(s) = rows[index % rows.size()];
            index /= rows.size();
        }
        return policy;
    }
};

Enumeration enumerate_policies(const TabularCmdp& model, const PolicyGrid& grid) {
    Enumeration e;
    e.rows = simplex_rows(model.n_actions, grid.resolution);
    e.count = 1;
    for (int s = 0; s < model.n_states; ++s) {
        if (e.count > kEnumerationBudget / e.rows.size())
            throw std::runtime_error("safe_pareto_front: enumeration budget exceeded");
        e.count *= e.rows.size();
    }
    return e;
}

FrontierPoint evaluate_policy(const TabularCmdp& model, Matrix policy) {
    ValueProfile profile = exact_values(model, policy);
    FrontierPoint point;
    point.policy = std::move(policy);
    point.objectives = profile.objective.head(model.n_objectives);
    point.constraints = profile.objective.tail(model.n_constraints);
    point.safe = true;
    for (int k = 0; k < model.n_constraints; ++k)
        if (point.constraints(k) > model.limits(k)) point.safe = false;
    return point;
}

// Safety filter plus pairwise dominance removal; shared by both kernels so
// the parallel and serial variants differ only in the evaluation sweep.
std::vector<FrontierPoint> filter_frontier(std::vector<FrontierPoint> evaluated,
                                           const PolicyGrid& grid) {
    std::vector<FrontierPoint> safe;
    for (FrontierPoint& p : evaluated) {
        if (!p.safe) continue;
        if (!grid.include_deterministic && fully_deterministic(p.policy)) continue;
        safe.push_back(std::move(p));
    }

    std::vector<FrontierPoint> frontier;
    for (std::size_t i = 0; i < safe.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < safe.size() && !dominated; ++j)
            if (j != i && dominates(safe[j].objectives, safe[i].objectives)) dominated = true;
        if (!dominated) frontier.push_back(safe[i]);
    }
    return frontier;
}

}  // namespace

bool dominates(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dominates: length mismatch");
    bool strict = false;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a(i) < b(i)) return false;
        if (a(i) > b(i)) strict = true;
    }
    return strict;
}

std::vector<FrontierPoint> safe_pareto_front(const TabularCmdp& model, const PolicyGrid& grid) {
    Enumeration e = enumerate_policies(model, grid);
    std::vector<FrontierPoint> evaluated(e.count);
    const std::int64_t count = static_cast<std::int64_t>(e.count);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t idx = 0; idx < count; ++idx)
        evaluated[idx] = evaluate_policy(
            model, e.policy_at(static_cast<std::uint64_t>(idx), model.n_states, model.n_actions));
    return filter_frontier(std::move(evaluated), grid);
}

std::vector<FrontierPoint> safe_pareto_front_serial(const TabularCmdp& model,
                                                    const PolicyGrid& grid) {
    Enumeration e = enumerate_policies(model, grid);
    std::vector<FrontierPoint> evaluated(e.count);
    for (std::uint64_t idx = 0; idx < e.count; ++idx)
        evaluated[idx] = evaluate_policy(model, e.policy_at(idx, model.n_states, model.n_actions));
    return filter_frontier(std::move(evaluated), grid);
}

namespace {

void lambda_grid(int m, int cells, int slot, int remaining, Vector& work,
                 double& best, const Vector& delta) {
    if (slot == m - 1) {
        work(slot) = static_cast<double>(remaining) / cells;
        double value = work.dot(delta);
        if (value < best) best = value;
        return;
    }
    for (int k = 0; k <= remaining; ++k) {
        work(slot) = static_cast<double>(k) / cells;
        lambda_grid(m, cells, slot + 1, remaining - k, work, best, delta);
    }
}

}  // namespace

double optimality_gap(const std::vector<FrontierPoint>& frontier, const Vector& candidate,
                      int lambda_resolution) {
    if (lambda_resolution < 1)
        throw std::invalid_argument("optimality_gap: lambda_resolution must be positive");
    double gap = 0.0;
    for (const FrontierPoint& point : frontier) {
        if (point.objectives.size() != candidate.size())
            throw std::invalid_argument("optimality_gap: objective length mismatch");
        Vector delta = point.objectives - candidate;
        double best = std::numeric_limits<double>::infinity();
        Vector work(candidate.size());
        lambda_grid(static_cast<int>(candidate.size()), lambda_resolution, 0, lambda_resolution,
                    work, best, delta);
        gap = std::max(gap, best);
    }
    return gap;
}

}  // namespace crmopo
