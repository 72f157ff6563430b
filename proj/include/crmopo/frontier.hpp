#pragma once

#include <cstdint>
#include <vector>

#include "crmopo/cmdp.hpp"

namespace crmopo {

// Strict Pareto dominance on objective vectors (maximization): a dominates b
// iff a >= b everywhere and a > b somewhere. Irreflexive by construction.
bool dominates(const Vector& a, const Vector& b);

// Enumerable policy class: every state's action distribution is a point of
// the simplex grid {k / (resolution - 1)}. resolution is points per
// probability axis (>= 2, so the grid always contains the vertices). With
// include_deterministic = false, fully deterministic policies (every row a
// vertex) are filtered out.
struct PolicyGrid {
    int resolution = 11;
    bool include_deterministic = true;
};

struct FrontierPoint {
    Matrix policy;
    Vector objectives;   // channels 1..m
    Vector constraints;  // channels m+1..m+p
    bool safe = false;
};

// Exhaustive safe Pareto frontier over the grid policy class: evaluates every
// enumerated policy exactly, keeps the safe ones (every constraint return at
// or below its limit), removes dominated points. The policy evaluation sweep
// is the OpenMP kernel; results land in preallocated slots so output order
// (and content) is independent of thread count. The serial variant is the
// reference implementation: identical code path without the parallel sweep.
// Throws std::runtime_error when the enumeration exceeds 10^7 policies.
std::vector<FrontierPoint> safe_pareto_front(const TabularCmdp& model, const PolicyGrid& grid);
std::vector<FrontierPoint> safe_pareto_front_serial(const TabularCmdp& model,
                                                    const PolicyGrid& grid);

// Scalarized optimality gap of a candidate objective vector against a
// frontier:
//   max(0, max_{point} min_{lambda in simplex grid} lambda . (point - candidate))
// lambda_resolution is the number of grid cells per axis (default 200, i.e.
// spacing 1/200). Returns 0 for frontier members. Empty frontier -> 0.
double optimality_gap(const std::vector<FrontierPoint>& frontier, const Vector& candidate,
                      int lambda_resolution = 200);

}  // namespace crmopo
