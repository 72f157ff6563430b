// Compares the OpenMP kernels against their serial reference implementations:
// wall time plus the largest output difference (expected to be exactly zero,
// both variants reduce in identical order).

#include <chrono>
#include <cmath>
#include <cstdio>

#include <omp.h>

#include "crmopo/estimators.hpp"
#include "crmopo/frontier.hpp"
#include "crmopo/generators.hpp"
#include "crmopo/policy.hpp"

using namespace crmopo;
using clock_type = std::chrono::steady_clock;

namespace {

template <typename F>
double time_ms(F&& fn, int repetitions) {
    double best = 1e300;
    for (int r = 0; r < repetitions; ++r) {
        auto start = clock_type::now();
        fn();
        auto stop = clock_type::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(stop - start).count());
    }
    return best;
}

void report(const char* name, double serial_ms, double parallel_ms, double max_delta) {
    std::printf("%-28s %10.2f ms %10.2f ms %8.2fx %12g\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms, max_delta);
}

}  // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-28s %13s %13s %9s %12s\n", "kernel", "serial", "openmp", "speedup",
                "max |delta|");

    {
        GeneratorSpec spec;
        spec.kind = "random";
        spec.seed = 7;
        spec.n_states = 5;
        spec.n_actions = 3;
        spec.n_objectives = 2;
        spec.n_constraints = 1;
        TabularCmdp model = generate(spec);
        PolicyGrid grid;
        grid.resolution = 5;  // 15 rows per state, 15^5 ~ 760k policies

        std::vector<FrontierPoint> serial_front, parallel_front;
        double serial_ms = time_ms([&] { serial_front = safe_pareto_front_serial(model, grid); }, 2);
        double parallel_ms = time_ms([&] { parallel_front = safe_pareto_front(model, grid); }, 2);

        double max_delta = serial_front.size() == parallel_front.size() ? 0.0 : 1e300;
        if (max_delta == 0.0)
            for (std::size_t i = 0; i < serial_front.size(); ++i)
                max_delta = std::max(max_delta,
                                     (serial_front[i].objectives - parallel_front[i].objectives)
                                         .cwiseAbs()
                                         .maxCoeff());
        report("frontier enumeration", serial_ms, parallel_ms, max_delta);
    }

    {
        GeneratorSpec spec;
        spec.kind = "random";
        spec.seed = 11;
        spec.n_states = 6;
        spec.n_actions = 3;
        spec.n_objectives = 1;
        spec.n_constraints = 1;
        TabularCmdp model = generate(spec);
        Matrix policy = Matrix::Constant(model.n_states, model.n_actions, 1.0 / model.n_actions);

        McConfig config;
        config.n_rollouts = 400000;
        config.seed = 3;

        double serial_value = 0.0, parallel_value = 0.0;
        double serial_ms =
            time_ms([&] { serial_value = mc_q_estimate_serial(model, policy, 0, 0, 0, config); }, 3);
        double parallel_ms =
            time_ms([&] { parallel_value = mc_q_estimate(model, policy, 0, 0, 0, config); }, 3);
        report("monte-carlo q estimate", serial_ms, parallel_ms,
               std::abs(serial_value - parallel_value));
    }
    return 0;
}
