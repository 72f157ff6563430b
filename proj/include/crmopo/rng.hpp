#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "crmopo/types.hpp"

namespace crmopo {

// splitmix64 finalizer, used to derive independent seed streams from a base
// seed plus stream indices. Stateless, so (seed, index) -> substream mapping is
// reproducible no matter which thread consumes which index.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix_seed(mix_seed(seed) ^ mix_seed(stream * 0x9e3779b97f4a7c15ULL + 1));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t s1, std::uint64_t s2) {
    return derive_seed(derive_seed(seed, s1), s2);
}

// All sampling goes through hand-written transforms of raw mt19937_64 output.
// std::*_distribution is implementation-defined and would break bit-exact
// reproducibility of seeded runs; the engine itself is fully specified.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1], for log transforms.
    double uniform_pos() { return 1.0 - uniform(); }

    // Index sampled from an unnormalized nonnegative weight row.
    int categorical(const Eigen::Ref<const Eigen::RowVectorXd>& weights) {
        double total = weights.sum();
        double u = uniform() * total;
        double cum = 0.0;
        int last = 0;
        for (int i = 0; i < weights.size(); ++i) {
            if (weights(i) <= 0.0) continue;
            cum += weights(i);
            last = i;
            if (u < cum) return i;
        }
        return last;
    }

    // Geometric on {0,1,2,...} with success probability 1-q: P(H=h) = (1-q) q^h.
    std::uint64_t geometric(double q) {
        if (q <= 0.0) return 0;
        return static_cast<std::uint64_t>(std::floor(std::log(uniform_pos()) / std::log(q)));
    }

    double normal() {
        double u1 = uniform_pos();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Marsaglia-Tsang; boosted for shape < 1.
    double gamma(double shape) {
        if (shape < 1.0) {
            double u = uniform_pos();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform_pos();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
        }
    }

    Vector dirichlet(int n, double concentration) {
        Vector g(n);
        for (int i = 0; i < n; ++i) g(i) = gamma(concentration);
        double s = g.sum();
        if (s <= 0.0) return Vector::Constant(n, 1.0 / n);
        return g / s;
    }

    // Uniform integer in [0, n) by rejection (unbiased, engine-exact).
    std::uint64_t bounded(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        for (;;) {
            std::uint64_t x = engine_();
            if (x < limit) return x % n;
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace crmopo
