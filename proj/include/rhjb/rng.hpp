#pragma once

#include <cstdint>
#include <random>

#include "rhjb/vec.hpp"

namespace rhjb {

// Deterministic sampling helper. Hand-rolled uniform mapping keeps the byte
// stream independent of the standard library's distribution implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    int index(int count) {
        // count is small at desk scale; modulo bias is irrelevant here
        return static_cast<int>(gen_() % static_cast<std::uint64_t>(count));
    }

    Vec point(const Vec& lo, const Vec& hi) {
        Vec x(lo.n);
        for (int i = 0; i < lo.n; ++i) x[i] = uniform(lo[i], hi[i]);
        return x;
    }

    Vec ball(int dim, double radius) {
        Vec x(dim);
        for (int i = 0; i < dim; ++i) x[i] = uniform(-radius, radius);
        return x;
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace rhjb
