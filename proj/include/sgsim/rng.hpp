#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sgsim {

// splitmix64, used to derive independent sub-seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Derives a seed for a named sub-stream (trial index, stage id, ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream + 0x6A09E667F3BCC909ULL));
}

// Deterministic RNG. mt19937_64 is fully specified by the standard and the
// distributions below are hand-rolled, so sequences are reproducible across
// compilers and platforms for a fixed seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    int uniform_int(int n) {
        return n <= 1 ? 0 : static_cast<int>(engine_() % static_cast<std::uint64_t>(n));
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller; draws two uniforms per sample, no cached spare.
    double normal(double mean, double sigma) {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(2.0 * M_PI * u2);
    }

    // Knuth's product method; fine for the small rates used here.
    int poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        double limit = std::exp(-lambda);
        double prod = uniform();
        int count = 0;
        while (prod > limit) {
            ++count;
            prod *= uniform();
        }
        return count;
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace sgsim
