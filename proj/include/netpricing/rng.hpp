#ifndef NETPRICING_RNG_HPP
#define NETPRICING_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace netpricing {

/// SplitMix64 step; used to derive independent seeds from (seed, stream ids).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Mix a base seed with stream indices so replicate/trial streams never overlap.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t s = seed;
    splitmix64(s);
    s ^= 0xd1b54a32d192ed03ULL * (a + 1);
    splitmix64(s);
    s ^= 0x8cb92ba72f3d8dd7ULL * (b + 1);
    splitmix64(s);
    s ^= 0xda942042e4dd58b5ULL * (c + 1);
    return splitmix64(s);
}

/// Deterministic random source. mt19937_64 has a standard-mandated output
/// sequence, and all derived draws below avoid std::*_distribution, whose
/// sequences are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform in [0, 1).
    double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    /// Uniform integer in [0, n), n > 0. Rejection keeps the draw unbiased.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % n;
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return u01() < p; }

    /// Standard normal via Marsaglia's polar method.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * u01() - 1.0;
            v = 2.0 * u01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    /// Poisson draw by inversion of the exponential product (Knuth).
    /// Fine for the lambda range used here (<= ~30).
    int poisson(double lambda) {
        const double limit = std::exp(-lambda);
        double prod = 1.0;
        int k = -1;
        do {
            ++k;
            prod *= u01();
        } while (prod > limit);
        return k;
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace netpricing

#endif
