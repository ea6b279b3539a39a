#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace spikerace {

/** splitmix64 step, used to mix seeds and stream ids into engine states. */
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    // the odd multiplier keeps the combination asymmetric in (state, id), so
    // swapping seed and stream id or nesting equal values cannot collide
    std::uint64_t s = mix64(seed);
    for (std::uint64_t id : ids) s = mix64(s + 0x9e3779b97f4a7c15ull * (id + 1));
    return s;
}

/**
 * Deterministic random stream. All variate transforms are explicit so that
 * equal (seed, stream) always produces identical draws, independent of the
 * standard library's distribution implementations. Derived substreams depend
 * only on the key, never on how much the parent stream has been consumed.
 */
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}
    Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) : eng_(mix_seed(seed, ids)) {}

    std::uint64_t u64() { return eng_(); }

    /** Uniform on [0, 1) with 53 random bits. */
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /** Standard normal, Box-Muller without caching the second variate. */
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286767 * u2);
    }
    double normal(double mean, double sd) { return mean + sd * normal(); }
    double lognormal(double mu, double sd_log) { return std::exp(normal(mu, sd_log)); }
    double exponential(double rate) { return -std::log(1.0 - uniform()) / rate; }
    bool bernoulli(double p) { return uniform() < p; }

    /** Normal conditioned on being >= lower, by rejection. */
    double truncated_normal(double mean, double sd, double lower) {
        for (;;) {
            const double x = normal(mean, sd);
            if (x >= lower) return x;
        }
    }

    /** Gamma(shape, rate), Marsaglia-Tsang with the shape<1 boost. */
    double gamma(double shape, double rate);

    /** Inverse gamma with given shape and scale: reciprocal of Gamma(shape, rate=scale). */
    double inv_gamma(double shape, double scale) { return 1.0 / gamma(shape, scale); }

    double beta(double a, double b) {
        const double x = gamma(a, 1.0);
        const double y = gamma(b, 1.0);
        return x / (x + y);
    }

    /** Inverse Gaussian(mean mu, shape lambda), Michael-Schucany-Haas. */
    double inverse_gaussian(double mu, double lambda) {
        const double z = normal();
        const double y = z * z;
        const double x = mu + 0.5 * mu * mu * y / lambda -
                         0.5 * (mu / lambda) * std::sqrt(4.0 * mu * lambda * y + mu * mu * y * y);
        return uniform() <= mu / (mu + x) ? x : mu * mu / x;
    }

    /** Index draw from unnormalized log-weights. */
    int pick_log_weights(std::span<const double> logw);

  private:
    std::mt19937_64 eng_;
};

}  // namespace spikerace
