#include "wwsp/rng.hpp"

#include <cmath>
#include <limits>

#include "wwsp/errors.hpp"

namespace wwsp::rng {

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                            std::uint64_t c) {
    // Chain through the state so every argument position mixes differently;
    // a plain xor of per-argument hashes would make (seed, a) interchangeable.
    std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ULL);
    h = mix64(h ^ (a + 0x3c6ef372fe94f82bULL));
    h = mix64(h ^ (b + 0x78dde6e5fd29f041ULL));
    h = mix64(h ^ (c + 0xd1b54a32d192ed03ULL));
    return h;
}

double Stream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Stream::uniform(double lo, double hi) {
    return lo + uniform() * (hi - lo);
}

double Stream::gaussian() {
    // Box-Muller; u1 shifted away from 0 so log stays finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Stream::truncated_gaussian_positive(double mean, double stddev) {
    if (stddev < 0.0) throw ValidationError("truncated gaussian: negative stddev");
    if (stddev == 0.0) {
        if (mean <= 0.0)
            throw ValidationError("truncated gaussian: mean <= 0 with zero stddev cannot produce a positive sample");
        return mean;
    }
    // Exact truncation by rejection; clamping would put a point mass at 0.
    for (int attempt = 0; attempt < 1000000; ++attempt) {
        const double x = gaussian(mean, stddev);
        if (x > 0.0) return x;
    }
    throw ValidationError("truncated gaussian: acceptance region has vanishing mass");
}

std::uint64_t Stream::poisson(double lambda) {
    if (lambda < 0.0 || !std::isfinite(lambda))
        throw ValidationError("poisson: rate must be finite and non-negative");
    if (lambda == 0.0) return 0;
    // Poisson(a + b) = Poisson(a) + Poisson(b); split so exp(-chunk) stays
    // well above DBL_MIN.
    std::uint64_t total = 0;
    double remaining = lambda;
    constexpr double kChunk = 500.0;
    while (remaining > 0.0) {
        const double step = remaining > kChunk ? kChunk : remaining;
        remaining -= step;
        const double threshold = std::exp(-step);
        std::uint64_t k = 0;
        double product = 1.0;
        for (;;) {
            product *= uniform();
            if (product <= threshold) break;
            ++k;
        }
        total += k;
    }
    return total;
}

std::uint64_t Stream::zero_truncated_poisson(double lambda) {
    if (lambda <= 0.0 || !std::isfinite(lambda))
        throw ValidationError("zero-truncated poisson: rate must be finite and positive");
    // Sequential inversion over P(N = n | N >= 1), n = 1, 2, ...
    const double norm = -std::expm1(-lambda);  // 1 - e^-lambda
    const double u = uniform() * norm;
    double pmf = lambda * std::exp(-lambda);  // P(N = 1)
    double cdf = pmf;
    std::uint64_t n = 1;
    while (u >= cdf && n < 100000000ULL) {
        ++n;
        pmf *= lambda / static_cast<double>(n);
        cdf += pmf;
        if (pmf < std::numeric_limits<double>::min() && u >= cdf) break;
    }
    return n;
}

}  // namespace wwsp::rng
