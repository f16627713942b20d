#pragma once

#include <cstdint>
#include <random>

namespace wwsp::rng {

// splitmix64 finalizer; full avalanche on 64-bit inputs.
std::uint64_t mix64(std::uint64_t x);

// Derives an independent stream seed from a root seed plus up to three
// stream coordinates (e.g. scenario index, leaf id, purpose tag).
// Order-independent generation: the stream depends only on the coordinates,
// never on how many draws other streams made.
std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                            std::uint64_t c = 0);

// Thin wrapper over mt19937_64 with explicit, portable samplers.
// std::random distributions are implementation-defined; these are not.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1), 53-bit resolution.
    double uniform();

    // Uniform on [lo, hi).
    double uniform(double lo, double hi);

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via Box-Muller (two uniforms per draw).
    double gaussian();

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    // Gaussian truncated below at 0 (exclusive), by rejection. A zero stddev
    // degenerates to the mean, which must then be positive.
    double truncated_gaussian_positive(double mean, double stddev);

    // Poisson(lambda). Knuth's product method, chunked so the exponential
    // never underflows for large lambda.
    std::uint64_t poisson(double lambda);

    // Poisson(lambda) conditioned on the outcome being >= 1, by sequential
    // inversion of the zero-truncated pmf.
    std::uint64_t zero_truncated_poisson(double lambda);

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace wwsp::rng
