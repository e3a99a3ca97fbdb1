#pragma once

#include <cstdint>
#include <random>

namespace pat {

struct RngSeed {
    std::uint64_t value = 0;
};

// Seeded generator with a fully specified draw sequence.
//
// Uniforms use the top 53 bits of mt19937_64; normals use Box-Muller with the
// second variate of each pair cached. Unlike the std distributions, the
// stream is identical across standard library implementations.
class Rng {
public:
    explicit Rng(RngSeed seed) : engine_(seed.value) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer on [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    double normal();

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// Derives an independent seed for a named sub-stream.
RngSeed derive_seed(RngSeed base, std::uint64_t stream);

}  // namespace pat
