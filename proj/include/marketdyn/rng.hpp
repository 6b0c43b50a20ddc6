#pragma once

#include <cstdint>

namespace marketdyn {

// Stateless counter-based generator. Every (seed, step, item) triple maps to
// one 64-bit word through avalanche mixing, so a draw never depends on how
// many draws happened before it or on which thread asks for it. This is what
// makes parallel sweeps bit-reproducible.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t word(std::uint64_t step, std::uint64_t item) const {
        std::uint64_t h = mix64(seed_ + 0x9E3779B97F4A7C15ull);
        h = mix64(h ^ (step + 0xBF58476D1CE4E5B9ull));
        h = mix64(h ^ (item + 0x94D049BB133111EBull));
        return h;
    }

    // Uniform draw in the open interval (0,1); never returns an endpoint, so
    // it is safe to feed into an inverse distribution function.
    double uniform_open(std::uint64_t step, std::uint64_t item) const {
        const std::uint64_t w = word(step, item);
        return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    // splitmix64 finalizer
    static std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t seed_;
};

}  // namespace marketdyn
