#pragma once

#include <cstdint>
#include <random>

#include "tmerton/normal.hpp"

namespace tmerton {

// SplitMix64 output function over (root, index). Path i gets a fixed
// substream seed no matter how work is batched or threaded.
inline std::uint64_t mix_seed(std::uint64_t root, std::uint64_t index) {
    std::uint64_t z = root + (index + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Normal variate source: mt19937_64 uniforms pushed through the inverse CDF.
// Output depends only on the seed, not on library-internal sampling tricks.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

    // Uniform on the open interval (0, 1); never returns an endpoint.
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return normal_icdf(uniform()); }

private:
    std::mt19937_64 engine_;
};

}  // namespace tmerton
