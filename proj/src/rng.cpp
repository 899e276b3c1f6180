#include "noiseshape/rng.hpp"

#include <cmath>

#include "noiseshape/errors.hpp"

namespace noiseshape {

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

uint64_t mix64(uint64_t x) {
    return splitmix64(x);  // local copy advances and is discarded
}

uint64_t derive_seed(uint64_t master, uint64_t stream) {
    // Distinct (master, stream) pairs map to well-separated seeds; chaining is fine.
    uint64_t state = master ^ (0x9E3779B97F4A7C15ull * (stream + 1));
    return splitmix64(state);
}

Xoshiro256pp::Xoshiro256pp(uint64_t seed) {
    // Seed expansion per the xoshiro authors' recommendation.
    uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
}

static inline uint64_t rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

uint64_t Xoshiro256pp::next() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double GaussianRng::uniform01() {
    // 53-bit mantissa, shifted into (0, 1] so log() below is always finite.
    return ((core_.next() >> 11) + 1) * 0x1.0p-53;
}

double GaussianRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;  // 2*pi
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

void GaussianRng::fill_normal(double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = normal();
}

NoiseTensor sample_gaussian(uint64_t seed, const std::vector<std::size_t>& shape) {
    const std::size_t n = shape_numel(shape);
    NoiseTensor t;
    t.shape = shape;
    t.data.resize(n);
    GaussianRng rng(seed);
    rng.fill_normal(t.data.data(), n);
    return t;
}

}  // namespace noiseshape
