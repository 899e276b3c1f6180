#pragma once

#include <cstdint>
#include <vector>

#include "noiseshape/tensor.hpp"

// Pinned, portable random number stack. All randomness in the project flows
// through this file so that every output is reproducible bit for bit across
// platforms and standard library versions:
//
//   splitmix64   seed expansion and named-substream derivation
//   xoshiro256++ core uniform generator
//   Box-Muller   (trigonometric form) uniform -> standard normal, two draws
//                per two uniforms, no rejection, fixed consumption
//
// std::normal_distribution is implementation-defined and is not used anywhere.

namespace noiseshape {

uint64_t splitmix64(uint64_t& state);  // advances state, returns next value
uint64_t mix64(uint64_t x);            // one-shot finalizer (splitmix64 output fn)

// Deterministic substream derivation: derive(master, k) gives independent
// streams for k = 0, 1, 2, ... and chains, derive(derive(m, a), b).
uint64_t derive_seed(uint64_t master, uint64_t stream);

class Xoshiro256pp {
  public:
    explicit Xoshiro256pp(uint64_t seed);
    uint64_t next();

  private:
    uint64_t s_[4];
};

class GaussianRng {
  public:
    explicit GaussianRng(uint64_t seed) : core_(seed) {}

    double uniform01();  // in (0, 1]
    double normal();     // standard normal
    void fill_normal(double* out, std::size_t n);

  private:
    Xoshiro256pp core_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Deterministic for fixed (seed, shape). Row-major fill order.
NoiseTensor sample_gaussian(uint64_t seed, const std::vector<std::size_t>& shape);

// Substream tags used across the project. Kept here so independent components
// agree on stream identities (e.g. the degeneracy between a 1-noise pipeline
// and plain sampling relies on both using noise_stream(master, 0)).
inline constexpr uint64_t kStreamDatasetX0 = 1;   // training x0 draws, per dataset seed
inline constexpr uint64_t kStreamDatasetX1 = 2;   // curve parameter draws, per dataset seed
inline constexpr uint64_t kStreamInit = 16;       // network init, tensor index offset
inline constexpr uint64_t kStreamNoise = 256;     // generation-time latents, index offset
inline constexpr uint64_t kStreamZeta = 4096;     // reverse-process noise, step offset
inline constexpr uint64_t kStreamRepeat = 65536;  // experiment repeat derivation

inline uint64_t noise_stream(uint64_t master, uint64_t i) {
    return derive_seed(master, kStreamNoise + i);
}

}  // namespace noiseshape
