#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "noiseshape/config.hpp"
#include "noiseshape/schedule.hpp"

namespace noiseshape {

// Generic denoiser interface. The condition vector is opaque to this module;
// the adapter bound into predict interprets it. predict writes a tensor of the
// same length as z: a noise estimate for EpsilonDiffusion, a velocity for
// VelocityFlow.
struct Denoiser {
    enum class Kind { EpsilonDiffusion, VelocityFlow };
    Kind kind = Kind::VelocityFlow;
    bool reentrant = false;  // true if predict may be called concurrently
    std::function<void(const std::vector<double>& z, double t,
                       const std::vector<double>& cond, std::vector<double>& out)>
        predict;
};

struct PipelineConfig {
    int n_erase = 1;             // noise sources averaged in the erasure stage
    WeightSchedule weights;      // aggregation timesteps and weights
    double delta = 0.0;          // injection strength, >= 0
    Denoiser::Kind model_kind = Denoiser::Kind::VelocityFlow;

    void validate() const;
};

// Everything needed to reproduce a pipeline run.
struct Provenance {
    std::vector<uint64_t> seeds;      // one per erased source
    std::vector<double> timesteps;    // aggregation t_k
    std::vector<double> weights;      // aggregation w_k
    double delta = 0.0;
    std::string checkpoint_hash;      // empty when the model has no checkpoint

    Config to_config() const;
};

struct PipelineResult {
    std::vector<double> sample;       // final generated state
    std::vector<double> adjusted;     // latent handed to the sampler (stage 3 output)
    Provenance provenance;
};

// Sampler settings for stage 4. The flow branch integrates t: 0 -> 1 with
// heun_steps Heun steps, flipping the predicted velocity when direction = -1.
// The diffusion branch walks sched from T down to 1; zeta draws come from
// zeta_seed (zero noise when stochastic = false).
struct SamplerConfig {
    int heun_steps = 40;
    int direction = 1;
    const DiffusionSchedule* sched = nullptr;   // required for EpsilonDiffusion
    bool stochastic = false;
    uint64_t zeta_seed = 0;
};

// eps_agg = (sum_k w_k eps(z, t_k, cond)) / sqrt(sum_k w_k^2). The same z is
// fed at every timestep. Rejects a velocity-kind model.
std::vector<double> tpw_eps(const Denoiser& model, const std::vector<double>& z,
                            const std::vector<double>& cond, const WeightSchedule& ws);

// (z + delta * eps_agg) / sqrt(1 + delta^2); delta = 0 returns z bitwise.
std::vector<double> blend_eps(const std::vector<double>& z,
                              const std::vector<double>& eps_agg, double delta);

// v_agg = sum_k w_k v(z, t_k, cond), no variance renormalization: the
// aggregated velocity is not assumed Gaussian. Rejects an epsilon-kind model.
std::vector<double> tpw_velocity(const Denoiser& model, const std::vector<double>& z,
                                 const std::vector<double>& cond,
                                 const WeightSchedule& ws);

// z + delta * v_agg; delta = 0 returns z bitwise.
std::vector<double> blend_velocity(const std::vector<double>& z,
                                   const std::vector<double>& v_agg, double delta);

// Full four-stage pipeline: erase n fresh draws, aggregate predictions at the
// weighted timesteps, blend into an adjusted latent, then run the standard
// sampler. Deterministic given (master_seed, cfg). Source seeds are derived as
// noise_stream(master_seed, i); with n_erase = 1 and delta = 0 the result is
// bitwise identical to standard sampling from noise_stream(master_seed, 0).
PipelineResult run_pipeline(const Denoiser& model, const std::vector<double>& cond,
                            const PipelineConfig& cfg, const SamplerConfig& scfg,
                            uint64_t master_seed, std::size_t latent_dim);

}  // namespace noiseshape
