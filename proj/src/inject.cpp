#include "noiseshape/inject.hpp"

#include <cmath>

#include "noiseshape/errors.hpp"
#include "noiseshape/noise.hpp"
#include "noiseshape/rng.hpp"
#include "noiseshape/sampler.hpp"

namespace noiseshape {

void PipelineConfig::validate() const {
    if (n_erase < 1) fail_usage("pipeline: n_erase must be >= 1");
    if (delta < 0.0) fail_usage("pipeline: delta must be >= 0");
    weights.validate();
}

Config Provenance::to_config() const {
    Config c;
    c.set_int("provenance.n_seeds", (int64_t)seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i)
        c.set("provenance.seed." + std::to_string(i), std::to_string(seeds[i]));
    c.set_int("provenance.k", (int64_t)timesteps.size());
    for (std::size_t i = 0; i < timesteps.size(); ++i) {
        c.set("provenance.t." + std::to_string(i), format_real(timesteps[i]));
        c.set("provenance.w." + std::to_string(i), format_real(weights[i]));
    }
    c.set("provenance.delta", format_real(delta));
    if (!checkpoint_hash.empty()) c.set("provenance.checkpoint_hash", checkpoint_hash);
    return c;
}

static std::vector<double> call_model(const Denoiser& model, const std::vector<double>& z,
                                      double t, const std::vector<double>& cond,
                                      const char* stage) {
    std::vector<double> out;
    model.predict(z, t, cond, out);
    if (out.size() != z.size())
        fail_check(std::string(stage) + ": model output shape does not match latent");
    return out;
}

static std::vector<double> tpw_common(const Denoiser& model, const std::vector<double>& z,
                                      const std::vector<double>& cond,
                                      const WeightSchedule& ws, bool renormalize,
                                      const char* stage) {
    ws.validate();
    if (z.empty()) fail_usage(std::string(stage) + ": empty latent");
    if (!model.predict) fail_usage(std::string(stage) + ": model has no predict");

    std::vector<double> agg(z.size(), 0.0);
    double wsq = 0.0;
    for (std::size_t k = 0; k < ws.timesteps.size(); ++k) {
        const double w = ws.weights[k];
        wsq += w * w;
        const std::vector<double> pred = call_model(model, z, ws.timesteps[k], cond, stage);
        for (std::size_t j = 0; j < z.size(); ++j) agg[j] += w * pred[j];
    }
    if (renormalize) {
        const double norm = 1.0 / std::sqrt(wsq);
        for (double& v : agg) v *= norm;
    }
    return agg;
}

std::vector<double> tpw_eps(const Denoiser& model, const std::vector<double>& z,
                            const std::vector<double>& cond, const WeightSchedule& ws) {
    if (model.kind != Denoiser::Kind::EpsilonDiffusion)
        fail_usage("tpw_eps: model is not an epsilon predictor");
    return tpw_common(model, z, cond, ws, true, "tpw_eps");
}

std::vector<double> tpw_velocity(const Denoiser& model, const std::vector<double>& z,
                                 const std::vector<double>& cond,
                                 const WeightSchedule& ws) {
    if (model.kind != Denoiser::Kind::VelocityFlow)
        fail_usage("tpw_velocity: model is not a velocity predictor");
    return tpw_common(model, z, cond, ws, false, "tpw_velocity");
}

std::vector<double> blend_eps(const std::vector<double>& z,
                              const std::vector<double>& eps_agg, double delta) {
    if (delta < 0.0) fail_usage("blend_eps: delta must be >= 0");
    if (z.size() != eps_agg.size()) fail_usage("blend_eps: shape mismatch");
    if (delta == 0.0) return z;
    std::vector<double> out(z.size());
    const double inv = 1.0 / std::sqrt(1.0 + delta * delta);
    for (std::size_t j = 0; j < z.size(); ++j)
        out[j] = (z[j] + delta * eps_agg[j]) * inv;
    return out;
}

std::vector<double> blend_velocity(const std::vector<double>& z,
                                   const std::vector<double>& v_agg, double delta) {
    if (delta < 0.0) fail_usage("blend_velocity: delta must be >= 0");
    if (z.size() != v_agg.size()) fail_usage("blend_velocity: shape mismatch");
    if (delta == 0.0) return z;
    std::vector<double> out(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) out[j] = z[j] + delta * v_agg[j];
    return out;
}

PipelineResult run_pipeline(const Denoiser& model, const std::vector<double>& cond,
                            const PipelineConfig& cfg, const SamplerConfig& scfg,
                            uint64_t master_seed, std::size_t latent_dim) {
    cfg.validate();
    if (latent_dim == 0) fail_usage("pipeline: latent_dim must be positive");
    if (cfg.model_kind != model.kind) fail_usage("pipeline: model kind mismatch");

    PipelineResult res;
    res.provenance.timesteps = cfg.weights.timesteps;
    res.provenance.weights = cfg.weights.weights;
    res.provenance.delta = cfg.delta;

    // stage 1: erase across n fresh sources
    std::vector<NoiseTensor> sources;
    sources.reserve(cfg.n_erase);
    for (int i = 0; i < cfg.n_erase; ++i) {
        const uint64_t seed = noise_stream(master_seed, (uint64_t)i);
        res.provenance.seeds.push_back(seed);
        sources.push_back(sample_gaussian(seed, {latent_dim}));
    }
    NoiseTensor z_t = erase(sources);

    // stages 2 and 3: aggregate and blend; delta = 0 skips the model entirely
    if (cfg.delta == 0.0) {
        res.adjusted = z_t.data;
    } else if (cfg.model_kind == Denoiser::Kind::EpsilonDiffusion) {
        const std::vector<double> agg = tpw_eps(model, z_t.data, cond, cfg.weights);
        res.adjusted = blend_eps(z_t.data, agg, cfg.delta);
    } else {
        const std::vector<double> agg = tpw_velocity(model, z_t.data, cond, cfg.weights);
        res.adjusted = blend_velocity(z_t.data, agg, cfg.delta);
    }

    // stage 4: standard sampler from the adjusted latent
    if (model.kind == Denoiser::Kind::VelocityFlow) {
        if (scfg.direction != 1 && scfg.direction != -1)
            fail_usage("pipeline: sampler direction must be 1 or -1");
        const double sign = (double)scfg.direction;
        VelocityFn f = [&](const std::vector<double>& z, double t,
                           std::vector<double>& out) {
            model.predict(z, t, cond, out);
            if (out.size() != z.size())
                fail_check("pipeline sampler: model output shape does not match latent");
            if (sign < 0.0)
                for (double& v : out) v = -v;
        };
        res.sample = flow_map(f, res.adjusted, 0.0, 1.0, scfg.heun_steps);
    } else {
        if (!scfg.sched) fail_usage("pipeline: diffusion sampling needs a schedule");
        const DiffusionSchedule& sched = *scfg.sched;
        std::vector<double> x = res.adjusted, x_prev, zeta;
        GaussianRng zeta_rng(derive_seed(scfg.zeta_seed, kStreamZeta));
        for (int t = sched.T; t >= 1; --t) {
            const std::vector<double> eps =
                call_model(model, x, (double)t, cond, "pipeline sampler");
            const std::vector<double>* zp = nullptr;
            if (scfg.stochastic && t > 1) {
                zeta.resize(x.size());
                zeta_rng.fill_normal(zeta.data(), zeta.size());
                zp = &zeta;
            }
            ddpm_reverse_step(sched, x, t, eps, zp, x_prev);
            x.swap(x_prev);
        }
        res.sample = x;
    }
    return res;
}

}  // namespace noiseshape
