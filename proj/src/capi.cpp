#include "noiseshape.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "noiseshape/config.hpp"
#include "noiseshape/errors.hpp"
#include "noiseshape/metrics.hpp"
#include "noiseshape/net.hpp"
#include "noiseshape/noise.hpp"
#include "noiseshape/oracle.hpp"
#include "noiseshape/rng.hpp"
#include "noiseshape/runner.hpp"

using noiseshape::Config;
using noiseshape::Error;
using noiseshape::Status;

namespace {

thread_local std::string g_error;
thread_local std::string g_report;
thread_local std::string g_outdir;

nsh_status to_status(Status s) { return (nsh_status)(int)s; }

// Runs fn, routing every failure into the thread-local error string. fn
// returns the status for the non-throwing outcome.
template <typename Fn>
nsh_status guarded(Fn&& fn) {
    g_error.clear();
    try {
        return fn();
    } catch (const Error& e) {
        g_error = e.what();
        return to_status(e.status());
    } catch (const std::exception& e) {
        g_error = e.what();
        return NSH_NUMERIC_ERROR;
    }
}

}  // namespace

struct nsh_config {
    Config cfg;
    std::string scratch;  // backs nsh_config_get return values
};

struct nsh_model {
    noiseshape::Checkpoint ckpt;
    noiseshape::ToySetup setup;
};

extern "C" {

const char* nsh_last_error(void) { return g_error.c_str(); }
const char* nsh_last_report(void) { return g_report.c_str(); }
const char* nsh_last_outdir(void) { return g_outdir.c_str(); }

nsh_config* nsh_config_new(void) {
    g_error.clear();
    return new (std::nothrow) nsh_config();
}

void nsh_config_free(nsh_config* cfg) { delete cfg; }

nsh_status nsh_config_load_file(nsh_config* cfg, const char* path) {
    return guarded([&]() -> nsh_status {
        if (!cfg || !path) noiseshape::fail_usage("null argument");
        // file values must not clobber keys set programmatically before: the
        // merged view is file defaults overridden by existing entries
        Config merged = Config::parse_file(path);
        for (const auto& [k, v] : cfg->cfg.items()) merged.set(k, v);
        cfg->cfg = merged;
        return NSH_OK;
    });
}

nsh_status nsh_config_set(nsh_config* cfg, const char* key, const char* value) {
    return guarded([&]() -> nsh_status {
        if (!cfg || !key || !value) noiseshape::fail_usage("null argument");
        cfg->cfg.set(key, value);
        return NSH_OK;
    });
}

const char* nsh_config_get(nsh_config* cfg, const char* key) {
    g_error.clear();
    if (!cfg || !key) return nullptr;
    if (!cfg->cfg.has(key)) return nullptr;
    cfg->scratch = cfg->cfg.get_str(key, "");
    return cfg->scratch.c_str();
}

nsh_status nsh_run(nsh_config* cfg, const char* command) {
    g_report.clear();
    g_outdir.clear();
    return guarded([&]() -> nsh_status {
        if (!cfg || !command) noiseshape::fail_usage("null argument");
        const noiseshape::RunResult res = noiseshape::run_command(command, cfg->cfg);
        g_report = res.report;
        g_outdir = res.out_dir;
        return (nsh_status)res.status;
    });
}

nsh_status nsh_sample_gaussian(uint64_t seed, double* out, size_t n) {
    return guarded([&]() -> nsh_status {
        if (!out || n == 0) noiseshape::fail_usage("null or empty output");
        noiseshape::GaussianRng rng(seed);
        rng.fill_normal(out, n);
        return NSH_OK;
    });
}

nsh_status nsh_erase(const double* sources, size_t n_sources, size_t len, double* out) {
    return guarded([&]() -> nsh_status {
        if (!sources || !out || n_sources == 0 || len == 0)
            noiseshape::fail_usage("null or empty arguments");
        std::vector<noiseshape::NoiseTensor> tensors;
        tensors.reserve(n_sources);
        for (size_t i = 0; i < n_sources; ++i)
            tensors.emplace_back(
                std::vector<double>(sources + i * len, sources + (i + 1) * len),
                std::vector<size_t>{len});
        const noiseshape::NoiseTensor erased = noiseshape::erase(tensors);
        std::memcpy(out, erased.data.data(), len * sizeof(double));
        return NSH_OK;
    });
}

double nsh_mi_per_source(int n, int dim) {
    double value = -1.0;
    guarded([&]() -> nsh_status {
        value = noiseshape::mi_per_source(n, dim);
        return NSH_OK;
    });
    return value;
}

double nsh_cost_ratio(int base_steps, int extra_evals, double k_over_c, int n_sources) {
    double value = -1.0;
    guarded([&]() -> nsh_status {
        value = noiseshape::cost_ratio(base_steps, extra_evals, k_over_c, n_sources);
        return NSH_OK;
    });
    return value;
}

nsh_model* nsh_model_load(const char* path) {
    nsh_model* model = nullptr;
    guarded([&]() -> nsh_status {
        if (!path) noiseshape::fail_usage("null path");
        auto m = std::make_unique<nsh_model>();
        m->ckpt = noiseshape::load_checkpoint(path);
        m->setup = noiseshape::ToySetup::from_config(m->ckpt.meta);
        model = m.release();
        return NSH_OK;
    });
    return model;
}

void nsh_model_free(nsh_model* model) { delete model; }

nsh_status nsh_model_predict(nsh_model* model, double x, double y, double t,
                             const char* shape_name, int emb_position,
                             double out_xy[2]) {
    return guarded([&]() -> nsh_status {
        if (!model || !shape_name || !out_xy) noiseshape::fail_usage("null argument");
        const int s = model->setup.shape_index(shape_name);
        if (emb_position < 0 || emb_position >= model->setup.positions_per_shape())
            noiseshape::fail_usage("emb position out of range");
        const noiseshape::ConditionVector cond = noiseshape::make_condition(
            model->setup.shapes[(size_t)s], model->setup.emb_index(s, emb_position), t);
        const double pt[2] = {x, y};
        noiseshape::forward_one(model->ckpt.model, pt, t, cond, out_xy);
        return NSH_OK;
    });
}

}  // extern "C"
