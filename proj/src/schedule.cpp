#include "noiseshape/schedule.hpp"

#include <cmath>

#include "noiseshape/errors.hpp"

namespace noiseshape {

void DiffusionSchedule::check_index(int t) const {
    if (t < 1 || t > T)
        fail_usage("schedule index t=" + std::to_string(t) + " outside [1, " +
                   std::to_string(T) + "]");
}

DiffusionSchedule make_linear_schedule(int T, double beta_min, double beta_max,
                                       SigmaMode mode) {
    if (T < 2) fail_usage("make_linear_schedule: T must be >= 2");
    if (!(beta_min > 0.0) || !(beta_max < 1.0) || beta_min > beta_max)
        fail_usage("make_linear_schedule: need 0 < beta_min <= beta_max < 1");

    DiffusionSchedule s;
    s.T = T;
    s.beta_min = beta_min;
    s.beta_max = beta_max;
    s.sigma_mode = mode;
    s.betas.resize(T);
    s.alphas.resize(T);
    s.alpha_bars.resize(T);
    s.sigmas.resize(T);
    double abar = 1.0;
    for (int i = 0; i < T; ++i) {
        const double frac = T == 1 ? 0.0 : (double)i / (double)(T - 1);
        const double beta = beta_min + (beta_max - beta_min) * frac;
        const double alpha = 1.0 - beta;
        const double abar_prev = abar;
        abar *= alpha;
        s.betas[i] = beta;
        s.alphas[i] = alpha;
        s.alpha_bars[i] = abar;
        if (mode == SigmaMode::SqrtBeta) {
            s.sigmas[i] = std::sqrt(beta);
        } else {
            // beta_tilde = beta * (1 - abar_{t-1}) / (1 - abar_t); zero at t = 1
            // because abar_0 = 1 by convention.
            s.sigmas[i] = std::sqrt(beta * (1.0 - abar_prev) / (1.0 - abar));
        }
    }
    return s;
}

double snr(const DiffusionSchedule& sched, int t) {
    sched.check_index(t);
    const double abar = sched.alpha_bars[t - 1];
    return abar / (1.0 - abar);
}

Phase classify_phase(double snr_value, const PhaseThresholds& thr) {
    if (!(snr_value >= 0.0)) fail_usage("classify_phase: snr must be non-negative");
    if (!(thr.low > 0.0) || !(thr.low < thr.high))
        fail_usage("classify_phase: need 0 < low < high");
    if (snr_value < thr.low) return Phase::Early;
    if (snr_value > thr.high) return Phase::Late;
    return Phase::Middle;
}

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Early: return "early";
        case Phase::Middle: return "middle";
        case Phase::Late: return "late";
    }
    return "?";
}

double gamma_coef(const DiffusionSchedule& sched, int t) {
    sched.check_index(t);
    return sched.betas[t - 1] / std::sqrt(sched.alphas[t - 1]);
}

double gamma_coef_alt(const DiffusionSchedule& sched, int t) {
    sched.check_index(t);
    return sched.betas[t - 1] * std::sqrt(1.0 - sched.alpha_bars[t - 1]) /
           std::sqrt(sched.alphas[t - 1]);
}

void WeightSchedule::validate() const {
    if (timesteps.empty() || timesteps.size() != weights.size())
        fail_usage("weight schedule: need K >= 1 matching timesteps/weights");
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) fail_usage("weight schedule: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        fail_usage("weight schedule: weights must sum to 1");
}

WeightSchedule power_weights(const std::vector<double>& timesteps, double center) {
    if (timesteps.empty()) fail_usage("power_weights: empty timestep list");
    WeightSchedule ws;
    ws.timesteps = timesteps;
    ws.weights.resize(timesteps.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < timesteps.size(); ++k) {
        const double u = (timesteps[k] - center) / 5.0;
        const double f = std::max(0.0, 1000.0 - u * u);
        ws.weights[k] = f;
        sum += f;
    }
    if (sum == 0.0) {
        const double w = 1.0 / (double)timesteps.size();
        for (double& v : ws.weights) v = w;
    } else {
        for (double& v : ws.weights) v /= sum;
    }
    return ws;
}

WeightSchedule snr_weights(const DiffusionSchedule& sched,
                           const std::vector<int>& timesteps, double exponent) {
    if (timesteps.empty()) fail_usage("snr_weights: empty timestep list");
    WeightSchedule ws;
    ws.timesteps.reserve(timesteps.size());
    ws.weights.resize(timesteps.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < timesteps.size(); ++k) {
        const double v = std::pow(snr(sched, timesteps[k]), exponent);
        ws.timesteps.push_back((double)timesteps[k]);
        ws.weights[k] = v;
        sum += v;
    }
    for (double& v : ws.weights) v /= sum;
    return ws;
}

std::vector<int> default_timesteps(int T, int K) {
    if (K < 1 || K > T) fail_usage("default_timesteps: need 1 <= K <= T");
    std::vector<int> ts(K);
    if (K == 1) {
        ts[0] = (T + 1) / 2;
        return ts;
    }
    for (int k = 0; k < K; ++k) {
        double pos = 1.0 + (double)k * (T - 1) / (double)(K - 1);
        ts[k] = (int)std::lround(pos);
    }
    return ts;
}

std::vector<double> uniform_times(double t0, double t1, int K) {
    if (K < 1) fail_usage("uniform_times: need K >= 1");
    std::vector<double> ts(K);
    if (K == 1) {
        ts[0] = 0.5 * (t0 + t1);
        return ts;
    }
    for (int k = 0; k < K; ++k) ts[k] = t0 + (t1 - t0) * (double)k / (double)(K - 1);
    return ts;
}

Config schedule_to_config(const DiffusionSchedule& sched) {
    Config cfg;
    cfg.set_int("T", sched.T);
    cfg.set_real("beta_min", sched.beta_min);
    cfg.set_real("beta_max", sched.beta_max);
    cfg.set("sigma_mode", sched.sigma_mode == SigmaMode::SqrtBeta ? "sqrt_beta" : "tilde_beta");
    return cfg;
}

DiffusionSchedule schedule_from_config(const Config& cfg) {
    const int T = (int)cfg.get_int("T", 1000);
    const double bmin = cfg.get_real("beta_min", 1e-4);
    const double bmax = cfg.get_real("beta_max", 2e-2);
    const std::string mode = cfg.get_str("sigma_mode", "sqrt_beta");
    SigmaMode m;
    if (mode == "sqrt_beta") {
        m = SigmaMode::SqrtBeta;
    } else if (mode == "tilde_beta") {
        m = SigmaMode::TildeBeta;
    } else {
        fail_usage("sigma_mode must be sqrt_beta or tilde_beta, got: " + mode);
    }
    return make_linear_schedule(T, bmin, bmax, m);
}

}  // namespace noiseshape
