#pragma once

#include <string>
#include <vector>

#include "noiseshape/config.hpp"

namespace noiseshape {

enum class SigmaMode {
    SqrtBeta,   // sigma_t = sqrt(beta_t)
    TildeBeta,  // sigma_t = sqrt(beta_t * (1 - abar_{t-1}) / (1 - abar_t))
};

// Forward-process coefficients, 1-based step index t in [1, T] stored at [t-1].
// alpha_bars is strictly decreasing and stays in (0, 1).
struct DiffusionSchedule {
    std::vector<double> betas;
    std::vector<double> alphas;
    std::vector<double> alpha_bars;
    std::vector<double> sigmas;
    int T = 0;
    double beta_min = 0.0, beta_max = 0.0;  // construction echo, for serialization
    SigmaMode sigma_mode = SigmaMode::SqrtBeta;

    void check_index(int t) const;  // throws usage error when t outside [1, T]
};

DiffusionSchedule make_linear_schedule(int T, double beta_min, double beta_max,
                                       SigmaMode mode = SigmaMode::SqrtBeta);

double snr(const DiffusionSchedule& sched, int t);  // abar_t / (1 - abar_t)

enum class Phase { Early, Middle, Late };

struct PhaseThresholds {
    double low = 1e-2;
    double high = 1e2;
};

// Partitions [0, inf): snr < low is Early, snr > high is Late, else Middle.
Phase classify_phase(double snr_value, const PhaseThresholds& thr = {});
const char* phase_name(Phase p);

// Coefficient scaling the semantic gradient inside a deterministic guided
// reverse step: beta_t / sqrt(alpha_t).
double gamma_coef(const DiffusionSchedule& sched, int t);
// Score-scaled variant beta_t * sqrt(1 - abar_t) / sqrt(alpha_t); selectable
// alternative, not used by the verifier.
double gamma_coef_alt(const DiffusionSchedule& sched, int t);

// K timesteps t_k with non-negative weights summing to 1.
struct WeightSchedule {
    std::vector<double> timesteps;
    std::vector<double> weights;

    void validate() const;
};

// Quadratic bump f(t) = max(0, 1000 - ((t - center)/5)^2), normalized. The raw
// quadratic goes negative for |t - center| > sqrt(5000); clamping keeps weights
// non-negative, and if everything clamps the weights fall back to uniform.
WeightSchedule power_weights(const std::vector<double>& timesteps, double center);

// w_k proportional to snr(t_k)^exponent.
WeightSchedule snr_weights(const DiffusionSchedule& sched,
                           const std::vector<int>& timesteps, double exponent);

// Default timestep selection: K indices evenly spaced over [1, T].
std::vector<int> default_timesteps(int T, int K);
// Flow-time variant: K points evenly spaced over [t0, t1].
std::vector<double> uniform_times(double t0, double t1, int K);

// Config keys: T, beta_min, beta_max, sigma_mode (sqrt_beta | tilde_beta).
Config schedule_to_config(const DiffusionSchedule& sched);
DiffusionSchedule schedule_from_config(const Config& cfg);

}  // namespace noiseshape
