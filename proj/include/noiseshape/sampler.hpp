#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "noiseshape/schedule.hpp"

namespace noiseshape {

// Right-hand side of dz/dt = f(z, t). Writes f into out (same length as z).
using VelocityFn =
    std::function<void(const std::vector<double>&, double, std::vector<double>&)>;

// States at every accepted step, endpoints included: states.size() == times.size().
struct Trajectory {
    std::vector<std::vector<double>> states;
    std::vector<double> times;
};

// Second-order Heun (trapezoidal predictor-corrector) with a uniform step.
// Integrates from t0 to t1 in n_steps steps; t1 < t0 integrates backward.
Trajectory heun_integrate(const VelocityFn& f, const std::vector<double>& z0,
                          double t0, double t1, int n_steps);

// Final state only.
std::vector<double> flow_map(const VelocityFn& f, const std::vector<double>& z0,
                             double t0, double t1, int n_steps);

// One ancestral reverse step t -> t-1 (t is 1-based):
//   x_{t-1} = (x_t - beta_t/sqrt(1-abar_t) * eps) / sqrt(alpha_t) + sigma_t * zeta
// zeta may be null (treated as zero). sigma is forced to zero at t == 1 so the
// final state is deterministic given eps.
void ddpm_reverse_step(const DiffusionSchedule& sched, const std::vector<double>& x_t,
                       int t, const std::vector<double>& eps,
                       const std::vector<double>* zeta, std::vector<double>& x_prev);

// CSV with header step,t,dim0,dim1,... one row per accepted state.
std::string trajectory_to_csv(const Trajectory& traj);

}  // namespace noiseshape
