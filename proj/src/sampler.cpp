#include "noiseshape/sampler.hpp"

#include <cmath>
#include <sstream>

#include "noiseshape/config.hpp"
#include "noiseshape/csvio.hpp"
#include "noiseshape/errors.hpp"

namespace noiseshape {

Trajectory heun_integrate(const VelocityFn& f, const std::vector<double>& z0,
                          double t0, double t1, int n_steps) {
    if (n_steps < 1) fail_usage("heun_integrate: n_steps must be >= 1");
    if (z0.empty()) fail_usage("heun_integrate: empty state");
    if (t0 == t1) fail_usage("heun_integrate: empty time interval");

    const double h = (t1 - t0) / n_steps;
    const std::size_t d = z0.size();

    Trajectory traj;
    traj.states.reserve(n_steps + 1);
    traj.times.reserve(n_steps + 1);
    traj.states.push_back(z0);
    traj.times.push_back(t0);

    std::vector<double> z = z0, k1(d), k2(d), zpred(d);
    for (int i = 0; i < n_steps; ++i) {
        const double t = t0 + h * i;
        // endpoint of the last step is pinned to t1 exactly
        const double t_next = i + 1 == n_steps ? t1 : t0 + h * (i + 1);
        f(z, t, k1);
        for (std::size_t j = 0; j < d; ++j) zpred[j] = z[j] + h * k1[j];
        f(zpred, t_next, k2);
        for (std::size_t j = 0; j < d; ++j) z[j] += 0.5 * h * (k1[j] + k2[j]);
        for (double v : z)
            if (!std::isfinite(v))
                fail_numeric("heun_integrate: non-finite state at step " +
                             std::to_string(i + 1));
        traj.states.push_back(z);
        traj.times.push_back(t_next);
    }
    return traj;
}

std::vector<double> flow_map(const VelocityFn& f, const std::vector<double>& z0,
                             double t0, double t1, int n_steps) {
    return heun_integrate(f, z0, t0, t1, n_steps).states.back();
}

void ddpm_reverse_step(const DiffusionSchedule& sched, const std::vector<double>& x_t,
                       int t, const std::vector<double>& eps,
                       const std::vector<double>* zeta, std::vector<double>& x_prev) {
    sched.check_index(t);
    if (x_t.size() != eps.size()) fail_usage("ddpm_reverse_step: shape mismatch");
    if (zeta && zeta->size() != x_t.size())
        fail_usage("ddpm_reverse_step: zeta shape mismatch");

    const std::size_t i = (std::size_t)t - 1;
    const double beta = sched.betas[i];
    const double abar = sched.alpha_bars[i];
    const double inv_sqrt_alpha = 1.0 / std::sqrt(1.0 - beta);
    const double eps_coef = beta / std::sqrt(1.0 - abar);
    const double sigma = t == 1 ? 0.0 : sched.sigmas[i];

    x_prev.resize(x_t.size());
    for (std::size_t j = 0; j < x_t.size(); ++j) {
        double v = inv_sqrt_alpha * (x_t[j] - eps_coef * eps[j]);
        if (sigma != 0.0 && zeta) v += sigma * (*zeta)[j];
        x_prev[j] = v;
    }
}

std::string trajectory_to_csv(const Trajectory& traj) {
    if (traj.states.empty()) fail_usage("trajectory_to_csv: empty trajectory");
    const std::size_t d = traj.states.front().size();
    std::ostringstream out;
    std::vector<std::string> hdr = {"step", "t"};
    for (std::size_t j = 0; j < d; ++j) hdr.push_back("dim" + std::to_string(j));
    csv_row(out, hdr);
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        std::vector<std::string> row = {std::to_string(i), format_real(traj.times[i])};
        for (double v : traj.states[i]) row.push_back(format_real(v));
        csv_row(out, row);
    }
    return out.str();
}

}  // namespace noiseshape
