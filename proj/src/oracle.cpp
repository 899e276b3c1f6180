#include "noiseshape/oracle.hpp"

#include <cmath>

#include "noiseshape/errors.hpp"
#include "noiseshape/sampler.hpp"

namespace noiseshape {

static constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void GaussianWorld::validate() const {
    if (dim < 1) fail_usage("gaussian world: dim must be >= 1");
    if (!(s > 0.0)) fail_usage("gaussian world: s must be positive");
    if ((int)y.size() != dim) fail_usage("gaussian world: y length does not match dim");
    if (sched.T < 2) fail_usage("gaussian world: schedule missing");
}

double GaussianWorld::abar(int t) const {
    sched.check_index(t);
    return sched.alpha_bars[(std::size_t)t - 1];
}

static void check_x(const GaussianWorld& w, const std::vector<double>& x_t) {
    if ((int)x_t.size() != w.dim) fail_usage("gaussian world: x_t length mismatch");
}

double log_marginal(const GaussianWorld& w, const std::vector<double>& x_t, int t) {
    w.validate();
    check_x(w, x_t);
    w.sched.check_index(t);
    double q = 0.0;
    for (double v : x_t) q += v * v;
    return -0.5 * (q + w.dim * kLog2Pi);
}

double log_likelihood(const GaussianWorld& w, const std::vector<double>& x_t, int t) {
    w.validate();
    check_x(w, x_t);
    const double ab = w.abar(t);
    const double mean_coef = w.a * std::sqrt(ab);
    const double var = w.s * w.s + w.a * w.a * (1.0 - ab);
    double q = 0.0;
    for (int i = 0; i < w.dim; ++i) {
        const double d = w.y[i] - mean_coef * x_t[i];
        q += d * d;
    }
    return -0.5 * (q / var + w.dim * (kLog2Pi + std::log(var)));
}

double log_posterior(const GaussianWorld& w, const std::vector<double>& x_t, int t) {
    w.validate();
    check_x(w, x_t);
    const double ab = w.abar(t);
    const double denom = w.a * w.a + w.s * w.s;
    const double mean_coef = w.a * std::sqrt(ab) / denom;
    const double var = (w.s * w.s + w.a * w.a * (1.0 - ab)) / denom;
    double q = 0.0;
    for (int i = 0; i < w.dim; ++i) {
        const double d = x_t[i] - mean_coef * w.y[i];
        q += d * d;
    }
    return -0.5 * (q / var + w.dim * (kLog2Pi + std::log(var)));
}

std::vector<double> uncond_score(const GaussianWorld& w, const std::vector<double>& x_t,
                                 int t) {
    w.validate();
    check_x(w, x_t);
    w.sched.check_index(t);
    std::vector<double> g(x_t.size());
    for (std::size_t i = 0; i < x_t.size(); ++i) g[i] = -x_t[i];
    return g;
}

std::vector<double> semantic_grad(const GaussianWorld& w, const std::vector<double>& x_t,
                                  int t) {
    w.validate();
    check_x(w, x_t);
    const double ab = w.abar(t);
    const double mean_coef = w.a * std::sqrt(ab);
    const double var = w.s * w.s + w.a * w.a * (1.0 - ab);
    std::vector<double> g(x_t.size());
    for (std::size_t i = 0; i < x_t.size(); ++i)
        g[i] = mean_coef * (w.y[i] - mean_coef * x_t[i]) / var;
    return g;
}

std::vector<double> cond_score(const GaussianWorld& w, const std::vector<double>& x_t,
                               int t) {
    w.validate();
    check_x(w, x_t);
    const double ab = w.abar(t);
    const double denom = w.a * w.a + w.s * w.s;
    const double mean_coef = w.a * std::sqrt(ab) / denom;
    const double var = (w.s * w.s + w.a * w.a * (1.0 - ab)) / denom;
    std::vector<double> g(x_t.size());
    for (std::size_t i = 0; i < x_t.size(); ++i)
        g[i] = -(x_t[i] - mean_coef * w.y[i]) / var;
    return g;
}

std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& fn,
                                const std::vector<double>& x, double step) {
    if (!(step > 0.0)) fail_usage("fd_gradient: step must be positive");
    std::vector<double> g(x.size()), probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + step;
        const double fp = fn(probe);
        probe[i] = x[i] - step;
        const double fm = fn(probe);
        probe[i] = x[i];
        g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
}

double verify_claim1(const GaussianWorld& w, int t, const std::vector<double>& x_t,
                     double lambda) {
    w.validate();
    check_x(w, x_t);
    const double ab = w.abar(t);
    const double sq1mab = std::sqrt(1.0 - ab);

    // exact eps-predictions from the closed-form scores
    const std::vector<double> su = uncond_score(w, x_t, t);
    const std::vector<double> sg = semantic_grad(w, x_t, t);
    std::vector<double> eps_u(x_t.size()), eps_g(x_t.size());
    for (std::size_t i = 0; i < x_t.size(); ++i) {
        eps_u[i] = -sq1mab * su[i];
        eps_g[i] = -sq1mab * (su[i] + lambda * sg[i]);
    }

    std::vector<double> prev_u, prev_g;
    ddpm_reverse_step(w.sched, x_t, t, eps_u, nullptr, prev_u);
    ddpm_reverse_step(w.sched, x_t, t, eps_g, nullptr, prev_g);

    const double gamma = gamma_coef(w.sched, t);
    double worst = 0.0;
    for (std::size_t i = 0; i < x_t.size(); ++i) {
        const double increment = prev_g[i] - prev_u[i];
        const double predicted = lambda * gamma * sg[i];
        worst = std::max(worst, std::fabs(increment - predicted));
    }
    return worst;
}

SnrPhaseReport verify_snr_phases(const DiffusionSchedule& sched,
                                 const PhaseThresholds& th, int dim) {
    if (dim < 1) fail_usage("verify_snr_phases: dim must be >= 1");
    SnrPhaseReport rep;
    rep.monotone = true;
    rep.identity_ok = true;
    double prev = 0.0;
    for (int t = 1; t <= sched.T; ++t) {
        const double r = snr(sched, t);
        if (t > 1 && !(r < prev)) rep.monotone = false;
        prev = r;

        const double p_sig = sched.alpha_bars[(std::size_t)t - 1] * dim;
        const double p_res = (1.0 - sched.alpha_bars[(std::size_t)t - 1]) * dim;
        const double err = std::fabs(p_sig / p_res - r) / std::max(1.0, r);
        rep.max_identity_err = std::max(rep.max_identity_err, err);
        if (err > 1e-12) rep.identity_ok = false;

        if (r > th.high) rep.last_high_t = t;
        if (r < th.low && rep.first_low_t == 0) rep.first_low_t = t;
    }
    return rep;
}

void LinearField::velocity(const std::vector<double>& z, double t,
                           std::vector<double>& out) const {
    (void)t;
    if (z.size() != diag.size()) fail_usage("linear field: state length mismatch");
    out.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = diag[i] * z[i];
}

std::vector<double> LinearField::flow(const std::vector<double>& z, double s,
                                      double t) const {
    if (z.size() != diag.size()) fail_usage("linear field: state length mismatch");
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        out[i] = std::exp(diag[i] * (t - s)) * z[i];
    return out;
}

TimeShiftReport verify_time_shift(const LinearField& field, const std::vector<double>& z,
                                  const std::vector<double>& betas,
                                  const std::vector<double>* eps0) {
    if (z.empty()) fail_usage("verify_time_shift: empty state");
    if (betas.empty()) fail_usage("verify_time_shift: no betas");
    if (eps0 && eps0->size() != z.size())
        fail_usage("verify_time_shift: eps0 length mismatch");

    std::vector<double> f0;
    field.velocity(z, 0.0, f0);

    TimeShiftReport rep;
    rep.betas = betas;
    for (double beta : betas) {
        if (!(beta > 0.0)) fail_usage("verify_time_shift: betas must be positive");
        // v0_hat = -f(z,0) + eps0; shifted start z + beta * v0_hat * (-1)
        std::vector<double> shifted(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double v0_hat = -f0[i] + (eps0 ? (*eps0)[i] : 0.0);
            shifted[i] = z[i] - beta * v0_hat;
        }
        const std::vector<double> via_shifted = field.flow(shifted, 0.0, 1.0);
        const std::vector<double> via_early = field.flow(z, -beta, 1.0);
        double sq = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double d = via_shifted[i] - via_early[i];
            sq += d * d;
        }
        rep.errors.push_back(std::sqrt(sq));
    }
    for (std::size_t i = 0; i + 1 < rep.errors.size(); ++i)
        rep.ratios.push_back(rep.errors[i] / rep.errors[i + 1]);
    return rep;
}

double cost_ratio(int S0, int N, double k_over_c, int n) {
    if (S0 < 1) fail_usage("cost_ratio: S0 must be >= 1");
    if (N < 0 || n < 0) fail_usage("cost_ratio: N and n must be >= 0");
    if (k_over_c < 0.0) fail_usage("cost_ratio: k_over_c must be >= 0");
    return 1.0 + (double)N / (double)S0 + k_over_c * (double)n / (double)S0;
}

}  // namespace noiseshape
