#pragma once

#include <functional>
#include <vector>

#include "noiseshape/schedule.hpp"

namespace noiseshape {

// Analytic world with closed-form scores: x0 ~ N(0, I_d), y | x0 ~ N(a x0, s^2 I),
// forward process x_t = sqrt(abar) x0 + sqrt(1-abar) eps so the marginal of x_t
// is N(0, I) for every t.
struct GaussianWorld {
    int dim = 1;
    double a = 1.0;                 // likelihood gain
    double s = 1.0;                 // likelihood noise scale, > 0
    std::vector<double> y;          // observed vector, length dim
    DiffusionSchedule sched;

    void validate() const;
    double abar(int t) const;
};

// Log-densities (constants included) used by the finite-difference checks.
double log_marginal(const GaussianWorld& w, const std::vector<double>& x_t, int t);
double log_likelihood(const GaussianWorld& w, const std::vector<double>& x_t, int t);
double log_posterior(const GaussianWorld& w, const std::vector<double>& x_t, int t);

// grad log p(x_t) = -x_t (unit marginal covariance).
std::vector<double> uncond_score(const GaussianWorld& w, const std::vector<double>& x_t,
                                 int t);

// grad log p(y | x_t) = a sqrt(abar) (y - a sqrt(abar) x_t) / (s^2 + a^2 (1-abar)).
std::vector<double> semantic_grad(const GaussianWorld& w, const std::vector<double>& x_t,
                                  int t);

// grad log p(x_t | y), computed from the posterior Gaussian directly (not as a
// sum) so additivity cond = uncond + semantic is a real consistency check.
std::vector<double> cond_score(const GaussianWorld& w, const std::vector<double>& x_t,
                               int t);

// Central-difference gradient of a scalar function, for score verification.
std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& fn,
                                const std::vector<double>& x, double step);

// Builds exact eps-predictions from the closed-form scores, runs the guided and
// unguided deterministic reverse steps, and returns the max-abs discrepancy
// between (guided - unguided) and lambda * gamma_t * semantic_grad. Exact
// scores make the discrepancy pure floating-point error.
double verify_claim1(const GaussianWorld& w, int t, const std::vector<double>& x_t,
                     double lambda);

struct SnrPhaseReport {
    bool monotone = false;        // snr strictly decreases as t runs 1..T
    bool identity_ok = false;     // snr(t) == P_sig/P_res to 1e-12 at every t
    double max_identity_err = 0.0;
    int last_high_t = 0;          // largest t still above the high threshold (0 if none)
    int first_low_t = 0;          // smallest t below the low threshold (0 if none)
    bool passed() const { return monotone && identity_ok; }
};

// Sweeps the schedule: strict SNR monotonicity, phase boundary indices, and the
// identity snr(t) = P_sig/P_res with P_sig = abar*d, P_res = (1-abar)*d under
// the unit-Gaussian reference. Failures land in the report, never throw.
SnrPhaseReport verify_snr_phases(const DiffusionSchedule& sched,
                                 const PhaseThresholds& th, int dim = 4);

// dz/dt = diag (.) z with the exact flow exp(diag (t-s)) (.) z.
struct LinearField {
    std::vector<double> diag;

    void velocity(const std::vector<double>& z, double t, std::vector<double>& out) const;
    std::vector<double> flow(const std::vector<double>& z, double s, double t) const;
};

struct TimeShiftReport {
    std::vector<double> betas;
    std::vector<double> errors;   // e(beta), same order as betas
    std::vector<double> ratios;   // errors[i] / errors[i+1]
};

// First-order time-shift check under the f = -v sampler convention: the
// velocity estimate at t=0 is v0_hat = -f(z,0) + eps0, the shifted start is
// z + beta * v0_hat * direction with direction = -1, and
//   e(beta) = || flow(z_shifted, 0, 1) - flow(z, -beta, 1) ||.
// With eps0 = 0 the residual is O(beta^2), so halving beta quarters the error.
TimeShiftReport verify_time_shift(const LinearField& field, const std::vector<double>& z,
                                  const std::vector<double>& betas,
                                  const std::vector<double>* eps0 = nullptr);

// Relative sampling cost of the method: 1 + N/S0 + k_over_c * n / S0 for a
// baseline of S0 sampler steps, N extra model evaluations, and n erased
// sources at k_over_c model-evaluation-equivalents each.
double cost_ratio(int S0, int N, double k_over_c, int n);

}  // namespace noiseshape
