#include "noiseshape/noise.hpp"

#include <cmath>
#include <set>

#include "noiseshape/errors.hpp"
#include "noiseshape/rng.hpp"

namespace noiseshape {

void SeedBank::validate() const {
    for (const auto& [kind, seeds] : entries) {
        if (seeds.empty()) fail_usage("seed bank '" + kind + "' is empty");
        std::set<uint64_t> uniq(seeds.begin(), seeds.end());
        if (uniq.size() != seeds.size())
            fail_usage("seed bank '" + kind + "' has duplicate seeds");
    }
}

NoiseTensor erase(const std::vector<NoiseTensor>& noises) {
    if (noises.empty()) fail_usage("erase: empty input list");
    const NoiseTensor& first = noises[0];
    for (const auto& z : noises) {
        if (!z.same_shape(first)) fail_usage("erase: shape mismatch between inputs");
    }
    NoiseTensor out = NoiseTensor::zeros(first.shape);
    for (const auto& z : noises) {
        for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += z.data[i];
    }
    const double scale = 1.0 / std::sqrt((double)noises.size());
    for (double& v : out.data) v *= scale;
    return out;
}

double source_correlation(int n, int dim, int n_draws, uint64_t seed) {
    if (n < 2) fail_usage("source_correlation: n must be >= 2");
    if (dim < 1) fail_usage("source_correlation: dim must be >= 1");
    if (n_draws < 1000) fail_usage("source_correlation: n_draws must be >= 1000");

    // E[z_1 . s_bar] / dim with E[z_1] = E[s_bar] = 0; subtracting the sample
    // means anyway keeps the estimator unbiased at finite n_draws.
    GaussianRng rng(seed);
    std::vector<double> z1(dim), sbar(dim);
    double sum_prod = 0.0, sum_z = 0.0, sum_s = 0.0;
    const double inv_sqrt_n = 1.0 / std::sqrt((double)n);
    for (int d = 0; d < n_draws; ++d) {
        for (int j = 0; j < dim; ++j) sbar[j] = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < dim; ++j) {
                double v = rng.normal();
                if (i == 0) z1[j] = v;
                sbar[j] += v;
            }
        }
        for (int j = 0; j < dim; ++j) {
            double s = sbar[j] * inv_sqrt_n;
            sum_prod += z1[j] * s;
            sum_z += z1[j];
            sum_s += s;
        }
    }
    const double cnt = (double)n_draws * dim;
    return sum_prod / cnt - (sum_z / cnt) * (sum_s / cnt);
}

double mi_per_source(int n, int dim) {
    if (n < 2) fail_usage("mi_per_source: n must be >= 2 (diverges at n = 1)");
    if (dim < 1) fail_usage("mi_per_source: dim must be >= 1");
    return 0.5 * (double)dim * std::log((double)n / (double)(n - 1));
}

MomentReport moment_report(const std::vector<double>& rows, std::size_t n_rows,
                           std::size_t dim) {
    if (n_rows == 0 || dim == 0) fail_usage("moment_report: empty input");
    if (rows.size() != n_rows * dim) fail_usage("moment_report: size mismatch");

    std::vector<double> mean(dim, 0.0);
    for (std::size_t r = 0; r < n_rows; ++r)
        for (std::size_t j = 0; j < dim; ++j) mean[j] += rows[r * dim + j];
    for (double& m : mean) m /= (double)n_rows;

    std::vector<double> cov(dim * dim, 0.0);
    for (std::size_t r = 0; r < n_rows; ++r) {
        const double* x = &rows[r * dim];
        for (std::size_t i = 0; i < dim; ++i) {
            const double xi = x[i] - mean[i];
            for (std::size_t j = i; j < dim; ++j)
                cov[i * dim + j] += xi * (x[j] - mean[j]);
        }
    }
    const double denom = (double)(n_rows > 1 ? n_rows - 1 : 1);

    MomentReport rep;
    rep.n_draws = n_rows;
    for (std::size_t j = 0; j < dim; ++j)
        rep.mean_max_abs = std::max(rep.mean_max_abs, std::abs(mean[j]));
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i; j < dim; ++j) {
            const double c = cov[i * dim + j] / denom;
            if (i == j)
                rep.cov_diag_max_dev = std::max(rep.cov_diag_max_dev, std::abs(c - 1.0));
            else
                rep.cov_offdiag_max_abs = std::max(rep.cov_offdiag_max_abs, std::abs(c));
        }
    }
    return rep;
}

}  // namespace noiseshape
