#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "noiseshape/tensor.hpp"

namespace noiseshape {

// Ordered seed lists keyed by shape kind. Seeds are unique within a list.
struct SeedBank {
    std::map<std::string, std::vector<uint64_t>> entries;

    void validate() const;  // non-empty lists, in-list uniqueness
};

// Summary statistics of a pooled set of draws against the standard normal.
struct MomentReport {
    double mean_max_abs = 0.0;
    double cov_diag_max_dev = 0.0;     // max |C_ii - 1|
    double cov_offdiag_max_abs = 0.0;  // max |C_ij|, i != j
    std::size_t n_draws = 0;
};

// Noise erasure: (1/sqrt(n)) * sum_i z_i, exact arithmetic, any tensors.
// For i.i.d. N(0, I) inputs the output is again N(0, I); that statistical
// guarantee is validated in tests, not checked here.
NoiseTensor erase(const std::vector<NoiseTensor>& noises);

// Monte Carlo estimate of the per-coordinate covariance between one source
// z_i and the aggregate; the exact value is 1/sqrt(n).
double source_correlation(int n, int dim, int n_draws, uint64_t seed);

// Information (nats) the aggregate retains about a single source:
// (dim/2) * ln(n / (n - 1)). Strictly decreasing in n, linear in dim.
double mi_per_source(int n, int dim);

// rows holds n_rows draws of dimension dim, row-major.
MomentReport moment_report(const std::vector<double>& rows, std::size_t n_rows,
                           std::size_t dim);

}  // namespace noiseshape
