#include "noiseshape/linalg.hpp"

#include <cstring>

namespace noiseshape {

void matmul_nn(const double* A, const double* B, double* C, int n, int k, int m,
               bool accumulate) {
    if (!accumulate) std::memset(C, 0, sizeof(double) * (std::size_t)n * m);
    for (int i = 0; i < n; ++i) {
        const double* a = A + (std::size_t)i * k;
        double* c = C + (std::size_t)i * m;
        for (int p = 0; p < k; ++p) {
            const double av = a[p];
            const double* b = B + (std::size_t)p * m;
            for (int j = 0; j < m; ++j) c[j] += av * b[j];
        }
    }
}

void matmul_tn(const double* A, const double* B, double* C, int n, int k, int m,
               bool accumulate) {
    if (!accumulate) std::memset(C, 0, sizeof(double) * (std::size_t)k * m);
    for (int i = 0; i < n; ++i) {
        const double* a = A + (std::size_t)i * k;
        const double* b = B + (std::size_t)i * m;
        for (int p = 0; p < k; ++p) {
            const double av = a[p];
            double* c = C + (std::size_t)p * m;
            for (int j = 0; j < m; ++j) c[j] += av * b[j];
        }
    }
}

void transpose(const double* A, double* out, int n, int m) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) out[(std::size_t)j * n + i] = A[(std::size_t)i * m + j];
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace noiseshape
