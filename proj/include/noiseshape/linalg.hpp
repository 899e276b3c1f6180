#pragma once

#include <cstddef>
#include <vector>

// Row-major dense kernels sized for this project's networks (inner dims of a
// few hundred). The ikj loop order keeps the innermost loop contiguous over
// both C and B rows, which the compiler vectorizes well; summation order is
// fixed, so results are reproducible bit for bit run to run.

namespace noiseshape {

// C (n x m) = A (n x k) * B (k x m); accumulate adds into C instead.
void matmul_nn(const double* A, const double* B, double* C, int n, int k, int m,
               bool accumulate = false);

// C (k x m) = A^T * B with A (n x k), B (n x m); accumulate adds into C.
void matmul_tn(const double* A, const double* B, double* C, int n, int k, int m,
               bool accumulate = false);

// OUT (m x n) = transpose of A (n x m).
void transpose(const double* A, double* out, int n, int m);

double dot(const double* a, const double* b, std::size_t n);

}  // namespace noiseshape
