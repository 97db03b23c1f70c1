#pragma once

#include <cstddef>

// Dense matrix kernels on raw row-major buffers.
//
// Every kernel exists twice: `serial::` is the reference, `parallel::` splits output rows
// across OpenMP threads. Each output element is reduced in the same order in both, so the
// results are bit-identical; tests hold them to that. The unqualified entry points pick the
// parallel version for large products outside an enclosing parallel region.
//
// `accumulate` adds into C instead of overwriting it.

namespace uigen::nk::kernels {

namespace serial {
/// C[m,n] (+)= A[m,k] * B[k,n]
void matmul(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);
/// C[m,n] (+)= A[m,k] * B[n,k]^T
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);
/// C[m,n] (+)= A[k,m]^T * B[k,n]
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);
}  // namespace serial

namespace parallel {
void matmul(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);
}  // namespace parallel

/// Multiply-adds above which the dispatcher goes parallel.
inline constexpr long kParallelThreshold = 1L << 18;

void matmul(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);

/// Threads available to parallel regions (1 when built without OpenMP).
int max_threads() noexcept;

}  // namespace uigen::nk::kernels
