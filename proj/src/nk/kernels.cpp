#include "uigen/nk/kernels.hpp"

#include <algorithm>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace uigen::nk::kernels {

namespace {

// One output row of C = A*B: c_row (+)= sum_p a_row[p] * B[p,:], p ascending.
inline void row_ab(const double* a_row, const double* b, double* c_row, int k, int n, bool accumulate) {
    if (!accumulate) std::fill(c_row, c_row + n, 0.0);
    for (int p = 0; p < k; ++p) {
        const double av = a_row[p];
        const double* b_row = b + static_cast<std::size_t>(p) * n;
        for (int j = 0; j < n; ++j) c_row[j] += av * b_row[j];
    }
}

// One output row of C = A^T*B, A stored [k,m].
inline void row_atb(const double* a, int i, int m, const double* b, double* c_row, int k, int n, bool accumulate) {
    if (!accumulate) std::fill(c_row, c_row + n, 0.0);
    for (int p = 0; p < k; ++p) {
        const double av = a[static_cast<std::size_t>(p) * m + i];
        const double* b_row = b + static_cast<std::size_t>(p) * n;
        for (int j = 0; j < n; ++j) c_row[j] += av * b_row[j];
    }
}

std::vector<double> transpose(const double* b, int rows, int cols) {
    std::vector<double> t(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) t[static_cast<std::size_t>(c) * rows + r] = b[static_cast<std::size_t>(r) * cols + c];
    return t;
}

bool go_parallel(int m, int k, int n) {
#ifdef _OPENMP
    return static_cast<long>(m) * k * n >= kParallelThreshold && m > 1 && !omp_in_parallel() &&
           omp_get_max_threads() > 1;
#else
    (void)m, (void)k, (void)n;
    return false;
#endif
}

}  // namespace

namespace serial {

void matmul(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
    for (int i = 0; i < m; ++i)
        row_ab(a + static_cast<std::size_t>(i) * k, b, c + static_cast<std::size_t>(i) * n, k, n, accumulate);
}

void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
    const std::vector<double> bt = transpose(b, n, k);
    matmul(a, bt.data(), c, m, k, n, accumulate);
}

void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
    for (int i = 0; i < m; ++i) row_atb(a, i, m, b, c + static_cast<std::size_t>(i) * n, k, n, accumulate);
}

}  // namespace serial

namespace parallel {

void matmul(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i)
        row_ab(a + static_cast<std::size_t>(i) * k, b, c + static_cast<std::size_t>(i) * n, k, n, accumulate);
}

void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
    const std::vector<double> bt = transpose(b, n, k);
    matmul(a, bt.data(), c, m, k, n, accumulate);
}

void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) row_atb(a, i, m, b, c + static_cast<std::size_t>(i) * n, k, n, accumulate);
}

}  // namespace parallel

void matmul(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
    if (go_parallel(m, k, n))
        parallel::matmul(a, b, c, m, k, n, accumulate);
    else
        serial::matmul(a, b, c, m, k, n, accumulate);
}

void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
    if (go_parallel(m, k, n))
        parallel::matmul_nt(a, b, c, m, k, n, accumulate);
    else
        serial::matmul_nt(a, b, c, m, k, n, accumulate);
}

void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
    if (go_parallel(m, k, n))
        parallel::matmul_tn(a, b, c, m, k, n, accumulate);
    else
        serial::matmul_tn(a, b, c, m, k, n, accumulate);
}

int max_threads() noexcept {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace uigen::nk::kernels
