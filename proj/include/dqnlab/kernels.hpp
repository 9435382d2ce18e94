#pragma once

#include <cstddef>
#include <string_view>

namespace dqnlab::kernels {

// Inner loops of the network engine. Every entry exists in a portable scalar
// form and, where the build and CPU allow, an AVX2+FMA form. The scalar table
// is the reference; the vector table must agree with it exactly for the
// elementwise kernels and to rounding for the reductions.
struct KernelTable {
    std::string_view name;

    // sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);

    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

    // c (m x n) = a (m x k) * b (n x k)^T + bias (n), bias may be null.
    // All matrices dense row-major.
    void (*gemm_nt)(const double* a, const double* b, const double* bias, double* c,
                    std::size_t m, std::size_t n, std::size_t k);

    // Bias-corrected adaptive-moment update over n parameters.
    // bc1 = 1 - beta1^t, bc2 = 1 - beta2^t.
    void (*adam)(double* param, const double* grad, double* m, double* v, std::size_t n,
                 double lr, double beta1, double beta2, double eps, double bc1, double bc2);

    // g[i] = clamp(g[i], -limit, limit)
    void (*clip)(double* g, std::size_t n, double limit);

    // dst[i] += tau * (src[i] - dst[i])
    void (*blend)(const double* src, double* dst, std::size_t n, double tau);
};

const KernelTable& scalar_table() noexcept;

// Null when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table() noexcept;

// The table used by the network engine. Chosen once on first use: AVX2 when
// available, unless the DQNLAB_KERNELS environment variable says "scalar".
const KernelTable& active() noexcept;

// Overrides the active table (tests, benchmarks). Not thread-safe with
// concurrent users of active().
void set_active(const KernelTable& table) noexcept;

}  // namespace dqnlab::kernels
