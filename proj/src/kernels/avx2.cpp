// Built with -mavx2 -mfma. Only reached through avx2_table(), which checks
// the CPU before handing these out.
#include <immintrin.h>

#include <algorithm>

#include "dqnlab/kernels.hpp"

namespace dqnlab::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d a = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

// 4 rows of a against 2 rows of b: eight running dot products share loads.
void block_4x2(const double* a, const double* b, std::size_t k, double out[4][2]) {
    __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
    __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
    __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
    __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
    const double* a0 = a;
    const double* a1 = a + k;
    const double* a2 = a + 2 * k;
    const double* a3 = a + 3 * k;
    const double* b0 = b;
    const double* b1 = b + k;
    std::size_t p = 0;
    for (; p + 4 <= k; p += 4) {
        const __m256d vb0 = _mm256_loadu_pd(b0 + p);
        const __m256d vb1 = _mm256_loadu_pd(b1 + p);
        __m256d va = _mm256_loadu_pd(a0 + p);
        c00 = _mm256_fmadd_pd(va, vb0, c00);
        c01 = _mm256_fmadd_pd(va, vb1, c01);
        va = _mm256_loadu_pd(a1 + p);
        c10 = _mm256_fmadd_pd(va, vb0, c10);
        c11 = _mm256_fmadd_pd(va, vb1, c11);
        va = _mm256_loadu_pd(a2 + p);
        c20 = _mm256_fmadd_pd(va, vb0, c20);
        c21 = _mm256_fmadd_pd(va, vb1, c21);
        va = _mm256_loadu_pd(a3 + p);
        c30 = _mm256_fmadd_pd(va, vb0, c30);
        c31 = _mm256_fmadd_pd(va, vb1, c31);
    }
    out[0][0] = hsum(c00); out[0][1] = hsum(c01);
    out[1][0] = hsum(c10); out[1][1] = hsum(c11);
    out[2][0] = hsum(c20); out[2][1] = hsum(c21);
    out[3][0] = hsum(c30); out[3][1] = hsum(c31);
    for (; p < k; ++p) {
        out[0][0] += a0[p] * b0[p]; out[0][1] += a0[p] * b1[p];
        out[1][0] += a1[p] * b0[p]; out[1][1] += a1[p] * b1[p];
        out[2][0] += a2[p] * b0[p]; out[2][1] += a2[p] * b1[p];
        out[3][0] += a3[p] * b0[p]; out[3][1] += a3[p] * b1[p];
    }
}

void gemm_nt(const double* a, const double* b, const double* bias, double* c, std::size_t m,
             std::size_t n, std::size_t k) {
    const std::size_t m4 = m - m % 4;
    const std::size_t n2 = n - n % 2;
    double tile[4][2];
    for (std::size_t i = 0; i < m4; i += 4) {
        for (std::size_t j = 0; j < n2; j += 2) {
            block_4x2(a + i * k, b + j * k, k, tile);
            for (std::size_t r = 0; r < 4; ++r) {
                c[(i + r) * n + j] = bias ? tile[r][0] + bias[j] : tile[r][0];
                c[(i + r) * n + j + 1] = bias ? tile[r][1] + bias[j + 1] : tile[r][1];
            }
        }
        for (std::size_t j = n2; j < n; ++j)
            for (std::size_t r = 0; r < 4; ++r) {
                const double acc = dot(a + (i + r) * k, b + j * k, k);
                c[(i + r) * n + j] = bias ? acc + bias[j] : acc;
            }
    }
    for (std::size_t i = m4; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double acc = dot(a + i * k, b + j * k, k);
            c[i * n + j] = bias ? acc + bias[j] : acc;
        }
}

// Elementwise kernels avoid FMA so they round exactly like the scalar table.
void adam(double* param, const double* grad, double* m, double* v, std::size_t n, double lr,
          double beta1, double beta2, double eps, double bc1, double bc2) {
    const __m256d vb1 = _mm256_set1_pd(beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2);
    const __m256d v1b1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d v1b2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d vbc1 = _mm256_set1_pd(bc1);
    const __m256d vbc2 = _mm256_set1_pd(bc2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d g = _mm256_loadu_pd(grad + i);
        __m256d mi = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(v1b1, g));
        __m256d vi = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                                   _mm256_mul_pd(v1b2, _mm256_mul_pd(g, g)));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        const __m256d m_hat = _mm256_div_pd(mi, vbc1);
        const __m256d v_hat = _mm256_div_pd(vi, vbc2);
        const __m256d step =
            _mm256_div_pd(_mm256_mul_pd(vlr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), veps));
        _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
    }
    if (i < n)
        scalar_table().adam(param + i, grad + i, m + i, v + i, n - i, lr, beta1, beta2, eps, bc1, bc2);
}

void clip(double* g, std::size_t n, double limit) {
    const __m256d hi = _mm256_set1_pd(limit);
    const __m256d lo = _mm256_set1_pd(-limit);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(g + i, _mm256_min_pd(_mm256_max_pd(_mm256_loadu_pd(g + i), lo), hi));
    for (; i < n; ++i) g[i] = std::min(std::max(g[i], -limit), limit);
}

void blend(const double* src, double* dst, std::size_t n, double tau) {
    const __m256d t = _mm256_set1_pd(tau);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_loadu_pd(dst + i);
        const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(src + i), d);
        _mm256_storeu_pd(dst + i, _mm256_add_pd(d, _mm256_mul_pd(t, diff)));
    }
    for (; i < n; ++i) dst[i] += tau * (src[i] - dst[i]);
}

}  // namespace

extern const KernelTable kAvx2Table;
const KernelTable kAvx2Table{"avx2", dot, axpy, gemm_nt, adam, clip, blend};

}  // namespace dqnlab::kernels
