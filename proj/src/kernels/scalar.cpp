#include <algorithm>
#include <cmath>

#include "dqnlab/kernels.hpp"

namespace dqnlab::kernels {
namespace {

double dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nt(const double* a, const double* b, const double* bias, double* c, std::size_t m,
             std::size_t n, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = a + i * k;
        for (std::size_t j = 0; j < n; ++j) {
            double acc = dot(row, b + j * k, k);
            c[i * n + j] = bias ? acc + bias[j] : acc;
        }
    }
}

void adam(double* param, const double* grad, double* m, double* v, std::size_t n, double lr,
          double beta1, double beta2, double eps, double bc1, double bc2) {
    const double one_minus_b1 = 1.0 - beta1;
    const double one_minus_b2 = 1.0 - beta2;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        m[i] = beta1 * m[i] + one_minus_b1 * g;
        v[i] = beta2 * v[i] + one_minus_b2 * (g * g);
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

void clip(double* g, std::size_t n, double limit) {
    for (std::size_t i = 0; i < n; ++i) g[i] = std::min(std::max(g[i], -limit), limit);
}

void blend(const double* src, double* dst, std::size_t n, double tau) {
    for (std::size_t i = 0; i < n; ++i) dst[i] += tau * (src[i] - dst[i]);
}

constexpr KernelTable kScalar{"scalar", dot, axpy, gemm_nt, adam, clip, blend};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace dqnlab::kernels
