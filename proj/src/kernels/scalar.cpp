#include "specforge/kernels.hpp"

namespace specforge::kernels {
namespace {

void gemm_scalar(cplx* c, const cplx* a, const cplx* b, std::size_t n,
                 cplx alpha, cplx beta) {
    for (std::size_t i = 0; i < n; ++i) {
        cplx* crow = c + i * n;
        if (beta == cplx(0.0)) {
            for (std::size_t j = 0; j < n; ++j) crow[j] = cplx(0.0);
        } else if (beta != cplx(1.0)) {
            for (std::size_t j = 0; j < n; ++j) crow[j] *= beta;
        }
        for (std::size_t k = 0; k < n; ++k) {
            const cplx w = alpha * a[i * n + k];
            if (w == cplx(0.0)) continue;
            const cplx* brow = b + k * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += w * brow[j];
        }
    }
}

cplx cdot_scalar(const cplx* x, const cplx* y, std::size_t n) {
    cplx acc(0.0);
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_scalar(cplx* dst, const cplx* x, const cplx* y, double h,
                 std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = x[i] + h * y[i];
}

void rk4_combine_scalar(cplx* y, const cplx* k1, const cplx* k2,
                        const cplx* k3, const cplx* k4, double h,
                        std::size_t n) {
    const double h6 = h / 6.0;
    for (std::size_t i = 0; i < n; ++i)
        y[i] += h6 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{"scalar", gemm_scalar, cdot_scalar, axpy_scalar,
                         rk4_combine_scalar};
    return ops;
}

}  // namespace specforge::kernels
