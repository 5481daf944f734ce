#include "specforge/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace specforge::kernels {
namespace {

// Complex numbers are processed two at a time as interleaved (re,im) pairs.
// For w*b with broadcast scalar w: fmaddsub(b, wr, swap(b)*wi) yields
// (br*wr - bi*wi, bi*wr + br*wi) per pair.
inline __m256d cmul_acc(__m256d acc, __m256d b, __m256d wr, __m256d wi) {
    __m256d bs = _mm256_shuffle_pd(b, b, 0x5);  // swap re/im in each pair
    __m256d t = _mm256_mul_pd(bs, wi);
    return _mm256_add_pd(acc, _mm256_fmaddsub_pd(b, wr, t));
}

void gemm_avx2(cplx* c, const cplx* a, const cplx* b, std::size_t n,
               cplx alpha, cplx beta) {
    const std::size_t nvec = n / 2 * 2;
    auto* cd = reinterpret_cast<double*>(c);
    const auto* bd = reinterpret_cast<const double*>(b);
    for (std::size_t i = 0; i < n; ++i) {
        cplx* crow = c + i * n;
        double* crd = cd + 2 * i * n;
        if (beta == cplx(0.0)) {
            for (std::size_t j = 0; j < n; ++j) crow[j] = cplx(0.0);
        } else if (beta != cplx(1.0)) {
            for (std::size_t j = 0; j < n; ++j) crow[j] *= beta;
        }
        for (std::size_t k = 0; k < n; ++k) {
            const cplx w = alpha * a[i * n + k];
            if (w == cplx(0.0)) continue;
            const __m256d wr = _mm256_set1_pd(w.real());
            const __m256d wi = _mm256_set1_pd(w.imag());
            const double* brd = bd + 2 * k * n;
            std::size_t j = 0;
            for (; j < nvec; j += 2) {
                __m256d bv = _mm256_loadu_pd(brd + 2 * j);
                __m256d cv = _mm256_loadu_pd(crd + 2 * j);
                cv = cmul_acc(cv, bv, wr, wi);
                _mm256_storeu_pd(crd + 2 * j, cv);
            }
            if (j < n) crow[j] += w * b[k * n + j];
        }
    }
}

cplx cdot_avx2(const cplx* x, const cplx* y, std::size_t n) {
    const auto* xd = reinterpret_cast<const double*>(x);
    const auto* yd = reinterpret_cast<const double*>(y);
    __m256d acc = _mm256_setzero_pd();
    const std::size_t nvec = n / 2 * 2;
    std::size_t i = 0;
    for (; i < nvec; i += 2) {
        __m256d xv = _mm256_loadu_pd(xd + 2 * i);
        __m256d yv = _mm256_loadu_pd(yd + 2 * i);
        __m256d ys = _mm256_shuffle_pd(yv, yv, 0x5);
        // accumulate (xr*yr - xi*yi, xr*yi + xi*yr) pairwise: broadcast of x
        // is per-element here, so expand via two fmaddsub chains.
        __m256d xr = _mm256_unpacklo_pd(xv, xv);  // (xr0,xr0,xr1,xr1)
        __m256d xi = _mm256_unpackhi_pd(xv, xv);  // (xi0,xi0,xi1,xi1)
        __m256d t = _mm256_mul_pd(ys, xi);
        acc = _mm256_add_pd(acc, _mm256_fmaddsub_pd(yv, xr, t));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    cplx out(lanes[0] + lanes[2], lanes[1] + lanes[3]);
    for (; i < n; ++i) out += x[i] * y[i];
    return out;
}

void axpy_avx2(cplx* dst, const cplx* x, const cplx* y, double h,
               std::size_t n) {
    auto* dd = reinterpret_cast<double*>(dst);
    const auto* xd = reinterpret_cast<const double*>(x);
    const auto* yd = reinterpret_cast<const double*>(y);
    const __m256d hv = _mm256_set1_pd(h);
    const std::size_t m = 2 * n;
    const std::size_t mvec = m / 4 * 4;
    std::size_t i = 0;
    for (; i < mvec; i += 4) {
        __m256d yv = _mm256_loadu_pd(yd + i);
        __m256d xv = _mm256_loadu_pd(xd + i);
        _mm256_storeu_pd(dd + i, _mm256_fmadd_pd(yv, hv, xv));
    }
    for (; i < m; ++i) dd[i] = xd[i] + h * yd[i];
}

void rk4_combine_avx2(cplx* y, const cplx* k1, const cplx* k2, const cplx* k3,
                      const cplx* k4, double h, std::size_t n) {
    auto* yd = reinterpret_cast<double*>(y);
    const auto* d1 = reinterpret_cast<const double*>(k1);
    const auto* d2 = reinterpret_cast<const double*>(k2);
    const auto* d3 = reinterpret_cast<const double*>(k3);
    const auto* d4 = reinterpret_cast<const double*>(k4);
    const double h6 = h / 6.0;
    const __m256d h6v = _mm256_set1_pd(h6);
    const __m256d two = _mm256_set1_pd(2.0);
    const std::size_t m = 2 * n;
    const std::size_t mvec = m / 4 * 4;
    std::size_t i = 0;
    for (; i < mvec; i += 4) {
        __m256d s = _mm256_add_pd(_mm256_loadu_pd(d2 + i), _mm256_loadu_pd(d3 + i));
        s = _mm256_fmadd_pd(s, two, _mm256_loadu_pd(d1 + i));
        s = _mm256_add_pd(s, _mm256_loadu_pd(d4 + i));
        _mm256_storeu_pd(yd + i, _mm256_fmadd_pd(s, h6v, _mm256_loadu_pd(yd + i)));
    }
    for (; i < m; ++i) yd[i] += h6 * (d1[i] + 2.0 * (d2[i] + d3[i]) + d4[i]);
}

}  // namespace

const Ops* avx2_ops() {
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma"))
        return nullptr;
    static const Ops ops{"avx2", gemm_avx2, cdot_avx2, axpy_avx2,
                         rk4_combine_avx2};
    return &ops;
}

}  // namespace specforge::kernels

#else

namespace specforge::kernels {
const Ops* avx2_ops() { return nullptr; }
}  // namespace specforge::kernels

#endif
