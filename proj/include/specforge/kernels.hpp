#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace specforge::kernels {

using cplx = std::complex<double>;

// Dense complex inner loops used by the propagator and the scan engine.
// All matrices are square, row-major, contiguous. Two implementations are
// provided: a scalar reference and an AVX2/FMA variant; the active one is
// picked once at startup (override with SPECFORGE_KERNEL=scalar|avx2).
//
// The AVX2 variant uses FMA, so its results may differ from the scalar
// reference in the last few ulps; the two are equivalence-tested against
// each other in tests/test_kernels.cpp.
struct Ops {
    const char* name;

    // C = alpha*(A*B) + beta*C
    void (*gemm)(cplx* c, const cplx* a, const cplx* b, std::size_t n,
                 cplx alpha, cplx beta);

    // sum_i x[i]*y[i], no conjugation
    cplx (*cdot)(const cplx* x, const cplx* y, std::size_t n);

    // dst = x + h*y, elementwise over n entries (dst may alias x)
    void (*axpy)(cplx* dst, const cplx* x, const cplx* y, double h,
                 std::size_t n);

    // y += (h/6)*(k1 + 2*k2 + 2*k3 + k4)
    void (*rk4_combine)(cplx* y, const cplx* k1, const cplx* k2,
                        const cplx* k3, const cplx* k4, double h,
                        std::size_t n);
};

const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when the CPU or build lacks AVX2+FMA

// The variant selected at startup; stable for the lifetime of the process.
const Ops& active();

// Force a variant by name ("scalar", "avx2"); throws on unknown/unavailable.
// Intended for tests and the SPECFORGE_KERNEL override.
void force(const std::string& name);

std::vector<std::string> available();

}  // namespace specforge::kernels
