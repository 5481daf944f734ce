#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace specforge::fft {

using cplx = std::complex<double>;

// Forward/inverse DFT plan for a fixed length. Power-of-two lengths run the
// iterative radix-2 transform directly; everything else goes through
// Bluestein's chirp-z reduction onto a power-of-two grid. Forward uses the
// e^{-2*pi*i*k*n/N} convention and is unnormalized; inverse carries the 1/N.
class Plan {
public:
    explicit Plan(std::size_t n);

    std::size_t size() const { return n_; }
    void forward(cplx* x) const;
    void inverse(cplx* x) const;

private:
    void pow2_forward(cplx* x) const;

    std::size_t n_ = 0;
    std::size_t m_ = 0;  // power-of-two working size
    bool is_pow2_ = false;
    std::vector<std::size_t> rev_;   // bit-reversal for size m_
    std::vector<cplx> twiddle_;      // e^{-2*pi*i*j/m}, j < m/2
    std::vector<cplx> chirp_;        // Bluestein a_n
    std::vector<cplx> bhat_;         // FFT of the Bluestein kernel
};

void forward(std::vector<cplx>& x);
void inverse(std::vector<cplx>& x);

}  // namespace specforge::fft
