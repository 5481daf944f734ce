#include "specforge/fft.hpp"

#include <cmath>

#include "specforge/errors.hpp"

namespace specforge::fft {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::size_t next_pow2(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

}  // namespace

Plan::Plan(std::size_t n) : n_(n) {
    if (n == 0) throw ValidationError("fft: zero-length transform");
    is_pow2_ = (n & (n - 1)) == 0;
    m_ = is_pow2_ ? n : next_pow2(2 * n - 1);

    rev_.resize(m_);
    for (std::size_t i = 0, j = 0; i < m_; ++i) {
        rev_[i] = j;
        std::size_t bit = m_ >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j |= bit;
    }
    twiddle_.resize(m_ / 2);
    for (std::size_t j = 0; j < m_ / 2; ++j)
        twiddle_[j] = std::polar(1.0, -kTwoPi * static_cast<double>(j) /
                                          static_cast<double>(m_));

    if (!is_pow2_) {
        // chirp_[k] = e^{-i*pi*k^2/N}, with k^2 reduced mod 2N for accuracy
        chirp_.resize(n_);
        const std::size_t mod = 2 * n_;
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t q = (k * k) % mod;
            chirp_[k] = std::polar(1.0, -kTwoPi * 0.5 * static_cast<double>(q) /
                                            static_cast<double>(n_));
        }
        std::vector<cplx> b(m_, cplx(0.0));
        for (std::size_t k = 0; k < n_; ++k) {
            const cplx v = std::conj(chirp_[k]);
            b[k] = v;
            if (k != 0) b[m_ - k] = v;
        }
        pow2_forward(b.data());
        bhat_ = std::move(b);
    }
}

void Plan::pow2_forward(cplx* x) const {
    const std::size_t m = m_;
    for (std::size_t i = 0; i < m; ++i)
        if (i < rev_[i]) std::swap(x[i], x[rev_[i]]);
    for (std::size_t len = 2; len <= m; len <<= 1) {
        const std::size_t stride = m / len;
        const std::size_t half = len / 2;
        for (std::size_t start = 0; start < m; start += len)
            for (std::size_t j = 0; j < half; ++j) {
                const cplx w = twiddle_[j * stride];
                cplx& a = x[start + j];
                cplx& b = x[start + j + half];
                const cplx t = w * b;
                b = a - t;
                a += t;
            }
    }
}

void Plan::forward(cplx* x) const {
    if (is_pow2_) {
        pow2_forward(x);
        return;
    }
    std::vector<cplx> y(m_, cplx(0.0));
    for (std::size_t k = 0; k < n_; ++k) y[k] = x[k] * chirp_[k];
    pow2_forward(y.data());
    for (std::size_t k = 0; k < m_; ++k) y[k] *= bhat_[k];
    // inverse pow2 transform via conjugation
    for (auto& v : y) v = std::conj(v);
    pow2_forward(y.data());
    const double inv = 1.0 / static_cast<double>(m_);
    for (std::size_t k = 0; k < n_; ++k)
        x[k] = std::conj(y[k]) * inv * chirp_[k];
}

void Plan::inverse(cplx* x) const {
    for (std::size_t k = 0; k < n_; ++k) x[k] = std::conj(x[k]);
    forward(x);
    const double inv = 1.0 / static_cast<double>(n_);
    for (std::size_t k = 0; k < n_; ++k) x[k] = std::conj(x[k]) * inv;
}

void forward(std::vector<cplx>& x) { Plan(x.size()).forward(x.data()); }

void inverse(std::vector<cplx>& x) { Plan(x.size()).inverse(x.data()); }

}  // namespace specforge::fft
