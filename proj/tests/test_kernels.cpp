#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "specforge/kernels.hpp"

using namespace specforge;
using kernels::cplx;

namespace {

std::vector<cplx> random_matrix(std::size_t n, std::mt19937& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<cplx> m(n * n);
    for (auto& v : m) v = cplx(dist(rng), dist(rng));
    return m;
}

// straightforward triple loop, the oracle for every gemm variant
std::vector<cplx> naive_gemm(const std::vector<cplx>& a,
                             const std::vector<cplx>& b,
                             const std::vector<cplx>& c0, std::size_t n,
                             cplx alpha, cplx beta) {
    std::vector<cplx> c(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cplx acc(0.0);
            for (std::size_t k = 0; k < n; ++k) acc += a[i * n + k] * b[k * n + j];
            c[i * n + j] = alpha * acc + beta * c0[i * n + j];
        }
    return c;
}

double max_err(const std::vector<cplx>& x, const std::vector<cplx>& y) {
    double m = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

}  // namespace

TEST_CASE("scalar gemm matches the naive oracle") {
    std::mt19937 rng(7);
    const auto& ops = kernels::scalar_ops();
    for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 17u, 42u}) {
        auto a = random_matrix(n, rng);
        auto b = random_matrix(n, rng);
        auto c = random_matrix(n, rng);
        const auto want = naive_gemm(a, b, c, n, cplx(0.5, -0.25), cplx(1.0));
        ops.gemm(c.data(), a.data(), b.data(), n, cplx(0.5, -0.25), cplx(1.0));
        CHECK(max_err(c, want) < 1e-12 * static_cast<double>(n));
    }
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
    const kernels::Ops* avx = kernels::avx2_ops();
    if (!avx) return;  // nothing to compare on this host
    std::mt19937 rng(11);
    const auto& ref = kernels::scalar_ops();
    for (std::size_t n : {1u, 2u, 3u, 4u, 7u, 16u, 41u, 42u, 64u}) {
        auto a = random_matrix(n, rng);
        auto b = random_matrix(n, rng);
        auto c1 = random_matrix(n, rng);
        auto c2 = c1;
        ref.gemm(c1.data(), a.data(), b.data(), n, cplx(1.0), cplx(0.0));
        avx->gemm(c2.data(), a.data(), b.data(), n, cplx(1.0), cplx(0.0));
        CHECK(max_err(c1, c2) < 1e-12 * static_cast<double>(n));

        const cplx d1 = ref.cdot(a.data(), b.data(), n * n);
        const cplx d2 = avx->cdot(a.data(), b.data(), n * n);
        CHECK(std::abs(d1 - d2) < 1e-11 * static_cast<double>(n));

        auto y1 = random_matrix(n, rng);
        auto y2 = y1;
        ref.axpy(y1.data(), y1.data(), a.data(), 0.3125, n * n);
        avx->axpy(y2.data(), y2.data(), a.data(), 0.3125, n * n);
        CHECK(max_err(y1, y2) == 0.0);  // no reassociation in axpy

        auto z1 = random_matrix(n, rng);
        auto z2 = z1;
        ref.rk4_combine(z1.data(), a.data(), b.data(), c1.data(), y1.data(),
                        0.1, n * n);
        avx->rk4_combine(z2.data(), a.data(), b.data(), c1.data(), y1.data(),
                         0.1, n * n);
        CHECK(max_err(z1, z2) < 1e-13);
    }
}

TEST_CASE("kernels are deterministic call to call") {
    std::mt19937 rng(3);
    const auto& ops = kernels::active();
    const std::size_t n = 21;
    auto a = random_matrix(n, rng);
    auto b = random_matrix(n, rng);
    auto c1 = random_matrix(n, rng);
    auto c2 = c1;
    ops.gemm(c1.data(), a.data(), b.data(), n, cplx(0.0, 1.0), cplx(1.0));
    ops.gemm(c2.data(), a.data(), b.data(), n, cplx(0.0, 1.0), cplx(1.0));
    CHECK(c1 == c2);
    CHECK(ops.cdot(a.data(), b.data(), n * n) == ops.cdot(a.data(), b.data(), n * n));
}

TEST_CASE("dispatch override") {
    kernels::force("scalar");
    CHECK(std::string(kernels::active().name) == "scalar");
    if (kernels::avx2_ops()) {
        kernels::force("avx2");
        CHECK(std::string(kernels::active().name) == "avx2");
    }
    CHECK_THROWS(kernels::force("neon-on-x86"));
    const auto avail = kernels::available();
    CHECK(!avail.empty());
    CHECK(avail.front() == "scalar");
}
