#include <doctest.h>

#include <cstring>
#include <vector>

#include "oracles.hpp"
#include "skelsign/kernels.hpp"
#include "skelsign/rng.hpp"

using namespace skelsign;

namespace {

bool avx2_available() { return kernels::level_supported(kernels::Level::avx2); }

struct LevelGuard {
    kernels::Level saved;
    LevelGuard() : saved(kernels::active_level()) {}
    ~LevelGuard() { kernels::set_active_level(saved); }
};

std::vector<double> random_vec(std::size_t n, Rng& rng, double lo = -2.0, double hi = 2.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("level dispatch and override") {
    CHECK(kernels::level_supported(kernels::Level::scalar));
    LevelGuard guard;
    kernels::set_active_level(kernels::Level::scalar);
    CHECK(kernels::active_level() == kernels::Level::scalar);
    CHECK(std::string(kernels::level_name(kernels::Level::avx2)) == "avx2");
}

TEST_CASE("elementwise kernels match bit for bit across levels") {
    if (!avx2_available()) return;
    LevelGuard guard;
    Rng rng(11);
    for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 257u}) {
        const std::vector<double> a = random_vec(n, rng);
        const std::vector<double> b = random_vec(n, rng);

        std::vector<double> r_scalar(n), r_avx(n);
        kernels::set_active_level(kernels::Level::scalar);
        kernels::vec_add(r_scalar.data(), a.data(), b.data(), n);
        kernels::set_active_level(kernels::Level::avx2);
        kernels::vec_add(r_avx.data(), a.data(), b.data(), n);
        CHECK(bit_equal(r_scalar, r_avx));

        std::vector<double> y1 = b, y2 = b;
        kernels::set_active_level(kernels::Level::scalar);
        kernels::vec_axpy(y1.data(), 0.37, a.data(), n);
        kernels::vec_scale(y1.data(), -1.25, n);
        kernels::relu(r_scalar.data(), a.data(), n);
        kernels::set_active_level(kernels::Level::avx2);
        kernels::vec_axpy(y2.data(), 0.37, a.data(), n);
        kernels::vec_scale(y2.data(), -1.25, n);
        kernels::relu(r_avx.data(), a.data(), n);
        CHECK(bit_equal(y1, y2));
        CHECK(bit_equal(r_scalar, r_avx));

        std::vector<double> dx1 = b, dx2 = b;
        kernels::set_active_level(kernels::Level::scalar);
        kernels::relu_backward(dx1.data(), a.data(), b.data(), n);
        kernels::set_active_level(kernels::Level::avx2);
        kernels::relu_backward(dx2.data(), a.data(), b.data(), n);
        CHECK(bit_equal(dx1, dx2));
    }
}

TEST_CASE("matmul matches bit for bit across levels") {
    if (!avx2_available()) return;
    LevelGuard guard;
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t m = 1 + rng.below(6), k = 1 + rng.below(9), n = 1 + rng.below(11);
        const std::vector<double> a = random_vec(m * k, rng);
        const std::vector<double> b = random_vec(k * n, rng);
        std::vector<double> c0 = random_vec(m * n, rng);
        std::vector<double> c1 = c0;
        const bool acc = rng.coin();
        kernels::set_active_level(kernels::Level::scalar);
        kernels::matmul(c0.data(), a.data(), b.data(), m, k, n, acc);
        kernels::set_active_level(kernels::Level::avx2);
        kernels::matmul(c1.data(), a.data(), b.data(), m, k, n, acc);
        CHECK(bit_equal(c0, c1));
    }
}

TEST_CASE("conv kernels match bit for bit across levels") {
    if (!avx2_available()) return;
    LevelGuard guard;
    Rng rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        kernels::Conv2dGeom g;
        g.in_channels = 1 + rng.below(3);
        g.in_h = 3 + rng.below(8);
        g.in_w = 3 + rng.below(12);
        g.out_channels = 1 + rng.below(3);
        g.kernel_h = 1 + rng.below(3);
        g.kernel_w = 1 + rng.below(3);
        g.stride = 1 + rng.below(2);  // avx2 falls back to scalar for stride 2
        g.pad = rng.below(2);
        if (g.in_h + 2 * g.pad < g.kernel_h || g.in_w + 2 * g.pad < g.kernel_w) continue;
        g.out_h = (g.in_h + 2 * g.pad - g.kernel_h) / g.stride + 1;
        g.out_w = (g.in_w + 2 * g.pad - g.kernel_w) / g.stride + 1;

        const auto in = random_vec(g.in_channels * g.in_h * g.in_w, rng);
        const auto w =
            random_vec(g.out_channels * g.in_channels * g.kernel_h * g.kernel_w, rng);
        const auto bias = random_vec(g.out_channels, rng);
        const auto dout = random_vec(g.out_channels * g.out_h * g.out_w, rng);

        std::vector<double> o0(dout.size()), o1(dout.size());
        std::vector<double> din0 = random_vec(in.size(), rng);
        std::vector<double> din1 = din0;
        kernels::set_active_level(kernels::Level::scalar);
        kernels::conv2d_forward(o0.data(), in.data(), w.data(), bias.data(), g);
        kernels::conv2d_backward_input(din0.data(), dout.data(), w.data(), g);
        kernels::set_active_level(kernels::Level::avx2);
        kernels::conv2d_forward(o1.data(), in.data(), w.data(), bias.data(), g);
        kernels::conv2d_backward_input(din1.data(), dout.data(), w.data(), g);
        CHECK(bit_equal(o0, o1));
        CHECK(bit_equal(din0, din1));
    }
}

TEST_CASE("adam step matches bit for bit across levels") {
    if (!avx2_available()) return;
    LevelGuard guard;
    Rng rng(14);
    for (std::size_t n : {1u, 5u, 8u, 130u}) {
        const auto g = random_vec(n, rng);
        auto p0 = random_vec(n, rng);
        auto m0 = random_vec(n, rng, 0.0, 1.0);
        auto v0 = random_vec(n, rng, 0.0, 1.0);
        auto p1 = p0;
        auto m1 = m0;
        auto v1 = v0;
        kernels::set_active_level(kernels::Level::scalar);
        kernels::adam_step(p0.data(), m0.data(), v0.data(), g.data(), n, 1e-3, 0.9, 0.999,
                           1e-8, 1.0 / (1 - 0.9), 1.0 / (1 - 0.999));
        kernels::set_active_level(kernels::Level::avx2);
        kernels::adam_step(p1.data(), m1.data(), v1.data(), g.data(), n, 1e-3, 0.9, 0.999,
                           1e-8, 1.0 / (1 - 0.9), 1.0 / (1 - 0.999));
        CHECK(bit_equal(p0, p1));
        CHECK(bit_equal(m0, m1));
        CHECK(bit_equal(v0, v1));
    }
}

TEST_CASE("matmul agrees with the brute-force oracle") {
    Rng rng(15);
    for (int trial = 0; trial < 120; ++trial) {
        const std::size_t m = 1 + rng.below(6), k = 1 + rng.below(7), n = 1 + rng.below(6);
        const auto a = random_vec(m * k, rng);
        const auto b = random_vec(k * n, rng);
        std::vector<double> c(m * n);
        kernels::matmul(c.data(), a.data(), b.data(), m, k, n, false);
        const auto expect = oracles::matmul(a, b, m, k, n);
        for (std::size_t i = 0; i < c.size(); ++i) {
            CHECK(c[i] == doctest::Approx(expect[i]).epsilon(1e-12));
        }
    }
}

}  // TEST_SUITE
