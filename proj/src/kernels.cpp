#include "skelsign/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#include "kernels_impl.hpp"

namespace skelsign::kernels {

const char* level_name(Level level) {
    switch (level) {
        case Level::scalar: return "scalar";
        case Level::avx2: return "avx2";
    }
    return "?";
}

bool level_supported(Level level) {
    if (level == Level::scalar) return true;
#if defined(SKELSIGN_HAVE_AVX2)
    if (level == Level::avx2) return __builtin_cpu_supports("avx2") != 0;
#endif
    return false;
}

Level detect_level() {
    if (const char* env = std::getenv("SKELSIGN_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Level::scalar;
        if (std::strcmp(env, "avx2") == 0) {
            if (!level_supported(Level::avx2)) {
                throw std::invalid_argument("SKELSIGN_SIMD=avx2 but avx2 is not available");
            }
            return Level::avx2;
        }
        throw std::invalid_argument(std::string("unknown SKELSIGN_SIMD level: ") + env);
    }
    return level_supported(Level::avx2) ? Level::avx2 : Level::scalar;
}

namespace {
Level g_level = detect_level();
}

Level active_level() { return g_level; }

void set_active_level(Level level) {
    if (!level_supported(level)) {
        throw std::invalid_argument(std::string("simd level not supported on this cpu: ") +
                                    level_name(level));
    }
    g_level = level;
}

#if defined(SKELSIGN_HAVE_AVX2)
#define SKELSIGN_DISPATCH(fn, ...)                    \
    do {                                              \
        if (g_level == Level::avx2) {                 \
            avx2_impl::fn(__VA_ARGS__);               \
            return;                                   \
        }                                             \
        scalar_impl::fn(__VA_ARGS__);                 \
    } while (0)
#else
#define SKELSIGN_DISPATCH(fn, ...) scalar_impl::fn(__VA_ARGS__)
#endif

void vec_add(double* dst, const double* a, const double* b, std::size_t n) {
    SKELSIGN_DISPATCH(vec_add, dst, a, b, n);
}

void vec_axpy(double* y, double alpha, const double* x, std::size_t n) {
    SKELSIGN_DISPATCH(vec_axpy, y, alpha, x, n);
}

void vec_scale(double* y, double alpha, std::size_t n) {
    SKELSIGN_DISPATCH(vec_scale, y, alpha, n);
}

void relu(double* dst, const double* x, std::size_t n) {
    SKELSIGN_DISPATCH(relu, dst, x, n);
}

void relu_backward(double* dx, const double* x, const double* dy, std::size_t n) {
    SKELSIGN_DISPATCH(relu_backward, dx, x, dy, n);
}

void matmul(double* c, const double* a, const double* b,
            std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    SKELSIGN_DISPATCH(matmul, c, a, b, m, k, n, accumulate);
}

// row-dot reduction; scalar on every level so results stay level-independent
void matmul_nt_acc(double* c, const double* a, const double* b,
                   std::size_t m, std::size_t n, std::size_t k) {
    scalar_impl::matmul_nt_acc(c, a, b, m, n, k);
}

void conv2d_forward(double* out, const double* in, const double* w,
                    const double* bias, const Conv2dGeom& g) {
    SKELSIGN_DISPATCH(conv2d_forward, out, in, w, bias, g);
}

void conv2d_backward_input(double* din, const double* dout, const double* w,
                           const Conv2dGeom& g) {
    SKELSIGN_DISPATCH(conv2d_backward_input, din, dout, w, g);
}

void conv2d_backward_params(double* dw, double* dbias, const double* in,
                            const double* dout, const Conv2dGeom& g) {
    // reduction over output positions; scalar on every level
    scalar_impl::conv2d_backward_params(dw, dbias, in, dout, g);
}

void adam_step(double* p, double* m, double* v, const double* g, std::size_t n,
               double lr, double beta1, double beta2, double eps,
               double bias_c1, double bias_c2) {
    SKELSIGN_DISPATCH(adam_step, p, m, v, g, n, lr, beta1, beta2, eps, bias_c1, bias_c2);
}

#undef SKELSIGN_DISPATCH

}  // namespace skelsign::kernels
