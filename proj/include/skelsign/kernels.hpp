#pragma once

#include <cstddef>

// Arithmetic inner loops behind the numeric core. Every kernel has a scalar
// reference implementation; hot ones also have an AVX2 variant selected at
// runtime. The AVX2 variants vectorise across independent output lanes and
// use no FMA or horizontal reductions, so each output element is produced by
// the exact operation sequence of the scalar kernel: results are bit-identical
// across levels (the equivalence tests assert this).
namespace skelsign::kernels {

enum class Level { scalar = 0, avx2 = 1 };

const char* level_name(Level level);
bool level_supported(Level level);
// Best supported level, honouring the SKELSIGN_SIMD env override
// ("scalar" or "avx2").
Level detect_level();
Level active_level();
void set_active_level(Level level);  // throws std::invalid_argument if unsupported

// dst = a + b
void vec_add(double* dst, const double* a, const double* b, std::size_t n);
// y += alpha * x
void vec_axpy(double* y, double alpha, const double* x, std::size_t n);
// y *= alpha
void vec_scale(double* y, double alpha, std::size_t n);
// dst = max(x, 0)
void relu(double* dst, const double* x, std::size_t n);
// dx += dy where x > 0
void relu_backward(double* dx, const double* x, const double* dy, std::size_t n);

// c = a(m x k) * b(k x n); accumulates into c when accumulate is set
void matmul(double* c, const double* a, const double* b,
            std::size_t m, std::size_t k, std::size_t n, bool accumulate);

// c(m x k) += a(m x n) * b(k x n)^T; row-dot form, scalar on every level
void matmul_nt_acc(double* c, const double* a, const double* b,
                   std::size_t m, std::size_t n, std::size_t k);

struct Conv2dGeom {
    std::size_t in_channels = 0, in_h = 0, in_w = 0;
    std::size_t out_channels = 0, kernel_h = 0, kernel_w = 0;
    std::size_t stride = 1, pad = 0;
    std::size_t out_h = 0, out_w = 0;
};

// Cross-correlation. in: Cin x H x W, w: Cout x Cin x kh x kw, bias: Cout
// (may be null), out: Cout x Ho x Wo.
void conv2d_forward(double* out, const double* in, const double* w,
                    const double* bias, const Conv2dGeom& g);
// din += correlation transpose of dout with w (gather form)
void conv2d_backward_input(double* din, const double* dout, const double* w,
                           const Conv2dGeom& g);
// dw/dbias accumulate; scalar on every level
void conv2d_backward_params(double* dw, double* dbias, const double* in,
                            const double* dout, const Conv2dGeom& g);

// One Adam update over a parameter block. bias_c1/bias_c2 are the
// 1/(1-beta^t) correction factors, precomputed by the caller.
void adam_step(double* p, double* m, double* v, const double* g, std::size_t n,
               double lr, double beta1, double beta2, double eps,
               double bias_c1, double bias_c2);

}  // namespace skelsign::kernels
