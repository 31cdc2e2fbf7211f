#pragma once

#include <cstddef>

#include "skelsign/kernels.hpp"

// Per-level implementations; the dispatch lives in kernels.cpp.
namespace skelsign::kernels {

// Single-output-cell bodies shared by the scalar kernels and the AVX2 border
// handling, so any element can be computed on either path with identical
// rounding.
inline double conv2d_cell(const double* in, const double* wco, double bias_val,
                          const Conv2dGeom& g, std::size_t oy, std::size_t ox) {
    const std::size_t in_plane = g.in_h * g.in_w;
    const std::size_t ker_plane = g.kernel_h * g.kernel_w;
    double acc = bias_val;
    for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
        const double* inp = in + ci * in_plane;
        const double* wci = wco + ci * ker_plane;
        for (std::size_t ky = 0; ky < g.kernel_h; ++ky) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                      static_cast<std::ptrdiff_t>(g.pad);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
            for (std::size_t kx = 0; kx < g.kernel_w; ++kx) {
                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                          static_cast<std::ptrdiff_t>(g.pad);
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.in_w)) continue;
                acc += inp[iy * g.in_w + ix] * wci[ky * g.kernel_w + kx];
            }
        }
    }
    return acc;
}

inline double conv2d_input_grad_cell(const double* dout, const double* w,
                                     const Conv2dGeom& g, std::size_t ci,
                                     std::size_t iy, std::size_t ix) {
    const std::size_t out_plane = g.out_h * g.out_w;
    const std::size_t ker_plane = g.kernel_h * g.kernel_w;
    double acc = 0.0;
    for (std::size_t co = 0; co < g.out_channels; ++co) {
        const double* doutp = dout + co * out_plane;
        const double* wci = w + (co * g.in_channels + ci) * ker_plane;
        for (std::size_t ky = 0; ky < g.kernel_h; ++ky) {
            const std::ptrdiff_t num_y = static_cast<std::ptrdiff_t>(iy + g.pad) -
                                         static_cast<std::ptrdiff_t>(ky);
            if (num_y < 0 || num_y % static_cast<std::ptrdiff_t>(g.stride) != 0) continue;
            const std::ptrdiff_t oy = num_y / static_cast<std::ptrdiff_t>(g.stride);
            if (oy >= static_cast<std::ptrdiff_t>(g.out_h)) continue;
            for (std::size_t kx = 0; kx < g.kernel_w; ++kx) {
                const std::ptrdiff_t num_x = static_cast<std::ptrdiff_t>(ix + g.pad) -
                                             static_cast<std::ptrdiff_t>(kx);
                if (num_x < 0 || num_x % static_cast<std::ptrdiff_t>(g.stride) != 0) continue;
                const std::ptrdiff_t ox = num_x / static_cast<std::ptrdiff_t>(g.stride);
                if (ox >= static_cast<std::ptrdiff_t>(g.out_w)) continue;
                acc += doutp[oy * g.out_w + ox] * wci[ky * g.kernel_w + kx];
            }
        }
    }
    return acc;
}

namespace scalar_impl {

void vec_add(double* dst, const double* a, const double* b, std::size_t n);
void vec_axpy(double* y, double alpha, const double* x, std::size_t n);
void vec_scale(double* y, double alpha, std::size_t n);
void relu(double* dst, const double* x, std::size_t n);
void relu_backward(double* dx, const double* x, const double* dy, std::size_t n);
void matmul(double* c, const double* a, const double* b,
            std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void matmul_nt_acc(double* c, const double* a, const double* b,
                   std::size_t m, std::size_t n, std::size_t k);
void conv2d_forward(double* out, const double* in, const double* w,
                    const double* bias, const Conv2dGeom& g);
void conv2d_backward_input(double* din, const double* dout, const double* w,
                           const Conv2dGeom& g);
void conv2d_backward_params(double* dw, double* dbias, const double* in,
                            const double* dout, const Conv2dGeom& g);
void adam_step(double* p, double* m, double* v, const double* g, std::size_t n,
               double lr, double beta1, double beta2, double eps,
               double bias_c1, double bias_c2);

}  // namespace scalar_impl

#if defined(SKELSIGN_HAVE_AVX2)
namespace avx2_impl {

void vec_add(double* dst, const double* a, const double* b, std::size_t n);
void vec_axpy(double* y, double alpha, const double* x, std::size_t n);
void vec_scale(double* y, double alpha, std::size_t n);
void relu(double* dst, const double* x, std::size_t n);
void relu_backward(double* dx, const double* x, const double* dy, std::size_t n);
void matmul(double* c, const double* a, const double* b,
            std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void conv2d_forward(double* out, const double* in, const double* w,
                    const double* bias, const Conv2dGeom& g);
void conv2d_backward_input(double* din, const double* dout, const double* w,
                           const Conv2dGeom& g);
void adam_step(double* p, double* m, double* v, const double* g, std::size_t n,
               double lr, double beta1, double beta2, double eps,
               double bias_c1, double bias_c2);

}  // namespace avx2_impl
#endif

}  // namespace skelsign::kernels
