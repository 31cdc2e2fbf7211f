#include "kernels_impl.hpp"

#include <cmath>

// Reference kernels. The loop order and expression shape here is a contract:
// the AVX2 variants replay the same per-element operation sequence, which is
// what makes the levels bit-identical.
namespace skelsign::kernels::scalar_impl {

void vec_add(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] + b[i];
}

void vec_axpy(double* y, double alpha, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void vec_scale(double* y, double alpha, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] *= alpha;
}

void relu(double* dst, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(double* dx, const double* x, const double* dy, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i] > 0.0) dx[i] += dy[i];
    }
}

void matmul(double* c, const double* a, const double* b,
            std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            double acc = accumulate ? crow[j] : 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                acc += arow[p] * b[p * n + j];
            }
            crow[j] = acc;
        }
    }
}

void matmul_nt_acc(double* c, const double* a, const double* b,
                   std::size_t m, std::size_t n, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * n;
        double* crow = c + i * k;
        for (std::size_t j = 0; j < k; ++j) {
            const double* brow = b + j * n;
            double acc = 0.0;
            for (std::size_t p = 0; p < n; ++p) {
                acc += arow[p] * brow[p];
            }
            crow[j] += acc;
        }
    }
}

void conv2d_forward(double* out, const double* in, const double* w,
                    const double* bias, const Conv2dGeom& g) {
    const std::size_t ker_block = g.in_channels * g.kernel_h * g.kernel_w;
    for (std::size_t co = 0; co < g.out_channels; ++co) {
        const double* wco = w + co * ker_block;
        const double bias_val = bias ? bias[co] : 0.0;
        double* outp = out + co * g.out_h * g.out_w;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
            for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                outp[oy * g.out_w + ox] = conv2d_cell(in, wco, bias_val, g, oy, ox);
            }
        }
    }
}

void conv2d_backward_input(double* din, const double* dout, const double* w,
                           const Conv2dGeom& g) {
    const std::size_t in_plane = g.in_h * g.in_w;
    for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
        double* dinp = din + ci * in_plane;
        for (std::size_t iy = 0; iy < g.in_h; ++iy) {
            for (std::size_t ix = 0; ix < g.in_w; ++ix) {
                dinp[iy * g.in_w + ix] += conv2d_input_grad_cell(dout, w, g, ci, iy, ix);
            }
        }
    }
}

void conv2d_backward_params(double* dw, double* dbias, const double* in,
                            const double* dout, const Conv2dGeom& g) {
    const std::size_t in_plane = g.in_h * g.in_w;
    const std::size_t out_plane = g.out_h * g.out_w;
    const std::size_t ker_plane = g.kernel_h * g.kernel_w;
    for (std::size_t co = 0; co < g.out_channels; ++co) {
        const double* doutp = dout + co * out_plane;
        if (dbias) {
            double acc = 0.0;
            for (std::size_t i = 0; i < out_plane; ++i) acc += doutp[i];
            dbias[co] += acc;
        }
        for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
            const double* inp = in + ci * in_plane;
            double* dwci = dw + (co * g.in_channels + ci) * ker_plane;
            for (std::size_t ky = 0; ky < g.kernel_h; ++ky) {
                for (std::size_t kx = 0; kx < g.kernel_w; ++kx) {
                    double acc = 0.0;
                    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
                        const std::ptrdiff_t iy =
                            static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                            static_cast<std::ptrdiff_t>(g.pad);
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
                        for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                            const std::ptrdiff_t ix =
                                static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                static_cast<std::ptrdiff_t>(g.pad);
                            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.in_w)) continue;
                            acc += doutp[oy * g.out_w + ox] * inp[iy * g.in_w + ix];
                        }
                    }
                    dwci[ky * g.kernel_w + kx] += acc;
                }
            }
        }
    }
}

void adam_step(double* p, double* m, double* v, const double* g, std::size_t n,
               double lr, double beta1, double beta2, double eps,
               double bias_c1, double bias_c2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
        const double mhat = m[i] * bias_c1;
        const double vhat = v[i] * bias_c2;
        p[i] = p[i] - (lr * mhat) / (std::sqrt(vhat) + eps);
    }
}

}  // namespace skelsign::kernels::scalar_impl
