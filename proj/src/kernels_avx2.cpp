#include "kernels_impl.hpp"

#if defined(SKELSIGN_HAVE_AVX2)

#include <immintrin.h>

#include <algorithm>

// AVX2 variants. Each vector lane carries one independent output element and
// accumulates in the same order as the scalar kernel, with plain mul+add
// (no FMA), so every element is bit-identical to the scalar result. Border
// cells and non-unit strides fall back to the shared scalar cell bodies.
namespace skelsign::kernels::avx2_impl {

void vec_add(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) dst[i] = a[i] + b[i];
}

void vec_axpy(double* y, double alpha, const double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void vec_scale(double* y, double alpha, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(y + i), va));
    }
    for (; i < n; ++i) y[i] *= alpha;
}

void relu(double* dst, const double* x, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // max(x, 0) keeps the second operand on equality/NaN, matching x > 0 ? x : 0
        _mm256_storeu_pd(dst + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    }
    for (; i < n; ++i) dst[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(double* dx, const double* x, const double* dy, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d mask = _mm256_cmp_pd(vx, zero, _CMP_GT_OQ);
        const __m256d cur = _mm256_loadu_pd(dx + i);
        const __m256d updated = _mm256_add_pd(cur, _mm256_loadu_pd(dy + i));
        // blend keeps the stored value bit-identical where x <= 0
        _mm256_storeu_pd(dx + i, _mm256_blendv_pd(cur, updated, mask));
    }
    for (; i < n; ++i) {
        if (x[i] > 0.0) dx[i] += dy[i];
    }
}

void matmul(double* c, const double* a, const double* b,
            std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            __m256d acc = accumulate ? _mm256_loadu_pd(crow + j) : _mm256_setzero_pd();
            for (std::size_t p = 0; p < k; ++p) {
                const __m256d prod = _mm256_mul_pd(_mm256_set1_pd(arow[p]),
                                                   _mm256_loadu_pd(b + p * n + j));
                acc = _mm256_add_pd(acc, prod);
            }
            _mm256_storeu_pd(crow + j, acc);
        }
        for (; j < n; ++j) {
            double acc = accumulate ? crow[j] : 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                acc += arow[p] * b[p * n + j];
            }
            crow[j] = acc;
        }
    }
}

void conv2d_forward(double* out, const double* in, const double* w,
                    const double* bias, const Conv2dGeom& g) {
    if (g.stride != 1) {
        scalar_impl::conv2d_forward(out, in, w, bias, g);
        return;
    }
    const std::size_t in_plane = g.in_h * g.in_w;
    const std::size_t ker_plane = g.kernel_h * g.kernel_w;
    const std::size_t ker_block = g.in_channels * ker_plane;
    // columns where every kernel tap is horizontally in bounds
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(g.pad);
    const std::ptrdiff_t lo = pad;
    const std::ptrdiff_t hi =
        std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(g.out_w),
                                 static_cast<std::ptrdiff_t>(g.in_w) -
                                     static_cast<std::ptrdiff_t>(g.kernel_w) + pad + 1);
    for (std::size_t co = 0; co < g.out_channels; ++co) {
        const double* wco = w + co * ker_block;
        const double bias_val = bias ? bias[co] : 0.0;
        double* outp = out + co * g.out_h * g.out_w;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
            std::ptrdiff_t ox = lo;
            for (; ox + 4 <= hi; ox += 4) {
                __m256d acc = _mm256_set1_pd(bias_val);
                for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
                    const double* inp = in + ci * in_plane;
                    const double* wci = wco + ci * ker_plane;
                    for (std::size_t ky = 0; ky < g.kernel_h; ++ky) {
                        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy + ky) - pad;
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
                        const double* inrow = inp + iy * g.in_w + (ox - pad);
                        for (std::size_t kx = 0; kx < g.kernel_w; ++kx) {
                            const __m256d prod = _mm256_mul_pd(
                                _mm256_set1_pd(wci[ky * g.kernel_w + kx]),
                                _mm256_loadu_pd(inrow + kx));
                            acc = _mm256_add_pd(acc, prod);
                        }
                    }
                }
                _mm256_storeu_pd(outp + oy * g.out_w + ox, acc);
            }
            for (std::size_t j = 0; j < g.out_w; ++j) {
                const std::ptrdiff_t sj = static_cast<std::ptrdiff_t>(j);
                if (sj >= lo && sj < ox) continue;  // already written by the vector loop
                outp[oy * g.out_w + j] = conv2d_cell(in, wco, bias_val, g, oy, j);
            }
        }
    }
}

void conv2d_backward_input(double* din, const double* dout, const double* w,
                           const Conv2dGeom& g) {
    if (g.stride != 1) {
        scalar_impl::conv2d_backward_input(din, dout, w, g);
        return;
    }
    const std::size_t in_plane = g.in_h * g.in_w;
    const std::size_t out_plane = g.out_h * g.out_w;
    const std::size_t ker_plane = g.kernel_h * g.kernel_w;
    // input columns whose every tap maps to a valid output column
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(g.pad);
    const std::ptrdiff_t lo =
        std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(g.kernel_w) - 1 - pad);
    const std::ptrdiff_t hi =
        std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(g.in_w),
                                 static_cast<std::ptrdiff_t>(g.out_w) - pad);
    for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
        double* dinp = din + ci * in_plane;
        for (std::size_t iy = 0; iy < g.in_h; ++iy) {
            std::ptrdiff_t ix = lo;
            for (; ix + 4 <= hi; ix += 4) {
                __m256d acc = _mm256_setzero_pd();
                for (std::size_t co = 0; co < g.out_channels; ++co) {
                    const double* doutp = dout + co * out_plane;
                    const double* wci = w + (co * g.in_channels + ci) * ker_plane;
                    for (std::size_t ky = 0; ky < g.kernel_h; ++ky) {
                        const std::ptrdiff_t oy = static_cast<std::ptrdiff_t>(iy) + pad -
                                                  static_cast<std::ptrdiff_t>(ky);
                        if (oy < 0 || oy >= static_cast<std::ptrdiff_t>(g.out_h)) continue;
                        for (std::size_t kx = 0; kx < g.kernel_w; ++kx) {
                            const std::ptrdiff_t ox0 = ix + pad - static_cast<std::ptrdiff_t>(kx);
                            const __m256d prod = _mm256_mul_pd(
                                _mm256_set1_pd(wci[ky * g.kernel_w + kx]),
                                _mm256_loadu_pd(doutp + oy * g.out_w + ox0));
                            acc = _mm256_add_pd(acc, prod);
                        }
                    }
                }
                double* dst = dinp + iy * g.in_w + ix;
                _mm256_storeu_pd(dst, _mm256_add_pd(_mm256_loadu_pd(dst), acc));
            }
            for (std::size_t j = 0; j < g.in_w; ++j) {
                const std::ptrdiff_t sj = static_cast<std::ptrdiff_t>(j);
                if (sj >= lo && sj < ix) continue;
                dinp[iy * g.in_w + j] += conv2d_input_grad_cell(dout, w, g, ci, iy, j);
            }
        }
    }
}

void adam_step(double* p, double* m, double* v, const double* g, std::size_t n,
               double lr, double beta1, double beta2, double eps,
               double bias_c1, double bias_c2) {
    const __m256d vb1 = _mm256_set1_pd(beta1);
    const __m256d vomb1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2);
    const __m256d vomb2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d vc1 = _mm256_set1_pd(bias_c1);
    const __m256d vc2 = _mm256_set1_pd(bias_c2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vg = _mm256_loadu_pd(g + i);
        const __m256d vm = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)),
                                         _mm256_mul_pd(vomb1, vg));
        const __m256d vv = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                                         _mm256_mul_pd(vomb2, _mm256_mul_pd(vg, vg)));
        _mm256_storeu_pd(m + i, vm);
        _mm256_storeu_pd(v + i, vv);
        const __m256d num = _mm256_mul_pd(vlr, _mm256_mul_pd(vm, vc1));
        const __m256d den = _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, vc2)), veps);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), _mm256_div_pd(num, den)));
    }
    if (i < n) {
        scalar_impl::adam_step(p + i, m + i, v + i, g + i, n - i, lr, beta1, beta2, eps,
                               bias_c1, bias_c2);
    }
}

}  // namespace skelsign::kernels::avx2_impl

#endif  // SKELSIGN_HAVE_AVX2
