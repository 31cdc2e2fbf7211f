#pragma once

// Independent brute-force reference implementations used only by the tests.
// Deliberately written along different lines than the library kernels (padded
// scratch buffers, different loop nesting) so agreement is meaningful.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "skelsign/rng.hpp"
#include "skelsign/tensor.hpp"

namespace oracles {

inline skelsign::Tensor random_tensor(std::vector<std::size_t> shape, skelsign::Rng& rng,
                                      double lo = -1.0, double hi = 1.0) {
    skelsign::Tensor t(std::move(shape));
    for (double& v : t.values) v = rng.uniform(lo, hi);
    return t;
}

// p-outermost accumulation order
inline std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b,
                                  std::size_t m, std::size_t k, std::size_t n) {
    std::vector<double> out(m * n, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                out[i * n + j] += a[i * k + p] * b[p * n + j];
            }
        }
    }
    return out;
}

// materializes the zero-padded input, then correlates
inline std::vector<double> conv2d(const std::vector<double>& in, std::size_t cin,
                                  std::size_t h, std::size_t w,
                                  const std::vector<double>& kern, std::size_t cout,
                                  std::size_t kh, std::size_t kw,
                                  const std::vector<double>& bias, std::size_t stride,
                                  std::size_t pad) {
    const std::size_t ph = h + 2 * pad, pw = w + 2 * pad;
    std::vector<double> padded(cin * ph * pw, 0.0);
    for (std::size_t c = 0; c < cin; ++c) {
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                padded[(c * ph + y + pad) * pw + x + pad] = in[(c * h + y) * w + x];
            }
        }
    }
    const std::size_t oh = (ph - kh) / stride + 1;
    const std::size_t ow = (pw - kw) / stride + 1;
    std::vector<double> out(cout * oh * ow, 0.0);
    for (std::size_t co = 0; co < cout; ++co) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double acc = bias.empty() ? 0.0 : bias[co];
                for (std::size_t ci = 0; ci < cin; ++ci) {
                    for (std::size_t ky = 0; ky < kh; ++ky) {
                        for (std::size_t kx = 0; kx < kw; ++kx) {
                            acc += padded[(ci * ph + oy * stride + ky) * pw + ox * stride + kx] *
                                   kern[((co * cin + ci) * kh + ky) * kw + kx];
                        }
                    }
                }
                out[(co * oh + oy) * ow + ox] = acc;
            }
        }
    }
    return out;
}

inline std::vector<double> max_pool2d(const std::vector<double>& in, std::size_t c,
                                      std::size_t h, std::size_t w, std::size_t ph,
                                      std::size_t pw) {
    const std::size_t oh = h / ph, ow = w / pw;
    std::vector<double> out(c * oh * ow, -std::numeric_limits<double>::infinity());
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < oh * ph; ++y) {
            for (std::size_t x = 0; x < ow * pw; ++x) {
                const std::size_t oy = y / ph, ox = x / pw;
                double& slot = out[(ch * oh + oy) * ow + ox];
                slot = std::max(slot, in[(ch * h + y) * w + x]);
            }
        }
    }
    return out;
}

inline std::vector<double> global_avg_pool(const std::vector<double>& in, std::size_t c,
                                           std::size_t h, std::size_t w) {
    std::vector<double> out(c, 0.0);
    for (std::size_t ch = 0; ch < c; ++ch) {
        double sum = 0.0;
        for (std::size_t i = 0; i < h * w; ++i) sum += in[ch * h * w + i];
        out[ch] = sum / static_cast<double>(h * w);
    }
    return out;
}

// long-double softmax cross entropy
inline double softmax_ce(const std::vector<double>& logits, std::size_t target) {
    long double maxv = logits[0];
    for (double v : logits) maxv = std::max<long double>(maxv, v);
    long double sum = 0.0L;
    for (double v : logits) sum += std::exp(static_cast<long double>(v) - maxv);
    const long double log_p = static_cast<long double>(logits[target]) - maxv - std::log(sum);
    return static_cast<double>(-log_p);
}

// closed-form corner-aligned bilinear sample of a 2x2 map
inline double bilinear_2x2(double v00, double v01, double v10, double v11, double fy,
                           double fx) {
    return v00 * (1 - fy) * (1 - fx) + v01 * (1 - fy) * fx + v10 * fy * (1 - fx) +
           v11 * fy * fx;
}

// tiny logistic regression on 2 features, full-batch gradient descent;
// returns training accuracy
inline double logistic_accuracy(const std::vector<std::array<double, 2>>& features,
                                const std::vector<int>& labels, std::size_t iters = 4000,
                                double lr = 0.5) {
    // standardize features first
    std::array<double, 2> mean{0, 0}, sd{0, 0};
    const auto n = static_cast<double>(features.size());
    for (const auto& f : features) {
        mean[0] += f[0];
        mean[1] += f[1];
    }
    mean[0] /= n;
    mean[1] /= n;
    for (const auto& f : features) {
        sd[0] += (f[0] - mean[0]) * (f[0] - mean[0]);
        sd[1] += (f[1] - mean[1]) * (f[1] - mean[1]);
    }
    sd[0] = std::sqrt(sd[0] / n) + 1e-12;
    sd[1] = std::sqrt(sd[1] / n) + 1e-12;

    double w0 = 0.0, w1 = 0.0, b = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        double g0 = 0.0, g1 = 0.0, gb = 0.0;
        for (std::size_t i = 0; i < features.size(); ++i) {
            const double x0 = (features[i][0] - mean[0]) / sd[0];
            const double x1 = (features[i][1] - mean[1]) / sd[1];
            const double z = w0 * x0 + w1 * x1 + b;
            const double p = 1.0 / (1.0 + std::exp(-z));
            const double err = p - static_cast<double>(labels[i]);
            g0 += err * x0;
            g1 += err * x1;
            gb += err;
        }
        w0 -= lr * g0 / n;
        w1 -= lr * g1 / n;
        b -= lr * gb / n;
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double x0 = (features[i][0] - mean[0]) / sd[0];
        const double x1 = (features[i][1] - mean[1]) / sd[1];
        const double z = w0 * x0 + w1 * x1 + b;
        if ((z > 0.0 ? 1 : 0) == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / n;
}

}  // namespace oracles
