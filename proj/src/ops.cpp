#include "skelsign/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "skelsign/kernels.hpp"

namespace skelsign {

namespace {

kernels::Conv2dGeom conv_geom(const Tensor& input, const Tensor& kernels,
                              std::size_t stride, std::size_t pad) {
    require(input.rank() == 3, "conv2d input must be CxHxW, got " + shape_str(input.shape));
    require(kernels.rank() == 4,
            "conv2d kernels must be Cout x Cin x kh x kw, got " + shape_str(kernels.shape));
    require(stride >= 1, "conv2d stride must be >= 1");
    require(kernels.dim(1) == input.dim(0),
            "conv2d channel mismatch: input " + shape_str(input.shape) + " vs kernels " +
                shape_str(kernels.shape));
    kernels::Conv2dGeom g;
    g.in_channels = input.dim(0);
    g.in_h = input.dim(1);
    g.in_w = input.dim(2);
    g.out_channels = kernels.dim(0);
    g.kernel_h = kernels.dim(2);
    g.kernel_w = kernels.dim(3);
    g.stride = stride;
    g.pad = pad;
    require(g.in_h + 2 * pad >= g.kernel_h && g.in_w + 2 * pad >= g.kernel_w,
            "conv2d kernel " + shape_str(kernels.shape) + " larger than padded input " +
                shape_str(input.shape) + " with pad " + std::to_string(pad));
    g.out_h = (g.in_h + 2 * pad - g.kernel_h) / stride + 1;
    g.out_w = (g.in_w + 2 * pad - g.kernel_w) / stride + 1;
    return g;
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

// ---------------------------------------------------------------- dense ----

Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a.rank() == 2 && b.rank() == 2,
            "matmul needs rank-2 tensors, got " + shape_str(a.shape) + " and " +
                shape_str(b.shape));
    require(a.dim(1) == b.dim(0),
            "matmul shape mismatch: " + shape_str(a.shape) + " x " + shape_str(b.shape));
    Tensor out({a.dim(0), b.dim(1)});
    kernels::matmul(out.values.data(), a.values.data(), b.values.data(), a.dim(0), a.dim(1),
                    b.dim(1), false);
    return out;
}

namespace {
// db(k x n) += a(m x k)^T * dout(m x n), written as k rank-1 updates per row
// of a so both factors stream through memory row-major
void accumulate_tn(double* db, const double* a, const double* dout, std::size_t m,
                   std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        const double* drow = dout + i * n;
        for (std::size_t j = 0; j < k; ++j) {
            kernels::vec_axpy(db + j * n, arow[j], drow, n);
        }
    }
}
}  // namespace

void matmul_backward(Tensor& a, Tensor& b, const Tensor& out) {
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    // da += dout * b^T
    kernels::matmul_nt_acc(a.grad.data(), out.grad.data(), b.values.data(), m, n, k);
    // db += a^T * dout
    accumulate_tn(b.grad.data(), a.values.data(), out.grad.data(), m, k, n);
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor* bias) {
    require(w.rank() == 2, "linear weight must be rank 2, got " + shape_str(w.shape));
    require(x.rank() == 2, "linear input must be rank 2, got " + shape_str(x.shape));
    Tensor out = matmul(x, w);
    if (bias) {
        require(bias->numel() == w.dim(1),
                "linear bias length " + std::to_string(bias->numel()) + " != " +
                    std::to_string(w.dim(1)));
        for (std::size_t i = 0; i < out.dim(0); ++i) {
            kernels::vec_add(out.values.data() + i * out.dim(1),
                             out.values.data() + i * out.dim(1), bias->values.data(),
                             out.dim(1));
        }
    }
    return out;
}

void linear_backward(Tensor& x, Tensor& w, Tensor* bias, const Tensor& out) {
    const std::size_t m = out.dim(0), n = out.dim(1), k = w.dim(0);
    require(x.numel() == m * k, "linear backward input shape mismatch");
    // dx += dout * w^T
    kernels::matmul_nt_acc(x.grad.data(), out.grad.data(), w.values.data(), m, n, k);
    // dw += x^T * dout
    accumulate_tn(w.grad.data(), x.values.data(), out.grad.data(), m, k, n);
    if (bias) {
        for (std::size_t i = 0; i < m; ++i) {
            kernels::vec_add(bias->grad.data(), bias->grad.data(),
                             out.grad.data() + i * n, n);
        }
    }
}

void linear_backward_input(Tensor& x, const Tensor& w, const Tensor& out) {
    const std::size_t m = out.dim(0), n = out.dim(1), k = w.dim(0);
    require(x.numel() == m * k, "linear backward input shape mismatch");
    kernels::matmul_nt_acc(x.grad.data(), out.grad.data(), w.values.data(), m, n, k);
}

// ------------------------------------------------------ conv and pooling ---

Tensor conv2d(const Tensor& input, const Tensor& kernels_t, const Tensor& bias,
              std::size_t stride, std::size_t pad) {
    const kernels::Conv2dGeom g = conv_geom(input, kernels_t, stride, pad);
    require(bias.numel() == g.out_channels,
            "conv2d bias length " + std::to_string(bias.numel()) + " != out channels " +
                std::to_string(g.out_channels));
    Tensor out({g.out_channels, g.out_h, g.out_w});
    kernels::conv2d_forward(out.values.data(), input.values.data(), kernels_t.values.data(),
                            bias.values.data(), g);
    return out;
}

void conv2d_backward(Tensor& input, Tensor& kernels_t, Tensor& bias, const Tensor& out,
                     std::size_t stride, std::size_t pad) {
    const kernels::Conv2dGeom g = conv_geom(input, kernels_t, stride, pad);
    kernels::conv2d_backward_input(input.grad.data(), out.grad.data(),
                                   kernels_t.values.data(), g);
    kernels::conv2d_backward_params(kernels_t.grad.data(), bias.grad.data(),
                                    input.values.data(), out.grad.data(), g);
}

void conv2d_backward_input(Tensor& input, const Tensor& kernels_t, const Tensor& out,
                           std::size_t stride, std::size_t pad) {
    const kernels::Conv2dGeom g = conv_geom(input, kernels_t, stride, pad);
    kernels::conv2d_backward_input(input.grad.data(), out.grad.data(),
                                   kernels_t.values.data(), g);
}

Tensor max_pool2d(const Tensor& input, std::size_t pool_h, std::size_t pool_w) {
    require(input.rank() == 3, "max_pool2d input must be CxHxW, got " + shape_str(input.shape));
    require(pool_h >= 1 && pool_w >= 1, "max_pool2d window must be positive");
    require(pool_h <= input.dim(1) && pool_w <= input.dim(2),
            "max_pool2d window " + std::to_string(pool_h) + "x" + std::to_string(pool_w) +
                " larger than input " + shape_str(input.shape));
    const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
    const std::size_t oh = h / pool_h, ow = w / pool_w;
    Tensor out({c, oh, ow});
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double best = -std::numeric_limits<double>::infinity();
                for (std::size_t py = 0; py < pool_h; ++py) {
                    for (std::size_t px = 0; px < pool_w; ++px) {
                        best = std::max(best, input.at(ch, oy * pool_h + py, ox * pool_w + px));
                    }
                }
                out.at(ch, oy, ox) = best;
            }
        }
    }
    return out;
}

void max_pool2d_backward(Tensor& input, const Tensor& out, std::size_t pool_h,
                         std::size_t pool_w) {
    const std::size_t c = input.dim(0);
    const std::size_t oh = out.dim(1), ow = out.dim(2);
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                // first occurrence in scan order wins ties
                double best = -std::numeric_limits<double>::infinity();
                std::size_t by = 0, bx = 0;
                for (std::size_t py = 0; py < pool_h; ++py) {
                    for (std::size_t px = 0; px < pool_w; ++px) {
                        const double v = input.at(ch, oy * pool_h + py, ox * pool_w + px);
                        if (v > best) {
                            best = v;
                            by = oy * pool_h + py;
                            bx = ox * pool_w + px;
                        }
                    }
                }
                input.grad[(ch * input.dim(1) + by) * input.dim(2) + bx] +=
                    out.grad[(ch * oh + oy) * ow + ox];
            }
        }
    }
}

Tensor global_avg_pool(const Tensor& input) {
    require(input.rank() == 3,
            "global_avg_pool input must be CxHxW, got " + shape_str(input.shape));
    const std::size_t c = input.dim(0), plane = input.dim(1) * input.dim(2);
    Tensor out({c});
    for (std::size_t ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        const double* p = input.values.data() + ch * plane;
        for (std::size_t i = 0; i < plane; ++i) acc += p[i];
        out.values[ch] = acc / static_cast<double>(plane);
    }
    return out;
}

void global_avg_pool_backward(Tensor& input, const Tensor& out) {
    const std::size_t c = input.dim(0), plane = input.dim(1) * input.dim(2);
    for (std::size_t ch = 0; ch < c; ++ch) {
        const double g = out.grad[ch] / static_cast<double>(plane);
        double* p = input.grad.data() + ch * plane;
        for (std::size_t i = 0; i < plane; ++i) p[i] += g;
    }
}

Tensor upsample_nearest(const Tensor& input, std::size_t out_h, std::size_t out_w) {
    require(input.rank() == 3,
            "upsample_nearest input must be CxHxW, got " + shape_str(input.shape));
    const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
    require(out_h >= h && out_w >= w, "upsample target smaller than source");
    Tensor out({c, out_h, out_w});
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < out_h; ++y) {
            const std::size_t sy = y * h / out_h;
            for (std::size_t x = 0; x < out_w; ++x) {
                const std::size_t sx = x * w / out_w;
                out.at(ch, y, x) = input.at(ch, sy, sx);
            }
        }
    }
    return out;
}

void upsample_nearest_backward(Tensor& input, const Tensor& out) {
    const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
    const std::size_t out_h = out.dim(1), out_w = out.dim(2);
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < out_h; ++y) {
            const std::size_t sy = y * h / out_h;
            for (std::size_t x = 0; x < out_w; ++x) {
                const std::size_t sx = x * w / out_w;
                input.grad[(ch * h + sy) * w + sx] += out.grad[(ch * out_h + y) * out_w + x];
            }
        }
    }
}

Tensor relu(const Tensor& x) {
    Tensor out(x.shape);
    kernels::relu(out.values.data(), x.values.data(), x.numel());
    return out;
}

void relu_backward(Tensor& x, const Tensor& out) {
    kernels::relu_backward(x.grad.data(), x.values.data(), out.grad.data(), x.numel());
}

// --------------------------------------------------------------- losses ----

SoftmaxCrossEntropy softmax_cross_entropy(std::span<const double> logits, std::size_t target) {
    require(logits.size() >= 2, "softmax_cross_entropy needs at least 2 logits");
    if (target >= logits.size()) {
        throw std::out_of_range("softmax_cross_entropy target " + std::to_string(target) +
                                " out of range for " + std::to_string(logits.size()) +
                                " classes");
    }
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    SoftmaxCrossEntropy result;
    result.probs.resize(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        result.probs[i] = std::exp(logits[i] - max_logit);
        sum += result.probs[i];
    }
    for (double& p : result.probs) p /= sum;
    // log-space loss keeps extreme logit gaps finite
    result.loss = -(logits[target] - max_logit) + std::log(sum);
    return result;
}

std::vector<double> softmax_cross_entropy_grad(const SoftmaxCrossEntropy& fwd,
                                               std::size_t target, double scale) {
    std::vector<double> grad(fwd.probs.size());
    for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] = scale * (fwd.probs[i] - (i == target ? 1.0 : 0.0));
    }
    return grad;
}

double mse_loss(const Tensor& pred, const Tensor& target) {
    require(pred.shape == target.shape,
            "mse_loss shape mismatch: " + shape_str(pred.shape) + " vs " +
                shape_str(target.shape));
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        const double d = pred.values[i] - target.values[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.numel());
}

void mse_loss_backward(Tensor& pred, const Tensor& target, double scale) {
    const double f = 2.0 * scale / static_cast<double>(pred.numel());
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        pred.grad[i] += f * (pred.values[i] - target.values[i]);
    }
}

// ----------------------------------------------------------------- lstm ----

namespace {

// preact = [x ; h_prev] * w + b, one row; returns post-activation gates
std::vector<double> lstm_gates(std::span<const double> x, const std::vector<double>& h_prev,
                               const LstmWeights& wts) {
    const std::size_t d = wts.input_dim, hs = wts.hidden, cols = 4 * hs;
    std::vector<double> concat(d + hs);
    std::copy(x.begin(), x.end(), concat.begin());
    std::copy(h_prev.begin(), h_prev.end(), concat.begin() + d);
    std::vector<double> pre(cols);
    kernels::matmul(pre.data(), concat.data(), wts.w->values.data(), 1, d + hs, cols, false);
    kernels::vec_add(pre.data(), pre.data(), wts.b->values.data(), cols);
    std::vector<double> gates(cols);
    for (std::size_t j = 0; j < hs; ++j) {
        gates[j] = sigmoid(pre[j]);                       // input gate
        gates[hs + j] = sigmoid(pre[hs + j]);             // forget gate
        gates[2 * hs + j] = std::tanh(pre[2 * hs + j]);   // candidate
        gates[3 * hs + j] = sigmoid(pre[3 * hs + j]);     // output gate
    }
    return gates;
}

void check_lstm_shapes(std::size_t x_len, const LstmState& prev, const LstmWeights& wts) {
    require(wts.hidden > 0, "lstm hidden size must be positive");
    require(x_len == wts.input_dim,
            "lstm input length " + std::to_string(x_len) + " != weights input dim " +
                std::to_string(wts.input_dim));
    require(prev.hidden.size() == wts.hidden && prev.cell.size() == wts.hidden,
            "lstm state size " + std::to_string(prev.hidden.size()) + " != hidden size " +
                std::to_string(wts.hidden));
    require(wts.w != nullptr && wts.b != nullptr, "lstm weights view not bound");
    require(wts.w->rank() == 2 && wts.w->dim(0) == wts.input_dim + wts.hidden &&
                wts.w->dim(1) == 4 * wts.hidden,
            "lstm weight shape " + shape_str(wts.w->shape) + " inconsistent with dims");
    require(wts.b->numel() == 4 * wts.hidden, "lstm bias length mismatch");
}

}  // namespace

LstmState lstm_cell(std::span<const double> x, const LstmState& prev, const LstmWeights& wts) {
    check_lstm_shapes(x.size(), prev, wts);
    const std::size_t hs = wts.hidden;
    const std::vector<double> gates = lstm_gates(x, prev.hidden, wts);
    LstmState next = LstmState::zero(hs);
    for (std::size_t j = 0; j < hs; ++j) {
        const double i = gates[j], f = gates[hs + j], g = gates[2 * hs + j],
                     o = gates[3 * hs + j];
        next.cell[j] = f * prev.cell[j] + i * g;
        next.hidden[j] = o * std::tanh(next.cell[j]);
    }
    return next;
}

LstmState lstm_forward(const Tensor& xs, const LstmWeights& wts, LstmSequenceCache* cache) {
    require(xs.rank() == 2, "lstm_forward expects T x input_dim, got " + shape_str(xs.shape));
    const std::size_t steps = xs.dim(0), hs = wts.hidden;
    LstmState state = LstmState::zero(hs);
    check_lstm_shapes(xs.dim(1), state, wts);
    if (cache) {
        cache->steps = steps;
        cache->gates.clear();
        cache->cells.clear();
        cache->hiddens.clear();
        cache->gates.reserve(steps);
        cache->cells.reserve(steps);
        cache->hiddens.reserve(steps);
    }
    for (std::size_t t = 0; t < steps; ++t) {
        std::span<const double> x(xs.values.data() + t * xs.dim(1), xs.dim(1));
        const std::vector<double> gates = lstm_gates(x, state.hidden, wts);
        LstmState next = LstmState::zero(hs);
        for (std::size_t j = 0; j < hs; ++j) {
            const double i = gates[j], f = gates[hs + j], g = gates[2 * hs + j],
                         o = gates[3 * hs + j];
            next.cell[j] = f * state.cell[j] + i * g;
            next.hidden[j] = o * std::tanh(next.cell[j]);
        }
        if (cache) {
            cache->gates.push_back(gates);
            cache->cells.push_back(next.cell);
            cache->hiddens.push_back(next.hidden);
        }
        state = std::move(next);
    }
    return state;
}

void lstm_backward(Tensor& xs, LstmWeights& wts, const LstmSequenceCache& cache,
                   std::span<const double> d_final_hidden, bool input_grads) {
    const std::size_t steps = cache.steps, hs = wts.hidden, d = wts.input_dim;
    require(d_final_hidden.size() == hs, "lstm_backward gradient length mismatch");
    require(steps > 0, "lstm_backward on empty sequence");
    std::vector<double> dh(d_final_hidden.begin(), d_final_hidden.end());
    std::vector<double> dc(hs, 0.0);
    std::vector<double> dpre(4 * hs);
    std::vector<double> concat(d + hs), dconcat(d + hs);
    for (std::size_t t = steps; t-- > 0;) {
        const std::vector<double>& gates = cache.gates[t];
        const std::vector<double>& c_t = cache.cells[t];
        const std::vector<double>* c_prev = t > 0 ? &cache.cells[t - 1] : nullptr;
        const std::vector<double>* h_prev = t > 0 ? &cache.hiddens[t - 1] : nullptr;
        for (std::size_t j = 0; j < hs; ++j) {
            const double i = gates[j], f = gates[hs + j], g = gates[2 * hs + j],
                         o = gates[3 * hs + j];
            const double tc = std::tanh(c_t[j]);
            const double dct = dh[j] * o * (1.0 - tc * tc) + dc[j];
            const double cprev = c_prev ? (*c_prev)[j] : 0.0;
            dpre[j] = dct * g * i * (1.0 - i);                 // input gate (sigmoid')
            dpre[hs + j] = dct * cprev * f * (1.0 - f);        // forget gate
            dpre[2 * hs + j] = dct * i * (1.0 - g * g);        // candidate (tanh')
            dpre[3 * hs + j] = dh[j] * tc * o * (1.0 - o);     // output gate
            dc[j] = dct * f;
        }
        std::span<const double> x(xs.values.data() + t * d, d);
        std::copy(x.begin(), x.end(), concat.begin());
        if (h_prev) {
            std::copy(h_prev->begin(), h_prev->end(), concat.begin() + d);
        } else {
            std::fill(concat.begin() + d, concat.end(), 0.0);
        }
        // dw += concat^T * dpre (outer product), db += dpre
        kernels::matmul(wts.w->grad.data(), concat.data(), dpre.data(), d + hs, 1, 4 * hs, true);
        kernels::vec_add(wts.b->grad.data(), wts.b->grad.data(), dpre.data(), 4 * hs);
        // dconcat = dpre * w^T
        std::fill(dconcat.begin(), dconcat.end(), 0.0);
        for (std::size_t r = 0; r < d + hs; ++r) {
            double acc = 0.0;
            const double* wrow = wts.w->values.data() + r * 4 * hs;
            for (std::size_t cidx = 0; cidx < 4 * hs; ++cidx) acc += dpre[cidx] * wrow[cidx];
            dconcat[r] = acc;
        }
        if (input_grads) {
            kernels::vec_add(xs.grad.data() + t * d, xs.grad.data() + t * d, dconcat.data(), d);
        }
        std::copy(dconcat.begin() + d, dconcat.end(), dh.begin());
    }
}

// ----------------------------------------------------- gradient checking ---

double grad_check(const std::function<double(bool)>& eval,
                  const std::vector<Tensor*>& params, double eps) {
    require(eps > 0.0, "grad_check eps must be positive");
    for (Tensor* p : params) p->zero_grad();
    eval(true);
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (Tensor* p : params) analytic.push_back(p->grad);

    double max_rel = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor& p = *params[pi];
        for (std::size_t i = 0; i < p.numel(); ++i) {
            const double saved = p.values[i];
            p.values[i] = saved + eps;
            const double f_plus = eval(false);
            p.values[i] = saved - eps;
            const double f_minus = eval(false);
            p.values[i] = saved;
            const double numeric = (f_plus - f_minus) / (2.0 * eps);
            const double a = analytic[pi][i];
            const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
            max_rel = std::max(max_rel, std::fabs(a - numeric) / denom);
        }
    }
    return max_rel;
}

}  // namespace skelsign
