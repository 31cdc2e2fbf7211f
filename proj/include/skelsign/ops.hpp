#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "skelsign/tensor.hpp"

// Differentiable operations. Forward functions are pure; every op has an
// explicit backward companion that reads the output tensor's grad and
// accumulates into the input tensors' grads.
namespace skelsign {

// ---------------------------------------------------------------- dense ----

// a: MxK, b: KxN -> MxN
Tensor matmul(const Tensor& a, const Tensor& b);
// da += dout * b^T, db += a^T * dout
void matmul_backward(Tensor& a, Tensor& b, const Tensor& out);

// x: MxIn (or flat In), w: InxOut, bias: Out (optional) -> MxOut
Tensor linear(const Tensor& x, const Tensor& w, const Tensor* bias);
void linear_backward(Tensor& x, Tensor& w, Tensor* bias, const Tensor& out);
// input gradient only; parameters untouched
void linear_backward_input(Tensor& x, const Tensor& w, const Tensor& out);

// ------------------------------------------------------ conv and pooling ---

// input: Cin x H x W, kernels: Cout x Cin x kh x kw, bias: Cout.
// Cross-correlation; out H' = floor((H + 2*pad - kh)/stride) + 1.
Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias,
              std::size_t stride, std::size_t pad);
void conv2d_backward(Tensor& input, Tensor& kernels, Tensor& bias, const Tensor& out,
                     std::size_t stride, std::size_t pad);
void conv2d_backward_input(Tensor& input, const Tensor& kernels, const Tensor& out,
                           std::size_t stride, std::size_t pad);

// per-window max; gradient routes to the first-scanned argmax of each window
Tensor max_pool2d(const Tensor& input, std::size_t pool_h, std::size_t pool_w);
void max_pool2d_backward(Tensor& input, const Tensor& out, std::size_t pool_h,
                         std::size_t pool_w);

// C x H x W -> C (per-channel mean)
Tensor global_avg_pool(const Tensor& input);
void global_avg_pool_backward(Tensor& input, const Tensor& out);

// nearest-neighbour resize to (out_h, out_w) >= source size
Tensor upsample_nearest(const Tensor& input, std::size_t out_h, std::size_t out_w);
void upsample_nearest_backward(Tensor& input, const Tensor& out);

Tensor relu(const Tensor& x);
// dx += dout where x > 0 (zero subgradient at x == 0)
void relu_backward(Tensor& x, const Tensor& out);

// --------------------------------------------------------------- losses ----

struct SoftmaxCrossEntropy {
    double loss = 0.0;
    std::vector<double> probs;
};

// numerically stable; loss computed in log space so extreme logits stay finite
SoftmaxCrossEntropy softmax_cross_entropy(std::span<const double> logits, std::size_t target);
// dloss/dlogits = scale * (probs - onehot(target))
std::vector<double> softmax_cross_entropy_grad(const SoftmaxCrossEntropy& fwd,
                                               std::size_t target, double scale = 1.0);

double mse_loss(const Tensor& pred, const Tensor& target);
// pred.grad += scale * 2 (pred - target) / N
void mse_loss_backward(Tensor& pred, const Tensor& target, double scale = 1.0);

// ----------------------------------------------------------------- lstm ----

struct LstmState {
    std::vector<double> hidden;
    std::vector<double> cell;

    static LstmState zero(std::size_t hidden_size) {
        return {std::vector<double>(hidden_size, 0.0), std::vector<double>(hidden_size, 0.0)};
    }
};

// Non-owning view of one weight block: w is (input_dim + hidden) x 4*hidden
// with gate order [input, forget, cell-candidate, output]; b is 4*hidden.
struct LstmWeights {
    Tensor* w = nullptr;
    Tensor* b = nullptr;
    std::size_t input_dim = 0;
    std::size_t hidden = 0;
};

LstmState lstm_cell(std::span<const double> x, const LstmState& prev, const LstmWeights& wts);

struct LstmSequenceCache {
    std::size_t steps = 0;
    std::vector<std::vector<double>> gates;    // per step, 4H post-activation [i f g o]
    std::vector<std::vector<double>> cells;    // c_t
    std::vector<std::vector<double>> hiddens;  // h_t
};

// Runs the cell over the rows of xs (T x input_dim) from a zero state.
LstmState lstm_forward(const Tensor& xs, const LstmWeights& wts,
                       LstmSequenceCache* cache = nullptr);
// Backpropagation through time from d(final hidden). Accumulates into
// wts.w.grad / wts.b.grad and, when requested, xs.grad.
void lstm_backward(Tensor& xs, LstmWeights& wts, const LstmSequenceCache& cache,
                   std::span<const double> d_final_hidden, bool input_grads = false);

// ----------------------------------------------------- gradient checking ---

// eval(true) must recompute the loss and accumulate analytic gradients into
// the listed parameters (their grads are zeroed here first); eval(false) must
// return the loss only. Central differences, relative error against
// max(|analytic|, |numeric|, 1e-8).
double grad_check(const std::function<double(bool)>& eval,
                  const std::vector<Tensor*>& params, double eps = 1e-4);

}  // namespace skelsign
