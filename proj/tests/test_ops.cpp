#include <doctest.h>

#include <cmath>
#include <cstring>

#include "oracles.hpp"
#include "skelsign/ops.hpp"
#include "skelsign/rng.hpp"

using namespace skelsign;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace

TEST_SUITE("ops") {

TEST_CASE("matmul basics") {
    const Tensor eye({2, 2}, {1, 0, 0, 1});
    const Tensor b({2, 2}, {1, 2, 3, 4});
    CHECK(matmul(eye, b).values == std::vector<double>{1, 2, 3, 4});

    const Tensor zeros({2, 3});
    const Tensor any({3, 5}, std::vector<double>(15, 0.7));
    for (double v : matmul(zeros, any).values) CHECK(v == 0.0);

    CHECK_THROWS_AS(matmul(Tensor({2, 3}), Tensor({4, 2})), std::invalid_argument);
}

TEST_CASE("matmul agrees with the triple-loop oracle") {
    Rng rng(21);
    const Tensor a = oracles::random_tensor({4, 3}, rng);
    const Tensor b = oracles::random_tensor({3, 5}, rng);
    const Tensor c = matmul(a, b);
    const auto expect = oracles::matmul(a.values, b.values, 4, 3, 5);
    for (std::size_t i = 0; i < c.numel(); ++i) {
        CHECK(c.values[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    }
}

TEST_CASE("matmul backward passes the gradient check") {
    Rng rng(22);
    Tensor a = oracles::random_tensor({3, 4}, rng);
    Tensor b = oracles::random_tensor({4, 2}, rng);
    const Tensor r = oracles::random_tensor({3, 2}, rng);
    const auto eval = [&](bool with_grad) {
        Tensor out = matmul(a, b);
        const double loss = dot(out.values, r.values);
        if (with_grad) {
            out.grad = r.values;
            matmul_backward(a, b, out);
        }
        return loss;
    };
    CHECK(grad_check(eval, {&a, &b}, 1e-4) < 1e-4);
}

TEST_CASE("conv2d identity and constant cases") {
    Rng rng(23);
    const Tensor input = oracles::random_tensor({1, 4, 5}, rng);
    const Tensor one({1, 1, 1, 1}, {1.0});
    const Tensor zero_bias({1});
    const Tensor out = conv2d(input, one, zero_bias, 1, 0);
    CHECK(out.values == input.values);

    const Tensor zeros({2, 1, 3, 3});
    const Tensor bias({2}, {0.25, -1.5});
    const Tensor out2 = conv2d(input, zeros, bias, 1, 1);
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t i = 0; i < 4 * 5; ++i) {
            CHECK(out2.values[c * 4 * 5 + i] == bias.values[c]);
        }
    }

    CHECK_THROWS_AS(conv2d(Tensor({1, 2, 2}), Tensor({1, 1, 5, 5}), Tensor({1}), 1, 0),
                    std::invalid_argument);
}

TEST_CASE("conv2d agrees with the padded-scratch oracle") {
    Rng rng(24);
    const Tensor input = oracles::random_tensor({2, 8, 8}, rng);
    const Tensor kern = oracles::random_tensor({3, 2, 3, 3}, rng);
    const Tensor bias = oracles::random_tensor({3}, rng);
    for (std::size_t pad : {0u, 1u}) {
        for (std::size_t stride : {1u, 2u}) {
            const Tensor out = conv2d(input, kern, bias, stride, pad);
            const auto expect = oracles::conv2d(input.values, 2, 8, 8, kern.values, 3, 3, 3,
                                                bias.values, stride, pad);
            REQUIRE(out.numel() == expect.size());
            for (std::size_t i = 0; i < expect.size(); ++i) {
                CHECK(out.values[i] == doctest::Approx(expect[i]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("conv2d backward passes the gradient check") {
    Rng rng(25);
    Tensor input = oracles::random_tensor({2, 5, 4}, rng);
    Tensor kern = oracles::random_tensor({3, 2, 3, 3}, rng);
    Tensor bias = oracles::random_tensor({3}, rng);
    const Tensor r = oracles::random_tensor({3, 5, 4}, rng);
    const auto eval = [&](bool with_grad) {
        Tensor out = conv2d(input, kern, bias, 1, 1);
        const double loss = dot(out.values, r.values);
        if (with_grad) {
            out.grad = r.values;
            conv2d_backward(input, kern, bias, out, 1, 1);
        }
        return loss;
    };
    CHECK(grad_check(eval, {&input, &kern, &bias}, 1e-4) < 1e-4);
}

TEST_CASE("max_pool2d basics and oracle") {
    const Tensor grid({1, 2, 2}, {1, 2, 3, 4});
    CHECK(max_pool2d(grid, 2, 2).values == std::vector<double>{4});

    const Tensor constant({2, 4, 4}, std::vector<double>(32, 0.7));
    for (double v : max_pool2d(constant, 2, 2).values) CHECK(v == 0.7);

    Rng rng(26);
    const Tensor input = oracles::random_tensor({1, 6, 6}, rng);
    for (std::size_t ph : {1u, 2u, 3u}) {
        const Tensor out = max_pool2d(input, ph, 2);
        const auto expect = oracles::max_pool2d(input.values, 1, 6, 6, ph, 2);
        CHECK(out.values == expect);
    }

    CHECK_THROWS_AS(max_pool2d(Tensor({1, 2, 2}), 3, 2), std::invalid_argument);
}

TEST_CASE("max_pool2d gradient routes to the first argmax") {
    Tensor input({1, 2, 2}, {0.5, 0.5, 0.5, 0.5});
    Tensor out = max_pool2d(input, 2, 2);
    out.grad = {1.0};
    max_pool2d_backward(input, out, 2, 2);
    CHECK(input.grad == std::vector<double>{1, 0, 0, 0});

    Rng rng(27);
    Tensor rnd = oracles::random_tensor({2, 4, 6}, rng);
    const Tensor r = oracles::random_tensor({2, 2, 3}, rng);
    const auto eval = [&](bool with_grad) {
        Tensor pooled = max_pool2d(rnd, 2, 2);
        const double loss = dot(pooled.values, r.values);
        if (with_grad) {
            pooled.grad = r.values;
            max_pool2d_backward(rnd, pooled, 2, 2);
        }
        return loss;
    };
    CHECK(grad_check(eval, {&rnd}, 1e-5) < 1e-4);
}

TEST_CASE("global_avg_pool basics, oracle, gradient") {
    const Tensor g({1, 2, 2}, {1, 3, 5, 7});
    CHECK(global_avg_pool(g).values == std::vector<double>{4});

    const Tensor constant({3, 2, 5}, std::vector<double>(30, -0.4));
    for (double v : global_avg_pool(constant).values) CHECK(v == doctest::Approx(-0.4));

    Rng rng(28);
    Tensor input = oracles::random_tensor({4, 5, 5}, rng);
    const auto expect = oracles::global_avg_pool(input.values, 4, 5, 5);
    const Tensor out = global_avg_pool(input);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(out.values[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    }

    const Tensor r = oracles::random_tensor({4}, rng);
    const auto eval = [&](bool with_grad) {
        Tensor pooled = global_avg_pool(input);
        const double loss = dot(pooled.values, r.values);
        if (with_grad) {
            pooled.grad = r.values;
            global_avg_pool_backward(input, pooled);
        }
        return loss;
    };
    CHECK(grad_check(eval, {&input}, 1e-5) < 1e-4);
}

TEST_CASE("relu values and zero-input subgradient") {
    const Tensor x({3}, {-1.0, 2.0, 0.0});
    Tensor xm = x;
    Tensor out = relu(x);
    CHECK(out.values == std::vector<double>{0.0, 2.0, 0.0});
    out.grad = {1.0, 1.0, 1.0};
    relu_backward(xm, out);
    CHECK(xm.grad == std::vector<double>{0.0, 1.0, 0.0});
}

TEST_CASE("upsample_nearest preserves constants and passes the gradient check") {
    const Tensor c({2, 2, 2}, std::vector<double>(8, 3.25));
    for (double v : upsample_nearest(c, 5, 7).values) CHECK(v == 3.25);

    Rng rng(29);
    Tensor input = oracles::random_tensor({2, 2, 3}, rng);
    const Tensor r = oracles::random_tensor({2, 5, 7}, rng);
    const auto eval = [&](bool with_grad) {
        Tensor up = upsample_nearest(input, 5, 7);
        const double loss = dot(up.values, r.values);
        if (with_grad) {
            up.grad = r.values;
            upsample_nearest_backward(input, up);
        }
        return loss;
    };
    CHECK(grad_check(eval, {&input}, 1e-5) < 1e-4);
}

TEST_CASE("softmax cross entropy: uniform, extreme, oracle") {
    const std::vector<double> uniform{0.3, 0.3};
    const SoftmaxCrossEntropy u = softmax_cross_entropy(uniform, 0);
    CHECK(u.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(u.probs[0] == doctest::Approx(0.5));

    const std::vector<double> extreme{1000.0, 0.0};
    const SoftmaxCrossEntropy e = softmax_cross_entropy(extreme, 0);
    CHECK(e.loss == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::isfinite(e.loss));
    // attributing the tiny class still yields a finite loss
    CHECK(softmax_cross_entropy(extreme, 1).loss == doctest::Approx(1000.0));

    Rng rng(30);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + rng.below(4);
        std::vector<double> logits(k);
        for (double& v : logits) v = rng.uniform(-30.0, 30.0);
        const std::size_t target = rng.below(k);
        const SoftmaxCrossEntropy ce = softmax_cross_entropy(logits, target);
        CHECK(ce.loss == doctest::Approx(oracles::softmax_ce(logits, target)).epsilon(1e-10));
        double sum = 0.0;
        for (double p : ce.probs) {
            CHECK(p > 0.0);
            sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }

    CHECK_THROWS_AS(softmax_cross_entropy(uniform, 2), std::out_of_range);
    CHECK_THROWS_AS(softmax_cross_entropy(std::vector<double>{1.0}, 0),
                    std::invalid_argument);
}

TEST_CASE("softmax gradient is probs minus onehot") {
    Rng rng(31);
    Tensor logits = oracles::random_tensor({3}, rng);
    const auto eval = [&](bool with_grad) {
        const SoftmaxCrossEntropy ce = softmax_cross_entropy(logits.values, 1);
        if (with_grad) {
            const std::vector<double> g = softmax_cross_entropy_grad(ce, 1);
            for (std::size_t i = 0; i < 3; ++i) logits.grad[i] += g[i];
        }
        return ce.loss;
    };
    CHECK(grad_check(eval, {&logits}, 1e-5) < 1e-4);
}

TEST_CASE("mse loss basics, oracle, gradient") {
    Rng rng(32);
    const Tensor a = oracles::random_tensor({2, 3}, rng);
    CHECK(mse_loss(a, a) == 0.0);

    Tensor shifted = a;
    for (double& v : shifted.values) v += 1.0;
    CHECK(mse_loss(shifted, a) == doctest::Approx(1.0).epsilon(1e-12));

    const Tensor b = oracles::random_tensor({2, 3}, rng);
    double expect = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        expect += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
    }
    expect /= static_cast<double>(a.numel());
    CHECK(mse_loss(a, b) == doctest::Approx(expect).epsilon(1e-12));

    CHECK_THROWS_AS(mse_loss(Tensor({2, 3}), Tensor({3, 2})), std::invalid_argument);

    Tensor pred = oracles::random_tensor({2, 3}, rng);
    const auto eval = [&](bool with_grad) {
        const double loss = mse_loss(pred, b);
        if (with_grad) mse_loss_backward(pred, b);
        return loss;
    };
    CHECK(grad_check(eval, {&pred}, 1e-5) < 1e-4);
}

TEST_CASE("lstm cell zero-weight fixed points") {
    const std::size_t d = 3, h = 4;
    Tensor w({d + h, 4 * h});
    Tensor b({4 * h});
    const LstmWeights wts{&w, &b, d, h};
    const std::vector<double> x{0.3, -0.2, 0.9};

    const LstmState zero = LstmState::zero(h);
    const LstmState next = lstm_cell(x, zero, wts);
    for (double v : next.hidden) CHECK(v == 0.0);
    for (double v : next.cell) CHECK(v == 0.0);

    LstmState carrying = LstmState::zero(h);
    carrying.cell = {1.0, -2.0, 0.5, 4.0};
    const LstmState out = lstm_cell(x, carrying, wts);
    for (std::size_t j = 0; j < h; ++j) {
        CHECK(out.cell[j] == doctest::Approx(0.5 * carrying.cell[j]).epsilon(1e-12));
    }

    CHECK_THROWS_AS(lstm_cell(std::vector<double>{1.0}, zero, wts), std::invalid_argument);
}

TEST_CASE("lstm backward through time passes the gradient check") {
    Rng rng(33);
    const std::size_t d = 2, h = 3, steps = 3;
    Tensor w = oracles::random_tensor({d + h, 4 * h}, rng);
    Tensor b = oracles::random_tensor({4 * h}, rng, -0.1, 0.1);
    Tensor xs = oracles::random_tensor({steps, d}, rng);
    std::vector<double> r(h);
    for (double& v : r) v = rng.uniform(-1.0, 1.0);

    LstmWeights wts{&w, &b, d, h};
    const auto eval = [&](bool with_grad) {
        LstmSequenceCache cache;
        const LstmState final_state = lstm_forward(xs, wts, &cache);
        const double loss = dot(final_state.hidden, r);
        if (with_grad) {
            lstm_backward(xs, wts, cache, r, true);
        }
        return loss;
    };
    CHECK(grad_check(eval, {&w, &b, &xs}, 1e-4) < 1e-4);
}

TEST_CASE("grad_check calibration: exact linear and corrupted backward") {
    Tensor x = Tensor({5}, {0.1, -0.4, 2.0, 0.7, -1.2});
    const auto linear_eval = [&](bool with_grad) {
        double loss = 0.0;
        for (double v : x.values) loss += 3.0 * v;
        if (with_grad) {
            for (double& g : x.grad) g += 3.0;
        }
        return loss;
    };
    CHECK(grad_check(linear_eval, {&x}, 1e-4) < 1e-10);

    const auto corrupted_eval = [&](bool with_grad) {
        double loss = 0.0;
        for (double v : x.values) loss += 3.0 * v;
        if (with_grad) {
            for (double& g : x.grad) g += 6.0;  // doubled on purpose
        }
        return loss;
    };
    const double err = grad_check(corrupted_eval, {&x}, 1e-4);
    CHECK(err == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("forward passes are deterministic") {
    Rng rng(34);
    const Tensor input = oracles::random_tensor({2, 6, 6}, rng);
    const Tensor kern = oracles::random_tensor({3, 2, 3, 3}, rng);
    const Tensor bias = oracles::random_tensor({3}, rng);
    const Tensor a = conv2d(input, kern, bias, 1, 1);
    const Tensor b = conv2d(input, kern, bias, 1, 1);
    CHECK(std::memcmp(a.values.data(), b.values.data(), a.numel() * sizeof(double)) == 0);
}

TEST_CASE("values and grads stay finite through forward and backward") {
    Rng rng(35);
    Tensor input = oracles::random_tensor({1, 6, 6}, rng, -100.0, 100.0);
    Tensor kern = oracles::random_tensor({2, 1, 3, 3}, rng, -50.0, 50.0);
    Tensor bias = oracles::random_tensor({2}, rng);
    Tensor out = conv2d(input, kern, bias, 1, 1);
    out.grad.assign(out.numel(), 123.0);
    conv2d_backward(input, kern, bias, out, 1, 1);
    CHECK(input.all_finite());
    CHECK(kern.all_finite());
    CHECK(bias.all_finite());
    CHECK(out.all_finite());
}

}  // TEST_SUITE
