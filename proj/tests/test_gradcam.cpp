#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "skelsign/gradcam.hpp"
#include "skelsign/synth.hpp"

using namespace skelsign;
namespace fs = std::filesystem;

namespace {

ModelSpec tiny_cnn_spec() {
    ModelSpec spec;
    spec.kind = ModelKind::cnn;
    spec.max_frames = 2;
    spec.joints = 2;  // input 1 x 2 x 6
    spec.conv_channels = {1};
    spec.head_width = 3;
    spec.seed = 11;
    return spec;
}

PaddedSample toy_sample(std::size_t joints, std::size_t rows, std::uint64_t seed,
                        std::size_t keep_rows = 0) {
    SynthConfig cfg;
    cfg.joints = joints;
    cfg.min_frames = keep_rows ? keep_rows : rows;
    cfg.max_frames = keep_rows ? keep_rows : rows;
    Rng rng(seed);
    SkeletonSequence seq = generate_sample(GestureLabel::mono, cfg, rng);
    PaddedSample sample = pad_sequence(seq, rows);
    sample.label = GestureLabel::mono;
    return sample;
}

}  // namespace

TEST_SUITE("gradcam") {

TEST_CASE("weighted featuremap sum with unit gradients reproduces the map") {
    Tensor fmap({1, 2, 2}, {0.5, 0.0, 1.25, 2.0});
    fmap.grad.assign(4, 1.0);  // alpha = 1
    const Tensor heat = heatmap_from_featuremap(fmap);
    CHECK(heat.shape == std::vector<std::size_t>{2, 2});
    CHECK(heat.values == fmap.values);

    // zero gradients give a zero heatmap
    Tensor silent({2, 2, 2}, std::vector<double>(8, 3.0));
    const Tensor zero_heat = heatmap_from_featuremap(silent);
    for (double v : zero_heat.values) CHECK(v == 0.0);
}

TEST_CASE("a zeroed classification head yields an all-zero heatmap") {
    ModelSpec spec;
    spec.kind = ModelKind::cnn;
    spec.max_frames = 8;
    spec.joints = 2;
    spec.conv_channels = {2};
    spec.head_width = 3;
    Model model = build_model(spec);
    std::fill(model.param("head2.w").values.begin(), model.param("head2.w").values.end(), 0.0);
    std::fill(model.param("head1.w").values.begin(), model.param("head1.w").values.end(), 0.0);
    const PaddedSample sample = toy_sample(2, 8, 5);
    const Tensor heat = compute_conv_heatmap(model, sample, 0);
    for (double v : heat.values) CHECK(v == 0.0);
}

TEST_CASE("heatmap matches a finite-difference oracle on a tiny cnn") {
    // 1 conv channel on a 4 x 6 grid; featuremap = relu(conv1), pooled 2x2
    ModelSpec spec;
    spec.kind = ModelKind::cnn;
    spec.max_frames = 4;
    spec.joints = 2;
    spec.conv_channels = {1};
    spec.head_width = 3;
    spec.seed = 13;
    const Model model = build_model(spec);
    const PaddedSample sample = toy_sample(2, 4, 6);

    CnnContext ctx;
    cnn_forward(model, sample_grid(sample), &ctx);
    const Tensor fmap = cnn_last_conv(ctx);  // 1 x 4 x 6
    const std::size_t kClass = 1;

    // independent head-only forward from a featuremap copy
    const auto head_logit = [&](const Tensor& a) {
        const Tensor pooled = max_pool2d(a, 2, 2);
        const Tensor flat({1, pooled.numel()}, pooled.values);
        const Tensor pre = linear(flat, model.param("head1.w"), &model.param("head1.b"));
        const Tensor act = relu(pre);
        const Tensor logits = linear(act, model.param("head2.w"), &model.param("head2.b"));
        return logits.values[kClass];
    };

    // finite-difference d logit / d featuremap, then alpha, weighted sum, relu
    Tensor probe = fmap;
    std::vector<double> dfmap(fmap.numel());
    const double eps = 1e-6;
    for (std::size_t i = 0; i < fmap.numel(); ++i) {
        probe.values[i] = fmap.values[i] + eps;
        const double up = head_logit(probe);
        probe.values[i] = fmap.values[i] - eps;
        const double down = head_logit(probe);
        probe.values[i] = fmap.values[i];
        dfmap[i] = (up - down) / (2.0 * eps);
    }
    double alpha = 0.0;
    for (double g : dfmap) alpha += g;
    alpha /= static_cast<double>(fmap.numel());
    Tensor expect({4, 6});
    for (std::size_t i = 0; i < fmap.numel(); ++i) {
        const double v = alpha * fmap.values[i];
        expect.values[i] = v > 0.0 ? v : 0.0;
    }

    const Tensor heat = compute_conv_heatmap(model, sample, kClass);
    REQUIRE(heat.numel() == expect.numel());
    for (std::size_t i = 0; i < heat.numel(); ++i) {
        CHECK(heat.values[i] == doctest::Approx(expect.values[i]).epsilon(1e-5));
    }
    for (double v : heat.values) CHECK(v >= 0.0);
}

TEST_CASE("grad-cam leaves the model parameter gradients untouched") {
    const Model model = build_model(tiny_cnn_spec());
    const PaddedSample sample = toy_sample(2, 2, 7);
    compute_conv_heatmap(model, sample, 0);
    for (const Param& p : model.params) {
        for (double g : p.tensor.grad) CHECK(g == 0.0);
    }
}

TEST_CASE("bilinear upsampling: constants, 1x1, closed form") {
    const Tensor constant({2, 3}, std::vector<double>(6, 0.8));
    const Tensor up = upsample_bilinear(constant, 7, 9);
    for (double v : up.values) CHECK(v == 0.8);

    const Tensor dot({1, 1}, {2.5});
    for (double v : upsample_bilinear(dot, 4, 5).values) CHECK(v == 2.5);

    const Tensor quad({2, 2}, {1.0, 2.0, 3.0, 5.0});
    const Tensor big = upsample_bilinear(quad, 4, 4);
    for (std::size_t y = 0; y < 4; ++y) {
        for (std::size_t x = 0; x < 4; ++x) {
            const double fy = static_cast<double>(y) / 3.0;
            const double fx = static_cast<double>(x) / 3.0;
            const double expect = oracles::bilinear_2x2(1.0, 2.0, 3.0, 5.0, fy, fx);
            CHECK(big.at(y, x) == doctest::Approx(expect).epsilon(1e-12));
        }
    }

    CHECK_THROWS_AS(upsample_bilinear(quad, 1, 4), std::invalid_argument);
}

TEST_CASE("joint importance takes the per-joint coordinate maximum") {
    const Tensor heat({1, 6}, {0.1, 0.5, 0.3, 0.0, 0.2, 0.1});
    const Tensor scores = joint_importance(heat, 2);
    CHECK(scores.values == std::vector<double>{0.5, 0.2});

    const Tensor zeros({3, 6});
    for (double v : joint_importance(zeros, 2).values) CHECK(v == 0.0);

    Rng rng(31);
    const Tensor rnd = oracles::random_tensor({4, 9}, rng, 0.0, 1.0);
    const Tensor s = joint_importance(rnd, 3);
    for (std::size_t f = 0; f < 4; ++f) {
        for (std::size_t j = 0; j < 3; ++j) {
            double expect = -1.0;
            for (std::size_t a = 0; a < 3; ++a) expect = std::max(expect, rnd.at(f, 3 * j + a));
            CHECK(s.at(f, j) == expect);
        }
    }

    CHECK_THROWS_AS(joint_importance(Tensor({2, 7}), 2), std::invalid_argument);
}

TEST_CASE("top-k joints: selection, ties, sort oracle, monotone invariance") {
    Tensor scores({1, 12});
    for (std::size_t j = 0; j < 12; ++j) scores.values[j] = static_cast<double>((j * 5) % 12);
    const auto top = top_k_joints(scores, 10);
    REQUIRE(top[0].size() == 10);
    // matches a full sort
    std::vector<std::size_t> idx(12);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return scores.values[a] > scores.values[b];
    });
    for (std::size_t i = 0; i < 10; ++i) CHECK(top[0][i] == idx[i]);

    // all-equal scores pick the lowest indices in order
    const Tensor flat({2, 7}, std::vector<double>(14, 0.25));
    const auto tied = top_k_joints(flat, 4);
    for (const auto& row : tied) {
        CHECK(row == std::vector<std::size_t>{0, 1, 2, 3});
    }

    // strictly monotone transforms do not change the selection
    Rng rng(32);
    const Tensor rnd = oracles::random_tensor({3, 9}, rng, 0.0, 2.0);
    Tensor warped = rnd;
    for (double& v : warped.values) v = std::exp(3.0 * v) + 1.0;
    CHECK(top_k_joints(rnd, 5) == top_k_joints(warped, 5));

    CHECK_THROWS_AS(top_k_joints(flat, 8), std::invalid_argument);
}

TEST_CASE("export and read back") {
    ModelSpec spec;
    spec.kind = ModelKind::cnn;
    spec.max_frames = 8;
    spec.joints = 4;
    spec.conv_channels = {2};
    spec.head_width = 3;
    const Model model = build_model(spec);
    const PaddedSample sample = toy_sample(4, 8, 9, 6);  // 6 real rows, 2 padded
    const GradCamResult result = grad_cam(model, sample, std::nullopt, 3);
    CHECK(result.top_joints.size() == 8);
    CHECK(result.original_length == 6);
    for (double v : result.input_heatmap.values) CHECK(v >= 0.0);

    const fs::path dir = fs::temp_directory_path() / "skelsign_gradcam_export";
    fs::remove_all(dir);
    export_result(result, dir);

    const Tensor heat = read_heatmap_csv(dir / "heatmap.csv");
    CHECK(heat.shape == result.input_heatmap.shape);
    CHECK(heat.values == result.input_heatmap.values);  // shortest-round-trip format

    const auto lines = read_highlights(dir / "top_joints.txt");
    REQUIRE(lines.size() == 8);
    for (std::size_t f = 0; f < 8; ++f) {
        CHECK(lines[f].frame == f);
        CHECK(lines[f].joints == result.top_joints[f]);
        CHECK(lines[f].padded == (f >= 6));
    }
    fs::remove_all(dir);

    GradCamResult empty;
    CHECK_THROWS_AS(export_result(empty, dir), std::invalid_argument);
}

}  // TEST_SUITE
