#include "skelsign/gradcam.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "format_util.hpp"

namespace skelsign {

Tensor heatmap_from_featuremap(const Tensor& featuremap) {
    require(featuremap.rank() == 3,
            "featuremap must be C x H x W, got " + shape_str(featuremap.shape));
    const std::size_t channels = featuremap.dim(0), h = featuremap.dim(1),
                      w = featuremap.dim(2);
    const std::size_t plane = h * w;
    Tensor heat({h, w});
    for (std::size_t c = 0; c < channels; ++c) {
        // channel weight: global average pool over the gradient plane
        double alpha = 0.0;
        const double* gp = featuremap.grad.data() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) alpha += gp[i];
        alpha /= static_cast<double>(plane);
        const double* ap = featuremap.values.data() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) heat.values[i] += alpha * ap[i];
    }
    for (double& v : heat.values) v = v > 0.0 ? v : 0.0;
    return heat;
}

Tensor compute_conv_heatmap(const Model& cnn, const PaddedSample& sample,
                            std::size_t class_index) {
    require(cnn.spec.kind == ModelKind::cnn,
            "grad-cam needs a cnn model, got " + std::string(to_string(cnn.spec.kind)));
    require(class_index < 2, "class index must be 0 or 1");
    CnnContext ctx;
    cnn_forward(cnn, sample_grid(sample), &ctx);
    cnn_backward_to_featuremap(cnn, ctx, class_index);
    return heatmap_from_featuremap(cnn_last_conv(ctx));
}

Tensor upsample_bilinear(const Tensor& src, std::size_t out_h, std::size_t out_w) {
    require(src.rank() == 2, "upsample_bilinear expects a 2-d map, got " + shape_str(src.shape));
    const std::size_t h = src.dim(0), w = src.dim(1);
    require(out_h >= h && out_w >= w,
            "upsample target " + std::to_string(out_h) + "x" + std::to_string(out_w) +
                " smaller than source " + shape_str(src.shape));
    Tensor out({out_h, out_w});
    const double ry = out_h > 1 ? static_cast<double>(h - 1) / static_cast<double>(out_h - 1) : 0.0;
    const double rx = out_w > 1 ? static_cast<double>(w - 1) / static_cast<double>(out_w - 1) : 0.0;
    for (std::size_t y = 0; y < out_h; ++y) {
        const double sy = ry * static_cast<double>(y);
        const std::size_t y0 = std::min(static_cast<std::size_t>(sy), h - 1);
        const std::size_t y1 = std::min(y0 + 1, h - 1);
        const double fy = sy - static_cast<double>(y0);
        for (std::size_t x = 0; x < out_w; ++x) {
            const double sx = rx * static_cast<double>(x);
            const std::size_t x0 = std::min(static_cast<std::size_t>(sx), w - 1);
            const std::size_t x1 = std::min(x0 + 1, w - 1);
            const double fx = sx - static_cast<double>(x0);
            // lerp form keeps constants exact and results nonnegative
            const double top = src.at(y0, x0) + fx * (src.at(y0, x1) - src.at(y0, x0));
            const double bot = src.at(y1, x0) + fx * (src.at(y1, x1) - src.at(y1, x0));
            out.at(y, x) = top + fy * (bot - top);
        }
    }
    return out;
}

Tensor joint_importance(const Tensor& input_heatmap, std::size_t joints) {
    require(input_heatmap.rank() == 2, "joint_importance expects a 2-d heatmap");
    require(input_heatmap.dim(1) == 3 * joints,
            "heatmap width " + std::to_string(input_heatmap.dim(1)) + " != 3 * " +
                std::to_string(joints) + " joints");
    const std::size_t frames = input_heatmap.dim(0);
    Tensor scores({frames, joints});
    for (std::size_t f = 0; f < frames; ++f) {
        for (std::size_t j = 0; j < joints; ++j) {
            const double x = input_heatmap.at(f, 3 * j);
            const double y = input_heatmap.at(f, 3 * j + 1);
            const double z = input_heatmap.at(f, 3 * j + 2);
            scores.at(f, j) = std::max(x, std::max(y, z));
        }
    }
    return scores;
}

std::vector<std::vector<std::size_t>> top_k_joints(const Tensor& joint_scores, std::size_t k) {
    require(joint_scores.rank() == 2, "top_k_joints expects frames x joints scores");
    const std::size_t frames = joint_scores.dim(0), joints = joint_scores.dim(1);
    require(k >= 1 && k <= joints,
            "k = " + std::to_string(k) + " out of range for " + std::to_string(joints) +
                " joints");
    std::vector<std::vector<std::size_t>> top(frames);
    std::vector<std::size_t> idx(joints);
    for (std::size_t f = 0; f < frames; ++f) {
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return joint_scores.at(f, a) > joint_scores.at(f, b);
        });
        top[f].assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    }
    return top;
}

GradCamResult grad_cam(const Model& cnn, const PaddedSample& sample,
                       std::optional<std::size_t> class_index, std::size_t k) {
    GradCamResult result;
    result.joint_count = sample.joint_count;
    result.frames = sample.rows;
    result.original_length = sample.original_length;
    const std::vector<double> logits = model_logits(cnn, sample);
    result.predicted_class = logits[1] > logits[0] ? 1 : 0;
    result.class_index = class_index.value_or(result.predicted_class);
    result.conv_heatmap = compute_conv_heatmap(cnn, sample, result.class_index);
    result.input_heatmap = upsample_bilinear(result.conv_heatmap, sample.rows, sample.width());
    result.joint_scores = joint_importance(result.input_heatmap, sample.joint_count);
    result.top_joints = top_k_joints(result.joint_scores, k);
    return result;
}

void export_result(const GradCamResult& result, const std::filesystem::path& dir) {
    require(result.frames > 0 && !result.top_joints.empty(),
            "grad-cam result has no frames to export");
    std::filesystem::create_directories(dir);

    std::ofstream heat(dir / "heatmap.csv");
    if (!heat) throw std::runtime_error("i/o error: cannot write " + (dir / "heatmap.csv").string());
    const std::size_t cols = result.input_heatmap.dim(1);
    for (std::size_t f = 0; f < result.frames; ++f) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c) heat << ',';
            heat << format_double(result.input_heatmap.at(f, c));
        }
        heat << '\n';
    }
    if (!heat) throw std::runtime_error("i/o error while writing heatmap.csv");

    std::ofstream top(dir / "top_joints.txt");
    if (!top) throw std::runtime_error("i/o error: cannot write " + (dir / "top_joints.txt").string());
    for (std::size_t f = 0; f < result.top_joints.size(); ++f) {
        top << f << ':';
        for (std::size_t j : result.top_joints[f]) top << ' ' << j;
        if (f >= result.original_length) top << "  # padded";
        top << '\n';
    }
    if (!top) throw std::runtime_error("i/o error while writing top_joints.txt");
}

Tensor read_heatmap_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("i/o error: cannot read " + path.string());
    std::vector<double> values;
    std::size_t rows = 0, cols = 0;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        std::size_t row_cols = 0;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc()) {
                throw std::runtime_error("heatmap parse error: bad number '" + cell + "'");
            }
            values.push_back(v);
            ++row_cols;
        }
        if (rows == 0) {
            cols = row_cols;
        } else if (row_cols != cols) {
            throw std::runtime_error("heatmap parse error: ragged rows");
        }
        ++rows;
    }
    require(rows > 0 && cols > 0, "empty heatmap file");
    return Tensor({rows, cols}, std::move(values));
}

std::vector<HighlightLine> read_highlights(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("i/o error: cannot read " + path.string());
    std::vector<HighlightLine> lines;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        HighlightLine hl;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) {
            hl.padded = line.find("padded", hash) != std::string::npos;
            line = line.substr(0, hash);
        }
        const std::size_t colon = line.find(':');
        if (colon == std::string::npos) {
            throw std::runtime_error("highlight parse error: missing ':' in '" + line + "'");
        }
        hl.frame = std::stoul(line.substr(0, colon));
        std::istringstream ss(line.substr(colon + 1));
        std::size_t j = 0;
        while (ss >> j) hl.joints.push_back(j);
        lines.push_back(std::move(hl));
    }
    return lines;
}

}  // namespace skelsign
