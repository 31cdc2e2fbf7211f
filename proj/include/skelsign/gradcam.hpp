#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "skelsign/models.hpp"

namespace skelsign {

// Class-attribution output for one sample. Heatmaps are nonnegative
// everywhere; top_joints holds k distinct joint indices per frame, sorted by
// descending score (ties toward the lower index).
struct GradCamResult {
    std::size_t class_index = 0;
    std::size_t predicted_class = 0;
    std::size_t joint_count = 0;
    std::size_t frames = 0;
    std::size_t original_length = 0;  // frames at index >= this are padding
    Tensor conv_heatmap;              // H' x W', last conv layer resolution
    Tensor input_heatmap;             // frames x 3*joints
    Tensor joint_scores;              // frames x joints
    std::vector<std::vector<std::size_t>> top_joints;
};

// Channel weights = globally averaged gradients of the selected class logit
// w.r.t. the last conv featuremaps; heatmap = relu(weighted featuremap sum).
Tensor compute_conv_heatmap(const Model& cnn, const PaddedSample& sample,
                            std::size_t class_index);

// The weighting step alone: reads featuremap.grad, pools it per channel into
// the weights, returns relu of the weighted channel sum.
Tensor heatmap_from_featuremap(const Tensor& featuremap);

// Bilinear, corner-aligned; exactly preserves constant maps and nonnegativity.
Tensor upsample_bilinear(const Tensor& src, std::size_t out_h, std::size_t out_w);

// score[f][j] = max over the joint's three coordinate columns
Tensor joint_importance(const Tensor& input_heatmap, std::size_t joints);

// Per frame: indices of the k largest scores, descending, ties toward the
// lower index. Throws when k > joint count.
std::vector<std::vector<std::size_t>> top_k_joints(const Tensor& joint_scores, std::size_t k);

// Full pipeline. class_index defaults to the model's predicted class.
GradCamResult grad_cam(const Model& cnn, const PaddedSample& sample,
                       std::optional<std::size_t> class_index = std::nullopt,
                       std::size_t k = 10);

// Writes heatmap.csv (frames x 3*joints) and top_joints.txt
// (`frame: j1 j2 ... jk`, padded frames flagged with `# padded`).
void export_result(const GradCamResult& result, const std::filesystem::path& dir);

// Read-back halves of the export round trip.
Tensor read_heatmap_csv(const std::filesystem::path& path);
struct HighlightLine {
    std::size_t frame = 0;
    std::vector<std::size_t> joints;
    bool padded = false;
};
std::vector<HighlightLine> read_highlights(const std::filesystem::path& path);

}  // namespace skelsign
