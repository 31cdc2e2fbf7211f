#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skelsign/data.hpp"
#include "skelsign/ops.hpp"

namespace skelsign {

enum class ModelKind { fc, cnn, lstm, autoencoder };

const char* to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view text);

// Geometry and hyperparameters of one model. Defaults match the full-size
// gesture classifiers; tests shrink them for gradient checking.
struct ModelSpec {
    ModelKind kind = ModelKind::fc;
    std::size_t max_frames = 100;  // padded sequence length (input rows)
    std::size_t joints = 79;
    std::vector<std::size_t> fc_widths = {256, 64};      // hidden widths, fc
    std::vector<std::size_t> conv_channels = {8, 16, 32};  // conv stack, cnn/autoencoder
    std::size_t head_width = 64;   // dense hidden width of the cnn head
    std::size_t lstm_hidden = 128;
    std::uint64_t seed = 0;

    std::size_t input_width() const { return 3 * joints; }   // columns
    std::size_t flat_size() const { return max_frames * input_width(); }
};

void validate_spec(const ModelSpec& spec);  // throws std::invalid_argument

// Shape of each conv stage: after the conv (h, w) and after its 2x2 pool.
struct ConvStageShape {
    std::size_t channels = 0;
    std::size_t conv_h = 0, conv_w = 0;
    std::size_t pool_h = 0, pool_w = 0;
};
std::vector<ConvStageShape> conv_stack_shapes(const ModelSpec& spec);

struct Param {
    std::string name;
    Tensor tensor;
};

struct Model {
    ModelSpec spec;
    std::vector<Param> params;

    Tensor& param(std::string_view name);
    const Tensor& param(std::string_view name) const;
    bool has_param(std::string_view name) const;
    void zero_grads();
    std::size_t parameter_count() const;
};

// Deterministic from spec.seed: weights uniform(-a, a) with
// a = sqrt(6 / (fan_in + fan_out)), biases zero.
Model build_model(const ModelSpec& spec);

// ------------------------------------------------------- forward passes ----
// Contexts own the per-invocation activations (and their gradient buffers),
// so forwards are pure with respect to the model.

struct FcContext {
    Tensor input;             // 1 x flat
    std::vector<Tensor> pre;  // linear outputs, one per layer
    std::vector<Tensor> act;  // relu outputs between layers
};
std::vector<double> fc_forward(const Model& model, std::span<const double> flat,
                               FcContext* ctx = nullptr);
void fc_backward(Model& model, FcContext& ctx, std::span<const double> dlogits);

struct CnnContext {
    Tensor input;  // 1 x rows x width
    std::vector<Tensor> conv_out;
    std::vector<Tensor> relu_out;  // last entry is the grad-cam featuremap
    std::vector<Tensor> pool_out;
    Tensor flat;      // 1 x F
    Tensor head_pre;  // 1 x head_width
    Tensor head_act;
    Tensor logits;    // 1 x 2
};
std::vector<double> cnn_forward(const Model& model, const Tensor& grid,
                                CnnContext* ctx = nullptr);
void cnn_backward(Model& model, CnnContext& ctx, std::span<const double> dlogits);
// Activation feature maps of the last conv layer (post-relu, pre-pool).
const Tensor& cnn_last_conv(const CnnContext& ctx);
// Backpropagates d(logit[class_index]) down to the last conv featuremap only;
// model parameters are left untouched.
void cnn_backward_to_featuremap(const Model& model, CnnContext& ctx, std::size_t class_index);

struct LstmContext {
    Tensor frames;  // T x width
    LstmSequenceCache cache;
    Tensor final_hidden;  // 1 x hidden
    Tensor logits;        // 1 x 2
};
std::vector<double> lstm_model_forward(const Model& model, const Tensor& frames,
                                       LstmContext* ctx = nullptr);
void lstm_model_backward(Model& model, LstmContext& ctx, std::span<const double> dlogits);

struct AutoencoderContext {
    Tensor input;
    std::vector<Tensor> enc_conv_out, enc_relu_out, enc_pool_out;
    std::vector<Tensor> dec_up_out, dec_conv_out, dec_relu_out;
    Tensor reconstruction;  // alias of the last decoder conv output
};
struct AutoencoderOut {
    Tensor reconstruction;        // same shape as the input grid
    std::vector<double> latent;   // encoder output, flattened
};
AutoencoderOut autoencoder_forward(const Model& model, const Tensor& grid,
                                   AutoencoderContext* ctx = nullptr);
// Reads the reconstruction gradient from ctx.dec_conv_out.back().grad (e.g.
// filled by mse_loss_backward); dlatent (optional, may be empty) adds a
// gradient on the flattened encoder output.
void autoencoder_backward(Model& model, AutoencoderContext& ctx,
                          std::span<const double> dlatent);

// Conv weights copied bit-for-bit from the autoencoder's encoder; the
// classification head is freshly initialized from head_seed. Not frozen.
Model extract_encoder(const Model& autoencoder, std::uint64_t head_seed);

// ------------------------------------------------------------- sample io ---

// Model input built from a padded sample (flat vector / 1xHxW grid / TxW rows).
Tensor sample_grid(const PaddedSample& sample);
Tensor sample_rows(const PaddedSample& sample);
// Logits for a sample, dispatching on the model kind.
std::vector<double> model_logits(const Model& model, const PaddedSample& sample);

// ------------------------------------------------------------ checkpoint ---

// Binary container; save -> load round-trips bit-exactly.
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace skelsign
