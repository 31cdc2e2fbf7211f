#include "skelsign/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "skelsign/rng.hpp"

namespace skelsign {

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::fc: return "fc";
        case ModelKind::cnn: return "cnn";
        case ModelKind::lstm: return "lstm";
        case ModelKind::autoencoder: return "autoencoder";
    }
    return "?";
}

std::optional<ModelKind> parse_model_kind(std::string_view text) {
    if (text == "fc") return ModelKind::fc;
    if (text == "cnn") return ModelKind::cnn;
    if (text == "lstm") return ModelKind::lstm;
    if (text == "autoencoder") return ModelKind::autoencoder;
    return std::nullopt;
}

std::vector<ConvStageShape> conv_stack_shapes(const ModelSpec& spec) {
    std::vector<ConvStageShape> shapes;
    std::size_t h = spec.max_frames, w = spec.input_width();
    for (std::size_t c : spec.conv_channels) {
        ConvStageShape s;
        s.channels = c;
        s.conv_h = h;  // 3x3, stride 1, pad 1 preserves the spatial size
        s.conv_w = w;
        require(h >= 2 && w >= 2,
                "conv stack spatial size collapsed to " + std::to_string(h) + "x" +
                    std::to_string(w) + " before stage " + std::to_string(shapes.size() + 1) +
                    "; reduce conv layers or enlarge the input");
        s.pool_h = h / 2;
        s.pool_w = w / 2;
        shapes.push_back(s);
        h = s.pool_h;
        w = s.pool_w;
    }
    return shapes;
}

void validate_spec(const ModelSpec& spec) {
    require(spec.max_frames >= 1 && spec.joints >= 1,
            "model input geometry must be positive");
    if (spec.kind == ModelKind::fc) {
        require(!spec.fc_widths.empty(), "fc model needs at least one hidden width");
        for (std::size_t wdt : spec.fc_widths) require(wdt >= 1, "fc widths must be positive");
    }
    if (spec.kind == ModelKind::cnn || spec.kind == ModelKind::autoencoder) {
        require(!spec.conv_channels.empty(), "conv stack needs at least one layer");
        for (std::size_t c : spec.conv_channels) {
            require(c >= 1, "conv channel counts must be positive");
        }
        conv_stack_shapes(spec);  // throws if the geometry collapses
        if (spec.kind == ModelKind::cnn) {
            require(spec.head_width >= 1, "cnn head width must be positive");
        }
    }
    if (spec.kind == ModelKind::lstm) {
        require(spec.lstm_hidden >= 1, "lstm hidden size must be positive");
    }
}

Tensor& Model::param(std::string_view name) {
    for (Param& p : params) {
        if (p.name == name) return p.tensor;
    }
    throw std::invalid_argument("no parameter named '" + std::string(name) + "' in " +
                                std::string(to_string(spec.kind)) + " model");
}

const Tensor& Model::param(std::string_view name) const {
    return const_cast<Model*>(this)->param(name);
}

bool Model::has_param(std::string_view name) const {
    return std::any_of(params.begin(), params.end(),
                       [&](const Param& p) { return p.name == name; });
}

void Model::zero_grads() {
    for (Param& p : params) p.tensor.zero_grad();
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (const Param& p : params) n += p.tensor.numel();
    return n;
}

namespace {

constexpr std::size_t kClasses = 2;

void glorot_fill(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : t.values) v = rng.uniform(-a, a);
}

void add_linear(Model& m, const std::string& stem, std::size_t in, std::size_t out, Rng& rng) {
    Param w{stem + ".w", Tensor({in, out})};
    glorot_fill(w.tensor, in, out, rng);
    m.params.push_back(std::move(w));
    m.params.push_back(Param{stem + ".b", Tensor({out})});
}

void add_conv(Model& m, const std::string& stem, std::size_t in_ch, std::size_t out_ch,
              Rng& rng) {
    Param w{stem + ".w", Tensor({out_ch, in_ch, 3, 3})};
    glorot_fill(w.tensor, in_ch * 9, out_ch * 9, rng);
    m.params.push_back(std::move(w));
    m.params.push_back(Param{stem + ".b", Tensor({out_ch})});
}

}  // namespace

Model build_model(const ModelSpec& spec) {
    validate_spec(spec);
    Model m;
    m.spec = spec;
    Rng rng(mix_seed(spec.seed, 0xC0DE));
    switch (spec.kind) {
        case ModelKind::fc: {
            std::vector<std::size_t> widths;
            widths.push_back(spec.flat_size());
            widths.insert(widths.end(), spec.fc_widths.begin(), spec.fc_widths.end());
            widths.push_back(kClasses);
            for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
                add_linear(m, "fc" + std::to_string(i + 1), widths[i], widths[i + 1], rng);
            }
            break;
        }
        case ModelKind::cnn: {
            const auto shapes = conv_stack_shapes(spec);
            std::size_t in_ch = 1;
            for (std::size_t i = 0; i < spec.conv_channels.size(); ++i) {
                add_conv(m, "conv" + std::to_string(i + 1), in_ch, spec.conv_channels[i], rng);
                in_ch = spec.conv_channels[i];
            }
            const ConvStageShape& last = shapes.back();
            const std::size_t flat = last.channels * last.pool_h * last.pool_w;
            add_linear(m, "head1", flat, spec.head_width, rng);
            add_linear(m, "head2", spec.head_width, kClasses, rng);
            break;
        }
        case ModelKind::lstm: {
            const std::size_t d = spec.input_width(), hs = spec.lstm_hidden;
            Param w{"lstm.w", Tensor({d + hs, 4 * hs})};
            glorot_fill(w.tensor, d + hs, 4 * hs, rng);
            m.params.push_back(std::move(w));
            m.params.push_back(Param{"lstm.b", Tensor({4 * hs})});
            add_linear(m, "head", hs, kClasses, rng);
            break;
        }
        case ModelKind::autoencoder: {
            const std::size_t stages = spec.conv_channels.size();
            std::size_t in_ch = 1;
            for (std::size_t i = 0; i < stages; ++i) {
                add_conv(m, "enc_conv" + std::to_string(i + 1), in_ch, spec.conv_channels[i],
                         rng);
                in_ch = spec.conv_channels[i];
            }
            for (std::size_t j = 0; j < stages; ++j) {
                const std::size_t dec_in = spec.conv_channels[stages - 1 - j];
                const std::size_t dec_out =
                    j + 1 == stages ? 1 : spec.conv_channels[stages - 2 - j];
                add_conv(m, "dec_conv" + std::to_string(j + 1), dec_in, dec_out, rng);
            }
            break;
        }
    }
    return m;
}

// ------------------------------------------------------- forward passes ----

std::vector<double> fc_forward(const Model& model, std::span<const double> flat,
                               FcContext* ctx) {
    require(model.spec.kind == ModelKind::fc, "fc_forward on a non-fc model");
    require(flat.size() == model.spec.flat_size(),
            "fc input length " + std::to_string(flat.size()) + " != expected " +
                std::to_string(model.spec.flat_size()));
    FcContext local;
    FcContext& c = ctx ? *ctx : local;
    c.input = Tensor({1, flat.size()}, std::vector<double>(flat.begin(), flat.end()));
    c.pre.clear();
    c.act.clear();
    const std::size_t layers = model.spec.fc_widths.size() + 1;
    const Tensor* cur = &c.input;
    for (std::size_t i = 0; i < layers; ++i) {
        const std::string stem = "fc" + std::to_string(i + 1);
        c.pre.push_back(linear(*cur, model.param(stem + ".w"), &model.param(stem + ".b")));
        if (i + 1 < layers) {
            c.act.push_back(relu(c.pre.back()));
            cur = &c.act.back();
        }
    }
    return c.pre.back().values;
}

void fc_backward(Model& model, FcContext& ctx, std::span<const double> dlogits) {
    const std::size_t layers = model.spec.fc_widths.size() + 1;
    require(dlogits.size() == kClasses, "fc_backward expects a 2-logit gradient");
    std::copy(dlogits.begin(), dlogits.end(), ctx.pre.back().grad.begin());
    for (std::size_t i = layers; i-- > 0;) {
        const std::string stem = "fc" + std::to_string(i + 1);
        Tensor& in = i == 0 ? ctx.input : ctx.act[i - 1];
        linear_backward(in, model.param(stem + ".w"), &model.param(stem + ".b"), ctx.pre[i]);
        if (i > 0) {
            relu_backward(ctx.pre[i - 1], ctx.act[i - 1]);
        }
    }
}

std::vector<double> cnn_forward(const Model& model, const Tensor& grid, CnnContext* ctx) {
    require(model.spec.kind == ModelKind::cnn, "cnn_forward on a non-cnn model");
    require(grid.rank() == 3 && grid.dim(0) == 1 && grid.dim(1) == model.spec.max_frames &&
                grid.dim(2) == model.spec.input_width(),
            "cnn input shape " + shape_str(grid.shape) + " != expected (1x" +
                std::to_string(model.spec.max_frames) + "x" +
                std::to_string(model.spec.input_width()) + ")");
    CnnContext local;
    CnnContext& c = ctx ? *ctx : local;
    c.input = grid;
    c.input.zero_grad();
    c.conv_out.clear();
    c.relu_out.clear();
    c.pool_out.clear();
    const std::size_t stages = model.spec.conv_channels.size();
    const Tensor* cur = &c.input;
    for (std::size_t i = 0; i < stages; ++i) {
        const std::string stem = "conv" + std::to_string(i + 1);
        c.conv_out.push_back(
            conv2d(*cur, model.param(stem + ".w"), model.param(stem + ".b"), 1, 1));
        c.relu_out.push_back(relu(c.conv_out.back()));
        c.pool_out.push_back(max_pool2d(c.relu_out.back(), 2, 2));
        cur = &c.pool_out.back();
    }
    c.flat = Tensor({1, cur->numel()}, cur->values);
    c.head_pre = linear(c.flat, model.param("head1.w"), &model.param("head1.b"));
    c.head_act = relu(c.head_pre);
    c.logits = linear(c.head_act, model.param("head2.w"), &model.param("head2.b"));
    return c.logits.values;
}

namespace {

// Shared by training backward (with parameter grads) and the featuremap-only
// path used for attribution (parameters untouched).
void cnn_head_backward(const Model& model, CnnContext& ctx, std::span<const double> dlogits,
                       bool param_grads) {
    std::copy(dlogits.begin(), dlogits.end(), ctx.logits.grad.begin());
    Model& m = const_cast<Model&>(model);
    if (param_grads) {
        linear_backward(ctx.head_act, m.param("head2.w"), &m.param("head2.b"), ctx.logits);
    } else {
        linear_backward_input(ctx.head_act, model.param("head2.w"), ctx.logits);
    }
    relu_backward(ctx.head_pre, ctx.head_act);
    if (param_grads) {
        linear_backward(ctx.flat, m.param("head1.w"), &m.param("head1.b"), ctx.head_pre);
    } else {
        linear_backward_input(ctx.flat, model.param("head1.w"), ctx.head_pre);
    }
    // flat is a reshaped view of the last pool output
    std::copy(ctx.flat.grad.begin(), ctx.flat.grad.end(), ctx.pool_out.back().grad.begin());
    max_pool2d_backward(ctx.relu_out.back(), ctx.pool_out.back(), 2, 2);
}

}  // namespace

void cnn_backward(Model& model, CnnContext& ctx, std::span<const double> dlogits) {
    require(dlogits.size() == kClasses, "cnn_backward expects a 2-logit gradient");
    cnn_head_backward(model, ctx, dlogits, true);
    const std::size_t stages = model.spec.conv_channels.size();
    for (std::size_t i = stages; i-- > 0;) {
        const std::string stem = "conv" + std::to_string(i + 1);
        relu_backward(ctx.conv_out[i], ctx.relu_out[i]);
        Tensor& in = i == 0 ? ctx.input : ctx.pool_out[i - 1];
        conv2d_backward(in, model.param(stem + ".w"), model.param(stem + ".b"),
                        ctx.conv_out[i], 1, 1);
        if (i > 0) {
            max_pool2d_backward(ctx.relu_out[i - 1], ctx.pool_out[i - 1], 2, 2);
        }
    }
}

const Tensor& cnn_last_conv(const CnnContext& ctx) {
    require(!ctx.relu_out.empty(), "context has no conv activations; run cnn_forward first");
    return ctx.relu_out.back();
}

void cnn_backward_to_featuremap(const Model& model, CnnContext& ctx, std::size_t class_index) {
    require(class_index < kClasses, "class index out of range");
    std::vector<double> dlogits(kClasses, 0.0);
    dlogits[class_index] = 1.0;
    cnn_head_backward(model, ctx, dlogits, false);
}

std::vector<double> lstm_model_forward(const Model& model, const Tensor& frames,
                                       LstmContext* ctx) {
    require(model.spec.kind == ModelKind::lstm, "lstm_model_forward on a non-lstm model");
    require(frames.rank() == 2 && frames.dim(0) == model.spec.max_frames &&
                frames.dim(1) == model.spec.input_width(),
            "lstm input shape " + shape_str(frames.shape) + " != expected (" +
                std::to_string(model.spec.max_frames) + "x" +
                std::to_string(model.spec.input_width()) + ")");
    LstmContext local;
    LstmContext& c = ctx ? *ctx : local;
    // The classifier reads the final hidden state, so the sequence is scanned
    // last row first: any all-zero padding tail passes through the cell before
    // the real frames instead of sitting between them and the readout.
    c.frames = Tensor(frames.shape);
    const std::size_t steps = frames.dim(0), width = frames.dim(1);
    for (std::size_t t = 0; t < steps; ++t) {
        std::copy(frames.values.begin() + (steps - 1 - t) * width,
                  frames.values.begin() + (steps - t) * width,
                  c.frames.values.begin() + t * width);
    }
    Model& m = const_cast<Model&>(model);
    const LstmWeights wts{&m.param("lstm.w"), &m.param("lstm.b"), model.spec.input_width(),
                          model.spec.lstm_hidden};
    const LstmState final_state = lstm_forward(c.frames, wts, &c.cache);
    c.final_hidden = Tensor({1, model.spec.lstm_hidden}, final_state.hidden);
    c.logits = linear(c.final_hidden, model.param("head.w"), &model.param("head.b"));
    return c.logits.values;
}

void lstm_model_backward(Model& model, LstmContext& ctx, std::span<const double> dlogits) {
    require(dlogits.size() == kClasses, "lstm_model_backward expects a 2-logit gradient");
    std::copy(dlogits.begin(), dlogits.end(), ctx.logits.grad.begin());
    linear_backward(ctx.final_hidden, model.param("head.w"), &model.param("head.b"),
                    ctx.logits);
    LstmWeights wts{&model.param("lstm.w"), &model.param("lstm.b"), model.spec.input_width(),
                    model.spec.lstm_hidden};
    lstm_backward(ctx.frames, wts, ctx.cache, ctx.final_hidden.grad, false);
}

AutoencoderOut autoencoder_forward(const Model& model, const Tensor& grid,
                                   AutoencoderContext* ctx) {
    require(model.spec.kind == ModelKind::autoencoder,
            "autoencoder_forward on a non-autoencoder model");
    require(grid.rank() == 3 && grid.dim(0) == 1 && grid.dim(1) == model.spec.max_frames &&
                grid.dim(2) == model.spec.input_width(),
            "autoencoder input shape " + shape_str(grid.shape) + " != expected (1x" +
                std::to_string(model.spec.max_frames) + "x" +
                std::to_string(model.spec.input_width()) + ")");
    AutoencoderContext local;
    AutoencoderContext& c = ctx ? *ctx : local;
    c.input = grid;
    c.input.zero_grad();
    c.enc_conv_out.clear();
    c.enc_relu_out.clear();
    c.enc_pool_out.clear();
    c.dec_up_out.clear();
    c.dec_conv_out.clear();
    c.dec_relu_out.clear();

    const auto shapes = conv_stack_shapes(model.spec);
    const std::size_t stages = shapes.size();
    const Tensor* cur = &c.input;
    for (std::size_t i = 0; i < stages; ++i) {
        const std::string stem = "enc_conv" + std::to_string(i + 1);
        c.enc_conv_out.push_back(
            conv2d(*cur, model.param(stem + ".w"), model.param(stem + ".b"), 1, 1));
        c.enc_relu_out.push_back(relu(c.enc_conv_out.back()));
        c.enc_pool_out.push_back(max_pool2d(c.enc_relu_out.back(), 2, 2));
        cur = &c.enc_pool_out.back();
    }
    for (std::size_t j = 0; j < stages; ++j) {
        const ConvStageShape& target = shapes[stages - 1 - j];
        c.dec_up_out.push_back(upsample_nearest(*cur, target.conv_h, target.conv_w));
        const std::string stem = "dec_conv" + std::to_string(j + 1);
        c.dec_conv_out.push_back(conv2d(c.dec_up_out.back(), model.param(stem + ".w"),
                                        model.param(stem + ".b"), 1, 1));
        if (j + 1 < stages) {
            c.dec_relu_out.push_back(relu(c.dec_conv_out.back()));
            cur = &c.dec_relu_out.back();
        } else {
            cur = &c.dec_conv_out.back();  // final reconstruction stays linear
        }
    }
    AutoencoderOut out;
    out.reconstruction = c.dec_conv_out.back();
    out.latent = c.enc_pool_out.back().values;
    return out;
}

void autoencoder_backward(Model& model, AutoencoderContext& ctx,
                          std::span<const double> dlatent) {
    const std::size_t stages = model.spec.conv_channels.size();
    require(!ctx.dec_conv_out.empty(), "autoencoder_backward without a forward context");
    for (std::size_t j = stages; j-- > 0;) {
        const std::string stem = "dec_conv" + std::to_string(j + 1);
        if (j + 1 < stages) {
            relu_backward(ctx.dec_conv_out[j], ctx.dec_relu_out[j]);
        }
        conv2d_backward(ctx.dec_up_out[j], model.param(stem + ".w"), model.param(stem + ".b"),
                        ctx.dec_conv_out[j], 1, 1);
        Tensor& below = j == 0 ? ctx.enc_pool_out.back() : ctx.dec_relu_out[j - 1];
        upsample_nearest_backward(below, ctx.dec_up_out[j]);
    }
    if (!dlatent.empty()) {
        Tensor& latent = ctx.enc_pool_out.back();
        require(dlatent.size() == latent.numel(), "dlatent length mismatch");
        for (std::size_t i = 0; i < dlatent.size(); ++i) latent.grad[i] += dlatent[i];
    }
    for (std::size_t i = stages; i-- > 0;) {
        const std::string stem = "enc_conv" + std::to_string(i + 1);
        max_pool2d_backward(ctx.enc_relu_out[i], ctx.enc_pool_out[i], 2, 2);
        relu_backward(ctx.enc_conv_out[i], ctx.enc_relu_out[i]);
        Tensor& in = i == 0 ? ctx.input : ctx.enc_pool_out[i - 1];
        conv2d_backward(in, model.param(stem + ".w"), model.param(stem + ".b"),
                        ctx.enc_conv_out[i], 1, 1);
    }
}

Model extract_encoder(const Model& autoencoder, std::uint64_t head_seed) {
    require(autoencoder.spec.kind == ModelKind::autoencoder,
            "extract_encoder expects an autoencoder, got " +
                std::string(to_string(autoencoder.spec.kind)));
    ModelSpec spec = autoencoder.spec;
    spec.kind = ModelKind::cnn;
    spec.seed = head_seed;
    Model cnn = build_model(spec);
    for (std::size_t i = 0; i < spec.conv_channels.size(); ++i) {
        const std::string enc = "enc_conv" + std::to_string(i + 1);
        const std::string dst = "conv" + std::to_string(i + 1);
        cnn.param(dst + ".w").values = autoencoder.param(enc + ".w").values;
        cnn.param(dst + ".b").values = autoencoder.param(enc + ".b").values;
    }
    return cnn;
}

// ------------------------------------------------------------- sample io ---

Tensor sample_grid(const PaddedSample& sample) {
    return Tensor({1, sample.rows, sample.width()}, sample.grid);
}

Tensor sample_rows(const PaddedSample& sample) {
    return Tensor({sample.rows, sample.width()}, sample.grid);
}

std::vector<double> model_logits(const Model& model, const PaddedSample& sample) {
    switch (model.spec.kind) {
        case ModelKind::fc: return fc_forward(model, flatten(sample));
        case ModelKind::cnn: return cnn_forward(model, sample_grid(sample));
        case ModelKind::lstm: return lstm_model_forward(model, sample_rows(sample));
        case ModelKind::autoencoder:
            throw std::invalid_argument("autoencoder has no classification logits");
    }
    throw std::invalid_argument("unknown model kind");
}

// ------------------------------------------------------------ checkpoint ---

namespace {

constexpr char kMagic[4] = {'S', 'K', 'M', '1'};

template <typename T>
void write_pod(std::ostream& os, const T& value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is) throw std::runtime_error("checkpoint truncated");
    return value;
}

void write_u64_vec(std::ostream& os, const std::vector<std::size_t>& v) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(v.size()));
    for (std::size_t x : v) write_pod<std::uint64_t>(os, x);
}

std::vector<std::size_t> read_u64_vec(std::istream& is) {
    const auto n = read_pod<std::uint32_t>(is);
    std::vector<std::size_t> v(n);
    for (auto& x : v) x = static_cast<std::size_t>(read_pod<std::uint64_t>(is));
    return v;
}

}  // namespace

void save_model(const Model& model, const std::filesystem::path& path) {
    static_assert(std::endian::native == std::endian::little,
                  "checkpoint format assumes little-endian");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("i/o error: cannot write " + path.string());
    os.write(kMagic, 4);
    write_pod<std::uint32_t>(os, 1);  // version
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(model.spec.kind));
    write_pod<std::uint64_t>(os, model.spec.max_frames);
    write_pod<std::uint64_t>(os, model.spec.joints);
    write_pod<std::uint64_t>(os, model.spec.head_width);
    write_pod<std::uint64_t>(os, model.spec.lstm_hidden);
    write_pod<std::uint64_t>(os, model.spec.seed);
    write_u64_vec(os, model.spec.fc_widths);
    write_u64_vec(os, model.spec.conv_channels);
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(model.params.size()));
    for (const Param& p : model.params) {
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(p.name.size()));
        os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        write_u64_vec(os, p.tensor.shape);
        os.write(reinterpret_cast<const char*>(p.tensor.values.data()),
                 static_cast<std::streamsize>(p.tensor.values.size() * sizeof(double)));
    }
    if (!os) throw std::runtime_error("i/o error while writing " + path.string());
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("i/o error: cannot read " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("not a model checkpoint: " + path.string());
    }
    const auto version = read_pod<std::uint32_t>(is);
    if (version != 1) {
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    }
    ModelSpec spec;
    spec.kind = static_cast<ModelKind>(read_pod<std::uint32_t>(is));
    spec.max_frames = static_cast<std::size_t>(read_pod<std::uint64_t>(is));
    spec.joints = static_cast<std::size_t>(read_pod<std::uint64_t>(is));
    spec.head_width = static_cast<std::size_t>(read_pod<std::uint64_t>(is));
    spec.lstm_hidden = static_cast<std::size_t>(read_pod<std::uint64_t>(is));
    spec.seed = read_pod<std::uint64_t>(is);
    spec.fc_widths = read_u64_vec(is);
    spec.conv_channels = read_u64_vec(is);

    Model model = build_model(spec);  // validates the layout
    const auto count = read_pod<std::uint32_t>(is);
    if (count != model.params.size()) {
        throw std::runtime_error("checkpoint parameter count mismatch in " + path.string());
    }
    for (Param& p : model.params) {
        const auto name_len = read_pod<std::uint32_t>(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        const std::vector<std::size_t> shape = read_u64_vec(is);
        if (name != p.name || shape != p.tensor.shape) {
            throw std::runtime_error("checkpoint layout mismatch at parameter '" + name + "'");
        }
        is.read(reinterpret_cast<char*>(p.tensor.values.data()),
                static_cast<std::streamsize>(p.tensor.values.size() * sizeof(double)));
        if (!is) throw std::runtime_error("checkpoint truncated at parameter '" + name + "'");
    }
    return model;
}

}  // namespace skelsign
